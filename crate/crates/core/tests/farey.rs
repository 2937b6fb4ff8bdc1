use std::collections::HashSet;

use glab_core::farey::*;
use glab_core::topology::{w, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s(x: &str) -> Slope {
    x.parse().unwrap()
}

fn tri(a: &str, b: &str, c: &str) -> FareyTriangle {
    FareyTriangle::new(s(a), s(b), s(c)).unwrap()
}

#[test]
fn slopes_parse_and_print() {
    for x in ["0", "1", "-1", "3/5", "-2/7", "inf"] {
        assert_eq!(s(x).to_string(), x);
    }
    assert_eq!(s("4/-6"), s("-2/3"));
    assert_eq!(Slope::new(-1, 0).unwrap(), Slope::INF);
    assert!("0/0".parse::<Slope>().is_err());
    let t = tri("0", "1", "inf");
    let j = serde_json::to_string(&t).unwrap();
    assert_eq!(j, r#"["0","1","inf"]"#);
    assert_eq!(serde_json::from_str::<FareyTriangle>(&j).unwrap(), t);
    assert!(serde_json::from_str::<FareyTriangle>(r#"["0","2","inf"]"#).is_err());
}

#[test]
fn exchanges() {
    let t = tri("0", "1", "inf");
    assert_eq!(t.diagonal_exchange((s("0"), s("1"))).unwrap(), tri("0", "1", "1/2"));
    assert_eq!(t.diagonal_exchange((s("0"), s("inf"))).unwrap(), tri("0", "inf", "-1"));
    assert!(t.diagonal_exchange((s("0"), s("1/2"))).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cur = t;
    for _ in 0..60 {
        let sl = cur.slopes();
        let k = rng.gen_range(0..3);
        let e = (sl[k], sl[(k + 1) % 3]);
        let next = cur.diagonal_exchange(e).unwrap();
        assert_eq!(next.diagonal_exchange(e).unwrap(), cur);
        for (i, a) in next.slopes().iter().enumerate() {
            for b in &next.slopes()[i + 1..] {
                assert_eq!(a.omega(b).abs(), 1);
            }
        }
        cur = next;
    }
}

#[test]
fn twists_as_exchange_paths() {
    let t = tri("0", "1", "inf");
    let path = twist_as_exchanges(&t, &s("0"), 1, FareyCase::Torus).unwrap();
    // oracle: (p, q) ↦ (p, q + p) on every slope
    let image = t.map(|x| Slope::new(x.p(), x.q() + x.p()).unwrap()).unwrap();
    assert_eq!(path.last().unwrap().to, image);
    assert_eq!(image, tri("0", "1/2", "1"));
    assert_eq!(path.len(), 1);
    let sphere = twist_as_exchanges(&t, &s("0"), 1, FareyCase::Sphere).unwrap();
    assert_eq!(sphere.len(), 2);
    assert_eq!(sphere[1].to, t.map(|x| Slope::new(x.p(), x.q() + 2 * x.p()).unwrap()).unwrap());
    assert!(twist_as_exchanges(&t, &s("0"), 0, FareyCase::Torus).unwrap().is_empty());
    assert_eq!(twist_as_exchanges(&t, &s("0"), -1, FareyCase::Torus), Err(FareyError::LeftTwistsOnly));
    assert!(twist_as_exchanges(&t, &s("1/2"), 1, FareyCase::Torus).is_err());
    let inf = twist_as_exchanges(&t, &Slope::INF, 3, FareyCase::Torus).unwrap();
    assert_eq!(inf.last().unwrap().to, t.map(|x| Slope::new(x.p() - 3 * x.q(), x.q()).unwrap()).unwrap());
    for e in &inf {
        assert!(e.from.contains(&Slope::INF) && e.to.contains(&Slope::INF));
    }
}

#[test]
fn interpolation_torus_example() {
    let spec = LaminationSeqSpec::torus(1, Slope::ZERO, Slope::INF);
    let path = interpolation_path(&spec, -2, 2).unwrap();
    let got: Vec<FareyTriangle> = path.values().copied().collect();
    // hand enumeration of the dual-tree geodesic
    let expect = vec![
        tri("0", "1/3", "1/2"),
        tri("0", "1/2", "1"),
        tri("0", "1", "inf"),
        tri("-1", "0", "inf"),
        tri("-2", "-1", "inf"),
    ];
    assert_eq!(got, expect);
    assert!(path[&0].contains(&Slope::ZERO) && path[&0].contains(&Slope::INF));
    for (a, b) in got.iter().zip(&got[1..]) {
        assert!(a.shared_edge(b).is_some());
    }
    assert_eq!(got.iter().collect::<HashSet<_>>().len(), 5);
    assert_eq!(interpolation_path(&spec, 0, 0).unwrap().len(), 1);
    let mut bad = spec.clone();
    bad.end = Slope::ZERO;
    assert_eq!(interpolation_path(&bad, -1, 1), Err(FareyError::EqualEnds));
}

#[test]
fn interpolation_symmetry_and_periodicity() {
    for case in [FareyCase::Torus, FareyCase::Sphere] {
        for (a, b) in [("0", "inf"), ("1/2", "1"), ("-3/4", "-1")] {
            let mut spec = LaminationSeqSpec::torus(1, s(a), s(b));
            spec.case = case;
            let p = interpolation_path(&spec, -6, 6).unwrap();
            let q = interpolation_path(&spec.swapped(), -6, 6).unwrap();
            for j in -6..=6 {
                assert_eq!(p[&j], q[&-j]);
            }
            let steps = case.steps_per_twist() as i64;
            for j in steps..=6 {
                let back = p[&(j - steps)];
                assert_eq!(p[&j], back.map(|x| twist_slope(case, &spec.end, &x, 1)).unwrap());
            }
            for j in -6..=-steps {
                let back = p[&(j + steps)];
                assert_eq!(p[&j], back.map(|x| twist_slope(case, &spec.start, &x, 1)).unwrap());
            }
        }
    }
}

#[test]
fn companion_arc_counts() {
    let spec = LaminationSeqSpec::torus(1, Slope::ZERO, Slope::INF);
    for j in [-3, 0, 5] {
        let n = companion_multiloop(&spec, j).unwrap();
        assert!(n.arcs_per_pants().iter().all(|&c| c == 9));
        assert_eq!(n.inside, interpolation_path(&spec, j.min(0), j.max(0)).unwrap()[&j]);
    }
    let base = companion_multiloop(&spec, 0).unwrap();
    assert_eq!(base.exterior, companion_multiloop(&spec, 7).unwrap().exterior);
    let mut sphere = spec.clone();
    sphere.case = FareyCase::Sphere;
    assert!(companion_multiloop(&sphere, 2).unwrap().arcs_per_pants().iter().all(|&c| c == 6));
}

fn commutator(g: &Word, h: &Word) -> Word {
    g.mul(h).mul(&g.inverse()).mul(&h.inverse())
}

#[test]
fn basis_words_have_right_classes_and_commutator() {
    let k = w("a1 b1 A1 B1");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut t = FareyTriangle::standard();
    for _ in 0..24 {
        let sl = t.slopes();
        let i = rng.gen_range(0..3);
        t = t.diagonal_exchange((sl[i], sl[(i + 1) % 3])).unwrap();
        let sl = t.slopes();
        let (g, h) = basis_words(&sl[0], &sl[1], 1).unwrap();
        assert_eq!(commutator(&g, &h), k, "{} {}", sl[0], sl[1]);
        for (word, slope) in [(&g, sl[0]), (&h, sl[1])] {
            let hom = word.homology(2);
            let (p, q) = slope.vector();
            assert!((hom[0], hom[1]) == (q, p) || (hom[0], hom[1]) == (-q, -p));
        }
        let sw = slope_word(&sl[2], 1);
        let hom = sw.homology(2);
        let (p, q) = sl[2].vector();
        assert!((hom[0], hom[1]) == (q, p) || (hom[0], hom[1]) == (-q, -p));
    }
}

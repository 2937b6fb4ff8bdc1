use glab_core::geometry::MobiusKind;
use glab_core::holonomy::*;
use glab_core::topology::*;
use glab_core::{Mobius, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn base() -> HolonomyRep {
    build_from_fn(&FnCoordinates::genus2([2.0, 2.0, 2.0], [0.0, 0.0, 0.0])).unwrap()
}

fn c(s: &str) -> CurveClass {
    CurveClass::parse(s, 2).unwrap()
}

fn tr2(r: &HolonomyRep, w: &Word) -> f64 {
    let m = r.eval(w);
    (m.trace() * m.trace()).re
}

fn random_fn(rng: &mut ChaCha8Rng) -> FnCoordinates {
    let l = [rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0), rng.gen_range(0.5..4.0)];
    let t = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
    FnCoordinates::genus2(l, t)
}

#[test]
fn fn_grid_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..10 {
        let f = random_fn(&mut rng);
        let r = build_from_fn(&f).unwrap();
        assert!(r.relator_residual() < 1e-8);
        assert!(r.is_fuchsian() && r.lifts_to_sl2());
        for (curve, l) in reference_curves().iter().zip(&f.lengths) {
            assert!((r.geodesic_length(curve).unwrap() - l).abs() < 1e-8);
            assert!((r.geodesic_length(&curve.inverse()).unwrap() - l).abs() < 1e-8);
        }
        let sq = c("a1 a1");
        assert!((r.geodesic_length(&sq).unwrap() - 2.0 * f.lengths[0]).abs() < 1e-9);
    }
}

#[test]
fn fn_rejects_bad_input() {
    assert!(build_from_fn(&FnCoordinates::genus2([0.0, 1.0, 1.0], [0.0; 3])).is_err());
    let mut f = FnCoordinates::genus2([1.0, 1.0, 1.0], [0.0; 3]);
    f.lengths.push(1.0);
    assert!(matches!(build_from_fn(&f), Err(HolonomyError::Shape(_))));
    assert!(matches!(build_from_fn(&FnCoordinates::genus2([1.0, 1.0, 1e-12], [0.0; 3])), Err(HolonomyError::DegenerateHexagon(_))));
}

#[test]
fn length_from_trace() {
    // tr 2.5 ↦ 2 arccosh(1.25) = 2 ln 2
    let m = Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
    assert!((m.trace().re - 2.5).abs() < 1e-15);
    assert!((m.translation_length().unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn full_twist_is_a_dehn_twist() {
    let f = FnCoordinates::genus2([2.0, 1.5, 2.5], [0.3, -0.2, 0.1]);
    let r = build_from_fn(&f).unwrap();
    let words: Vec<Word> = Word::ball(2, 3).into_iter().skip(1).collect();
    for (k, curve) in reference_curves().iter().enumerate() {
        let mut g = f.clone();
        g.twists[k] += f.lengths[k];
        let r2 = build_from_fn(&g).unwrap();
        assert!(r2.generators() != r.generators());
        for (p, q) in reference_curves().iter().map(|x| (r.geodesic_length(x).unwrap(), r2.geodesic_length(x).unwrap())) {
            assert!((p - q).abs() < 1e-9);
        }
        let t = TwistCurve::recognise(curve).unwrap().automorphism(2, 1);
        for x in &words {
            let (a, b) = (tr2(&r2, x), tr2(&r, &x.substitute(&t)));
            assert!((a - b).abs() < 1e-7 * (1.0 + a), "{curve} {x}: {a} {b}");
        }
    }
}

#[test]
fn scan_certifies_standard_surface() {
    let r = base();
    let rep = purely_loxodromic_scan(&r, 6);
    assert!(rep.certified, "{:?}", rep.violations.first());
    assert!(rep.violations.is_empty() && rep.endpoint_violations.is_empty());
    assert!(rep.words_classified > 10000);
    assert!(rep.min_commutator_margin.unwrap() > 1e-9);
}

#[test]
fn scan_detects_shared_fixed_point() {
    // both fix 0; direct product: tr[A,B] = 2 for any upper or lower triangular pair
    let a = Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
    let b = Mobius::from_real(3.0, 0.0, 1.0, 1.0 / 3.0).unwrap();
    let direct = a * b * a.inverse() * b.inverse();
    assert!((direct.trace() - C64::new(2.0, 0.0)).norm() < 1e-12);
    assert!((commutator_trace(&a, &b) - C64::new(2.0, 0.0)).norm() < 1e-9);
    let r = HolonomyRep::unchecked(1, vec![a, b]).unwrap();
    let rep = purely_loxodromic_scan(&r, 2);
    assert!(!rep.certified);
    let v = rep.endpoint_violations.iter().find(|v| v.first == w("a1") && v.second == w("b1")).expect("pair (a1, b1) flagged");
    assert!((v.commutator_trace[0] - 2.0).abs() < 1e-9 && v.commutator_trace[1].abs() < 1e-9);
}

#[test]
fn scan_flags_parabolic_generator() {
    let mut gens = base().generators().to_vec();
    gens[0] = Mobius::translation(C64::new(1.0, 0.0));
    let r = HolonomyRep::unchecked(2, gens).unwrap();
    let rep = purely_loxodromic_scan(&r, 1);
    assert!(!rep.certified);
    assert!(rep.violations.iter().any(|v| v.word == w("a1") && v.kind == MobiusKind::Parabolic));
}

#[test]
fn intersection_examples() {
    let r = base();
    let one = |x: &str, y: &str| intersection_count(&r, &c(x), &c(y), DEFAULT_BALL).unwrap();
    assert_eq!(one("a1", "b1").count, 1);
    assert_eq!(one("a2", "b2").count, 1);
    for (x, y) in [("a1", "a2"), ("a1", "a1 b1 A1 B1"), ("a2", "a1 b1 A1 B1"), ("b1", "b2")] {
        let rr = one(x, y);
        assert_eq!(rr.count, 0, "{x} {y}");
        assert!(rr.stable);
    }
    let selfie = one("a1", "a1");
    assert_eq!(selfie.count, 0);
    assert!(selfie.parallel);
    assert_eq!(one("a1 b1 a1 b1", "a1").count, 2);
    assert_eq!(self_intersections(&r, &c("b1 a2"), DEFAULT_BALL).unwrap().0, 1);
    assert!(is_simple(&r, &c("a1 b1 A1 B1"), DEFAULT_BALL).unwrap());
    assert!(is_parallel(&r, &c("a1"), &c("A1"), DEFAULT_BALL).unwrap());
    assert!(!is_parallel(&r, &c("a1"), &c("a2"), DEFAULT_BALL).unwrap());
}

#[test]
fn handle_angle_matches_deep_oracle() {
    // ball-8 axis-crossing oracle: a single crossing at a right angle
    const THETA: f64 = 1.5707963267948961;
    let r = base();
    let rep = intersection_count(&r, &c("a1"), &c("b1"), DEFAULT_BALL).unwrap();
    assert_eq!(rep.count, 1);
    assert!((rep.max_angle() - THETA).abs() < 1e-12);
}

#[test]
fn twist_image_crosses_once() {
    let r = base();
    let img = dehn_twist(&c("a1"), &c("b1"), 1).unwrap();
    assert_eq!(img, c("b1 a1"));
    assert_eq!(intersection_count(&r, &img, &c("a1"), DEFAULT_BALL).unwrap().count, 1);
}

#[test]
fn conjugation_invariance() {
    let r = build_from_fn(&FnCoordinates::genus2([1.7, 2.3, 2.9], [0.4, 0.1, -0.3])).unwrap();
    let g = Mobius::from_real(1.3, 0.4, -0.7, 0.55).unwrap();
    let g = Mobius::new(g.a(), g.b(), g.c(), g.d()).unwrap();
    let s = r.conjugated(&g);
    for x in ["a1", "b1 a2", "a1 b1 A2", "a1 b1 A1 B1"] {
        let (l1, l2) = (r.geodesic_length(&c(x)).unwrap(), s.geodesic_length(&c(x)).unwrap());
        assert!((l1 - l2).abs() < 1e-8);
    }
    for (x, y) in [("a1", "b1"), ("b1 a2", "a1"), ("a1 b1", "b1")] {
        let (p, q) = (
            intersection_count(&r, &c(x), &c(y), 2).unwrap(),
            intersection_count(&s, &c(x), &c(y), 2).unwrap(),
        );
        assert_eq!(p.count, q.count);
        assert!((p.max_angle() - q.max_angle()).abs() < 1e-8);
    }
    let (p, q) = (purely_loxodromic_scan(&r, 4), purely_loxodromic_scan(&s, 4));
    assert_eq!(p.certified, q.certified);
    assert_eq!(p.words_classified, q.words_classified);
}

#[test]
fn rep_json_roundtrip() {
    let r = base();
    let j = serde_json::to_string(&r).unwrap();
    assert!(j.contains("\"a1\"") && j.contains("\"b2\""));
    let back: HolonomyRep = serde_json::from_str(&j).unwrap();
    for (x, y) in back.generators().iter().zip(r.generators()) {
        assert!(x.distance(y) < 1e-14);
    }
    let f: FnCoordinates = serde_json::from_str(r#"{"decomposition":"g2-standard","lengths":[2,2,2],"twists":[0,0,0]}"#).unwrap();
    assert_eq!(f, FnCoordinates::genus2([2.0; 3], [0.0; 3]));
}

#[test]
fn earthquake_twist_matches_word_twist() {
    let rep = build_from_fn(&FnCoordinates::genus2([2.0, 2.3, 1.7], [0.3, -0.2, 0.5])).unwrap();
    let cases = [("a1", "b1"), ("b1", "a1"), ("b2", "a2"), ("a1 b1 A1 B1", "b1 a2"), ("a1", "b1 a2 b2"), ("b2", "a1 b2 a2")];
    for (t, x) in cases {
        for m in [1, 2, -1] {
            let geo = geometric_dehn_twist(&rep, &c(t), &c(x), m, DEFAULT_BALL).unwrap();
            let word = dehn_twist(&c(t), &c(x), m).unwrap();
            let (lg, lw) = (rep.geodesic_length(&geo).unwrap(), rep.geodesic_length(&word).unwrap());
            assert!((lg - lw).abs() < 1e-8 * lw, "{t} {x} {m}: {geo} vs {word}");
            assert_eq!(geo.homology(), word.homology());
        }
    }
    assert_eq!(geometric_dehn_twist(&rep, &c("a1"), &c("a2"), 3, DEFAULT_BALL).unwrap(), c("a2"));
    let lifts = crossing_lifts(&rep, &c("b1"), &c("a1"), DEFAULT_BALL).unwrap();
    assert_eq!(lifts.len(), 1);
}

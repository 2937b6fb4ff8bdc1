use glab_core::holonomy::{build_from_fn, intersection_count, FnCoordinates, HolonomyRep, DEFAULT_BALL};
use glab_core::topology::*;

fn base() -> HolonomyRep {
    build_from_fn(&FnCoordinates::genus2([2.0, 2.0, 2.0], [0.0, 0.0, 0.0])).unwrap()
}

fn c(s: &str) -> CurveClass {
    CurveClass::parse(s, 2).unwrap()
}

#[test]
fn words_and_curves() {
    let p = SurfacePresentation::new(2).unwrap();
    assert_eq!(p.relator(), w("a1 b1 A1 B1 a2 b2 A2 B2"));
    assert!(SurfacePresentation::new(1).is_err());
    assert_eq!(w("a1 A1 b2").to_string(), "b2");
    assert_eq!(w("a1B1a2"), w("a1 B1 a2"));
    assert!("a3x".parse::<Word>().is_err());
    let k = c("b1 a1 b1 A1 B1 B1");
    assert_eq!(k.word(), &w("a1 b1 A1 B1"));
    assert!(k.is_separating());
    assert!(!c("a1 b2").is_separating());
    assert!(CurveClass::parse("a1 A1", 2).is_err());
    assert!(CurveClass::parse("a3", 2).is_err());
    let j = serde_json::to_string(&c("a1 B1 a2")).unwrap();
    assert_eq!(j, "\"a1 B1 a2\"");
    assert_eq!(serde_json::from_str::<CurveClass>(&j).unwrap(), c("a1 B1 a2"));
}

#[test]
fn validate_examples() {
    let mut cat = CurveCatalog::new(&base()).unwrap();
    let std = PantsDecomposition::standard_g2();
    let cert = validate_pants_decomposition(&std, &mut cat);
    assert!(cert.valid, "{:?}", cert.violations);
    assert_eq!(cert.dual_graph.unwrap().pants.len(), 2);
    let two = PantsDecomposition::parse(2, &["a1", "a2"]).unwrap();
    let cert = validate_pants_decomposition(&two, &mut cat);
    assert!(matches!(cert.violations[0], Violation::Count { expected: 3, found: 2 }));
    let rep = PantsDecomposition::parse(2, &["a1", "a2", "A1"]).unwrap();
    let cert = validate_pants_decomposition(&rep, &mut cat);
    assert!(cert.violations.iter().any(|v| matches!(v, Violation::Parallel { .. })));
    let crossing = PantsDecomposition::parse(2, &["a1", "b1", "a2"]).unwrap();
    let cert = validate_pants_decomposition(&crossing, &mut cat);
    assert!(cert.violations.iter().any(|v| matches!(v, Violation::Intersect { crossings: 1, .. })));
    let theta = PantsDecomposition::parse(2, &["a1", "a2", "a1 a2"]).unwrap();
    let cert = validate_pants_decomposition(&theta, &mut cat);
    assert!(cert.valid, "{:?}", cert.violations);
    assert_eq!(cert.dual_graph.unwrap().pants, vec![[0, 1, 2], [0, 1, 2]]);
    let json = serde_json::to_string(&validate_pants_decomposition(&two, &mut cat)).unwrap();
    assert!(json.contains("\"kind\":\"count\""));
}

#[test]
fn elementary_moves() {
    let r = base();
    let mut cat = CurveCatalog::new(&r).unwrap();
    let p = PantsDecomposition::standard_g2();
    let torus = enumerate_elementary_moves(&p, &c("a1"), 4, &mut cat).unwrap();
    assert!(torus.iter().any(|m| m.added == c("b1")));
    let sphere = enumerate_elementary_moves(&p, &c("a1 b1 A1 B1"), 4, &mut cat).unwrap();
    assert!(!sphere.is_empty());
    for (moves, case) in [(&torus, MoveCase::OneHoledTorus), (&sphere, MoveCase::FourHoledSphere)] {
        for m in moves.iter() {
            assert_eq!(m.case, case);
            let n = intersection_count(&r, &m.removed, &m.added, DEFAULT_BALL).unwrap();
            assert_eq!(n.count, case.crossings());
            let q = apply_move(&p, m, &mut cat).unwrap();
            assert!(validate_pants_decomposition(&q, &mut cat).valid);
            let back = apply_move(&q, &m.reversed(), &mut cat).unwrap();
            assert!(same_decomposition(&back, &p, &mut cat).unwrap());
        }
    }
    assert!(enumerate_elementary_moves(&p, &c("a1"), 0, &mut cat).unwrap().is_empty());
    assert!(matches!(enumerate_elementary_moves(&p, &c("b1"), 3, &mut cat), Err(TopologyError::NotMember(_))));
}

fn replay(p0: &PantsDecomposition, path: &[ElementaryMove], cat: &mut CurveCatalog) -> PantsDecomposition {
    path.iter().fold(p0.clone(), |p, m| apply_move(&p, m, cat).unwrap())
}

#[test]
fn pants_paths() {
    let mut cat = CurveCatalog::new(&base()).unwrap();
    let p0 = PantsDecomposition::standard_g2();
    let cap = PathCap { depth: 3, word_length: 3 };
    assert!(pants_graph_path(&p0, &p0, cap, &mut cat).unwrap().is_empty());
    let one = PantsDecomposition::parse(2, &["b1", "a2", "a1 b1 A1 B1"]).unwrap();
    let path = pants_graph_path(&p0, &one, cap, &mut cat).unwrap();
    assert_eq!(path.len(), 1);
    // exhaustive BFS at word length 3 gives distance 2 when both handles change
    let both = PantsDecomposition::parse(2, &["b1", "b2", "a1 b1 A1 B1"]).unwrap();
    let path = pants_graph_path(&p0, &both, cap, &mut cat).unwrap();
    assert_eq!(path.len(), 2);
    assert!(same_decomposition(&replay(&p0, &path, &mut cat), &both, &mut cat).unwrap());
    let theta = PantsDecomposition::parse(2, &["a1", "a2", "a1 a2"]).unwrap();
    let path = pants_graph_path(&p0, &theta, cap, &mut cat).unwrap();
    assert_eq!(path.len(), 1);
    assert_eq!(path[0].case, MoveCase::FourHoledSphere);
    let tight = PathCap { depth: 1, word_length: 3 };
    assert!(matches!(pants_graph_path(&p0, &both, tight, &mut cat), Err(TopologyError::CapExhausted(_))));
}

#[test]
fn twists() {
    let r = base();
    assert_eq!(dehn_twist(&c("a1"), &c("b1 a2"), 0).unwrap(), c("b1 a2"));
    // disjoint curves are fixed
    for (t, x) in [("a1", "a2"), ("a1", "b2 a2"), ("b2", "a1 b1"), ("a1 b1 A1 B1", "a2 b2")] {
        assert_eq!(dehn_twist(&c(t), &c(x), 3).unwrap(), c(x), "{t} {x}");
    }
    assert_eq!(dehn_twist(&c("a1"), &c("b1"), 1).unwrap(), c("b1 a1"));
    assert_eq!(dehn_twist(&c("b1 A1 B1 a1"), &c("a1"), 1).unwrap(), dehn_twist(&c("a1 b1 A1 B1"), &c("a1"), 1).unwrap());
    assert_eq!(dehn_twist(&c("a1 a2"), &c("b1"), 1), Err(TopologyError::TwistBasis));
    // additivity, witnessed by intersections with a spanning set
    let span: Vec<CurveClass> = ["a1", "b1", "a2", "b2", "a1 b1", "a2 b2", "a1 a2"].iter().map(|s| c(s)).collect();
    for t in ["a1", "b1", "a1 b1 A1 B1"] {
        let x = c("b1 a2");
        let two = dehn_twist(&c(t), &dehn_twist(&c(t), &x, 1).unwrap(), 1).unwrap();
        let direct = dehn_twist(&c(t), &x, 2).unwrap();
        assert_eq!(two, direct);
        let back = dehn_twist(&c(t), &direct, -2).unwrap();
        assert_eq!(back, x);
        for y in &span {
            let (p, q) = (
                intersection_count(&r, &two, y, DEFAULT_BALL).unwrap().count,
                intersection_count(&r, &direct, y, DEFAULT_BALL).unwrap().count,
            );
            assert_eq!(p, q);
        }
    }
    // homology action matches the word action
    for t in [TwistCurve::A(1), TwistCurve::B(2), TwistCurve::Waist] {
        let x = c("b1 a2 a1 B2");
        let img = dehn_twist(&t.curve(2), &x, 1).unwrap();
        assert_eq!(img.homology(), t.homology_action(2, &x.homology()));
    }
}

#[test]
fn train_tracks() {
    let t = TrainTrack::standard(2);
    assert!(t.is_trivalent());
    let Carrying::Carried(cert) = t.carries(&[]) else { panic!() };
    assert!(cert.weights.iter().all(|&w| w == 0));
    let Carrying::Carried(cert) = t.carries(&[(c("a1"), 1)]) else { panic!() };
    assert_eq!(cert.weights, vec![1, 0, 1, 0, 0, 0]);
    assert!(matches!(t.carries(&[(c("a1 B1"), 1)]), Carrying::NotCarried { .. }));
    // Twⁿ_{a1}(b1 + b2): weights linear in n, checked against letter counting
    let mut prev: Option<Vec<u64>> = None;
    let mut diff: Option<Vec<i64>> = None;
    for n in 0..=5 {
        let m = vec![(dehn_twist(&c("a1"), &c("b1"), n).unwrap(), 2), (c("b2"), 1)];
        let Carrying::Carried(cert) = t.carries(&m) else { panic!("n = {n}") };
        assert!(t.switch_conditions_hold(&cert.weights));
        assert_eq!(Some(cert.weights.clone()), standard_weights_by_counting(2, &m));
        if let Some(p) = &prev {
            let d: Vec<i64> = cert.weights.iter().zip(p).map(|(a, b)| *a as i64 - *b as i64).collect();
            if let Some(d0) = &diff {
                assert_eq!(&d, d0);
            }
            diff = Some(d);
        }
        prev = Some(cert.weights);
    }
    assert_eq!(diff.unwrap(), vec![2, 0, 2, 0, 0, 0]);
}

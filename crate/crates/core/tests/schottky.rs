use glab_core::holonomy::{build_from_fn, stable_intersection, FnCoordinates, HolonomyRep};
use glab_core::lamination::{MeasuredLamination, TwistLimit, Weight};
use glab_core::schottky::*;
use glab_core::topology::{algebraic_intersection, dehn_twist, w, CurveClass};
use glab_core::{Mobius, Point, C64};

fn c(s: &str) -> CurveClass {
    CurveClass::new(w(s), 2).unwrap()
}

fn fuchsian() -> HolonomyRep {
    build_from_fn(&FnCoordinates::genus2([2.0; 3], [0.0; 3])).unwrap()
}

fn rotation(t: f64) -> Mobius {
    Mobius::from_real(t.cos(), t.sin(), -t.sin(), t.cos()).unwrap()
}

fn artificial() -> HolonomyRep {
    // [b, a] = [a, b]⁻¹ closes the relator
    let e = rotation(0.5);
    let l = Mobius::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
    HolonomyRep::new(2, vec![e, l, l, e]).unwrap()
}

fn tr_sq(m: &Mobius) -> C64 {
    let e = m.entries();
    (e[0] + e[3]) * (e[0] + e[3])
}

// tr of A B A⁻¹ B⁻¹ by explicit 2×2 products
fn commutator_tr(a: &Mobius, b: &Mobius) -> C64 {
    let mul = |x: [C64; 4], y: [C64; 4]| [x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]];
    let inv = |x: [C64; 4]| [x[3], -x[1], -x[2], x[0]];
    let (x, y) = (a.entries(), b.entries());
    let p = mul(mul(mul(x, y), inv(x)), inv(y));
    p[0] + p[3]
}

#[test]
fn standard_handle() {
    let rho = fuchsian();
    let h = find_handle(&rho, &c("a1"), &HandleCaps::default()).unwrap();
    assert_eq!(h.a, c("a1"));
    assert_eq!(h.b.word().unoriented_key(), w("b1").unoriented_key());
    assert_eq!((h.q, h.form, h.replaced_seed.clone()), (0, HandleForm::SeedFirst, None));
    let cert = &h.certificate;
    assert!(cert.passed(), "{:?}", cert.failures);
    assert_eq!(cert.intersection, Some(1));
    assert_eq!(algebraic_intersection(&h.a.homology(), &h.b.homology()).abs(), 1);
    let (ma, mb) = (rho.eval(&w("a1")), rho.eval(h.b.word()));
    for (t, m) in [(cert.trace_sq[0], ma), (cert.trace_sq[1], mb)] {
        let d = tr_sq(&m);
        assert!((t[0] - d.re).abs() < 1e-12 && d.re > 4.0);
    }
    let ct = commutator_tr(&ma, &mb);
    assert!((cert.commutator_trace[0] - ct.re).abs() < 1e-9 && (ct - C64::new(2.0, 0.0)).norm() > 1.0);
    let again = verify_handle(&rho, &h.a, &h.b).unwrap();
    assert_eq!(&again, cert);
}

#[test]
fn separating_seed_is_replaced() {
    let rho = fuchsian();
    let s = c("a1 b1 A1 B1");
    let h = find_handle(&rho, &s, &HandleCaps::default()).unwrap();
    assert_eq!(h.replaced_seed, Some(s.clone()));
    assert!(!h.a.is_separating());
    assert_eq!(stable_intersection(&rho, &h.a, &s, 3, 5).unwrap().count, 0);
    assert!(h.certificate.passed());
}

#[test]
fn elliptic_seed() {
    let rho = artificial();
    assert!(rho.curve(&c("a1")).classify().kind != glab_core::geometry::MobiusKind::Loxodromic);
    let h = find_handle(&rho, &c("a1"), &HandleCaps::default()).unwrap();
    assert_ne!(h.q, 0);
    assert!(verify_handle(&rho, &h.a, &h.b).unwrap().passed());
    match find_handle(&rho, &c("a1"), &HandleCaps { max_q: 0, ..HandleCaps::default() }) {
        Err(SchottkyError::HandleCaps(cert)) => assert!(cert.failures.iter().any(|f| f.contains("not loxodromic"))),
        other => panic!("{other:?}"),
    }
}

#[test]
fn modified_handles() {
    let rho = fuchsian();
    for q in [-3i64, -2, -1, 1, 2, 3] {
        let a = c("a1").word().mul(&w("b1").pow(q));
        let first = verify_handle(&rho, &CurveClass::new(a.clone(), 2).unwrap(), &c("b1")).unwrap();
        assert!(first.passed(), "q = {q}: {:?}", first.failures);
        let second = verify_handle(&rho, &c("b1"), &CurveClass::new(a, 2).unwrap()).unwrap();
        assert!(second.passed(), "q = {q}: {:?}", second.failures);
    }
}

#[test]
fn decomposition_loop() {
    let rho = fuchsian();
    let h = find_handle(&rho, &c("a1"), &HandleCaps::default()).unwrap();
    // base of the search: the path y b x
    let d = build_decomposition_loop(&rho, &h, &c("a2"), &c("b2"), &LoopCaps::default()).unwrap();
    assert_eq!((d.k, d.n), (0, 1));
    assert_eq!(d.curve.word().unoriented_key(), w("b1 b2 a2").unoriented_key());
    for caps in [LoopCaps::default(), LoopCaps { n_min: 2, ..LoopCaps::default() }] {
        let d = build_decomposition_loop(&rho, &h, &c("a2"), &c("b2"), &caps).unwrap();
        let ba = CurveClass::new(w("b1").mul(&w("a1").pow(d.k)), 2).unwrap();
        assert_eq!(stable_intersection(&rho, &d.curve, &ba, 3, 5).unwrap().count, 0);
        assert_eq!(stable_intersection(&rho, &d.curve, &d.curve, 3, 5).unwrap().count, 0);
        let t = tr_sq(&rho.eval(d.curve.word()));
        assert!(t.re > 4.0 + 1.0 && t.im.abs() < 1e-9);
        assert!((d.trace_sq[0] - t.re).abs() < 1e-9 * t.re);
        assert!(d.loxodromic_margin > 1.0);
    }
    assert!(matches!(build_decomposition_loop(&rho, &h, &c("a1 a2"), &c("b2"), &LoopCaps::default()), Err(SchottkyError::Precondition(_))));
}

// Stereographic image, own implementation.
fn sphere(p: &Point) -> [f64; 3] {
    match p.finite() {
        None => [0.0, 0.0, 1.0],
        Some(z) => {
            let d = 1.0 + z.norm_sqr();
            [2.0 * z.re / d, 2.0 * z.im / d, (z.norm_sqr() - 1.0) / d]
        }
    }
}

fn ang(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0).acos()
}

fn point(v: [f64; 3]) -> Point {
    if v[2] > 1.0 - 1e-15 {
        Point::Infinity
    } else {
        Point::Finite(C64::new(v[0], v[1]) / (1.0 - v[2]))
    }
}

// Sample the boundary of each minus disk, push it through g, and check it
// lands inside the plus disk; check disk separation directly.
fn sampled_check(cert: &SchottkyCertificate) {
    let all: Vec<SphereCap> = cert.disks.iter().flat_map(|d| [d.minus, d.plus]).collect();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            assert!(ang(sphere(&all[i].center), sphere(&all[j].center)) > all[i].radius + all[j].radius);
        }
    }
    for (g, d) in cert.generators.iter().zip(&cert.disks) {
        let n = sphere(&d.minus.center);
        let u = {
            let e = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
            let k = e[0] * n[0] + e[1] * n[1] + e[2] * n[2];
            let v = [e[0] - k * n[0], e[1] - k * n[1], e[2] - k * n[2]];
            let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            [v[0] / l, v[1] / l, v[2] / l]
        };
        let v = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]];
        for k in 0..720 {
            let phi = k as f64 * std::f64::consts::PI / 360.0;
            let (cr, sr) = (d.minus.radius.cos(), d.minus.radius.sin());
            let p = [0, 1, 2].map(|i| cr * n[i] + sr * (phi.cos() * u[i] + phi.sin() * v[i]));
            let img = sphere(&g.apply(&point(p)));
            assert!(ang(img, sphere(&d.plus.center)) < d.plus.radius);
        }
        // a point outside minus lands inside plus
        let far = [-n[0], -n[1], -n[2]];
        assert!(ang(sphere(&g.apply(&point(far))), sphere(&d.plus.center)) < d.plus.radius);
    }
}

#[test]
fn classical_schottky_pair() {
    let g = Mobius::diag(C64::new(4.0, 0.0));
    // 0 ↦ 1, ∞ ↦ 2
    let m = Mobius::from_real(2.0, 1.0, 1.0, 1.0).unwrap();
    let h = g.conjugate_by(&m);
    let fp = h.fixed_points().unwrap();
    assert!(matches!(fp, glab_core::geometry::FixedPoints::Two(p, q) if p.chordal(&Point::real(2.0)) < 1e-12 && q.chordal(&Point::real(1.0)) < 1e-12));
    let cert = ping_pong_certify(&[g, h], &PingPongCaps::default());
    assert!(cert.certified, "{:?}", cert.failure);
    let v = cert.verification.clone().unwrap();
    assert!(v.positive());
    assert!((v.disjointness_margin - cert.disjointness_margin).abs() < 1e-8);
    for (a, b) in v.mapping_margins.iter().zip(&cert.mapping_margins) {
        assert!((a - b).abs() < 1e-8);
    }
    sampled_check(&cert);
    let text = serde_json::to_string(&cert).unwrap();
    let back: SchottkyCertificate = serde_json::from_str(&text).unwrap();
    assert!(verify_certificate(&back).positive());
    assert_eq!(serde_json::to_string(&ping_pong_certify(&[g, h], &PingPongCaps::default())).unwrap(), text);
}

#[test]
fn elliptic_generator_fails() {
    let cert = ping_pong_certify(&[Mobius::diag(C64::new(2.0, 0.0)), rotation(0.3)], &PingPongCaps::default());
    assert!(!cert.certified);
    assert!(cert.failure.unwrap().contains("not loxodromic"));
}

#[test]
fn cyclic_schottky() {
    let cert = ping_pong_certify(&[Mobius::diag(C64::new(2.0, 0.0))], &PingPongCaps::default());
    assert!(cert.certified, "{:?}", cert.failure);
    let d = cert.disks[0];
    assert!(d.minus.contains(&Point::real(0.0)) && d.plus.contains(&Point::Infinity));
    assert!(d.minus.center.chordal(&Point::real(0.0)) < 1e-12 && d.plus.center.chordal(&Point::Infinity) < 1e-12);
    sampled_check(&cert);
}

#[test]
fn fuchsian_pants_subgroup() {
    let rho = fuchsian();
    let gens = [rho.eval(&w("a1")), rho.eval(&w("b1 A1 B1"))];
    let cert = ping_pong_certify(&gens, &PingPongCaps::default());
    assert!(cert.certified, "{:?}", cert.failure);
    assert!(verify_certificate(&cert).positive());
    sampled_check(&cert);
}

#[test]
fn tampered_certificate_fails_verification() {
    let g = Mobius::diag(C64::new(4.0, 0.0));
    let h = g.conjugate_by(&Mobius::from_real(2.0, 1.0, 1.0, 1.0).unwrap());
    let mut cert = ping_pong_certify(&[g, h], &PingPongCaps::default());
    cert.disks[0].plus.radius *= 0.2;
    assert!(!verify_certificate(&cert).positive());
}

fn vector_oracle(m: &[(CurveClass, f64)]) -> Vec<f64> {
    let rho = fuchsian();
    let bat = battery();
    bat.iter()
        .map(|b| {
            m.iter()
                .map(|(x, wt)| {
                    let r = stable_intersection(&rho, x, b, 3, 5).unwrap();
                    assert!(r.stable);
                    wt * r.count as f64
                })
                .sum()
        })
        .collect()
}

fn sup_distance(u: &[f64], v: &[f64]) -> f64 {
    let mu = u.iter().copied().fold(0.0, f64::max);
    let mv = v.iter().copied().fold(0.0, f64::max);
    u.iter().zip(v).map(|(a, b)| (a / mu - b / mv).abs()).fold(0.0, f64::max)
}

fn weights(l: &MeasuredLamination) -> Vec<(CurveClass, f64)> {
    l.leaves.iter().map(|x| (x.curve.clone(), x.weight.value().unwrap())).collect()
}

#[test]
fn density_multiloop_is_itself() {
    let rho = fuchsian();
    let t = MeasuredLamination::from_multiloop(2, &[(c("a1"), Weight::TwoPi(2)), (c("a2"), Weight::TwoPi(3))]);
    let r = density_experiment(&rho, &t, 0.05, &DensityCaps::default()).unwrap();
    assert_eq!(r.approximant, t);
    assert_eq!((r.distance, r.parameter), (0.0, 0));
    let t = MeasuredLamination::from_multiloop(2, &[(c("a1 b1"), Weight::Real(0.37))]);
    let r = density_experiment(&rho, &t, 0.05, &DensityCaps::default()).unwrap();
    assert_eq!(r.distance, 0.0);
    assert_eq!(r.approximant.leaves[0].curve, c("a1 b1"));
    let bad = MeasuredLamination::from_multiloop(2, &[(c("a1"), Weight::Real(1.0)), (c("b1"), Weight::Real(1.0))]);
    assert!(matches!(density_experiment(&rho, &bad, 0.05, &DensityCaps::default()), Err(SchottkyError::Precondition(_))));
}

#[test]
fn density_twist_limit_sweep() {
    let rho = fuchsian();
    let t = MeasuredLamination::twist_limit(2, TwistLimit { base: vec![(c("b1"), 1)], along: vec![c("a1")] });
    let r = density_experiment(&rho, &t, 0.05, &DensityCaps::default()).unwrap();
    // the iterate b1 a1ⁿ meets a1 once, b1 n times, a1 b1 n − 1 times, a1 a2
    // once and b1 A2 n times; the limit a1 meets b1, a1 b1 and b1 A2 once
    // each, so the distance is 1/n and the sweep stops at the first n > 20
    assert_eq!(r.parameter, 21);
    assert!((r.distance - 1.0 / 21.0).abs() < 1e-15);
    let curve = &r.approximant.leaves[0].curve;
    assert_eq!(curve, &dehn_twist(&c("a1"), &c("b1"), 21).unwrap());
    // handle-one columns from algebraic intersection, the rest direct
    let mut v = Vec::new();
    for b in battery() {
        let alg = algebraic_intersection(&curve.homology(), &b.homology()).unsigned_abs() as f64;
        let handle_one = b.word().letters().iter().all(|l| l.generator() < 2) && !b.is_separating();
        v.push(if handle_one { alg } else { -1.0 });
    }
    let short = oracle_reps().remove(1);
    for (k, b) in battery().iter().enumerate() {
        if v[k] < 0.0 {
            let r = stable_intersection(&short, curve, b, 3, 5).unwrap();
            assert!(r.stable);
            v[k] = r.count as f64;
        }
    }
    assert_eq!(v, vec![1.0, 0.0, 0.0, 21.0, 0.0, 20.0, 0.0, 1.0, 21.0]);
    let target = [0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0];
    assert!(sup_distance(&v, &target) < 0.05);
    let tight = density_experiment(&rho, &t, 0.05, &DensityCaps { max_twist: 20, ..DensityCaps::default() });
    match tight {
        Err(SchottkyError::DensityCaps(best)) => assert_eq!(best.parameter, 20),
        other => panic!("{other:?}"),
    }
}

#[test]
fn density_random_targets() {
    let rho = fuchsian();
    let targets = random_multiloop_targets(7, 20).unwrap();
    assert_eq!(targets, random_multiloop_targets(7, 20).unwrap());
    let results = density_batch(&rho, &targets, 0.05, &DensityCaps::default(), 0);
    for (t, r) in targets.iter().zip(&results) {
        let r = r.as_ref().unwrap();
        assert!(r.within_eps && r.distance < 0.05);
        let d = sup_distance(&vector_oracle(&weights(t)), &vector_oracle(&weights(&r.approximant)));
        assert!((d - r.distance).abs() < 1e-12, "{d} {}", r.distance);
        assert!(r.approximant.leaves.iter().all(|l| matches!(l.weight, Weight::TwoPi(_))));
    }
    let serial = density_batch(&rho, &targets, 0.05, &DensityCaps::default(), 1);
    assert_eq!(serial, results);
}

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use approx::assert_abs_diff_eq;
use glab_core::geometry::*;
use glab_core::{Mobius, C64};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_map(rng: &mut ChaCha8Rng) -> Mobius {
    loop {
        let mut e = || c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if let Ok(m) = Mobius::new(e(), e(), e(), e()) {
            if m.entries().iter().all(|z| z.norm() < 20.0) {
                return m;
            }
        }
    }
}

// Unit-speed parametrisation of the geodesic (u, v) in the upper half-plane,
// with a brute-force search for the crossing with the imaginary axis.
fn semicircle_crossing_angle(u: f64, v: f64) -> f64 {
    let (cx, r) = ((u + v) / 2.0, (v - u).abs() / 2.0);
    let p = |s: f64| {
        // arclength parameter: x = cx + r tanh(s), y = r / cosh(s)
        (cx + r * s.tanh(), r / s.cosh())
    };
    let (mut lo, mut hi) = (-40.0, 40.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (p(lo).0) * (p(mid).0) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let h = 1e-6;
    let (x1, y1) = p(s - h);
    let (x2, y2) = p(s + h);
    let (tx, ty) = (x2 - x1, y2 - y1);
    // the other geodesic is vertical with tangent (0, 1)
    let cos = ty.abs() / (tx * tx + ty * ty).sqrt();
    cos.acos()
}

#[test]
fn classification_seeds() {
    assert_eq!(Mobius::diag(c(2.0f64.sqrt() * 2.0f64.sqrt(), 0.0)).classify().kind, MobiusKind::Loxodromic);
    let m = Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
    assert_abs_diff_eq!(m.trace_sq().re, 6.25, epsilon = 1e-12);
    assert_eq!(m.classify().kind, MobiusKind::Loxodromic);
    assert_eq!(Mobius::identity().classify().kind, MobiusKind::Identity);
    assert_eq!(Mobius::from_real(1.0, 1.0, 0.0, 1.0).unwrap().classify().kind, MobiusKind::Parabolic);
    let r = Mobius::so2(FRAC_PI_3);
    assert_abs_diff_eq!(r.trace_sq().re, 1.0, epsilon = 1e-12);
    assert_eq!(r.classify().kind, MobiusKind::Elliptic);
    assert_eq!(r.classify().margin, 1e-9);
}

#[test]
fn classification_is_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let seeds = [
        Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap(),
        Mobius::from_real(1.0, 1.0, 0.0, 1.0).unwrap(),
        Mobius::so2(FRAC_PI_3),
        Mobius::dilation(c(0.5, 2.0)),
    ];
    for s in seeds {
        let k = s.classify().kind;
        for _ in 0..1000 {
            let g = random_map(&mut rng);
            assert_eq!(s.conjugate_by(&g).classify().kind, k);
        }
    }
}

#[test]
fn fixed_point_examples() {
    let m = Mobius::from_real(2.0f64.sqrt(), 0.0, 0.0, 0.5f64.sqrt()).unwrap();
    assert_eq!(m.fixed_points().unwrap(), FixedPoints::Two(CPoint::Infinity, CPoint::real(0.0)));
    let p = Mobius::translation(c(1.0, 0.0));
    assert_eq!(p.fixed_points().unwrap(), FixedPoints::One(CPoint::Infinity));
    let g = Mobius::translation(c(3.0, 0.0));
    let q = Mobius::from_real(2.0, 0.0, 0.0, 0.5).unwrap().conjugate_by(&g);
    match q.fixed_points().unwrap() {
        FixedPoints::Two(a, r) => {
            assert!(a.is_infinite());
            assert!(r.chordal(&CPoint::real(3.0)) < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(Mobius::identity().fixed_points(), Err(GeometryError::NoIsolatedFixedPoints));
}

#[test]
fn fixed_points_are_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let m = random_map(&mut rng);
        if m.classify().kind != MobiusKind::Loxodromic {
            continue;
        }
        let g = random_map(&mut rng);
        let (FixedPoints::Two(a, r), FixedPoints::Two(a2, r2)) =
            (m.fixed_points().unwrap(), m.conjugate_by(&g).fixed_points().unwrap())
        else {
            panic!()
        };
        assert!(g.apply(&a).chordal(&a2) < 1e-8);
        assert!(g.apply(&r).chordal(&r2) < 1e-8);
    }
}

#[test]
fn complex_length_examples() {
    let m = Mobius::diag(c(2.0f64.sqrt(), 0.0));
    let (axis, l) = m.axis_and_length().unwrap();
    // z ↦ 2z moves i to 2i: length ln 2, and 2cosh(ℒ/2) = tr
    assert_abs_diff_eq!(l.re, 2.0f64.ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(2.0 * (l.re / 2.0).cosh(), m.trace().re, epsilon = 1e-12);
    let m4 = Mobius::diag(c(2.0, 0.0));
    assert_abs_diff_eq!(m4.translation_length().unwrap(), 1.386294, epsilon = 1e-6);
    assert_eq!(axis.end, CPoint::Infinity);
    let lam = Complex::from_polar(2.0f64.sqrt(), PI / 8.0);
    let l = Mobius::diag(lam).complex_length().unwrap();
    assert_abs_diff_eq!(l.im, FRAC_PI_4, epsilon = 1e-12);
    assert_eq!(Mobius::translation(c(1.0, 0.0)).axis_and_length().unwrap_err(), GeometryError::NoAxis);
}

#[test]
fn length_invariance_and_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let m = random_map(&mut rng);
        if m.classify().kind != MobiusKind::Loxodromic || m.classify().borderline {
            continue;
        }
        let l = m.translation_length().unwrap();
        let g = random_map(&mut rng);
        assert_abs_diff_eq!(m.conjugate_by(&g).translation_length().unwrap(), l, epsilon = 1e-9 * (1.0 + l));
        let mut p = m;
        for k in 2..=5 {
            p = p * m;
            assert_abs_diff_eq!(p.translation_length().unwrap(), k as f64 * l, epsilon = 1e-9 * (1.0 + k as f64 * l));
        }
    }
}

#[test]
fn angle_examples_against_brute_force() {
    let g = |u: Option<f64>, v: Option<f64>| GeodesicH2::from_reals(u, v).unwrap();
    let axis = g(Some(0.0), None);
    assert_abs_diff_eq!(angle_between_geodesics(&axis, &g(Some(-1.0), Some(1.0))).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    let theta = angle_between_geodesics(&axis, &g(Some(-1.0), Some(3.0))).unwrap();
    let oracle = semicircle_crossing_angle(-1.0, 3.0);
    assert_abs_diff_eq!(theta, oracle, epsilon = 1e-7);
    // frozen from the oracle
    assert_abs_diff_eq!(theta, 1.0471975511965979, epsilon = 1e-12);
    assert_eq!(angle_between_geodesics(&g(Some(1.0), Some(2.0)), &g(Some(3.0), Some(4.0))), Err(GeometryError::Disjoint));
    assert_eq!(angle_between_geodesics(&axis, &g(Some(0.0), Some(3.0))), Err(GeometryError::Asymptotic));
}

#[test]
fn angle_is_real_mobius_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let xs: Vec<f64> = (0..4).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let g1 = GeodesicH2::from_reals(Some(xs[0]), Some(xs[1])).unwrap();
        let g2 = GeodesicH2::from_reals(Some(xs[2]), Some(xs[3])).unwrap();
        let Ok(a) = angle_between_geodesics(&g1, &g2) else { continue };
        let (p, q, r) = (rng.gen_range(0.2..3.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let m = Mobius::from_real(p, q, r, (1.0 + q * r) / p).unwrap();
        let mv = |g: &GeodesicH2<f64>| GeodesicH2::new(m.apply(&g.start), m.apply(&g.end)).unwrap();
        assert_abs_diff_eq!(angle_between_geodesics(&mv(&g1), &mv(&g2)).unwrap(), a, epsilon = 1e-9);
    }
}

// Length of the geodesic arc between two points at equal height,
// integrated numerically along the semicircle joining them.
fn integrated_distance(x1: f64, x2: f64, h: f64) -> f64 {
    let cx = 0.5 * (x1 + x2);
    let r = ((x2 - cx).powi(2) + h * h).sqrt();
    let phi0 = (h / r).asin();
    let (a, b) = (phi0, PI - phi0);
    let n = 200_000;
    let step = (b - a) / n as f64;
    // ds = r dφ / (r sin φ)
    (0..n).map(|i| 1.0 / (a + (i as f64 + 0.5) * step).sin() * step).sum()
}

#[test]
fn distance_examples() {
    let p = H3Point::new(0.0, 0.0, 1.0).unwrap();
    assert_abs_diff_eq!(dist_h3(&p, &H3Point::new(0.0, 0.0, std::f64::consts::E).unwrap()), 1.0, epsilon = 1e-14);
    assert_eq!(dist_h3(&p, &p), 0.0);
    let q = H3Point::new(1.0, 0.0, 1.0).unwrap();
    let d = dist_h3(&p, &q);
    assert_abs_diff_eq!(d, integrated_distance(0.0, 1.0, 1.0), epsilon = 1e-8);
    assert_abs_diff_eq!(d, 0.9624236501192069, epsilon = 1e-12);
}

#[test]
fn distance_is_isometry_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let mut pt = || H3Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.1..3.0)).unwrap();
        let (p, q, r) = (pt(), pt(), pt());
        let d = dist_h3(&p, &q);
        assert!(d <= dist_h3(&p, &r) + dist_h3(&r, &q) + 1e-12);
        let g = random_map(&mut rng);
        assert_abs_diff_eq!(dist_h3(&g.apply_h3(&p), &g.apply_h3(&q)), d, epsilon = 1e-8 * (1.0 + d));
    }
}

#[test]
fn serde_roundtrip() {
    let m = Mobius::dilation(c(0.7, 0.3)) * Mobius::translation(c(1.5, -2.0));
    let s = serde_json::to_string(&m).unwrap();
    let back: Mobius = serde_json::from_str(&s).unwrap();
    assert!(back.distance(&m) < 1e-12);
    let s = serde_json::to_string(&CPoint::<f64>::Infinity).unwrap();
    assert_eq!(s, "\"inf\"");
    let p: CPoint<f64> = serde_json::from_str(&s).unwrap();
    assert!(p.is_infinite());
}

#[test]
fn generic_over_f32() {
    let m = MobiusMap::<f32>::from_real(2.0, 0.0, 0.0, 0.5).unwrap();
    assert_eq!(m.classify().kind, MobiusKind::Loxodromic);
    assert!((m.translation_length().unwrap() - 2.0 * 2.0f32.ln()).abs() < 1e-4);
}

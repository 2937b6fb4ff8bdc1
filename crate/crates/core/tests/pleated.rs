use glab_core::farey::{FareyTriangle, LaminationSeqSpec, Slope};
use glab_core::holonomy::{build_bent, build_from_fn, FnCoordinates, HolonomyRep};
use glab_core::pleated::*;
use glab_core::topology::{w, CurveClass};
use glab_core::{Mobius, Point, C64};

fn fnc() -> FnCoordinates {
    FnCoordinates::genus2([2.0, 2.0, 2.0], [0.0, 0.0, 0.0])
}

fn fuchsian() -> HolonomyRep {
    build_from_fn(&fnc()).unwrap()
}

fn bent(eps: f64) -> HolonomyRep {
    build_bent(&fnc(), &[eps, 0.0, 0.0]).unwrap()
}

fn pants(s: Slope, leaves: PantsLeaves) -> HandleLamination {
    HandleLamination::Pants { slope: s, leaves }
}

fn triangulated() -> SpiralLamination {
    SpiralLamination::new(HandleLamination::Triangulation { slopes: FareyTriangle::standard() }, pants(Slope::ZERO, PantsLeaves::Distinct))
}

fn laminations() -> Vec<SpiralLamination> {
    vec![
        SpiralLamination::standard(),
        SpiralLamination::new(pants(Slope::INF, PantsLeaves::Loop), pants(Slope::ZERO, PantsLeaves::Loop)),
        SpiralLamination::new(pants(Slope::int(1), PantsLeaves::Distinct), pants(Slope::INF, PantsLeaves::Loop)),
        triangulated(),
    ]
}

#[test]
fn realize_standard() {
    let rho = fuchsian();
    let lam = SpiralLamination::standard();
    let beta = realize(&rho, &lam).unwrap();
    assert_eq!(beta.triangles.len(), 4);
    assert_eq!(beta.triangles.iter().filter(|t| t.handle == 1).count(), 2);
    let m = lam.pants_decomposition().unwrap();
    let c = |s: &str| CurveClass::new(w(s), 2).unwrap();
    assert!(m.contains(&c("a1")) && m.contains(&c("a2")) && m.contains(&c("a1 b1 A1 B1")));
    // vertices against fixed points of the conjugates, computed directly
    for r in [fuchsian(), bent(0.05)] {
        let beta = realize(&r, &lam).unwrap();
        for (t, tri) in beta.triangles.iter().enumerate() {
            for (k, d) in tri.vertices.iter().enumerate() {
                let conj = d.curve.conjugate(&d.word);
                let p = r.fixed_point(&conj, d.selector).unwrap();
                assert!(p.chordal(&beta.vertices[t][k]) < 1e-9);
            }
        }
    }
    let again = realize(&rho, &lam).unwrap();
    assert_eq!(serde_json::to_string(&beta).unwrap(), serde_json::to_string(&again).unwrap());
    let samples = sample_battery(4);
    assert!(samples.len() >= 50);
    assert!(plane_deviation(&beta, &samples).unwrap() < 1e-9);
    assert!(isometry_defect(&beta) < 1e-9);
}

#[test]
fn realize_errors() {
    let rho = fuchsian();
    let lam = SpiralLamination::standard();
    assert!(matches!(realize_with_radius(&rho, &lam, Some(2)), Err(PleatedError::Radius { have: 2, need: 4 })));
    let three = SpiralLamination { handles: vec![pants(Slope::ZERO, PantsLeaves::Distinct); 3] };
    assert!(matches!(realize(&rho, &three), Err(PleatedError::Unsupported(_))));
    let beta = realize(&rho, &lam).unwrap();
    let outside = [Sample { triangle: 9, vertex: None, depth: 0.0 }];
    assert!(matches!(equivariance_residual(&beta, &outside), Err(PleatedError::Sample(_))));
    let bad = [Sample { triangle: 0, vertex: Some(1), depth: -1.0 }];
    assert!(beta.evaluate(&bad[0]).is_err());
}

#[test]
fn equivariance() {
    for lam in laminations() {
        for r in [fuchsian(), bent(0.05)] {
            let beta = realize(&r, &lam).unwrap();
            let s = sample_battery(beta.triangles.len());
            let res = equivariance_residual(&beta, &s).unwrap();
            assert!(res < 1e-8, "{lam:?}: {res}");
            // every fan generator fixes its vertex
            assert_eq!(fan_generators(&beta).unwrap().len(), 12);
            let g = Mobius::new(C64::new(1.0, 0.3), C64::new(0.2, -0.1), C64::new(0.1, 0.4), C64::new(1.1, 0.0)).unwrap();
            let conj = beta.conjugated(&g).unwrap();
            // conjugation moves the data off the real line; rounding grows a little
            let cres = equivariance_residual(&conj, &s).unwrap();
            assert!(cres < 1e-7, "{lam:?}: conjugated {cres}");
            for t in 0..beta.triangles.len() {
                for k in 0..3 {
                    // a closed-leaf corner glued only to its own translates may
                    // spiral either way; every waist corner is pinned
                    let d = &beta.triangles[t].vertices[k];
                    if d.curve != waist(beta.triangles[t].handle) {
                        continue;
                    }
                    let flipped = beta.with_flipped_selector(t, k).unwrap();
                    assert!(equivariance_residual(&flipped, &s).unwrap() > 0.1, "flip {t} {k}");
                }
            }
        }
    }
}

#[test]
fn conjugated_holonomy_gives_conjugated_surface() {
    let r = bent(0.05);
    let g = Mobius::new(C64::new(0.9, 0.2), C64::new(0.3, 0.0), C64::new(-0.2, 0.1), C64::new(1.0, -0.1)).unwrap();
    let lam = triangulated();
    let a = realize(&r, &lam).unwrap();
    let b = realize(&r.conjugated(&g), &lam).unwrap();
    assert_eq!(a.triangles, b.triangles);
    for (va, vb) in a.vertices.iter().zip(&b.vertices) {
        for k in 0..3 {
            assert!(g.apply(&va[k]).chordal(&vb[k]) < 1e-9);
        }
    }
}

// Bending from the angle between the vertex circles at a shared vertex,
// after sending that vertex to ∞.
fn oracle_bend(p: Point, q: Point, r: Point, r2: Point) -> f64 {
    let (p, q, r, r2) = (p.finite().unwrap(), q.finite().unwrap(), r.finite().unwrap(), r2.finite().unwrap());
    let inv = |z: C64| (z - p).inv();
    let (d1, d2) = (inv(r) - inv(q), inv(r2) - inv(q));
    (-d2 / d1).arg().abs()
}

#[test]
fn bending() {
    for lam in laminations() {
        let beta = realize(&fuchsian(), &lam).unwrap();
        assert!(bending_angles(&beta).iter().all(|e| e.angle.abs() < 1e-9));
    }
    // bending along closed leaves leaves the isolated leaves flat
    let along = build_bent(&fnc(), &[0.07, 0.03, 0.05]).unwrap();
    let beta = realize(&along, &SpiralLamination::standard()).unwrap();
    assert!(bending_angles(&beta).iter().all(|e| e.angle < 1e-9));
    // transverse bending
    let beta = realize(&bent(0.05), &triangulated()).unwrap();
    let bends = bending_angles(&beta);
    assert_eq!(bends.len(), 6);
    for e in &bends {
        let back = bending_angle(&beta, e.neighbour, e.neighbour_edge);
        assert!((back - e.angle).abs() < 1e-12);
        let g = &beta.gluings[e.triangle][e.edge];
        let v = beta.vertices[e.triangle];
        let (i, j) = ((e.edge + 1) % 3, (e.edge + 2) % 3);
        let far = beta.rep.apply(&g.deck.inverse(), &beta.vertices[g.neighbour][g.neighbour_edge]);
        assert!((oracle_bend(v[i], v[j], v[e.edge], far) - e.angle).abs() < 1e-9);
    }
    assert!(bends.iter().any(|e| e.angle > 1e-3));
    let sweep: Vec<f64> = (0..=10)
        .map(|k| {
            let b = realize(&bent(0.01 * k as f64), &triangulated()).unwrap();
            bending_angles(&b).iter().map(|e| e.angle).fold(0.0, f64::max)
        })
        .collect();
    assert!(sweep[0] < 1e-12);
    assert!(sweep[1] < 0.02);
    assert!(sweep.windows(2).all(|p| p[1] > p[0]), "{sweep:?}");
}

#[test]
fn selectors_locally_constant() {
    for lam in laminations() {
        let a = realize(&fuchsian(), &lam).unwrap();
        for (dl, dt) in [(5e-4, 0.0), (-5e-4, 5e-4), (0.0, -5e-4)] {
            let f = FnCoordinates::genus2([2.0 + dl, 2.0 - dl, 2.0 + dl], [dt, -dt, dt]);
            let b = realize(&build_from_fn(&f).unwrap(), &lam).unwrap();
            assert_eq!(a.triangles, b.triangles);
            assert_eq!(a.gluings, b.gluings);
        }
    }
}

#[test]
fn rough_isometry_report() {
    let s = sample_battery(4);
    let beta = realize(&fuchsian(), &triangulated()).unwrap();
    assert!(rough_isometry(&beta, &s).unwrap().epsilon < 1e-9);
    let beta = realize(&bent(0.05), &triangulated()).unwrap();
    let rep = rough_isometry(&beta, &s).unwrap();
    assert_eq!(rep.distortion.len(), s.len());
    assert!(rep.epsilon > 0.0 && rep.distortion.iter().all(|d| *d <= rep.epsilon));
}

#[test]
fn convergence() {
    let spec = LaminationSeqSpec::torus(1, Slope::ZERO, Slope::INF);
    let opts = ConvergenceOptions::default();
    let flat = convergence_experiment(&fuchsian(), &spec, -4, 4, &opts).unwrap();
    for r in &flat.rows {
        assert!(r.toward_end.unwrap() < 1e-8 && r.toward_start.unwrap() < 1e-8);
    }
    let rho = bent(0.05);
    let table = convergence_experiment(&rho, &spec, -8, 12, &opts).unwrap();
    assert!(table.rows.iter().all(|r| r.failure.is_none()));
    assert!(table.end_tail_non_increasing);
    assert!(table.start_tail_non_increasing);
    assert!(table.final_toward_end.unwrap() < 1e-2);
    assert!(table.final_toward_start.unwrap() < 1e-2);
    let d = |j: i64| table.rows.iter().find(|r| r.j == j).unwrap().toward_end.unwrap();
    // frozen from the first run of this experiment
    assert!((d(4) / 5.888548231906e-4 - 1.0).abs() < 1e-6, "{}", d(4));
    // the swapped sequence is the same table read backwards
    let mirror = convergence_experiment(&rho, &spec.swapped(), -12, 8, &opts).unwrap();
    for r in &mirror.rows {
        let o = table.rows.iter().find(|x| x.j == -r.j).unwrap();
        assert_eq!(r.triangle, o.triangle);
        assert_eq!(r.toward_end, o.toward_start);
        assert_eq!(r.toward_start, o.toward_end);
    }
    let again = convergence_experiment(&rho, &spec, -8, 12, &ConvergenceOptions { threads: 1, ..opts.clone() }).unwrap();
    assert_eq!(again, table);
}

#[test]
fn convergence_rejects_sphere_case() {
    let mut spec = LaminationSeqSpec::torus(1, Slope::ZERO, Slope::INF);
    spec.case = glab_core::farey::FareyCase::Sphere;
    assert!(matches!(convergence_experiment(&fuchsian(), &spec, 0, 2, &ConvergenceOptions::default()), Err(PleatedError::Unsupported(_))));
}

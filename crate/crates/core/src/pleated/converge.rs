use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{realize, three_point, HandleLamination, PantsLeaves, PleatedError, PleatedSurface, Sample, SpiralLamination};
use crate::farey::{interpolation_path, FareyCase, FareyTriangle, LaminationSeqSpec, Slope};
use crate::geometry::{dist_h3, GeodesicH2};
use crate::holonomy::HolonomyRep;
use crate::topology::Word;
use crate::{Point, H2, H3};

const TAIL_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceOptions {
    /// Lamination in the other handle, shared by every surface.
    pub exterior: HandleLamination,
    /// Crossings allowed when locating one sample.
    pub max_walk: usize,
    /// 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions { exterior: HandleLamination::Pants { slope: Slope::ZERO, leaves: PantsLeaves::Loop }, max_walk: 100_000, threads: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub j: i64,
    pub triangle: FareyTriangle,
    /// D(j) against the surface for the end slope.
    pub toward_end: Option<f64>,
    /// D(j) against the surface for the start slope.
    pub toward_start: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub handle: usize,
    pub samples: usize,
    pub rows: Vec<ConvergenceRow>,
    /// D toward the end is non-increasing over j ≥ 0 in the range.
    pub end_tail_non_increasing: bool,
    /// D toward the start is non-increasing as j decreases over j ≤ 0.
    pub start_tail_non_increasing: bool,
    pub final_toward_end: Option<f64>,
    pub final_toward_start: Option<f64>,
}

fn handle_of(spec: &LaminationSeqSpec) -> Result<usize, PleatedError> {
    if spec.case != FareyCase::Torus {
        return Err(PleatedError::Unsupported("realization of four-holed-sphere sequences".into()));
    }
    let k = spec.subsurface.trim().strip_prefix("handle").and_then(|s| s.trim().parse::<usize>().ok());
    match k {
        Some(k @ 1..=2) => Ok(k),
        _ => Err(PleatedError::Unsupported(format!("subsurface {:?}", spec.subsurface))),
    }
}

fn lamination(k: usize, inside: HandleLamination, exterior: &HandleLamination) -> SpiralLamination {
    if k == 1 {
        SpiralLamination::new(inside, exterior.clone())
    } else {
        SpiralLamination::new(exterior.clone(), inside)
    }
}

fn side_value(p: &Point, q: &Point, z: &Point) -> Result<f64, PleatedError> {
    let n = GeodesicH2::new(*p, *q)?.straightener()?;
    Ok(n.apply(z).finite().map(|w| w.re).unwrap_or(0.0))
}

// Ideal endpoints of the geodesic through two points of H².
fn line_through(p: &H2, q: &H2) -> (Point, Point) {
    let dx = q.x - p.x;
    if dx.abs() <= 1e-13 * (1.0 + p.x.abs().max(q.x.abs())) {
        return (Point::real(p.x), Point::Infinity);
    }
    let m = (q.x * q.x + q.y * q.y - p.x * p.x - p.y * p.y) / (2.0 * dx);
    let r = (p.x - m).hypot(p.y);
    (Point::real(m - r), Point::real(m + r))
}

/// Walk through the domain gallery along the segment from the centre of
/// triangle `start` to x; returns the vertices of the lift containing x for
/// the base and for ρ.
fn locate(beta: &PleatedSurface, x: &H2, start: usize, max_walk: usize) -> Result<([Point; 3], [Point; 3]), PleatedError> {
    let base = beta.base();
    let z = Point::Finite(x.z());
    let (mut t, mut deck, mut dev, mut rdev) = (start, Word::empty(), beta.base_vertices[start], beta.vertices[start]);
    let c = three_point(&dev)?.apply_h3(&H3 { x: 0.5, y: 0.0, t: 0.75f64.sqrt() });
    let (l0, l1) = line_through(&H2 { x: c.x, y: c.t }, x);
    let mut entered: Option<usize> = None;
    for _ in 0..max_walk {
        let mut separating = Vec::new();
        for e in (0..3).filter(|&e| Some(e) != entered) {
            let (i, j) = ((e + 1) % 3, (e + 2) % 3);
            if side_value(&dev[i], &dev[j], &z)? * side_value(&dev[i], &dev[j], &dev[e])? < 0.0 {
                separating.push(e);
            }
        }
        let Some(&first) = separating.first() else { return Ok((dev, rdev)) };
        // the exit edge is the one whose endpoints straddle the segment
        let u = separating
            .iter()
            .copied()
            .find(|&e| {
                let (i, j) = ((e + 1) % 3, (e + 2) % 3);
                match (side_value(&l0, &l1, &dev[i]), side_value(&l0, &l1, &dev[j])) {
                    (Ok(a), Ok(b)) => a * b <= 0.0,
                    _ => false,
                }
            })
            .unwrap_or(first);
        let g = &beta.gluings[t][u];
        let next = deck.mul(&g.deck.inverse());
        let (mut nd, mut nr) = (dev, rdev);
        for i in (0..3).filter(|&i| i != u) {
            nd[g.vertex_map[i]] = dev[i];
            nr[g.vertex_map[i]] = rdev[i];
        }
        let ne = g.neighbour_edge;
        nd[ne] = base.apply(&next, &beta.base_vertices[g.neighbour][ne]);
        nr[ne] = beta.rep.apply(&next, &beta.vertices[g.neighbour][ne]);
        t = g.neighbour;
        entered = Some(ne);
        deck = next;
        dev = nd;
        rdev = nr;
    }
    Err(PleatedError::Sample(format!("point ({}, {}) not reached within {max_walk} crossings", x.x, x.y)))
}

/// β at the domain point x, transported through the containing triangle.
fn transport(beta: &PleatedSurface, x: &H2, start: usize, max_walk: usize) -> Result<H3, PleatedError> {
    let (dev, rdev) = locate(beta, x, start, max_walk)?;
    let model = three_point(&dev)?.inverse().apply_h3(&x.lift());
    Ok(three_point(&rdev)?.apply_h3(&model))
}

fn distance(target: &PleatedSurface, samples: &[Sample], beta: &PleatedSurface, max_walk: usize) -> Result<f64, PleatedError> {
    let mut worst = 0.0f64;
    for s in samples {
        let x = target.domain_point(s)?;
        let d = dist_h3(&transport(beta, &x, s.triangle, max_walk)?, &target.evaluate(s)?);
        worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    Ok(worst)
}

fn non_increasing<'a>(vals: impl Iterator<Item = &'a Option<f64>>) -> bool {
    let mut prev: Option<f64> = None;
    for v in vals {
        let Some(v) = *v else { return false };
        if prev.is_some_and(|p| v > p * (1.0 + TAIL_SLACK) + TAIL_SLACK) {
            return false;
        }
        prev = Some(v);
    }
    true
}

/// D(j) = sup over samples of d(β_j(x), β_target(x)) for the surfaces β_j
/// realizing the interpolating triangulations inside the handle, against
/// the limit surfaces for both end slopes. Samples are the battery of each
/// target; points are matched through the Fuchsian domain chart.
pub fn convergence_experiment(
    rep: &HolonomyRep,
    spec: &LaminationSeqSpec,
    j_min: i64,
    j_max: i64,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceTable, PleatedError> {
    let k = handle_of(spec)?;
    let path = interpolation_path(spec, j_min, j_max)?;
    let target = |s: Slope| realize(rep, &lamination(k, HandleLamination::Pants { slope: s, leaves: PantsLeaves::Loop }, &opts.exterior));
    let (end, start) = (target(spec.end)?, target(spec.start)?);
    let end_samples = super::sample_battery(end.triangles.len());
    let start_samples = super::sample_battery(start.triangles.len());
    let jobs: Vec<(i64, FareyTriangle)> = path.into_iter().collect();
    let threads = if opts.threads == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { opts.threads };
    let chunk = jobs.len().div_ceil(threads.max(1)).max(1);
    let run = |j: i64, tri: FareyTriangle| -> ConvergenceRow {
        let res = realize(rep, &lamination(k, HandleLamination::Triangulation { slopes: tri }, &opts.exterior)).and_then(|beta| {
            Ok((distance(&end, &end_samples, &beta, opts.max_walk)?, distance(&start, &start_samples, &beta, opts.max_walk)?))
        });
        match res {
            Ok((e, s)) => ConvergenceRow { j, triangle: tri, toward_end: Some(e), toward_start: Some(s), failure: None },
            Err(err) => ConvergenceRow { j, triangle: tri, toward_end: None, toward_start: None, failure: Some(err.to_string()) },
        }
    };
    let mut rows: BTreeMap<i64, ConvergenceRow> = BTreeMap::new();
    std::thread::scope(|sc| {
        let handles: Vec<_> = jobs.chunks(chunk).map(|part| sc.spawn(move || part.iter().map(|&(j, t)| run(j, t)).collect::<Vec<_>>())).collect();
        for h in handles {
            for r in h.join().expect("worker panicked") {
                rows.insert(r.j, r);
            }
        }
    });
    let rows: Vec<ConvergenceRow> = rows.into_values().collect();
    let end_tail: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.j >= 0).collect();
    let start_tail: Vec<&ConvergenceRow> = rows.iter().rev().filter(|r| r.j <= 0).collect();
    Ok(ConvergenceTable {
        handle: k,
        samples: end_samples.len(),
        end_tail_non_increasing: non_increasing(end_tail.iter().map(|r| &r.toward_end)),
        start_tail_non_increasing: non_increasing(start_tail.iter().map(|r| &r.toward_start)),
        final_toward_end: rows.last().and_then(|r| r.toward_end),
        final_toward_start: rows.first().and_then(|r| r.toward_start),
        rows,
    })
}

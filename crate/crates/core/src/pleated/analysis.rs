use serde::{Deserialize, Serialize};

use super::{three_point, PleatedError, PleatedSurface};
use crate::geometry::{dist_h2, dist_h3, MobiusMap};
use crate::topology::Word;
use crate::{Mobius, Point, C64, H2, H3};

const DEPTHS: [f64; 4] = [0.4, 0.8, 1.2, 1.6];

/// Point of the model ideal triangle (0, 1, ∞): the centre, or the point
/// at distance `depth` from the centre towards vertex slot `vertex`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub triangle: usize,
    pub vertex: Option<usize>,
    pub depth: f64,
}

impl Sample {
    pub fn model_point(&self) -> Result<C64, PleatedError> {
        if !(self.depth.is_finite() && self.depth >= 0.0) {
            return Err(PleatedError::Sample(format!("depth {}", self.depth)));
        }
        let h = 3f64.sqrt() / 2.0;
        let z = C64::new(0.5, h * self.depth.exp());
        // z ↦ 1/(1 − z) cycles the vertices 0 → 1 → ∞
        let r = |z: C64| (C64::new(1.0, 0.0) - z).inv();
        Ok(match self.vertex {
            None => C64::new(0.5, h),
            Some(2) => z,
            Some(0) => r(z),
            Some(1) => r(r(z)),
            Some(v) => return Err(PleatedError::Sample(format!("vertex slot {v}"))),
        })
    }
}

/// Centre plus four depths towards each vertex, for every triangle.
pub fn sample_battery(triangles: usize) -> Vec<Sample> {
    let mut out = Vec::new();
    for t in 0..triangles {
        out.push(Sample { triangle: t, vertex: None, depth: 0.0 });
        for v in 0..3 {
            for d in DEPTHS {
                out.push(Sample { triangle: t, vertex: Some(v), depth: d });
            }
        }
    }
    out
}

fn lift(z: C64) -> H3 {
    H3 { x: z.re, y: 0.0, t: z.im }
}

impl PleatedSurface {
    fn check(&self, s: &Sample) -> Result<C64, PleatedError> {
        if s.triangle >= self.triangles.len() {
            return Err(PleatedError::Sample(format!("triangle {} outside gallery of {}", s.triangle, self.triangles.len())));
        }
        s.model_point()
    }

    /// β at a sample.
    pub fn evaluate(&self, s: &Sample) -> Result<H3, PleatedError> {
        let z = self.check(s)?;
        Ok(self.charts[s.triangle].apply_h3(&lift(z)))
    }

    /// The sample's point in the domain chart, the Fuchsian base.
    pub fn domain_point(&self, s: &Sample) -> Result<H2, PleatedError> {
        let z = self.check(s)?;
        let p = three_point(&self.base_vertices[s.triangle])?.apply_h3(&lift(z));
        Ok(H2 { x: p.x, y: p.t })
    }
}

struct Fan {
    deck: Word,
    developed: [Point; 3],
}

/// Develop the gallery around vertex slot v of triangle t until the walk
/// returns to (t, v); the accumulated deck fixes that vertex.
fn fan(beta: &PleatedSurface, t: usize, v: usize) -> Result<Fan, PleatedError> {
    let (mut ct, mut cv) = (t, v);
    let mut entered: Option<usize> = None;
    let mut deck = Word::empty();
    let mut dev = beta.vertices[t];
    for _ in 0..4 * beta.triangles.len() * 3 {
        let u = match entered {
            None => (cv + 1) % 3,
            Some(e) => (0..3).find(|&s| s != cv && s != e).expect("three slots"),
        };
        let g = &beta.gluings[ct][u];
        let next = deck.mul(&g.deck.inverse());
        let mut nd = dev;
        for i in (0..3).filter(|&i| i != u) {
            nd[g.vertex_map[i]] = dev[i];
        }
        nd[g.neighbour_edge] = beta.rep.apply(&next, &beta.vertices[g.neighbour][g.neighbour_edge]);
        cv = g.vertex_map[cv];
        ct = g.neighbour;
        entered = Some(g.neighbour_edge);
        deck = next;
        dev = nd;
        if (ct, cv) == (t, v) {
            return Ok(Fan { deck, developed: dev });
        }
    }
    Err(PleatedError::Gallery(format!("walk around vertex {v} of triangle {t} does not close")))
}

/// Deck transformations fixing the ideal vertices, one per vertex slot.
pub fn fan_generators(beta: &PleatedSurface) -> Result<Vec<Word>, PleatedError> {
    let mut out = Vec::new();
    for t in 0..beta.triangles.len() {
        for v in 0..3 {
            out.push(fan(beta, t, v)?.deck);
        }
    }
    Ok(out)
}

// Feet of the perpendiculars from the model centre to the edges opposite
// vertex slots 0, 1, 2.
const EDGE_FEET: [C64; 3] = [C64::new(1.0, 1.0), C64::new(0.0, 1.0), C64::new(0.5, 0.5)];

/// Largest distance from the edge feet of each triangle to the edge of the
/// glued neighbour, pulled back by the deck.
pub fn edge_mismatch(beta: &PleatedSurface) -> Result<f64, PleatedError> {
    let mut worst = 0.0f64;
    for t in 0..beta.triangles.len() {
        for e in 0..3 {
            let g = &beta.gluings[t][e];
            let back = beta.rep.eval(&g.deck.inverse());
            let (i, j) = ((e + 1) % 3, (e + 2) % 3);
            let q = |s: usize| back.apply(&beta.vertices[g.neighbour][g.vertex_map[s]]);
            let n: Mobius = MobiusMap::normalizer(&q(i), &q(j))?.inverse();
            let p = n.apply_h3(&beta.charts[t].apply_h3(&lift(EDGE_FEET[e])));
            let d = (p.x.hypot(p.y) / p.t).asinh();
            worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    Ok(worst)
}

/// sup over samples and fan generators γ of d(β(γ·x), ρ(γ)·β(x)), with
/// β(γ·x) read off the triangle developed through the gluings, and the
/// edge mismatch of the gluings themselves.
pub fn equivariance_residual(beta: &PleatedSurface, samples: &[Sample]) -> Result<f64, PleatedError> {
    let mut worst = edge_mismatch(beta)?;
    for s in samples {
        beta.check(s)?;
    }
    for t in 0..beta.triangles.len() {
        let mine: Vec<&Sample> = samples.iter().filter(|s| s.triangle == t).collect();
        if mine.is_empty() {
            continue;
        }
        for v in 0..3 {
            let f = fan(beta, t, v)?;
            let chart = three_point(&f.developed)?;
            let g = beta.rep.eval(&f.deck);
            for s in &mine {
                let z = lift(s.model_point()?);
                let d = dist_h3(&chart.apply_h3(&z), &g.apply_h3(&beta.charts[t].apply_h3(&z)));
                worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeBend {
    pub triangle: usize,
    pub edge: usize,
    pub neighbour: usize,
    pub neighbour_edge: usize,
    pub angle: f64,
}

/// Exterior dihedral angle along edge `edge` of triangle t.
pub fn bending_angle(beta: &PleatedSurface, t: usize, edge: usize) -> f64 {
    let g = &beta.gluings[t][edge];
    let (i, j) = ((edge + 1) % 3, (edge + 2) % 3);
    let v = &beta.vertices[t];
    let far = beta.rep.apply(&g.deck.inverse(), &beta.vertices[g.neighbour][g.neighbour_edge]);
    let Ok(n) = MobiusMap::normalizer(&v[i], &v[j]) else { return f64::NAN };
    let n: Mobius = n.inverse();
    match (n.apply(&v[edge]).finite(), n.apply(&far).finite()) {
        (Some(z1), Some(z2)) => (-z2 / z1).arg().abs(),
        _ => f64::NAN,
    }
}

/// One angle per glued edge pair.
pub fn bending_angles(beta: &PleatedSurface) -> Vec<EdgeBend> {
    let mut out = Vec::new();
    for t in 0..beta.triangles.len() {
        for e in 0..3 {
            let g = &beta.gluings[t][e];
            if (t, e) <= (g.neighbour, g.neighbour_edge) {
                out.push(EdgeBend { triangle: t, edge: e, neighbour: g.neighbour, neighbour_edge: g.neighbour_edge, angle: bending_angle(beta, t, e) });
            }
        }
    }
    out
}

/// Largest change of pairwise distance among three markers per triangle
/// between the model triangle and its image.
pub fn isometry_defect(beta: &PleatedSurface) -> f64 {
    let markers = [(None, 0.0), (Some(0), 1.0), (Some(2), 1.5)];
    let mut worst = 0.0f64;
    for t in 0..beta.triangles.len() {
        let pts: Vec<(H2, H3)> = markers
            .iter()
            .map(|&(v, d)| {
                let s = Sample { triangle: t, vertex: v, depth: d };
                let z = s.model_point().expect("fixed markers");
                (H2 { x: z.re, y: z.im }, beta.charts[t].apply_h3(&lift(z)))
            })
            .collect();
        for a in 0..3 {
            for b in a + 1..3 {
                let d = (dist_h2(&pts[a].0, &pts[b].0) - dist_h3(&pts[a].1, &pts[b].1)).abs();
                worst = worst.max(d);
            }
        }
    }
    worst
}

/// Largest hyperbolic distance from a sample image to the vertical plane
/// over the real axis.
pub fn plane_deviation(beta: &PleatedSurface, samples: &[Sample]) -> Result<f64, PleatedError> {
    let mut worst = 0.0f64;
    for s in samples {
        let p = beta.evaluate(s)?;
        worst = worst.max((p.y.abs() / p.t).asinh());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoughIsometryReport {
    pub epsilon: f64,
    /// Domain points (x, y) in the Fuchsian base chart.
    pub samples: Vec<[f64; 2]>,
    /// Per sample, the worst |d(βx, βy) − d(x, y)| over the other samples.
    pub distortion: Vec<f64>,
}

/// Additive distortion of β against the domain metric on the samples.
pub fn rough_isometry(beta: &PleatedSurface, samples: &[Sample]) -> Result<RoughIsometryReport, PleatedError> {
    let dom: Vec<H2> = samples.iter().map(|s| beta.domain_point(s)).collect::<Result<_, _>>()?;
    let img: Vec<H3> = samples.iter().map(|s| beta.evaluate(s)).collect::<Result<_, _>>()?;
    let n = samples.len();
    let mut distortion = vec![0.0f64; n];
    for a in 0..n {
        for b in a + 1..n {
            let d = (dist_h3(&img[a], &img[b]) - dist_h2(&dom[a], &dom[b])).abs();
            distortion[a] = distortion[a].max(d);
            distortion[b] = distortion[b].max(d);
        }
    }
    let epsilon = distortion.iter().copied().fold(0.0, f64::max);
    Ok(RoughIsometryReport { epsilon, samples: dom.iter().map(|p| [p.x, p.y]).collect(), distortion })
}

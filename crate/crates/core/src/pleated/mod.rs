//! Pleated surfaces realizing left-spiralling maximal laminations on the
//! genus-2 surface cut along the waist s = a1 b1 A1 B1, and the
//! convergence experiments for the interpolating sequences.

mod analysis;
mod converge;

pub use analysis::{
    bending_angle, bending_angles, edge_mismatch, equivariance_residual, fan_generators, isometry_defect, plane_deviation, rough_isometry, sample_battery,
    EdgeBend, RoughIsometryReport, Sample,
};
pub use converge::{convergence_experiment, ConvergenceOptions, ConvergenceRow, ConvergenceTable};

use serde::{Deserialize, Serialize};

use crate::farey::{basis_words, FareyError, FareyTriangle, Slope};
use crate::geometry::{FixedPoints, GeodesicH2, GeometryError, MobiusKind, MobiusMap, Selector, Side};
use crate::holonomy::{purely_loxodromic_scan, HolonomyError, HolonomyRep};
use crate::topology::{CurveClass, Letter, Word};
use crate::{Mobius, Point};

/// Minimum chordal gap between the vertices of one triangle.
pub const VERTEX_GAP: f64 = 1e-8;
const MATCH_TOL: f64 = 1e-7;
const DECK_RADIUS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PleatedError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid lamination: {0}")]
    Lamination(String),
    #[error("vertex collision in triangle {triangle}: gap {gap:e}; two non-commuting loxodromics share a fixed point")]
    VertexCollision { triangle: usize, gap: f64 },
    #[error("certification radius {have} is below the longest vertex core {need}")]
    Radius { have: usize, need: usize },
    #[error("loxodromic certificate failed at radius {0}")]
    NotCertified(usize),
    #[error("gallery: {0}")]
    Gallery(String),
    #[error("sample: {0}")]
    Sample(String),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error(transparent)]
    Farey(#[from] FareyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PantsLeaves {
    /// Three leaves joining distinct cuffs.
    Distinct,
    /// A leaf from the waist back to itself, parallel to the closed leaf,
    /// and one leaf into each side of the closed leaf. This is the limit
    /// of left twists of any handle triangulation along the closed leaf.
    Loop,
}

/// The lamination inside one handle, spiralling left into the waist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HandleLamination {
    /// Lift of an ideal triangulation of the punctured handle.
    Triangulation { slopes: FareyTriangle },
    /// A closed leaf of the given slope and two triangles in its pants.
    Pants { slope: Slope, leaves: PantsLeaves },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralLamination {
    pub handles: Vec<HandleLamination>,
}

impl SpiralLamination {
    pub fn new(h1: HandleLamination, h2: HandleLamination) -> Self {
        SpiralLamination { handles: vec![h1, h2] }
    }

    /// Closed leaves a1, a2, s with distinct-cuff pants leaves.
    pub fn standard() -> Self {
        let p = HandleLamination::Pants { slope: Slope::ZERO, leaves: PantsLeaves::Distinct };
        Self::new(p.clone(), p)
    }

    pub fn validate(&self) -> Result<(), PleatedError> {
        if self.handles.len() != 2 {
            return Err(PleatedError::Unsupported(format!("{} handles; genus 2 only", self.handles.len())));
        }
        Ok(())
    }

    /// The pants decomposition formed by the closed leaves, when every
    /// handle carries one.
    pub fn pants_decomposition(&self) -> Option<Vec<CurveClass>> {
        let mut out = Vec::new();
        for (i, h) in self.handles.iter().enumerate() {
            let HandleLamination::Pants { slope, .. } = h else { return None };
            let (_, c) = pants_basis(slope, i + 1).ok()?;
            let c = if vec_of(&c, i + 1) == slope.vector() { c } else { c.inverse() };
            out.push(CurveClass::new(c, 2).ok()?);
        }
        out.push(CurveClass::new(waist(1), 2).ok()?);
        Some(out)
    }
}

/// The waist as seen from handle k: aₖ bₖ Aₖ Bₖ.
pub fn waist(k: usize) -> Word {
    let (a, b) = (Letter::a(k), Letter::b(k));
    Word::from_letters([a, b, a.inv(), b.inv()])
}

/// Vertex of a gallery triangle: the `selector` fixed point of ρ(w c w⁻¹).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexDescriptor {
    pub word: Word,
    pub curve: Word,
    pub selector: Selector,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalleryTriangle {
    pub handle: usize,
    pub vertices: [VertexDescriptor; 3],
}

/// Edge `edge` (opposite that slot) of a triangle t is the image under
/// ρ(deck) of the edge of t; vertex slot i of t goes to slot vertex_map[i]
/// of the neighbour. The neighbour of t across the edge is deck⁻¹·neighbour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gluing {
    pub neighbour: usize,
    pub neighbour_edge: usize,
    pub deck: Word,
    pub vertex_map: [usize; 3],
}

#[derive(Clone, Debug, Serialize)]
pub struct PleatedSurface {
    pub rep: HolonomyRep,
    pub lamination: SpiralLamination,
    pub triangles: Vec<GalleryTriangle>,
    pub gluings: Vec<[Gluing; 3]>,
    pub vertices: Vec<[Point; 3]>,
    /// Same vertices for the Fuchsian base, the domain chart.
    pub base_vertices: Vec<[Point; 3]>,
    /// Model ideal triangle (0, 1, ∞) to each triangle.
    pub charts: Vec<Mobius>,
    pub certified_radius: usize,
    #[serde(skip)]
    base: HolonomyRep,
}

fn vec_of(w: &Word, k: usize) -> (i64, i64) {
    let h = w.homology(2);
    (h[2 * k - 1], h[2 * k - 2])
}

/// A Farey neighbour of s, least in (|p| + |q|, p, q).
fn neighbour(s: &Slope) -> Slope {
    let (p, q) = s.vector();
    let r = p.abs() + q.abs() + 1;
    let mut best: Option<(i64, i64, i64)> = None;
    for x in -r..=r {
        for y in 0..=r {
            if (q * x - p * y).abs() == 1 {
                let key = (x.abs() + y, x, y);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
    }
    let (_, x, y) = best.expect("a neighbour exists");
    Slope::new(x, y).expect("nonzero")
}

/// (x, c) with c of slope m and [x, c] the waist.
fn pants_basis(m: &Slope, k: usize) -> Result<(Word, Word), PleatedError> {
    Ok(basis_words(&neighbour(m), m, k)?)
}

/// (g, h) with g, h, gh carrying the three slopes and [g, h] the waist.
fn triangulation_basis(t: &FareyTriangle, k: usize) -> Result<(Word, Word), PleatedError> {
    let s = t.slopes();
    for (i, j, l) in [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (2, 1, 0), (0, 2, 1)] {
        let Ok((g, h)) = basis_words(&s[i], &s[j], k) else { continue };
        let (x, y) = (vec_of(&g, k), vec_of(&h, k));
        if Slope::from_vector((x.0 + y.0, x.1 + y.1)).ok() == Some(s[l]) {
            return Ok((g, h));
        }
    }
    Err(PleatedError::Lamination(format!("no basis for {:?}", s)))
}

type RawTriangle = [(Word, Word); 3];

/// Vertex words and curves of the two triangles in handle k, and the two
/// words generating the deck candidates.
fn handle_triangles(h: &HandleLamination, k: usize, base: &HolonomyRep) -> Result<(Vec<RawTriangle>, [Word; 2]), PleatedError> {
    let kw = waist(k);
    match h {
        HandleLamination::Triangulation { slopes } => {
            let (g, hh) = triangulation_basis(slopes, k)?;
            let w0 = hh.mul(&g).inverse();
            let gh = g.mul(&hh);
            let v = |w: Word| (w, kw.clone());
            let a = [v(w0.clone()), v(g.mul(&w0)), v(gh.mul(&w0))];
            let b = [v(w0.clone()), v(gh.mul(&w0)), v(hh.mul(&w0))];
            Ok((vec![a, b], [g, hh]))
        }
        HandleLamination::Pants { slope, leaves } => {
            let (x, c) = pants_basis(slope, k)?;
            let (xi, ci) = (x.inverse(), c.inverse());
            match leaves {
                PantsLeaves::Loop => {
                    let a = [(Word::empty(), c.clone()), (ci.clone(), kw.clone()), (x.mul(&c).mul(&xi).mul(&ci), kw.clone())];
                    let b = [(xi.mul(&ci), kw.clone()), (Word::empty(), c.clone()), (c.mul(&xi).mul(&ci), kw.clone())];
                    Ok((vec![a, b], [x, c]))
                }
                PantsLeaves::Distinct => {
                    // peripheral triple x c X, C, K⁻¹
                    let c1 = x.mul(&c).mul(&xi);
                    let d1 = [(x.clone(), c.clone()), (Word::empty(), c.clone()), (Word::empty(), kw.clone())];
                    let cand_a = [d1[0].clone(), d1[2].clone(), (c1.clone(), c.clone())];
                    let cand_b = [d1[0].clone(), d1[1].clone(), (c1.clone(), kw.clone())];
                    let pts = |t: &RawTriangle| -> Result<Vec<Point>, PleatedError> { t.iter().map(|(w, e)| any_fixed(base, w, e)).collect() };
                    let (p1, pa, pb) = (pts(&d1)?, pts(&cand_a)?, pts(&cand_b)?);
                    let c1m = base.eval(&c1);
                    // candidate a shares (V1, V3) with Δ1 and (V1, c1V2) with c1Δ1
                    let ok_a = opposite(&pa[0], &pa[1], &p1[1], &pa[2])? && opposite(&pa[0], &pa[2], &pa[1], &c1m.apply(&p1[2]))?;
                    let ok_b = opposite(&pb[0], &pb[1], &p1[2], &pb[2])? && opposite(&pb[0], &pb[2], &pb[1], &c1m.apply(&p1[1]))?;
                    let second = match (ok_a, ok_b) {
                        (true, false) => cand_a,
                        (false, true) => cand_b,
                        _ => return Err(PleatedError::Gallery("ambiguous second pants triangle".into())),
                    };
                    Ok((vec![d1, second], [x, c]))
                }
            }
        }
    }
}

fn any_fixed(rep: &HolonomyRep, w: &Word, e: &Word) -> Result<Point, PleatedError> {
    let m = rep.eval(e);
    Ok(rep.apply(w, &m.fixed_point(Selector::Attracting)?))
}

fn side(p: &Point, q: &Point, z: &Point) -> Result<Side, PleatedError> {
    Ok(GeodesicH2::new(*p, *q)?.side_of(z)?)
}

// r and s lie on opposite sides of the geodesic pq
fn opposite(p: &Point, q: &Point, r: &Point, s: &Point) -> Result<bool, PleatedError> {
    Ok(side(p, q, r)? != side(p, q, s)?)
}

/// Left-spiral rule: the vertex is the attracting point of ρ(w e w⁻¹)
/// when the triangle lies to the left of its axis, the repelling one
/// otherwise. Decided in the Fuchsian base.
fn spiral_selector(base: &HolonomyRep, w: &Word, e: &Word, witness: &Point) -> Result<Selector, PleatedError> {
    let m = base.eval(e);
    let FixedPoints::Two(att, rep) = m.fixed_points()? else {
        return Err(HolonomyError::NotLoxodromic(e.to_string()).into());
    };
    let (att, rep) = (base.apply(w, &att), base.apply(w, &rep));
    Ok(match side(&rep, &att, witness)? {
        Side::Left => Selector::Attracting,
        Side::Right => Selector::Repelling,
    })
}

pub(crate) fn vertex_point(rep: &HolonomyRep, d: &VertexDescriptor) -> Result<Point, PleatedError> {
    let m = rep.eval(&d.curve);
    Ok(rep.apply(&d.word, &m.fixed_point(d.selector)?))
}

/// Möbius map taking 0, 1, ∞ to the three points.
pub(crate) fn three_point(v: &[Point; 3]) -> Result<Mobius, PleatedError> {
    let n = MobiusMap::normalizer(&v[0], &v[2])?;
    let w = n.inverse().apply(&v[1]).finite().filter(|w| w.norm() > 1e-300 && w.norm().is_finite());
    let w = w.ok_or_else(|| PleatedError::Gallery("degenerate triangle".into()))?;
    Ok(n * Mobius::diag(w.sqrt()))
}

// Small when the triangle sits near i: a far lift has its ideal vertices
// bunched together on the circle.
fn centre_height(base: &HolonomyRep, t: &RawTriangle) -> Result<f64, PleatedError> {
    let pts = [any_point(base, &t[0])?, any_point(base, &t[1])?, any_point(base, &t[2])?];
    let mut h = 0.0;
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        let g = pts[a].chordal(&pts[b]);
        if !(g > 0.0) {
            return Err(PleatedError::VertexCollision { triangle: 0, gap: g });
        }
        h -= g.ln();
    }
    Ok(h)
}

fn any_point(base: &HolonomyRep, v: &(Word, Word)) -> Result<Point, PleatedError> {
    any_fixed(base, &v.0, &v.1)
}

/// Translate a triangle by the handle group, greedily, until its centre is
/// locally closest to i. Far lifts lose precision and can merge vertices.
fn relift(base: &HolonomyRep, mut t: RawTriangle, gens: &[Word; 2]) -> Result<RawTriangle, PleatedError> {
    let moves = [gens[0].clone(), gens[0].inverse(), gens[1].clone(), gens[1].inverse()];
    let shift = |t: &RawTriangle, m: &Word| -> RawTriangle { t.clone().map(|(w, e)| (m.mul(&w), e)) };
    let mut best = match centre_height(base, &t) {
        Ok(h) => h,
        Err(err) => {
            // the given lift is numerically degenerate; start from the best
            // translate by a generator power instead
            let mut seed: Option<(f64, RawTriangle)> = None;
            for m in &moves {
                let mut p = Word::empty();
                for _ in 0..64 {
                    p = p.mul(m);
                    let cand = shift(&t, &p);
                    if let Ok(h) = centre_height(base, &cand) {
                        if seed.as_ref().is_none_or(|(b, _)| h < *b) {
                            seed = Some((h, cand));
                        }
                    }
                }
            }
            let Some((h, c)) = seed else { return Err(err) };
            t = c;
            h
        }
    };
    for _ in 0..10_000 {
        let mut step = None;
        for m in &moves {
            let cand = shift(&t, m);
            let Ok(d) = centre_height(base, &cand) else { continue };
            if d < best - 1e-12 {
                best = d;
                step = Some(cand);
            }
        }
        match step {
            Some(c) => t = c,
            None => return Ok(t),
        }
    }
    Err(PleatedError::Gallery("lift descent did not settle".into()))
}

fn close(p: &Point, q: &Point) -> bool {
    p.chordal(q) < MATCH_TOL
}

/// Products of at most r letters from {x, X, y, Y}, without backtracking,
/// deduplicated in generation order.
fn deck_candidates(x: &Word, y: &Word, r: usize) -> Vec<Word> {
    let gens = [x.clone(), x.inverse(), y.clone(), y.inverse()];
    let mut out = vec![Word::empty()];
    let mut layer: Vec<(usize, Word)> = vec![(usize::MAX, Word::empty())];
    for _ in 0..r {
        let mut next = Vec::new();
        for (last, w) in &layer {
            for (i, g) in gens.iter().enumerate() {
                if *last != usize::MAX && i == (*last ^ 1) {
                    continue;
                }
                next.push((i, w.mul(g)));
            }
        }
        for (_, w) in &next {
            if !out.contains(w) {
                out.push(w.clone());
            }
        }
        layer = next;
    }
    out
}

fn edge_slots(e: usize) -> (usize, usize) {
    ((e + 1) % 3, (e + 2) % 3)
}

fn build_gluings(base: &HolonomyRep, triangles: &[GalleryTriangle], pts: &[[Point; 3]], decks: &[Vec<Word>]) -> Result<Vec<[Gluing; 3]>, PleatedError> {
    let n = triangles.len();
    let mut found: Vec<[Option<Gluing>; 3]> = vec![[None, None, None]; n];
    let mats: Vec<Vec<(Word, Mobius)>> = decks.iter().map(|ds| ds.iter().map(|d| (d.clone(), base.eval(d))).collect()).collect();
    for t in 0..n {
        for e in 0..3 {
            if found[t][e].is_some() {
                continue;
            }
            let (i, j) = edge_slots(e);
            let handle = triangles[t].handle;
            let mut hit = None;
            'search: for (d, m) in &mats[handle - 1] {
                let (pi, pj) = (m.apply(&pts[t][i]), m.apply(&pts[t][j]));
                for t2 in (0..n).filter(|&u| triangles[u].handle == handle) {
                    for e2 in 0..3 {
                        if (t2, e2) == (t, e) || found[t2][e2].is_some() {
                            continue;
                        }
                        let (a, b) = edge_slots(e2);
                        let vm = if close(&pi, &pts[t2][a]) && close(&pj, &pts[t2][b]) {
                            (a, b)
                        } else if close(&pi, &pts[t2][b]) && close(&pj, &pts[t2][a]) {
                            (b, a)
                        } else {
                            continue;
                        };
                        hit = Some((t2, e2, d.clone(), vm));
                        break 'search;
                    }
                }
            }
            let Some((t2, e2, d, (vi, vj))) = hit else {
                return Err(PleatedError::Gallery(format!("edge {e} of triangle {t} has no partner within deck radius {DECK_RADIUS}")));
            };
            let mut vmap = [0; 3];
            vmap[i] = vi;
            vmap[j] = vj;
            vmap[e] = e2;
            let mut back = [0; 3];
            for s in 0..3 {
                back[vmap[s]] = s;
            }
            found[t2][e2] = Some(Gluing { neighbour: t, neighbour_edge: e, deck: d.inverse(), vertex_map: back });
            found[t][e] = Some(Gluing { neighbour: t2, neighbour_edge: e2, deck: d, vertex_map: vmap });
        }
    }
    Ok(found.into_iter().map(|g| g.map(|x| x.expect("filled"))).collect())
}

/// Realize ν for ρ, certifying loxodromicity up to the longest vertex core.
pub fn realize(rep: &HolonomyRep, lam: &SpiralLamination) -> Result<PleatedSurface, PleatedError> {
    realize_with_radius(rep, lam, None)
}

/// As `realize`, with an explicit certification radius.
pub fn realize_with_radius(rep: &HolonomyRep, lam: &SpiralLamination, radius: Option<usize>) -> Result<PleatedSurface, PleatedError> {
    lam.validate()?;
    if rep.genus() != 2 {
        return Err(PleatedError::Unsupported(format!("genus {}", rep.genus())));
    }
    let base = rep.fuchsian_base()?;
    let mut triangles = Vec::new();
    let mut decks = Vec::new();
    for (i, h) in lam.handles.iter().enumerate() {
        let k = i + 1;
        let (raw, [x, y]) = handle_triangles(h, k, &base)?;
        decks.push(deck_candidates(&x, &y, DECK_RADIUS));
        for t in raw {
            let t = relift(&base, t, &[x.clone(), y.clone()])?;
            let wit: Vec<Point> = t.iter().map(|(w, e)| any_fixed(&base, w, e)).collect::<Result<_, _>>()?;
            let mut vs = Vec::new();
            for s in 0..3 {
                let (w, e) = &t[s];
                // both other vertices lie on the same side; fall back if one
                // is numerically on the axis
                let selector = spiral_selector(&base, w, e, &wit[(s + 1) % 3]).or_else(|_| spiral_selector(&base, w, e, &wit[(s + 2) % 3]))?;
                vs.push(VertexDescriptor { word: w.clone(), curve: e.clone(), selector });
            }
            triangles.push(GalleryTriangle { handle: k, vertices: [vs[0].clone(), vs[1].clone(), vs[2].clone()] });
        }
    }
    // loxodromicity is a conjugacy invariant, so the cores decide the radius
    let need = triangles.iter().flat_map(|t| t.vertices.iter().map(|v| v.curve.cyclic_reduce().len())).max().unwrap_or(1);
    let have = radius.unwrap_or(need);
    if have < need {
        return Err(PleatedError::Radius { have, need });
    }
    let report = purely_loxodromic_scan(rep, have);
    if !report.certified {
        return Err(PleatedError::NotCertified(have));
    }
    for t in &triangles {
        for v in &t.vertices {
            if rep.eval(&v.curve).classify().kind != MobiusKind::Loxodromic {
                return Err(HolonomyError::NotLoxodromic(v.curve.to_string()).into());
            }
        }
    }
    let points = |r: &HolonomyRep| -> Result<Vec<[Point; 3]>, PleatedError> {
        triangles
            .iter()
            .map(|t| Ok([vertex_point(r, &t.vertices[0])?, vertex_point(r, &t.vertices[1])?, vertex_point(r, &t.vertices[2])?]))
            .collect()
    };
    let base_vertices = points(&base)?;
    let vertices = points(rep)?;
    let gluings = build_gluings(&base, &triangles, &base_vertices, &decks)?;
    let mut surface = PleatedSurface {
        rep: rep.clone(),
        lamination: lam.clone(),
        triangles,
        gluings,
        vertices,
        base_vertices,
        charts: Vec::new(),
        certified_radius: have,
        base,
    };
    surface.refresh()?;
    Ok(surface)
}

impl PleatedSurface {
    fn refresh(&mut self) -> Result<(), PleatedError> {
        for (t, v) in self.vertices.iter().enumerate() {
            for (i, j) in [(0, 1), (1, 2), (0, 2)] {
                let gap = v[i].chordal(&v[j]);
                if !(gap > VERTEX_GAP) {
                    return Err(PleatedError::VertexCollision { triangle: t, gap });
                }
            }
        }
        self.charts = self.vertices.iter().map(three_point).collect::<Result<_, _>>()?;
        Ok(())
    }

    pub fn base(&self) -> &HolonomyRep {
        &self.base
    }

    /// The same gallery with one selector flipped; gluings are kept, so the
    /// result is in general not a pleated surface.
    pub fn with_flipped_selector(&self, triangle: usize, slot: usize) -> Result<PleatedSurface, PleatedError> {
        if triangle >= self.triangles.len() || slot > 2 {
            return Err(PleatedError::Gallery(format!("no vertex {slot} in triangle {triangle}")));
        }
        let mut s = self.clone();
        let d = &mut s.triangles[triangle].vertices[slot];
        d.selector = d.selector.flip();
        let d = d.clone();
        s.vertices[triangle][slot] = vertex_point(&s.rep, &d)?;
        s.base_vertices[triangle][slot] = vertex_point(&s.base, &d)?;
        s.refresh()?;
        Ok(s)
    }

    /// Conjugate the holonomy and every vertex by g.
    pub fn conjugated(&self, g: &Mobius) -> Result<PleatedSurface, PleatedError> {
        let mut s = self.clone();
        s.rep = self.rep.conjugated(g);
        for v in s.vertices.iter_mut() {
            for p in v.iter_mut() {
                *p = g.apply(p);
            }
        }
        s.refresh()?;
        Ok(s)
    }
}


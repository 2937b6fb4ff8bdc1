use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{CurveCatalog, CurveClass, TopologyError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PantsDecomposition {
    pub genus: usize,
    pub curves: Vec<CurveClass>,
}

/// Pants as nodes; each entry lists the three cuffs by curve index (a curve
/// bounding the same pants on both sides appears twice).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGraph {
    pub pants: Vec<[usize; 3]>,
}

impl DualGraph {
    /// Pants adjacent to curve k, with multiplicity.
    pub fn sides(&self, k: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (p, cuffs) in self.pants.iter().enumerate() {
            for &c in cuffs {
                if c == k {
                    out.push(p);
                }
            }
        }
        out
    }

    pub fn is_loop(&self, k: usize) -> bool {
        let s = self.sides(k);
        s.len() == 2 && s[0] == s[1]
    }

    /// Multiset of (loops, multi-edges) per pants, for shape comparison.
    fn shape(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .pants
            .iter()
            .map(|c| {
                let loops = (0..3).filter(|&i| c.iter().filter(|&&x| x == c[i]).count() == 2).count() / 2;
                (loops, 3 - 2 * loops)
            })
            .collect();
        v.sort();
        v
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Count { expected: usize, found: usize },
    Parallel { first: usize, second: usize },
    Intersect { first: usize, second: usize, crossings: usize },
    NonSimple { index: usize },
    DualGraph { detail: String },
    Oracle { detail: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PantsCertificate {
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub dual_graph: Option<DualGraph>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveCase {
    OneHoledTorus,
    FourHoledSphere,
}

impl MoveCase {
    pub fn crossings(self) -> usize {
        match self {
            MoveCase::OneHoledTorus => 1,
            MoveCase::FourHoledSphere => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementaryMove {
    pub removed: CurveClass,
    pub added: CurveClass,
    pub case: MoveCase,
    /// Boundary curves of the subsurface containing both ℓ and m.
    pub subsurface: Vec<CurveClass>,
}

impl ElementaryMove {
    pub fn reversed(&self) -> ElementaryMove {
        ElementaryMove { removed: self.added.clone(), added: self.removed.clone(), case: self.case, subsurface: self.subsurface.clone() }
    }
}

/// Caps for move enumeration and path search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathCap {
    pub depth: usize,
    pub word_length: usize,
}

impl Default for PathCap {
    fn default() -> Self {
        PathCap { depth: 4, word_length: 4 }
    }
}

impl PantsDecomposition {
    pub fn new(genus: usize, curves: Vec<CurveClass>) -> Self {
        PantsDecomposition { genus, curves }
    }

    /// {a1, a2, a1 b1 A1 B1}.
    pub fn standard_g2() -> Self {
        Self::parse(2, &["a1", "a2", "a1 b1 A1 B1"]).expect("literal")
    }

    pub fn parse(genus: usize, words: &[&str]) -> Result<Self, TopologyError> {
        let curves = words.iter().map(|s| CurveClass::parse(s, genus)).collect::<Result<_, _>>()?;
        Ok(PantsDecomposition { genus, curves })
    }

    pub fn expected_count(&self) -> usize {
        3 * (self.genus - 1)
    }

    /// Dual graph, decided from separating curves. Genus 2 only: with no
    /// separating curve the graph is a theta, with one it is a dumbbell.
    pub fn dual_graph(&self) -> Result<DualGraph, String> {
        if self.genus != 2 {
            return Err(format!("dual graph is decided for genus 2 only, got genus {}", self.genus));
        }
        if self.curves.len() != 3 {
            return Err("need 3 curves".into());
        }
        let sep: Vec<usize> = (0..3).filter(|&i| self.curves[i].is_separating()).collect();
        match sep.as_slice() {
            [] => Ok(DualGraph { pants: vec![[0, 1, 2], [0, 1, 2]] }),
            [s] => {
                let others: Vec<usize> = (0..3).filter(|i| i != s).collect();
                Ok(DualGraph { pants: vec![[others[0], others[0], *s], [others[1], others[1], *s]] })
            }
            _ => Err(format!("{} separating curves", sep.len())),
        }
    }
}

fn oracle_violation(e: TopologyError) -> Violation {
    Violation::Oracle { detail: e.to_string() }
}

/// Checks count, simplicity, pairwise disjointness and non-parallelism via
/// the intersection oracle, and the dual graph shape.
pub fn validate_pants_decomposition(p: &PantsDecomposition, catalog: &mut CurveCatalog) -> PantsCertificate {
    let mut violations = Vec::new();
    if p.curves.len() != p.expected_count() {
        violations.push(Violation::Count { expected: p.expected_count(), found: p.curves.len() });
    }
    let mut ids = Vec::new();
    for (i, c) in p.curves.iter().enumerate() {
        match catalog.identify(c) {
            Ok(id) => {
                if !catalog.entry(id).simple {
                    violations.push(Violation::NonSimple { index: i });
                }
                ids.push(Some(id));
            }
            Err(e) => {
                violations.push(oracle_violation(e));
                ids.push(None);
            }
        }
    }
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            let (Some(a), Some(b)) = (ids[i], ids[j]) else { continue };
            if a == b {
                violations.push(Violation::Parallel { first: i, second: j });
                continue;
            }
            match catalog.intersection(a, b) {
                Ok(0) => {}
                Ok(n) => violations.push(Violation::Intersect { first: i, second: j, crossings: n }),
                Err(e) => violations.push(oracle_violation(e)),
            }
        }
    }
    let dual_graph = if violations.is_empty() {
        match p.dual_graph() {
            Ok(g) => Some(g),
            Err(detail) => {
                violations.push(Violation::DualGraph { detail });
                None
            }
        }
    } else {
        None
    };
    PantsCertificate { valid: violations.is_empty(), violations, dual_graph }
}

fn member_index(p: &PantsDecomposition, ids: &[usize], l: &CurveClass, catalog: &mut CurveCatalog) -> Result<usize, TopologyError> {
    let id = catalog.identify(l)?;
    ids.iter().position(|&x| x == id).ok_or_else(|| TopologyError::NotMember(l.to_string())).inspect(|_| {
        let _ = p;
    })
}

fn move_case(p: &PantsDecomposition, k: usize) -> Result<(MoveCase, Vec<CurveClass>), TopologyError> {
    let g = p.dual_graph().map_err(TopologyError::Oracle)?;
    let sides = g.sides(k);
    let mut boundary = Vec::new();
    let mut seen = Vec::new();
    for &s in &sides {
        if seen.contains(&s) {
            continue;
        }
        seen.push(s);
        for &c in &g.pants[s] {
            if c != k {
                boundary.push(p.curves[c].clone());
            }
        }
    }
    let case = if g.is_loop(k) { MoveCase::OneHoledTorus } else { MoveCase::FourHoledSphere };
    Ok((case, boundary))
}

fn ids_of(p: &PantsDecomposition, catalog: &mut CurveCatalog) -> Result<Vec<usize>, TopologyError> {
    p.curves.iter().map(|c| catalog.identify(c)).collect()
}

fn moves_by_id(p: &PantsDecomposition, ids: &[usize], k: usize, word_cap: usize, catalog: &mut CurveCatalog) -> Result<Vec<(usize, ElementaryMove)>, TopologyError> {
    if word_cap == 0 {
        return Ok(Vec::new());
    }
    let (case, subsurface) = move_case(p, k)?;
    let need = case.crossings();
    let l = ids[k];
    let mut out = Vec::new();
    for m in catalog.simple_curves(word_cap)? {
        if ids.contains(&m) || !catalog.may_intersect_exactly(l, m, need) {
            continue;
        }
        if (0..ids.len()).any(|j| j != k && !catalog.may_intersect_exactly(ids[j], m, 0)) {
            continue;
        }
        let mut ok = true;
        for j in 0..ids.len() {
            if j != k && catalog.intersection(ids[j], m)? != 0 {
                ok = false;
                break;
            }
        }
        if !ok || catalog.intersection(l, m)? != need {
            continue;
        }
        out.push((
            m,
            ElementaryMove { removed: p.curves[k].clone(), added: catalog.curve(m).clone(), case, subsurface: subsurface.clone() },
        ));
    }
    Ok(out)
}

/// All elementary moves replacing ℓ by a simple curve with a representative
/// of word length ≤ word_cap.
pub fn enumerate_elementary_moves(p: &PantsDecomposition, l: &CurveClass, word_cap: usize, catalog: &mut CurveCatalog) -> Result<Vec<ElementaryMove>, TopologyError> {
    let ids = ids_of(p, catalog)?;
    let k = member_index(p, &ids, l, catalog)?;
    Ok(moves_by_id(p, &ids, k, word_cap, catalog)?.into_iter().map(|(_, m)| m).collect())
}

/// Replace the member parallel to `mv.removed` by `mv.added`.
pub fn apply_move(p: &PantsDecomposition, mv: &ElementaryMove, catalog: &mut CurveCatalog) -> Result<PantsDecomposition, TopologyError> {
    let ids = ids_of(p, catalog)?;
    let k = member_index(p, &ids, &mv.removed, catalog)?;
    let mut q = p.clone();
    q.curves[k] = mv.added.clone();
    Ok(q)
}

/// Isotopy equality: every curve of q is disjoint from every curve of p
/// and the dual graphs have the same shape.
pub fn same_decomposition(p: &PantsDecomposition, q: &PantsDecomposition, catalog: &mut CurveCatalog) -> Result<bool, TopologyError> {
    if p.genus != q.genus || p.curves.len() != q.curves.len() {
        return Ok(false);
    }
    let (a, b) = (ids_of(p, catalog)?, ids_of(q, catalog)?);
    for &x in &a {
        for &y in &b {
            if catalog.intersection(x, y)? != 0 {
                return Ok(false);
            }
        }
    }
    match (p.dual_graph(), q.dual_graph()) {
        (Ok(g), Ok(h)) => Ok(g.shape() == h.shape()),
        _ => Ok(false),
    }
}

/// Breadth-first search in the pants graph restricted to curves of word
/// length ≤ cap.word_length; the path returned is minimal within the cap.
pub fn pants_graph_path(p0: &PantsDecomposition, p1: &PantsDecomposition, cap: PathCap, catalog: &mut CurveCatalog) -> Result<Vec<ElementaryMove>, TopologyError> {
    if p0.genus != p1.genus {
        return Err(TopologyError::Genus(p1.genus));
    }
    let key = |ids: &[usize]| {
        let mut v = ids.to_vec();
        v.sort();
        v
    };
    let start_ids = ids_of(p0, catalog)?;
    let target = key(&ids_of(p1, catalog)?);
    let mut parent: HashMap<Vec<usize>, Option<(Vec<usize>, ElementaryMove)>> = HashMap::new();
    let mut queue = VecDeque::new();
    parent.insert(key(&start_ids), None);
    queue.push_back((p0.clone(), start_ids, 0usize));
    let mut found = None;
    while let Some((p, ids, depth)) = queue.pop_front() {
        if key(&ids) == target {
            found = Some(key(&ids));
            break;
        }
        if depth >= cap.depth {
            continue;
        }
        for k in 0..ids.len() {
            for (m, mv) in moves_by_id(&p, &ids, k, cap.word_length, catalog)? {
                let mut next_ids = ids.clone();
                next_ids[k] = m;
                let nk = key(&next_ids);
                if parent.contains_key(&nk) {
                    continue;
                }
                parent.insert(nk, Some((key(&ids), mv.clone())));
                let mut q = p.clone();
                q.curves[k] = mv.added.clone();
                queue.push_back((q, next_ids, depth + 1));
            }
        }
    }
    let Some(mut cur) = found else {
        return Err(TopologyError::CapExhausted(format!(
            "no path within depth {} and word length {}",
            cap.depth, cap.word_length
        )));
    };
    let mut path = Vec::new();
    while let Some(Some((prev, mv))) = parent.get(&cur) {
        path.push(mv.clone());
        cur = prev.clone();
    }
    path.reverse();
    Ok(path)
}

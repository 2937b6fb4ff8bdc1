use std::collections::{BTreeMap, HashMap};

use super::{algebraic_intersection, CurveClass, TopologyError, Word};
use crate::holonomy::{crossings_at_ball, is_parallel, stable_intersection, HolonomyRep, DEFAULT_BALL};

fn oracle<E: std::fmt::Display>(e: E) -> TopologyError {
    TopologyError::Oracle(e.to_string())
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub curve: CurveClass,
    pub length: f64,
    pub homology: Vec<i64>,
    pub simple: bool,
}

/// Registry of free homotopy classes of closed curves, identified through
/// geodesic lengths and axis coincidence under a Fuchsian representation,
/// with memoised geometric intersection numbers.
#[derive(Clone, Debug)]
pub struct CurveCatalog {
    rep: HolonomyRep,
    ball: usize,
    max_ball: usize,
    entries: Vec<CatalogEntry>,
    by_length: BTreeMap<i64, Vec<usize>>,
    inter: HashMap<(usize, usize), usize>,
    enumerated: usize,
}

const LENGTH_QUANTUM: f64 = 1e-6;

fn primitive_or_zero(h: &[i64]) -> bool {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let g = h.iter().fold(0, |g, &x| gcd(g, x));
    g <= 1
}

impl CurveCatalog {
    pub fn new(rep: &HolonomyRep) -> Result<Self, TopologyError> {
        Ok(CurveCatalog {
            rep: rep.fuchsian_base().map_err(oracle)?,
            ball: DEFAULT_BALL,
            max_ball: DEFAULT_BALL + 2,
            entries: Vec::new(),
            by_length: BTreeMap::new(),
            inter: HashMap::new(),
            enumerated: 0,
        })
    }

    pub fn rep(&self) -> &HolonomyRep {
        &self.rep
    }

    pub fn genus(&self) -> usize {
        self.rep.genus()
    }

    pub fn entry(&self, id: usize) -> &CatalogEntry {
        &self.entries[id]
    }

    pub fn curve(&self, id: usize) -> &CurveClass {
        &self.entries[id].curve
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, c: &CurveClass, length: f64) -> Result<Option<usize>, TopologyError> {
        let q = (length / LENGTH_QUANTUM).round() as i64;
        for k in q - 1..=q + 1 {
            for &id in self.by_length.get(&k).into_iter().flatten() {
                let e = &self.entries[id];
                if (e.length - length).abs() > 1e-7 * (1.0 + length) {
                    continue;
                }
                if e.curve.word().unoriented_key() == c.word().unoriented_key()
                    || is_parallel(&self.rep, &e.curve, c, self.ball).map_err(oracle)?
                {
                    return Ok(Some(id));
                }
            }
        }
        Ok(None)
    }

    fn insert(&mut self, c: &CurveClass, length: f64, simple: Option<bool>) -> Result<usize, TopologyError> {
        let simple = match simple {
            Some(s) => s,
            None => {
                let r = stable_intersection(&self.rep, c, c, self.ball, self.max_ball).map_err(oracle)?;
                r.count == 0
            }
        };
        let id = self.entries.len();
        let curve = c.clone().with_simple(simple);
        self.entries.push(CatalogEntry { homology: c.homology(), curve, length, simple });
        let q = (length / LENGTH_QUANTUM).round() as i64;
        self.by_length.entry(q).or_default().push(id);
        Ok(id)
    }

    /// Catalogue id of the class of c, registering it if new.
    pub fn identify(&mut self, c: &CurveClass) -> Result<usize, TopologyError> {
        if c.genus() != self.genus() {
            return Err(TopologyError::Genus(c.genus()));
        }
        let length = self.rep.geodesic_length(c).map_err(oracle)?;
        match self.lookup(c, length)? {
            Some(id) => Ok(id),
            None => self.insert(c, length, None),
        }
    }

    /// Ids of all simple classes having a cyclically reduced representative
    /// of length ≤ max_len.
    pub fn simple_curves(&mut self, max_len: usize) -> Result<Vec<usize>, TopologyError> {
        if max_len > self.enumerated {
            let g = self.genus();
            let mut seen = std::collections::HashSet::new();
            for n in self.enumerated + 1..=max_len {
                for w in Word::all_of_length(g, n) {
                    if !w.is_cyclically_reduced() || !seen.insert(w.unoriented_key()) {
                        continue;
                    }
                    let c = CurveClass::new(w, g)?;
                    if !primitive_or_zero(&c.homology()) {
                        continue;
                    }
                    // cheap rejection: crossings found among the first translates are genuine
                    if crossings_at_ball(&self.rep, &c, &c, 0).map_err(oracle)?.0 > 0 {
                        continue;
                    }
                    self.identify(&c)?;
                }
            }
            self.enumerated = max_len;
        }
        Ok((0..self.entries.len())
            .filter(|&i| self.entries[i].simple && self.entries[i].curve.word().len() <= max_len)
            .collect())
    }

    /// Geometric intersection number of two catalogued classes.
    pub fn intersection(&mut self, i: usize, j: usize) -> Result<usize, TopologyError> {
        if i == j {
            return Ok(0);
        }
        let key = (i.min(j), i.max(j));
        if let Some(&n) = self.inter.get(&key) {
            return Ok(n);
        }
        let (a, b) = (&self.entries[key.0].curve, &self.entries[key.1].curve);
        let r = stable_intersection(&self.rep, a, b, self.ball, self.max_ball).map_err(oracle)?;
        if !r.stable {
            return Err(TopologyError::Oracle(format!("intersection of {a} and {b} not stable")));
        }
        self.inter.insert(key, r.count);
        Ok(r.count)
    }

    /// Cheap necessary conditions for i(i, j) == n: parity and the bound
    /// |ω| ≤ i from algebraic intersection.
    pub fn may_intersect_exactly(&self, i: usize, j: usize, n: usize) -> bool {
        let w = algebraic_intersection(&self.entries[i].homology, &self.entries[j].homology).unsigned_abs() as usize;
        w <= n && (n - w) % 2 == 0
    }
}

use serde::{Deserialize, Serialize};

use crate::geometry::{FixedPoints, MobiusKind, MobiusMap};
use crate::{Mobius, Point, C64};

type V3 = [f64; 3];

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn sub(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: &V3) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: &V3) -> V3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn angle(a: &V3, b: &V3) -> f64 {
    norm(&cross(a, b)).atan2(dot(a, b))
}

/// Stereographic projection onto the unit sphere, 0 ↦ south pole.
fn to_sphere(p: &Point) -> V3 {
    match p.finite() {
        None => [0.0, 0.0, 1.0],
        Some(z) => {
            let r2 = z.norm_sqr();
            if r2 <= 1.0 {
                let d = 1.0 + r2;
                [2.0 * z.re / d, 2.0 * z.im / d, (r2 - 1.0) / d]
            } else {
                let t = 1.0 / r2;
                let d = 1.0 + t;
                [2.0 * z.re * t / d, 2.0 * z.im * t / d, (1.0 - t) / d]
            }
        }
    }
}

fn from_sphere(p: &V3) -> Point {
    if p[2] <= 0.0 {
        return Point::Finite(C64::new(p[0], p[1]) / (1.0 - p[2]));
    }
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 == 0.0 {
        return Point::Infinity;
    }
    Point::Finite(C64::new(p[0], p[1]) * ((1.0 + p[2]) / r2))
}

/// Closed spherical cap {p : angle(p, centre) ≤ radius} on the Riemann
/// sphere; a round disk of Ĉ, possibly containing ∞.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereCap {
    pub center: Point,
    /// Angular radius in (0, π).
    pub radius: f64,
}

impl SphereCap {
    fn vector(&self) -> V3 {
        to_sphere(&self.center)
    }

    fn from_vector(v: &V3, radius: f64) -> Self {
        SphereCap { center: from_sphere(&unit(v)), radius }
    }

    pub fn contains(&self, p: &Point) -> bool {
        angle(&self.vector(), &to_sphere(p)) <= self.radius
    }

    /// Angular gap to another cap; negative when they overlap.
    pub fn gap(&self, o: &SphereCap) -> f64 {
        angle(&self.vector(), &o.vector()) - self.radius - o.radius
    }

    /// How far `inner` sits inside self.
    pub fn containment(&self, inner: &SphereCap) -> f64 {
        self.radius - angle(&self.vector(), &inner.vector()) - inner.radius
    }
}

// Hermitian form [[a, b], [b̄, d]]; the disk is where z̄ᵀHz < 0.
#[derive(Clone, Copy)]
struct Herm {
    a: f64,
    b: C64,
    d: f64,
}

impl Herm {
    fn disk(log_r: f64) -> Self {
        // |w|² − r² < 0, scaled by 1/r
        Herm { a: (-log_r).exp(), b: C64::new(0.0, 0.0), d: -log_r.exp() }
    }

    fn neg(self) -> Self {
        Herm { a: -self.a, b: -self.b, d: -self.d }
    }

    /// The form of the image under m.
    fn push(self, m: &Mobius) -> Self {
        let [p, q, r, s] = m.inverse().entries();
        // Mᴴ H M for M = m⁻¹
        let h = [[C64::new(self.a, 0.0), self.b], [self.b.conj(), C64::new(self.d, 0.0)]];
        let mm = [[p, q], [r, s]];
        let mut hm = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                hm[i][j] = h[i][0] * mm[0][j] + h[i][1] * mm[1][j];
            }
        }
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = mm[0][i].conj() * hm[0][j] + mm[1][i].conj() * hm[1][j];
            }
        }
        let scale = out[0][0].re.abs().max(out[1][1].re.abs()).max(out[0][1].norm());
        Herm { a: out[0][0].re / scale, b: out[0][1] / scale, d: out[1][1].re / scale }
    }

    fn cap(self) -> SphereCap {
        let m = [2.0 * self.b.re, 2.0 * self.b.im, self.a - self.d];
        let det = self.a * self.d - self.b.norm_sqr();
        let radius = (2.0 * (-det).max(0.0).sqrt()).atan2(self.a + self.d);
        SphereCap::from_vector(&[-m[0], -m[1], -m[2]], radius)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskPair {
    /// Around the repelling fixed point.
    pub minus: SphereCap,
    /// Around the attracting fixed point; g maps the exterior of `minus` into it.
    pub plus: SphereCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    #[serde(with = "crate::serde_ext")]
    pub disjointness_margin: f64,
    pub mapping_margins: Vec<f64>,
}

impl Verification {
    pub fn positive(&self) -> bool {
        self.disjointness_margin > 0.0 && self.mapping_margins.iter().all(|m| *m > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchottkyCertificate {
    pub generators: Vec<Mobius>,
    pub disks: Vec<DiskPair>,
    /// Per generator, (s, θ): in the chart sending the repelling and
    /// attracting points to 0 and ∞ the disks are |w| < e^(s−h) and
    /// |w| > e^(s+h), h = θ ℓ / 2.
    pub parameters: Vec<[f64; 2]>,
    /// Smallest angular gap between any two disks.
    #[serde(with = "crate::serde_ext")]
    pub disjointness_margin: f64,
    /// Per generator, how far g(exterior of minus) sits inside plus.
    pub mapping_margins: Vec<f64>,
    pub verification: Option<Verification>,
    pub certified: bool,
    pub failure: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PingPongCaps {
    /// Powers m of the isometric circles of g^(±m) used as seeds.
    pub isometric_powers: u32,
    pub rounds: usize,
}

impl Default for PingPongCaps {
    fn default() -> Self {
        PingPongCaps { isometric_powers: 4, rounds: 200 }
    }
}

struct Gen {
    g: Mobius,
    chart: Mobius,
    length: f64,
}

fn prepare(g: &Mobius) -> Result<Gen, String> {
    let cls = g.classify();
    if cls.kind != MobiusKind::Loxodromic {
        return Err(format!("not loxodromic ({:?})", cls.kind));
    }
    let FixedPoints::Two(att, rep) = g.fixed_points().map_err(|e| e.to_string())? else {
        return Err("not loxodromic".into());
    };
    let chart = MobiusMap::normalizer(&rep, &att).map_err(|e| e.to_string())?;
    let length = g.translation_length().map_err(|e| e.to_string())?;
    Ok(Gen { g: *g, chart, length })
}

fn disks(gen: &Gen, s: f64, theta: f64) -> (DiskPair, SphereCap) {
    let h = theta * gen.length / 2.0;
    let minus = Herm::disk(s - h).push(&gen.chart).cap();
    let plus = Herm::disk(s + h).neg().push(&gen.chart).cap();
    // g(exterior of minus) in the chart: |w| > e^(s − h + ℓ)
    let image = Herm::disk(s - h + gen.length).neg().push(&gen.chart).cap();
    (DiskPair { minus, plus }, image)
}

fn margins(gens: &[Gen], params: &[[f64; 2]]) -> (Vec<DiskPair>, f64, Vec<f64>) {
    let mut pairs = Vec::new();
    let mut mapping = Vec::new();
    for (g, p) in gens.iter().zip(params) {
        let (d, image) = disks(g, p[0], p[1]);
        mapping.push(d.plus.containment(&image));
        pairs.push(d);
    }
    (pairs.clone(), disjointness(&pairs), mapping)
}

fn disjointness(pairs: &[DiskPair]) -> f64 {
    let all: Vec<SphereCap> = pairs.iter().flat_map(|d| [d.minus, d.plus]).collect();
    let mut worst = f64::INFINITY;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            worst = worst.min(all[i].gap(&all[j]));
        }
    }
    worst
}

fn score(gens: &[Gen], params: &[[f64; 2]]) -> f64 {
    let (_, d, m) = margins(gens, params);
    let s = m.iter().copied().fold(d, f64::min);
    if s.is_nan() {
        f64::NEG_INFINITY
    } else {
        s
    }
}

/// Chart log-radii of the isometric circles of g^m and g^-m, averaged.
fn seeds(gen: &Gen, powers: u32) -> Vec<f64> {
    let inv = gen.chart.inverse();
    let log_radius = |h: &Mobius| -> Option<f64> {
        let c = h.c();
        if c.norm() < 1e-300 {
            return None;
        }
        let (centre, r) = (-h.d() / c, 1.0 / c.norm());
        let mut acc = 0.0;
        for k in 0..4 {
            let z = centre + C64::from_polar(r, k as f64 * std::f64::consts::FRAC_PI_2);
            let w = inv.apply(&Point::Finite(z)).finite()?;
            let l = w.norm().ln();
            if !l.is_finite() {
                return None;
            }
            acc += l;
        }
        Some(acc / 4.0)
    };
    let mut out = Vec::new();
    let mut pw = Mobius::identity();
    for _ in 0..powers.max(1) {
        pw = (pw * gen.g).renormalized();
        if let (Some(x), Some(y)) = (log_radius(&pw), log_radius(&pw.inverse())) {
            out.push((x + y) / 2.0);
        }
    }
    if out.is_empty() {
        out.push(0.0);
    }
    out
}

const THETA_RANGE: (f64, f64) = (0.02, 0.98);

/// Search for ping-pong disks: seeded by isometric circles, then improved
/// by coordinate line search on the chart parameters. The certificate is
/// certified only if the independent re-verification agrees.
pub fn ping_pong_certify(gens: &[Mobius], caps: &PingPongCaps) -> SchottkyCertificate {
    let fail = |why: String| SchottkyCertificate {
        generators: gens.to_vec(),
        disks: Vec::new(),
        parameters: Vec::new(),
        disjointness_margin: f64::NEG_INFINITY,
        mapping_margins: Vec::new(),
        verification: None,
        certified: false,
        failure: Some(why),
    };
    if gens.is_empty() {
        return fail("no generators".into());
    }
    let mut prepared = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        match prepare(g) {
            Ok(p) => prepared.push(p),
            Err(e) => return fail(format!("generator {i}: {e}")),
        }
    }
    let seed_lists: Vec<Vec<f64>> = prepared.iter().map(|g| seeds(g, caps.isometric_powers)).collect();
    let mut params: Vec<[f64; 2]> = seed_lists.iter().map(|s| [s[0], 0.5]).collect();
    for i in 0..params.len() {
        for &s in &seed_lists[i] {
            let mut trial = params.clone();
            trial[i][0] = s;
            if score(&prepared, &trial) > score(&prepared, &params) {
                params = trial;
            }
        }
    }
    let mut steps: Vec<[f64; 2]> = prepared.iter().map(|g| [g.length / 4.0, 0.2]).collect();
    let mut best = score(&prepared, &params);
    for _ in 0..caps.rounds {
        let mut improved = false;
        for i in 0..params.len() {
            for c in 0..2 {
                for dir in [1.0, -1.0] {
                    loop {
                        let mut trial = params.clone();
                        trial[i][c] += dir * steps[i][c];
                        if c == 1 && !(THETA_RANGE.0..=THETA_RANGE.1).contains(&trial[i][1]) {
                            break;
                        }
                        let sc = score(&prepared, &trial);
                        if sc > best + 1e-15 {
                            best = sc;
                            params = trial;
                            improved = true;
                        } else {
                            break;
                        }
                    }
                }
            }
        }
        if !improved {
            for s in steps.iter_mut() {
                s[0] /= 2.0;
                s[1] /= 2.0;
            }
            if steps.iter().all(|s| s[0] < 1e-9 && s[1] < 1e-9) {
                break;
            }
        }
    }
    let (disks, disjointness_margin, mapping_margins) = margins(&prepared, &params);
    let mut cert = SchottkyCertificate {
        generators: gens.to_vec(),
        disks,
        parameters: params,
        disjointness_margin,
        mapping_margins,
        verification: None,
        certified: false,
        failure: None,
    };
    let v = verify_certificate(&cert);
    let constructed = disjointness_margin > 0.0 && cert.mapping_margins.iter().all(|m| *m > 0.0);
    cert.certified = constructed && v.positive();
    if !cert.certified {
        cert.failure = Some(if constructed {
            format!("re-verification failed: gap {:.3e}, mapping {:?}", v.disjointness_margin, v.mapping_margins)
        } else {
            format!("best margins found: gap {:.3e}, mapping {:?}", disjointness_margin, cert.mapping_margins)
        });
    }
    cert.verification = Some(v);
    cert
}

// Image under g of the complement of a cap, from three boundary points and
// the antipode of the centre.
fn image_of_exterior(g: &Mobius, cap: &SphereCap) -> SphereCap {
    let n = cap.vector();
    let e = if n[0].abs() <= n[1].abs() && n[0].abs() <= n[2].abs() {
        [1.0, 0.0, 0.0]
    } else if n[1].abs() <= n[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let en = dot(&e, &n);
    let u = unit(&[e[0] - en * n[0], e[1] - en * n[1], e[2] - en * n[2]]);
    let v = cross(&n, &u);
    let (cr, sr) = (cap.radius.cos(), cap.radius.sin());
    let q: Vec<V3> = (0..3)
        .map(|k| {
            let phi = k as f64 * 2.0 * std::f64::consts::PI / 3.0;
            let p = [0, 1, 2].map(|i| cr * n[i] + sr * (phi.cos() * u[i] + phi.sin() * v[i]));
            to_sphere(&g.apply(&from_sphere(&p)))
        })
        .collect();
    let mut m = unit(&cross(&sub(&q[1], &q[0]), &sub(&q[2], &q[0])));
    let mut h = (dot(&m, &q[0]) + dot(&m, &q[1]) + dot(&m, &q[2])) / 3.0;
    let inside = to_sphere(&g.apply(&from_sphere(&[-n[0], -n[1], -n[2]])));
    if dot(&m, &inside) < h {
        m = [-m[0], -m[1], -m[2]];
        h = -h;
    }
    SphereCap::from_vector(&m, h.clamp(-1.0, 1.0).acos())
}

/// Margins recomputed from the stored disks alone: pairwise gaps, and the
/// image of each minus-exterior rebuilt from mapped boundary points.
pub fn verify_certificate(cert: &SchottkyCertificate) -> Verification {
    let mapping_margins = cert.generators.iter().zip(&cert.disks).map(|(g, d)| d.plus.containment(&image_of_exterior(g, &d.minus))).collect();
    Verification { disjointness_margin: if cert.disks.is_empty() { f64::NEG_INFINITY } else { disjointness(&cert.disks) }, mapping_margins }
}

//! Iteration of holomorphic self-maps and Wolff–Denjoy classification of orbits.
//!
//! Maps are rational, given component-wise as ratios of polynomials with complex
//! coefficients. A map is *validated* statistically: a stratified grid of the
//! domain, including near-boundary strata, maps into the domain and random pairs
//! do not move apart in the Kobayashi distance. Validation is a precondition
//! for iteration, not a proof that the map is a self-map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::CPoint;
use crate::domains::{DomainError, DomainSpec};
use crate::geodesics::fmt_num;
use crate::kobayashi;
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("map has {got} components, domain dimension is {expected}")]
    Arity { expected: usize, got: usize },
    #[error("invalid map: {0}")]
    Invalid(String),
    #[error("denominator vanishes at {0:?}")]
    Pole(CPoint),
    #[error("sample {point:?} maps outside the domain to {image:?}")]
    MapsOutside { point: CPoint, image: CPoint },
    #[error("distance increases from {before:.6e} to {after:.6e} on a sampled pair")]
    NotDistanceDecreasing { before: f64, after: f64 },
    #[error("map has not been validated on this domain")]
    NotValidated,
    #[error("orbit left the domain at step {step}: {point:?}")]
    OrbitExited { step: usize, point: CPoint },
}

pub type Result<T> = std::result::Result<T, MapError>;

/// Monomial `c · z₁^{e₁} ⋯ z_d^{e_d}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub c: [f64; 2],
    pub e: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub numerator: Vec<Term>,
    /// Empty means the constant `1`.
    #[serde(default)]
    pub denominator: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfMap {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub components: Vec<Component>,
    #[serde(skip_deserializing)]
    validated: bool,
}

const POLE_TOL: f64 = 1e-14;

fn poly(terms: &[Term], z: &CPoint) -> Complex64 {
    terms
        .iter()
        .map(|t| {
            t.e.iter()
                .enumerate()
                .fold(Complex64::new(t.c[0], t.c[1]), |acc, (j, &k)| acc * z[j].powu(k))
        })
        .sum()
}

impl Term {
    pub fn new(c: Complex64, e: Vec<u32>) -> Self {
        Term { c: [c.re, c.im], e }
    }
}

impl SelfMap {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        let m = SelfMap { name: None, components, validated: false };
        m.check_shape()?;
        Ok(m)
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: SelfMap = serde_json::from_str(s).map_err(|e| MapError::Invalid(e.to_string()))?;
        m.check_shape()?;
        Ok(m)
    }

    fn check_shape(&self) -> Result<()> {
        let d = self.components.len();
        if d == 0 {
            return Err(MapError::Invalid("no components".into()));
        }
        for c in &self.components {
            if c.numerator.is_empty() {
                return Err(MapError::Invalid("empty numerator".into()));
            }
            if c.numerator.iter().chain(&c.denominator).any(|t| t.e.len() != d) {
                return Err(MapError::Invalid(format!("exponent vectors must have length {d}")));
            }
            if c.numerator.iter().chain(&c.denominator).any(|t| !t.c[0].is_finite() || !t.c[1].is_finite()) {
                return Err(MapError::Invalid("non-finite coefficient".into()));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn eval(&self, z: &CPoint) -> Result<CPoint> {
        if z.dim() != self.arity() {
            return Err(MapError::Arity { expected: z.dim(), got: self.arity() });
        }
        let mut out = Vec::with_capacity(self.arity());
        for c in &self.components {
            let den = if c.denominator.is_empty() { Complex64::new(1.0, 0.0) } else { poly(&c.denominator, z) };
            if den.norm() < POLE_TOL {
                return Err(MapError::Pole(z.clone()));
            }
            out.push(poly(&c.numerator, z) / den);
        }
        Ok(CPoint(out))
    }
}

// ---------------------------------------------------------------------------
// validation

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ValidationConfig {
    pub rays: usize,
    /// Interior strata as fractions of the exit distance along each ray.
    pub interior_fractions: Vec<f64>,
    /// Near-boundary strata as absolute offsets from the exit point.
    pub boundary_offsets: Vec<f64>,
    pub lipschitz_pairs: usize,
    pub lipschitz_slack: f64,
    pub seed: u64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            rays: 64,
            interior_fractions: vec![0.0, 0.25, 0.5, 0.75, 0.9],
            boundary_offsets: vec![1e-2, 1e-3, 1e-4, 1e-6],
            lipschitz_pairs: 64,
            lipschitz_slack: 1e-9,
            seed: 5,
        }
    }
}

fn validation_grid(domain: &DomainSpec, cfg: &ValidationConfig) -> Vec<CPoint> {
    let o = domain.interior_witness();
    let mut pts = Vec::new();
    for u in sampling::sphere_directions(2 * domain.dim(), cfg.rays, cfg.seed) {
        let Ok(l) = domain.ray_to_boundary(o, &u) else { continue };
        let ts = cfg.interior_fractions.iter().map(|f| f * l).chain(cfg.boundary_offsets.iter().map(|d| l - d));
        for t in ts {
            if t >= 0.0 {
                let p = o.offset_real(&u, t);
                if domain.contains(&p) {
                    pts.push(p);
                }
            }
        }
    }
    pts
}

/// Returns the map flagged as validated, or the first failing sample.
pub fn validate_map(domain: &DomainSpec, map: &SelfMap, cfg: &ValidationConfig) -> Result<SelfMap> {
    if map.arity() != domain.dim() {
        return Err(MapError::Arity { expected: domain.dim(), got: map.arity() });
    }
    let grid = validation_grid(domain, cfg);
    let mut images = Vec::with_capacity(grid.len());
    for p in &grid {
        let q = map.eval(p)?;
        if !q.is_finite() || !domain.contains(&q) {
            return Err(MapError::MapsOutside { point: p.clone(), image: q });
        }
        images.push(q);
    }
    let mut rng = sampling::rng(cfg.seed);
    for _ in 0..cfg.lipschitz_pairs {
        use rand::Rng;
        let (i, j) = (rng.gen_range(0..grid.len()), rng.gen_range(0..grid.len()));
        let before = kobayashi::distance(domain, &grid[i], &grid[j])?.upper;
        let after = kobayashi::distance(domain, &images[i], &images[j])?.lower;
        if after > before + cfg.lipschitz_slack * (1.0 + before) {
            return Err(MapError::NotDistanceDecreasing { before, after });
        }
    }
    let mut m = map.clone();
    m.validated = true;
    Ok(m)
}

// ---------------------------------------------------------------------------
// orbits

pub const DELTA_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitTrace {
    pub base: CPoint,
    pub points: Vec<CPoint>,
    pub delta: Vec<f64>,
    pub displacement_lower: Vec<f64>,
    pub displacement_upper: Vec<f64>,
    /// Euclidean distance to the nearest earlier orbit point (`∞` at `n = 0`).
    pub min_return: Vec<f64>,
    pub boundary_contact: bool,
}

impl OrbitTrace {
    /// Fills the series for a given sequence of interior points.
    pub fn from_points(domain: &DomainSpec, points: Vec<CPoint>) -> Result<Self> {
        let base = points.first().cloned().ok_or_else(|| MapError::Invalid("empty orbit".into()))?;
        let n = points.len();
        let rows = crate::par::map_indexed(n, |k| -> Result<(f64, f64, f64, f64)> {
            let delta = domain.boundary_distance(&points[k])?;
            let disp = kobayashi::distance(domain, &points[k], &base)?;
            let ret = points[..k].iter().map(|q| q.distance(&points[k])).fold(f64::INFINITY, f64::min);
            Ok((delta, disp.lower, disp.upper, ret))
        });
        let mut t = OrbitTrace {
            base,
            points,
            delta: Vec::with_capacity(n),
            displacement_lower: Vec::with_capacity(n),
            displacement_upper: Vec::with_capacity(n),
            min_return: Vec::with_capacity(n),
            boundary_contact: false,
        };
        for r in rows {
            let (d, lo, up, ret) = r?;
            t.delta.push(d);
            t.displacement_lower.push(lo);
            t.displacement_upper.push(up);
            t.min_return.push(ret);
        }
        t.boundary_contact = t.delta.last().is_some_and(|&d| d < DELTA_FLOOR);
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Every `k`-th orbit point, series recomputed.
    pub fn subsample(&self, domain: &DomainSpec, k: usize) -> Result<OrbitTrace> {
        let pts: Vec<CPoint> = self.points.iter().step_by(k.max(1)).cloned().collect();
        let mut t = OrbitTrace::from_points(domain, pts)?;
        t.boundary_contact = self.boundary_contact;
        Ok(t)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::result::Result<(), csv::Error> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let d = self.base.dim();
        let mut header = vec!["n".to_string()];
        for j in 1..=d {
            header.push(format!("re_z{j}"));
            header.push(format!("im_z{j}"));
        }
        header.extend(["delta", "disp_lower", "disp_upper", "min_return"].map(String::from));
        out.write_record(&header)?;
        for (k, p) in self.points.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(p.to_real().into_iter().map(fmt_num));
            for v in [self.delta[k], self.displacement_lower[k], self.displacement_upper[k], self.min_return[k]] {
                row.push(fmt_num(v));
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `o, f(o), …, f^N(o)`, stopping early once `δ < DELTA_FLOOR`.
pub fn iterate(domain: &DomainSpec, map: &SelfMap, o: &CPoint, n: usize) -> Result<OrbitTrace> {
    if !map.validated {
        return Err(MapError::NotValidated);
    }
    if !domain.membership(o)? {
        return Err(DomainError::Outside.into());
    }
    let mut points = vec![o.clone()];
    let mut z = o.clone();
    for step in 1..=n {
        z = map.eval(&z)?;
        if !z.is_finite() || !domain.contains(&z) {
            return Err(MapError::OrbitExited { step, point: z });
        }
        points.push(z.clone());
        if domain.boundary_distance(&z)? < DELTA_FLOOR {
            break;
        }
    }
    OrbitTrace::from_points(domain, points)
}

// ---------------------------------------------------------------------------
// classification

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassifyConfig {
    pub warmup: usize,
    pub tail_fraction: f64,
    /// Tail diameter must be below `factor · (final δ + floor)`.
    pub diameter_factor: f64,
    pub diameter_floor: f64,
    /// Final `δ` must be below this for a boundary verdict.
    pub boundary_delta: f64,
    pub recurrence_eps: f64,
    pub displacement_bound: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        ClassifyConfig {
            warmup: 8,
            tail_fraction: 0.25,
            diameter_factor: 10.0,
            diameter_floor: 1e-6,
            boundary_delta: 1e-3,
            recurrence_eps: 1e-3,
            displacement_bound: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrbitKind {
    Compact,
    Wolff { xi: CPoint },
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Evidence {
    pub tail_len: usize,
    pub tail_diameter: f64,
    pub diameter_threshold: f64,
    pub final_delta: f64,
    pub delta_decreasing: bool,
    pub min_tail_delta: f64,
    pub max_displacement_upper: f64,
    pub recurrent: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbitVerdict {
    #[serde(flatten)]
    pub kind: OrbitKind,
    pub evidence: Evidence,
}

impl OrbitVerdict {
    pub fn label(&self) -> &'static str {
        match self.kind {
            OrbitKind::Compact => "compact",
            OrbitKind::Wolff { .. } => "wolff",
            OrbitKind::Undecided => "undecided",
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn classify(domain: &DomainSpec, trace: &OrbitTrace, cfg: &ClassifyConfig) -> OrbitVerdict {
    let n = trace.len();
    let tail_len = ((n as f64 * cfg.tail_fraction).ceil() as usize).clamp(2.min(n), n);
    let tail = &trace.points[n - tail_len..];
    let tail_delta = &trace.delta[n - tail_len..];
    let mut diam: f64 = 0.0;
    for (i, a) in tail.iter().enumerate() {
        for b in &tail[i + 1..] {
            diam = diam.max(a.distance(b));
        }
    }
    let final_delta = *trace.delta.last().unwrap_or(&f64::NAN);
    let diameter_threshold = cfg.diameter_factor * (final_delta + cfg.diameter_floor);
    let half = tail_len / 2;
    let logs: Vec<f64> = tail_delta.iter().map(|d| d.max(1e-300).ln()).collect();
    let delta_decreasing = half >= 1 && mean(&logs[half..]) < mean(&logs[..half]);
    let max_disp = trace.displacement_upper.iter().cloned().fold(0.0, f64::max);
    let recurrent = trace.min_return[n - tail_len..].iter().any(|&r| r < cfg.recurrence_eps);
    let evidence = Evidence {
        tail_len,
        tail_diameter: diam,
        diameter_threshold,
        final_delta,
        delta_decreasing,
        min_tail_delta: tail_delta.iter().cloned().fold(f64::INFINITY, f64::min),
        max_displacement_upper: max_disp,
        recurrent,
    };
    if n < cfg.warmup {
        return OrbitVerdict { kind: OrbitKind::Undecided, evidence };
    }
    let boundary_ok = final_delta <= cfg.boundary_delta || trace.boundary_contact;
    if boundary_ok && delta_decreasing && diam < diameter_threshold {
        let dim = tail[0].dim();
        let mut centroid = CPoint::zeros(dim);
        for p in tail {
            for j in 0..dim {
                centroid.0[j] += p[j] / tail_len as f64;
            }
        }
        let xi = domain
            .nearest_boundary_point(&centroid)
            .map(|(_, xi)| xi)
            .unwrap_or_else(|_| tail[tail_len - 1].clone());
        return OrbitVerdict { kind: OrbitKind::Wolff { xi }, evidence };
    }
    if max_disp < cfg.displacement_bound && recurrent && evidence.min_tail_delta > cfg.boundary_delta {
        return OrbitVerdict { kind: OrbitKind::Compact, evidence };
    }
    OrbitVerdict { kind: OrbitKind::Undecided, evidence }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultiStartReport {
    pub verdicts: Vec<OrbitVerdict>,
    pub agree: bool,
    /// Largest pairwise distance between Wolff-point estimates.
    pub xi_spread: Option<f64>,
    /// Disagreeing verdicts are kept as a possible counterexample.
    pub falsification_candidate: bool,
    pub traces: Vec<OrbitTrace>,
}

pub fn multi_start_consistency(
    domain: &DomainSpec,
    map: &SelfMap,
    bases: &[CPoint],
    n: usize,
    cfg: &ClassifyConfig,
    xi_tol: f64,
) -> Result<MultiStartReport> {
    let traces: Vec<OrbitTrace> = crate::par::map_indexed(bases.len(), |i| iterate(domain, map, &bases[i], n))
        .into_iter()
        .collect::<Result<_>>()?;
    let verdicts: Vec<OrbitVerdict> = traces.iter().map(|t| classify(domain, t, cfg)).collect();
    let same_kind = verdicts.windows(2).all(|w| w[0].label() == w[1].label());
    let xis: Vec<&CPoint> = verdicts
        .iter()
        .filter_map(|v| match &v.kind {
            OrbitKind::Wolff { xi } => Some(xi),
            _ => None,
        })
        .collect();
    let xi_spread = (!xis.is_empty()).then(|| {
        let mut s: f64 = 0.0;
        for (i, a) in xis.iter().enumerate() {
            for b in &xis[i + 1..] {
                s = s.max(a.distance(b));
            }
        }
        s
    });
    let agree = same_kind && xi_spread.map_or(true, |s| s < xi_tol);
    Ok(MultiStartReport { verdicts, agree, xi_spread, falsification_candidate: !agree, traces })
}

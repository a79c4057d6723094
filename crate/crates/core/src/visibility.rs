//! Visibility and Gromov-product experiments.
//!
//! The compact set of the visibility property is represented by a closed
//! Kobayashi ball around a base point `o`; the measured statistic is its radius,
//! `sup_n min_t K(o, σ_n(t))` over solver-built almost-geodesics. Only paths the
//! solver produces are examined, not every almost-geodesic with the declared
//! constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::CPoint;
use crate::domains::{DomainError, DomainSpec};
use crate::geodesics::{self, AlmostGeodesicCertificate, PathSearchConfig, SampledPath};
use crate::goldilocks::{self, ShellConfig, ShellRow};
use crate::kobayashi::{self, MetricEstimate, Provenance};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VisibilityError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid approach sequence: {0}")]
    InvalidSequence(String),
}

pub type Result<T> = std::result::Result<T, VisibilityError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproachMode {
    Radial,
    Tangential,
    Custom,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproachSequence {
    pub target: CPoint,
    pub points: Vec<CPoint>,
    pub mode: ApproachMode,
}

impl ApproachSequence {
    /// Checks interiority and strictly decreasing distance to the target.
    pub fn new(domain: &DomainSpec, target: CPoint, points: Vec<CPoint>, mode: ApproachMode) -> Result<Self> {
        domain.check_dim(target.dim())?;
        if points.is_empty() {
            return Err(VisibilityError::InvalidSequence("no points".into()));
        }
        for (n, p) in points.iter().enumerate() {
            if !domain.membership(p)? {
                return Err(VisibilityError::InvalidSequence(format!("point {n} is outside the domain")));
            }
        }
        if points.windows(2).any(|w| !(w[1].distance(&target) < w[0].distance(&target))) {
            return Err(VisibilityError::InvalidSequence("distance to the target must strictly decrease".into()));
        }
        Ok(ApproachSequence { target, points, mode })
    }

    /// `ξ + δ_n (o − ξ)/‖o − ξ‖`.
    pub fn radial(domain: &DomainSpec, target: CPoint, o: &CPoint, deltas: &[f64]) -> Result<Self> {
        let dir = (o - &target).normalized().ok_or_else(|| VisibilityError::InvalidSequence("o equals target".into()))?;
        let pts = deltas.iter().map(|&d| target.translate(&dir, Complex64::new(d, 0.0))).collect();
        Self::new(domain, target, pts, ApproachMode::Radial)
    }

    /// Disk-style tangential approach `(1 − δ_n)ξ·e^{iδ_n·sign}`, applied to the
    /// first coordinate when `d > 1`.
    pub fn tangential(domain: &DomainSpec, target: CPoint, deltas: &[f64], sign: f64) -> Result<Self> {
        let pts = deltas
            .iter()
            .map(|&d| {
                let mut p = target.scale_real(1.0 - d);
                p.0[0] *= Complex64::from_polar(1.0, sign * d);
                p
            })
            .collect();
        Self::new(domain, target, pts, ApproachMode::Tangential)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Kobayashi distance from the origin of the unit disk to the geodesic joining
/// the boundary points `a` and `b`: the orthogonal circle through them has its
/// closest point at Euclidean distance `(1 − sin(φ/2))/cos(φ/2)`, `φ` the angle
/// between `a` and `b`.
pub fn disk_boundary_geodesic_gap(a: Complex64, b: Complex64) -> f64 {
    let phi = (b / a).arg().abs();
    let h = 0.5 * phi;
    ((1.0 - h.sin()) / h.cos()).atanh()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct VisibilityConfig {
    pub lambda: f64,
    pub kappa: f64,
    pub search: PathSearchConfig,
    /// Half-width of the disjoint neighbourhoods around the two targets.
    pub neighborhood: f64,
    /// Relative change of the running sup tolerated over the last quarter.
    pub stabilization_tol: f64,
    pub shell: ShellConfig,
    pub speed_tol: f64,
    /// Relative tolerance for the `3κ` near-additivity check; covers the gap
    /// between midpoint-rule parameters and true arc length.
    pub additivity_tol: f64,
}

impl Default for VisibilityConfig {
    fn default() -> Self {
        VisibilityConfig {
            lambda: 1.0,
            kappa: 0.25,
            search: PathSearchConfig::default(),
            neighborhood: 0.1,
            stabilization_tol: 0.01,
            shell: ShellConfig { rays: 32, ..ShellConfig::default() },
            speed_tol: 1e-2,
            additivity_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VisibilityTrial {
    pub index: usize,
    pub x: CPoint,
    pub y: CPoint,
    pub certificate: Option<AlmostGeodesicCertificate>,
    /// Certificate within the declared `(λ, κ)`.
    pub certified: bool,
    pub max_delta: f64,
    pub min_delta: f64,
    pub min_distance: f64,
    pub closest_point: Option<CPoint>,
    pub near_additivity_slack: f64,
    pub near_additivity_ok: bool,
    /// Largest `‖σ′‖ / (λ·M̂(δ(σ)))` along the path.
    pub speed_shell_ratio: f64,
    pub speed_shell_ok: bool,
    pub skipped: bool,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityVerdict {
    Visible,
    NotVisible,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VisibilityReport {
    pub lambda: f64,
    pub kappa: f64,
    pub precondition_met: bool,
    pub trials: Vec<VisibilityTrial>,
    pub running_sup: Vec<f64>,
    pub sup: f64,
    pub stabilized: bool,
    pub verdict: VisibilityVerdict,
    pub note: String,
    #[serde(skip)]
    pub paths: Vec<Option<SampledPath>>,
}

/// Running maximum of a sequence.
pub fn running_max(values: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            m = m.max(v);
            m
        })
        .collect()
}

/// The running value changes by less than `tol` (relative) over the last quarter.
pub fn stabilized(running: &[f64], tol: f64) -> bool {
    let n = running.len();
    if n < 4 {
        return false;
    }
    let start = running[n - 1 - n / 4];
    let end = running[n - 1];
    if end == 0.0 {
        return start == 0.0;
    }
    ((end - start) / end.abs()).abs() < tol
}

fn m_hat(table: &[ShellRow], delta: f64) -> f64 {
    let k = table.partition_point(|r| r.r < delta);
    table.get(k).or(table.last()).map_or(f64::INFINITY, |r| r.upper)
}

fn closest_approach(domain: &DomainSpec, o: &CPoint, path: &SampledPath) -> (f64, CPoint, usize) {
    let pts = path.points();
    let dist = |p: &CPoint| kobayashi::distance(domain, o, p).map(|e| e.upper).unwrap_or(f64::INFINITY);
    let ks = crate::par::map_indexed(pts.len(), |i| dist(&pts[i]));
    let (mut i_best, mut best) = (0, f64::INFINITY);
    for (i, k) in ks.iter().enumerate() {
        if *k < best {
            best = *k;
            i_best = i;
        }
    }
    let mut point = pts[i_best].clone();
    for nb in [i_best.wrapping_sub(1), i_best + 1] {
        if nb < pts.len() {
            for k in 1..16 {
                let q = pts[i_best].lerp(&pts[nb], k as f64 / 32.0);
                let d = dist(&q);
                if d < best {
                    best = d;
                    point = q;
                }
            }
        }
    }
    (best, point, i_best)
}

fn run_trial(
    domain: &DomainSpec,
    index: usize,
    x: &CPoint,
    y: &CPoint,
    o: &CPoint,
    cfg: &VisibilityConfig,
) -> (VisibilityTrial, Option<SampledPath>) {
    let mut trial = VisibilityTrial {
        index,
        x: x.clone(),
        y: y.clone(),
        certificate: None,
        certified: false,
        max_delta: f64::NAN,
        min_delta: f64::NAN,
        min_distance: f64::NAN,
        closest_point: None,
        near_additivity_slack: f64::NAN,
        near_additivity_ok: false,
        speed_shell_ratio: f64::NAN,
        speed_shell_ok: false,
        skipped: true,
        error: None,
    };
    let (path, cert) = match geodesics::almost_geodesic(domain, x, y, &cfg.search) {
        Ok(r) => r,
        Err(e) => {
            trial.error = Some(e.to_string());
            return (trial, None);
        }
    };
    trial.skipped = false;
    trial.certified = cert.lambda <= cfg.lambda * (1.0 + geodesics::SPEED_TOL) && cert.kappa <= cfg.kappa;
    let deltas: Vec<f64> = path.points().iter().map(|p| domain.boundary_distance(p).unwrap_or(0.0)).collect();
    trial.max_delta = deltas.iter().cloned().fold(0.0, f64::max);
    trial.min_delta = deltas.iter().cloned().fold(f64::INFINITY, f64::min);

    let (dmin, point, i) = closest_approach(domain, o, &path);
    trial.min_distance = dmin;
    trial.closest_point = Some(point);

    // near-additivity through the closest-approach sample
    let sigma_t = &path.points()[i];
    let k = |a: &CPoint, b: &CPoint| kobayashi::distance(domain, a, b).ok();
    if let (Some(a), Some(b), Some(c)) = (k(x, sigma_t), k(sigma_t, y), k(x, y)) {
        trial.near_additivity_slack = a.lower + b.lower - c.upper - 3.0 * cert.kappa;
        trial.near_additivity_ok = trial.near_additivity_slack <= cfg.additivity_tol * (1.0 + c.upper);
    }

    // speed against the shell function
    let lo = 0.5 * trial.min_delta.max(1e-12);
    let hi = (2.0 * trial.max_delta).min(0.9 * domain.enclosing_radius()).max(2.0 * lo);
    let grid = sampling::geometric_grid(lo, hi, 48);
    if let Ok(table) = goldilocks::shell_table(domain, &grid, &cfg.shell) {
        let (ts, ps) = (path.params(), path.points());
        let mut ratio: f64 = 0.0;
        for j in 0..ps.len().saturating_sub(1) {
            let speed = ps[j].distance(&ps[j + 1]) / (ts[j + 1] - ts[j]);
            let delta = domain.boundary_distance(&ps[j].midpoint(&ps[j + 1])).unwrap_or(0.0);
            ratio = ratio.max(speed / (cert.lambda * m_hat(&table, delta)));
        }
        trial.speed_shell_ratio = ratio;
        trial.speed_shell_ok = ratio <= 1.0 + cfg.speed_tol;
    }
    trial.certificate = Some(cert);
    (trial, Some(path))
}

/// One trial per index `n`, joining `x_n` and `y_n`.
pub fn visibility_experiment(
    domain: &DomainSpec,
    seq_xi: &ApproachSequence,
    seq_eta: &ApproachSequence,
    o: &CPoint,
    cfg: &VisibilityConfig,
) -> Result<VisibilityReport> {
    if !domain.membership(o)? {
        return Err(DomainError::Outside.into());
    }
    let n = seq_xi.len().min(seq_eta.len());
    let results = crate::par::map_indexed(n, |i| run_trial(domain, i, &seq_xi.points[i], &seq_eta.points[i], o, cfg));
    let (trials, paths): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let mins: Vec<f64> = trials.iter().filter(|t| !t.skipped).map(|t| t.min_distance).collect();
    let running_sup = running_max(&mins);
    let is_stable = stabilized(&running_sup, cfg.stabilization_tol);
    Ok(VisibilityReport {
        lambda: cfg.lambda,
        kappa: cfg.kappa,
        precondition_met: seq_xi.target.distance(&seq_eta.target) > 2.0 * cfg.neighborhood,
        sup: running_sup.last().copied().unwrap_or(f64::NAN),
        running_sup,
        stabilized: is_stable,
        verdict: if is_stable { VisibilityVerdict::Visible } else { VisibilityVerdict::NotVisible },
        note: "only solver-produced almost-geodesics are examined".into(),
        trials,
        paths,
    })
}

// ---------------------------------------------------------------------------
// Gromov product

/// `(x|y)_o = ½(K(x, o) + K(o, y) − K(x, y))` with interval arithmetic.
pub fn gromov_product(domain: &DomainSpec, x: &CPoint, y: &CPoint, o: &CPoint) -> Result<MetricEstimate> {
    let xo = kobayashi::distance(domain, x, o)?;
    let oy = kobayashi::distance(domain, o, y)?;
    let xy = kobayashi::distance(domain, x, y)?;
    if xo.is_exact() && oy.is_exact() && xy.is_exact() {
        return Ok(MetricEstimate::exact(0.5 * (xo.lower + oy.lower - xy.lower)));
    }
    Ok(MetricEstimate {
        lower: 0.5 * (xo.lower + oy.lower - xy.upper),
        upper: 0.5 * (xo.upper + oy.upper - xy.lower),
        provenance: Provenance { lower: xy.provenance.upper, upper: xy.provenance.lower },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GromovVerdict {
    Bounded,
    Unbounded,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GromovEntry {
    pub n: usize,
    pub m: usize,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GromovReport {
    pub entries: Vec<GromovEntry>,
    /// Running max of the upper estimate over `n, m ≤ N`, indexed by `N`.
    pub running_max: Vec<f64>,
    pub max: f64,
    pub stabilized: bool,
    pub verdict: GromovVerdict,
}

pub fn gromov_boundedness_experiment(
    domain: &DomainSpec,
    seq_xi: &ApproachSequence,
    seq_eta: &ApproachSequence,
    o: &CPoint,
    stabilization_tol: f64,
) -> Result<GromovReport> {
    let big_n = seq_xi.len().min(seq_eta.len());
    let cells = crate::par::map_indexed(big_n * big_n, |k| {
        let (n, m) = (k / big_n, k % big_n);
        gromov_product(domain, &seq_xi.points[n], &seq_eta.points[m], o)
            .map(|e| GromovEntry { n, m, lower: e.lower, upper: e.upper })
    });
    let entries: Vec<GromovEntry> = cells.into_iter().collect::<Result<_>>()?;
    let mut per_n = vec![f64::NEG_INFINITY; big_n];
    for e in &entries {
        let idx = e.n.max(e.m);
        per_n[idx] = per_n[idx].max(e.upper);
    }
    let running = running_max(&per_n);
    let is_stable = stabilized(&running, stabilization_tol);
    Ok(GromovReport {
        max: running.last().copied().unwrap_or(f64::NAN),
        running_max: running,
        stabilized: is_stable,
        verdict: if is_stable { GromovVerdict::Bounded } else { GromovVerdict::Unbounded },
        entries,
    })
}

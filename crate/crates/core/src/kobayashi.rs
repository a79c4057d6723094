//! Two-sided estimates of the infinitesimal Kobayashi metric `k_Ω(z; v)` and the
//! Kobayashi distance `K_Ω(x, y)`.
//!
//! Normalisation: `k_Δ(z; 1) = 1/(1 − |z|²)` and `K_Δ(0, s) = artanh(s)` on the
//! unit disk. With this convention the half-log bound `artanh(1 − t) ≤ ½ log(2/t)`
//! holds, which is what the boundary-growth estimates rely on.

use serde::{Deserialize, Serialize};

use crate::complex::{CPoint, CVector};
use crate::domains::{DomainError, DomainKind, DomainSpec, Result};
use crate::geodesics::{self, PathSearchConfig, SampledPath};

/// Which rule produced a side of an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    ExactFormula,
    GrahamLower,
    GrahamUpper,
    EnclosingBall,
    InscribedBall,
    AssumedFiniteType,
    PathWitness,
    EuclideanLower,
}

impl BoundSource {
    pub fn tag(&self) -> &'static str {
        match self {
            BoundSource::ExactFormula => "exact-formula",
            BoundSource::GrahamLower => "graham-lower",
            BoundSource::GrahamUpper => "graham-upper",
            BoundSource::EnclosingBall => "enclosing-ball",
            BoundSource::InscribedBall => "inscribed-ball",
            BoundSource::AssumedFiniteType => "assumed-finite-type",
            BoundSource::PathWitness => "path-witness",
            BoundSource::EuclideanLower => "euclidean-lower",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub lower: BoundSource,
    pub upper: BoundSource,
}

/// Interval `[lower, upper]` for a metric or distance value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricEstimate {
    pub lower: f64,
    pub upper: f64,
    pub provenance: Provenance,
}

impl MetricEstimate {
    pub fn exact(value: f64) -> Self {
        MetricEstimate {
            lower: value,
            upper: value,
            provenance: Provenance { lower: BoundSource::ExactFormula, upper: BoundSource::ExactFormula },
        }
    }

    pub fn is_exact(&self) -> bool {
        self.provenance.lower == BoundSource::ExactFormula && self.provenance.upper == BoundSource::ExactFormula
    }

    pub fn side(&self, side: Side) -> f64 {
        match side {
            Side::Lower => self.lower,
            Side::Upper => self.upper,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lower - slack <= x && x <= self.upper + slack
    }
}

/// Running max of lower candidates / min of upper candidates.
struct Bracket {
    lower: (f64, BoundSource),
    upper: (f64, BoundSource),
}

impl Bracket {
    fn new(lower: (f64, BoundSource), upper: (f64, BoundSource)) -> Self {
        Bracket { lower, upper }
    }

    fn lower(&mut self, v: f64, src: BoundSource) {
        if v > self.lower.0 {
            self.lower = (v, src);
        }
    }

    fn upper(&mut self, v: f64, src: BoundSource) {
        if v < self.upper.0 {
            self.upper = (v, src);
        }
    }

    fn finish(self) -> MetricEstimate {
        MetricEstimate {
            lower: self.lower.0,
            upper: self.upper.0.max(self.lower.0),
            provenance: Provenance { lower: self.lower.1, upper: self.upper.1 },
        }
    }
}

// ---------------------------------------------------------------------------
// closed forms

pub fn disk_metric(z: num_complex::Complex64, v: num_complex::Complex64) -> f64 {
    v.norm() / (1.0 - z.norm_sqr())
}

/// `k_B(z; v)² = ‖v‖²/(1 − ‖z‖²) + |⟨z, v⟩|²/(1 − ‖z‖²)²` on the unit ball.
pub fn ball_metric(z: &CPoint, v: &CVector) -> f64 {
    let g = 1.0 - z.norm_sqr();
    let a = z.hermitian(&v.0).norm_sqr();
    (v.norm_sqr() / g + a / (g * g)).sqrt()
}

/// `artanh ρ` written as `log((1 + ρ)/√(1 − ρ²))` so that `1 − ρ²` can be supplied
/// without cancellation.
fn artanh_from_gap(rho_sq_complement: f64) -> f64 {
    let c = rho_sq_complement.clamp(0.0, 1.0);
    let rho = (1.0 - c).max(0.0).sqrt();
    if c == 0.0 {
        return f64::INFINITY;
    }
    (1.0 + rho).ln() - 0.5 * c.ln()
}

pub fn disk_distance(z: num_complex::Complex64, w: num_complex::Complex64) -> f64 {
    if z == w {
        return 0.0;
    }
    let denom = (num_complex::Complex64::new(1.0, 0.0) - w.conj() * z).norm_sqr();
    artanh_from_gap((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()) / denom)
}

pub fn ball_distance(z: &CPoint, w: &CPoint) -> f64 {
    if z == w {
        return 0.0;
    }
    let inner = z.hermitian(&w.0);
    let denom = (num_complex::Complex64::new(1.0, 0.0) - inner).norm_sqr();
    artanh_from_gap((1.0 - z.norm_sqr()) * (1.0 - w.norm_sqr()) / denom)
}

fn scaled(p: &CPoint, r: f64) -> CPoint {
    p.scale_real(1.0 / r)
}

/// Lower Lipschitz constant `c₁` with `k_Ω(x; v) ≥ c₁‖v‖`: the infimum of the
/// enclosing-ball metric, which is `1/R` whenever the closure contains the origin
/// and never smaller.
pub fn lipschitz_lower_constant(domain: &DomainSpec) -> f64 {
    1.0 / domain.enclosing_radius()
}

// ---------------------------------------------------------------------------
// infinitesimal metric

pub fn infinitesimal_metric(domain: &DomainSpec, z: &CPoint, v: &CVector) -> Result<MetricEstimate> {
    infinitesimal_metric_with_delta(domain, z, v, None)
}

/// As [`infinitesimal_metric`], reusing a known `δ_Ω(z)` when one is at hand.
pub fn infinitesimal_metric_with_delta(
    domain: &DomainSpec,
    z: &CPoint,
    v: &CVector,
    delta: Option<f64>,
) -> Result<MetricEstimate> {
    domain.check_dim(z.dim())?;
    domain.check_dim(v.dim())?;
    if v.is_zero() {
        return Err(DomainError::ZeroDirection);
    }
    if !domain.membership(z)? {
        return Err(DomainError::Outside);
    }
    match domain.kind() {
        DomainKind::UnitDisk => return Ok(MetricEstimate::exact(disk_metric(z[0], v[0]))),
        DomainKind::UnitBall { .. } => return Ok(MetricEstimate::exact(ball_metric(z, v))),
        DomainKind::Polydisk { radii } => {
            let k = z
                .0
                .iter()
                .zip(&v.0)
                .zip(radii)
                .map(|((zj, vj), r)| vj.norm() * r / (r * r - zj.norm_sqr()))
                .fold(0.0, f64::max);
            return Ok(MetricEstimate::exact(k));
        }
        _ => {}
    }

    let vn = v.norm();
    let big_r = domain.enclosing_radius();
    let mut b = Bracket::new(
        (ball_metric(&scaled(z, big_r), &scaled_v(v, big_r)), BoundSource::EnclosingBall),
        (f64::INFINITY, BoundSource::InscribedBall),
    );
    b.lower(vn * lipschitz_lower_constant(domain), BoundSource::EuclideanLower);

    let mut graham = false;
    if domain.is_convex() {
        if let Ok(r) = domain.disk_radius_in_complex_line(z, v) {
            b.lower(vn / (2.0 * r.upper), BoundSource::GrahamLower);
            b.upper(vn / r.lower, BoundSource::GrahamUpper);
            graham = true;
        }
    }
    // r_Ω ≥ δ, so the inscribed ball only helps when no disk radius is available
    let model = domain.finite_type_model();
    if !graham || model.is_some() {
        let delta = match delta {
            Some(d) => d,
            None => domain.boundary_distance(z)?,
        };
        b.upper(vn / delta, BoundSource::InscribedBall);
        if let Some(m) = model {
            b.lower(m.c * vn / delta.powf(m.epsilon), BoundSource::AssumedFiniteType);
        }
    }
    Ok(b.finish())
}

fn scaled_v(v: &CVector, r: f64) -> CVector {
    v.scale_real(1.0 / r)
}

/// One side of the metric, with `k(z; 0) = 0`.
pub(crate) fn metric_side(domain: &DomainSpec, z: &CPoint, v: &CVector, side: Side) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    Ok(infinitesimal_metric(domain, z, v)?.side(side))
}

/// Midpoint-rule length of the straight segment `a → b`.
pub(crate) fn segment_length_single(domain: &DomainSpec, a: &CPoint, b: &CPoint, side: Side) -> Result<f64> {
    metric_side(domain, &a.midpoint(b), &(b - a), side)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LengthConfig {
    /// Stop refining a segment once two successive midpoint sums differ by less
    /// than `rel_tol · length + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for LengthConfig {
    fn default() -> Self {
        LengthConfig { rel_tol: 1e-9, abs_tol: 1e-12, max_depth: 14 }
    }
}

impl LengthConfig {
    /// Cheaper setting for kinds whose metric needs numeric disk radii.
    pub fn coarse() -> Self {
        LengthConfig { rel_tol: 1e-4, abs_tol: 1e-8, max_depth: 6 }
    }

    pub fn for_domain(domain: &DomainSpec) -> Self {
        if domain.has_exact_metric() || matches!(domain.kind(), DomainKind::ConvexSupport { .. } | DomainKind::Intersection { .. }) {
            Self::default()
        } else {
            Self::coarse()
        }
    }
}

/// Refined length of one straight segment: midpoint sums over `2^j` equal pieces,
/// doubled until they settle.
pub fn segment_length(domain: &DomainSpec, a: &CPoint, b: &CPoint, side: Side, cfg: &LengthConfig) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut prev = segment_length_single(domain, a, b, side)?;
    for depth in 1..=cfg.max_depth {
        let n = 1usize << depth;
        let step = &(b - a) * (1.0 / n as f64);
        let mut sum = 0.0;
        for k in 0..n {
            let mid = a.lerp(b, (k as f64 + 0.5) / n as f64);
            sum += metric_side(domain, &mid, &step, side)?;
        }
        if (sum - prev).abs() <= cfg.rel_tol * sum + cfg.abs_tol {
            return Ok(sum);
        }
        prev = sum;
    }
    Ok(prev)
}

/// `ℓ_Ω(σ)` for the piecewise-linear curve through the samples, integrating the
/// chosen side of the metric.
pub fn path_length(domain: &DomainSpec, path: &SampledPath, side: Side) -> Result<f64> {
    path_length_with(domain, path, side, &LengthConfig::for_domain(domain))
}

pub fn path_length_with(domain: &DomainSpec, path: &SampledPath, side: Side, cfg: &LengthConfig) -> Result<f64> {
    for p in path.points() {
        if !domain.membership(p)? {
            return Err(DomainError::Outside);
        }
    }
    let pts = path.points();
    let parts = crate::par::map_indexed(pts.len().saturating_sub(1), |i| {
        segment_length(domain, &pts[i], &pts[i + 1], side, cfg)
    });
    parts.into_iter().sum()
}

// ---------------------------------------------------------------------------
// distance

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DistanceOptions {
    pub length: Option<LengthConfig>,
    /// Replace the straight-segment witness by an optimised path.
    pub optimize_witness: bool,
    pub search: PathSearchConfig,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        DistanceOptions { length: None, optimize_witness: false, search: PathSearchConfig::default() }
    }
}

/// Closed form when the domain has one; otherwise lower bound from the enclosing
/// ball (and `c₁‖x − y‖`), upper bound from a path witness.
pub fn distance(domain: &DomainSpec, x: &CPoint, y: &CPoint) -> Result<MetricEstimate> {
    distance_with(domain, x, y, &DistanceOptions::default())
}

pub fn exact_distance(domain: &DomainSpec, x: &CPoint, y: &CPoint) -> Option<f64> {
    match domain.kind() {
        DomainKind::UnitDisk => Some(disk_distance(x[0], y[0])),
        DomainKind::UnitBall { .. } => Some(ball_distance(x, y)),
        DomainKind::Polydisk { radii } => Some(
            x.0.iter()
                .zip(&y.0)
                .zip(radii)
                .map(|((a, b), r)| disk_distance(a / r, b / r))
                .fold(0.0, f64::max),
        ),
        _ => None,
    }
}

pub fn distance_with(domain: &DomainSpec, x: &CPoint, y: &CPoint, opts: &DistanceOptions) -> Result<MetricEstimate> {
    domain.check_dim(x.dim())?;
    domain.check_dim(y.dim())?;
    if !domain.membership(x)? || !domain.membership(y)? {
        return Err(DomainError::Outside);
    }
    if let Some(d) = exact_distance(domain, x, y) {
        return Ok(MetricEstimate::exact(d));
    }
    if x == y {
        return Ok(MetricEstimate {
            lower: 0.0,
            upper: 0.0,
            provenance: Provenance { lower: BoundSource::EnclosingBall, upper: BoundSource::PathWitness },
        });
    }
    let big_r = domain.enclosing_radius();
    let mut b = Bracket::new(
        (ball_distance(&scaled(x, big_r), &scaled(y, big_r)), BoundSource::EnclosingBall),
        (f64::INFINITY, BoundSource::PathWitness),
    );
    b.lower(lipschitz_lower_constant(domain) * x.distance(y), BoundSource::EuclideanLower);

    let len_cfg = opts.length.unwrap_or_else(|| LengthConfig::for_domain(domain));
    let straight = SampledPath::straight(x, y, 16);
    let straight_ok = domain.is_convex() || straight.points().iter().all(|p| domain.contains(p));
    let witness = if opts.optimize_witness || !straight_ok {
        // canonical endpoint order keeps the estimate symmetric
        let (a, b) = if x.to_real() <= y.to_real() { (x, y) } else { (y, x) };
        geodesics::minimize_path(domain, a, b, &opts.search).map_err(|e| match e {
            geodesics::GeodesicError::Domain(d) => d,
            other => DomainError::Unsupported(other.to_string()),
        })?
    } else {
        straight
    };
    b.upper(path_length_with(domain, &witness, Side::Upper, &len_cfg)?, BoundSource::PathWitness);
    Ok(b.finish())
}

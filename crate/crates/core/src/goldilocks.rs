//! Boundary-growth conditions.
//!
//! `M_Ω(r) = sup{1/k_Ω(x; v) : δ_Ω(x) ≤ r, ‖v‖ = 1}` is estimated on sampled
//! shells, the first condition `∫₀^ε M_Ω(r)/r dr < ∞` is decided from a
//! quadrature plus a fitted tail, and the second condition
//! `K_Ω(x₀, x) ≤ C + α log(1/δ_Ω(x))` is fitted from distance upper bounds.
//!
//! `M_Ω` is a supremum over a set that grows with `r`, so it is nondecreasing;
//! shell tables are reported as running maxima in `r`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{CPoint, CVector};
use crate::domains::{ConeCheckConfig, ConeReport, DomainError, DomainSpec};
use crate::kobayashi::{self, BoundSource};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GoldilocksError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("shell radius {0} outside (0, R)")]
    InvalidRadius(f64),
    #[error("no interior shell points found at r = {0}")]
    NoShellPoints(f64),
    #[error("degenerate sample spread: {0}")]
    DegenerateSpread(String),
    #[error("no cone report available")]
    NoConeReport,
    #[error("cone condition not verified at every sample")]
    ConeNotVerified,
}

pub type Result<T> = std::result::Result<T, GoldilocksError>;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct ShellConfig {
    /// Rays cast from the interior witness.
    pub rays: usize,
    /// Shell offsets as fractions of `r`.
    pub strata: Vec<f64>,
    /// Random unit directions added to the tangential basis and the normal.
    pub random_dirs: usize,
    pub seed: u64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        ShellConfig { rays: 64, strata: vec![1.0, 0.5], random_dirs: 4, seed: 11 }
    }
}

/// Interval for `M_Ω(r)`: `upper` uses metric lower bounds, `lower` uses metric
/// upper bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MEstimate {
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_source: BoundSource,
    pub upper_source: BoundSource,
    pub samples: usize,
    pub argmax: CPoint,
}

fn shell_points(domain: &DomainSpec, r: f64, cfg: &ShellConfig) -> Vec<CPoint> {
    let o = domain.interior_witness();
    let mut out = Vec::new();
    for u in sampling::sphere_directions(2 * domain.dim(), cfg.rays, cfg.seed) {
        let Ok(l) = domain.ray_to_boundary(o, &u) else { continue };
        for f in &cfg.strata {
            let t = l - f * r;
            if t > 0.0 {
                let x = o.offset_real(&u, t);
                if domain.contains(&x) {
                    out.push(x);
                }
            }
        }
    }
    out
}

fn shell_directions(domain: &DomainSpec, x: &CPoint, cfg: &ShellConfig, salt: u64) -> (Vec<CVector>, Option<f64>) {
    let d = domain.dim();
    let mut dirs = Vec::new();
    let mut delta = None;
    if let Ok((dist, xi)) = domain.nearest_boundary_point(x) {
        delta = Some(dist);
        if let Some(n) = (&xi - x).normalized() {
            dirs.extend(sampling::complex_tangent_basis(&n));
            dirs.push(n);
        }
    }
    if d > 1 || dirs.is_empty() {
        dirs.extend(sampling::unit_cvectors(d, cfg.random_dirs, cfg.seed ^ salt.wrapping_mul(0x9e37_79b9)));
    }
    if d == 1 {
        dirs.truncate(1);
        if dirs.is_empty() {
            dirs.push(CVector::basis(1, 0));
        }
    }
    (dirs, delta)
}

/// Sampled estimate of `M_Ω(r)`.
pub fn estimate_m(domain: &DomainSpec, r: f64, cfg: &ShellConfig) -> Result<MEstimate> {
    if !(r > 0.0 && r < domain.enclosing_radius()) {
        return Err(GoldilocksError::InvalidRadius(r));
    }
    let pts = shell_points(domain, r, cfg);
    if pts.is_empty() {
        return Err(GoldilocksError::NoShellPoints(r));
    }
    let per_point = crate::par::map_indexed(pts.len(), |i| {
        let x = &pts[i];
        let mut best: Option<(f64, BoundSource, f64, BoundSource)> = None;
        let (dirs, delta) = shell_directions(domain, x, cfg, i as u64);
        for v in dirs {
            let Ok(k) = kobayashi::infinitesimal_metric_with_delta(domain, x, &v, delta) else { continue };
            let up = 1.0 / k.lower;
            let lo = 1.0 / k.upper;
            best = Some(match best {
                None => (up, k.provenance.lower, lo, k.provenance.upper),
                Some(b) => {
                    let (u, us) = if up > b.0 { (up, k.provenance.lower) } else { (b.0, b.1) };
                    let (l, ls) = if lo > b.2 { (lo, k.provenance.upper) } else { (b.2, b.3) };
                    (u, us, l, ls)
                }
            });
        }
        best
    });
    let mut out: Option<MEstimate> = None;
    for (i, b) in per_point.into_iter().enumerate() {
        let Some((up, us, lo, ls)) = b else { continue };
        match &mut out {
            None => {
                out = Some(MEstimate {
                    r,
                    lower: lo,
                    upper: up,
                    lower_source: ls,
                    upper_source: us,
                    samples: pts.len(),
                    argmax: pts[i].clone(),
                })
            }
            Some(e) => {
                if up > e.upper {
                    e.upper = up;
                    e.upper_source = us;
                    e.argmax = pts[i].clone();
                }
                if lo > e.lower {
                    e.lower = lo;
                    e.lower_source = ls;
                }
            }
        }
    }
    out.ok_or(GoldilocksError::NoShellPoints(r))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellRow {
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_source: BoundSource,
    pub upper_source: BoundSource,
}

/// Estimates on a grid, sorted by `r`, with running maxima applied.
pub fn shell_table(domain: &DomainSpec, rs: &[f64], cfg: &ShellConfig) -> Result<Vec<ShellRow>> {
    let mut rs = rs.to_vec();
    rs.sort_by(f64::total_cmp);
    let est = crate::par::map_indexed(rs.len(), |i| estimate_m(domain, rs[i], cfg));
    let mut rows: Vec<ShellRow> = Vec::with_capacity(rs.len());
    for e in est {
        let e = e?;
        let mut row = ShellRow {
            r: e.r,
            lower: e.lower,
            upper: e.upper,
            lower_source: e.lower_source,
            upper_source: e.upper_source,
        };
        if let Some(prev) = rows.last() {
            if prev.upper > row.upper {
                row.upper = prev.upper;
                row.upper_source = prev.upper_source;
            }
            if prev.lower > row.lower {
                row.lower = prev.lower;
                row.lower_source = prev.lower_source;
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// condition 1

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    /// `M(r) ≈ a·r^s`
    Power,
    /// `M(r) ≈ a·(log 1/r)^{-p}`
    Log,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailFit {
    pub model: TailModel,
    pub a: f64,
    /// `s` for the power family, `p` for the log family.
    pub exponent: f64,
    pub rss: f64,
    pub aic: f64,
    pub verdict: Verdict,
    /// `∫₀^{r_min} M(r)/r dr` under the fitted model, infinite when divergent.
    pub tail_integral: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct Condition1Config {
    pub margin: f64,
    pub tail_points: usize,
    /// AIC difference needed to let one model overrule the other.
    pub aic_gap: f64,
    /// Power exponents below this are a flat tail. Running-max tables never
    /// produce negative exponents, so divergence shows up as `s ≈ 0`.
    pub flat_exponent: f64,
}

impl Default for Condition1Config {
    fn default() -> Self {
        Condition1Config { margin: 0.05, tail_points: 8, aic_gap: 10.0, flat_exponent: 1e-3 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition1Report {
    pub r_min: f64,
    pub r_max: f64,
    /// Quadrature of `M̂(r)/r` over `[r_min, r_max]`.
    pub grid_integral: f64,
    pub fits: Vec<TailFit>,
    pub selected: Option<TailModel>,
    /// `grid_integral` plus the selected tail, when finite.
    pub total_estimate: Option<f64>,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Some((icpt, slope, rss))
}

fn aic(rss: f64, n: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).max(1e-300).ln() + 4.0
}

fn fit_tail(model: TailModel, rs: &[f64], ms: &[f64], cfg: &Condition1Config) -> Option<TailFit> {
    let margin = cfg.margin;
    let r_min = rs[0];
    let y: Vec<f64> = ms.iter().map(|m| m.ln()).collect();
    match model {
        TailModel::Power => {
            let x: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
            let (icpt, s, rss) = linear_fit(&x, &y)?;
            let a = icpt.exp();
            let verdict = if s > margin {
                Verdict::Converges
            } else if s < cfg.flat_exponent {
                Verdict::Diverges
            } else {
                Verdict::Inconclusive
            };
            let tail_integral = if s > 0.0 { a * r_min.powf(s) / s } else { f64::INFINITY };
            Some(TailFit { model, a, exponent: s, rss, aic: aic(rss, rs.len()), verdict, tail_integral })
        }
        TailModel::Log => {
            if rs.iter().any(|&r| r >= 1.0) {
                return None;
            }
            let x: Vec<f64> = rs.iter().map(|r| (1.0 / r).ln().ln()).collect();
            let (icpt, slope, rss) = linear_fit(&x, &y)?;
            let (a, p) = (icpt.exp(), -slope);
            let verdict = if p > 1.0 + margin {
                Verdict::Converges
            } else if p < 1.0 - margin {
                Verdict::Diverges
            } else {
                Verdict::Inconclusive
            };
            let l0 = (1.0 / r_min).ln();
            let tail_integral = if p > 1.0 { a * l0.powf(1.0 - p) / (p - 1.0) } else { f64::INFINITY };
            Some(TailFit { model, a, exponent: p, rss, aic: aic(rss, rs.len()), verdict, tail_integral })
        }
    }
}

/// Trapezoid rule for `∫ M(r)/r dr = ∫ M d(log r)`.
pub fn log_trapezoid(rs: &[f64], ms: &[f64]) -> f64 {
    rs.windows(2)
        .zip(ms.windows(2))
        .map(|(r, m)| 0.5 * (m[0] + m[1]) * (r[1] / r[0]).ln())
        .sum()
}

/// Condition-1 decision from a table `(r, M(r))` with `r` increasing.
pub fn condition1_from_table(rs: &[f64], ms: &[f64], cfg: &Condition1Config) -> Condition1Report {
    let mut diagnostics = Vec::new();
    let grid_integral = log_trapezoid(rs, ms);
    let k = cfg.tail_points.min(rs.len());
    let mut fits = Vec::new();
    if rs.len() < 3 || ms.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
        diagnostics.push("table too short or contains non-positive values".into());
    } else {
        for model in [TailModel::Power, TailModel::Log] {
            match fit_tail(model, &rs[..k], &ms[..k], cfg) {
                Some(f) => fits.push(f),
                None => diagnostics.push(format!("{model:?} fit failed")),
            }
        }
    }
    let (selected, verdict) = match fits.as_slice() {
        [a, b] => {
            let best = if a.aic <= b.aic { a } else { b };
            if a.verdict == b.verdict {
                (Some(best.model), a.verdict)
            } else if (a.aic - b.aic).abs() > cfg.aic_gap {
                diagnostics.push(format!("models disagree; {:?} preferred by AIC", best.model));
                (Some(best.model), best.verdict)
            } else {
                diagnostics.push("models disagree and neither is preferred".into());
                (None, Verdict::Inconclusive)
            }
        }
        [a] => (Some(a.model), a.verdict),
        _ => (None, Verdict::Inconclusive),
    };
    let total_estimate = selected
        .and_then(|m| fits.iter().find(|f| f.model == m))
        .map(|f| grid_integral + f.tail_integral)
        .filter(|v| v.is_finite());
    Condition1Report {
        r_min: rs.first().copied().unwrap_or(0.0),
        r_max: rs.last().copied().unwrap_or(0.0),
        grid_integral,
        fits,
        selected,
        total_estimate,
        verdict,
        diagnostics,
    }
}

/// Shell table on `grid` (upper side) followed by [`condition1_from_table`].
pub fn condition1_test(
    domain: &DomainSpec,
    grid: &[f64],
    shell: &ShellConfig,
    cfg: &Condition1Config,
) -> Result<(Vec<ShellRow>, Condition1Report)> {
    let table = shell_table(domain, grid, shell)?;
    let rs: Vec<f64> = table.iter().map(|r| r.r).collect();
    let ms: Vec<f64> = table.iter().map(|r| r.upper).collect();
    let rep = condition1_from_table(&rs, &ms, cfg);
    Ok((table, rep))
}

// ---------------------------------------------------------------------------
// Ψ_s threshold

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PsiThreshold {
    pub s: f64,
    /// Exponent of `u` after substituting `u = log 1/t`.
    pub exponent: f64,
    pub verdict: Verdict,
    /// `(U, ∫₁^U u^{-1/s} du)` for growing `U`.
    pub partial_integrals: Vec<(f64, f64)>,
    /// Value of the full tail integral when it converges.
    pub limit: Option<f64>,
}

/// `∫₀^{1/e} t^{-1}(log 1/t)^{-1/s} dt = ∫₁^∞ u^{-1/s} du`, finite iff `1/s > 1`.
pub fn psi_threshold_test(s: f64) -> PsiThreshold {
    assert!(s > 0.0, "s must be positive");
    let p = 1.0 / s;
    let partial = |u: f64| if p == 1.0 { u.ln() } else { (u.powf(1.0 - p) - 1.0) / (1.0 - p) };
    let partial_integrals = [1e1, 1e2, 1e4, 1e8, 1e16].iter().map(|&u| (u, partial(u))).collect();
    let verdict = if p > 1.0 { Verdict::Converges } else { Verdict::Diverges };
    PsiThreshold {
        s,
        exponent: -p,
        verdict,
        partial_integrals,
        limit: (p > 1.0).then(|| 1.0 / (p - 1.0)),
    }
}

// ---------------------------------------------------------------------------
// condition 2

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition2Sample {
    pub delta: f64,
    pub k_upper: f64,
    /// `K − (C + α log 1/δ)` after inflation; never positive.
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Condition2Fit {
    pub x0: CPoint,
    pub c: f64,
    pub alpha: f64,
    pub c_least_squares: f64,
    pub max_positive_residual: f64,
    pub rms_residual: f64,
    pub samples: Vec<Condition2Sample>,
}

/// Points `x₀ + (L − δ)u` on the ray from `x₀` in direction `u` (real view),
/// `L` the exit distance; their boundary distance is at most `δ`.
pub fn radial_approach(domain: &DomainSpec, x0: &CPoint, u: &[f64], deltas: &[f64]) -> Result<Vec<CPoint>> {
    let l = domain.ray_to_boundary(x0, u)?;
    Ok(deltas
        .iter()
        .filter(|&&d| d < l)
        .map(|&d| x0.offset_real(u, l - d))
        .filter(|p| domain.contains(p))
        .collect())
}

/// Least-squares line through `(log 1/δ, K_upper(x₀, x))`, with `C` raised so the
/// line dominates every sample.
pub fn condition2_fit(domain: &DomainSpec, x0: &CPoint, samples: &[CPoint]) -> Result<Condition2Fit> {
    let rows = crate::par::map_indexed(samples.len(), |i| -> Result<(f64, f64)> {
        let delta = domain.boundary_distance(&samples[i])?;
        let k = kobayashi::distance(domain, x0, &samples[i])?.upper;
        Ok((delta, k))
    });
    let rows: Vec<(f64, f64)> = rows.into_iter().collect::<Result<_>>()?;
    let ls: Vec<f64> = rows.iter().map(|(d, _)| (1.0 / d).ln()).collect();
    let ks: Vec<f64> = rows.iter().map(|(_, k)| *k).collect();
    if rows.len() < 3 {
        return Err(GoldilocksError::DegenerateSpread(format!("{} samples", rows.len())));
    }
    let spread = ls.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ls.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread < 1e-6 {
        return Err(GoldilocksError::DegenerateSpread("all samples at the same boundary distance".into()));
    }
    let (c_ls, alpha, rss) = linear_fit(&ls, &ks).ok_or_else(|| GoldilocksError::DegenerateSpread("singular fit".into()))?;
    let shifted: Vec<f64> = ls.iter().zip(&ks).map(|(l, k)| k - alpha * l).collect();
    let c = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let samples: Vec<Condition2Sample> = rows
        .iter()
        .zip(&shifted)
        .map(|(&(delta, k_upper), s)| Condition2Sample { delta, k_upper, residual: s - c })
        .collect();
    let max_positive_residual = samples.iter().map(|s| s.residual).fold(0.0, f64::max);
    Ok(Condition2Fit {
        x0: x0.clone(),
        c,
        alpha,
        c_least_squares: c_ls,
        max_positive_residual,
        rms_residual: (rss / rows.len() as f64).sqrt(),
        samples,
    })
}

// ---------------------------------------------------------------------------
// cone-derived bound

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeLogBound {
    pub aperture: f64,
    pub reach: f64,
    /// Exponent of the sector map `ζ ↦ R(1 + ζ)^{1/α}`.
    pub alpha: f64,
    pub radius: f64,
    /// `max K_upper(x₀, q)` over the core points `q = ξ + R·v`.
    pub c1: f64,
    /// `C = C₁ + ½ log(2R^α)`.
    pub c: f64,
    /// Guaranteed slope `α/2`.
    pub slope: f64,
}

fn sector_inside(domain: &DomainSpec, vertex: &CPoint, axis: &CVector, radius: f64, alpha: f64) -> bool {
    for i in 1..=24 {
        let rho = 0.999 * i as f64 / 24.0;
        for k in 0..48 {
            let zeta = Complex64::from_polar(rho, 2.0 * PI * k as f64 / 48.0);
            let w = (Complex64::new(1.0, 0.0) + zeta).powf(1.0 / alpha) * radius;
            if !domain.contains(&vertex.translate(axis, w)) {
                return false;
            }
        }
    }
    true
}

/// Constants of the cone-map argument: with every sample on the axis of a cone of
/// aperture `θ` and reach `r⁰`, the analytic disks `ζ ↦ ξ + R(1 + ζ)^{1/α}v`
/// give `K(x₀, x) ≤ C + (α/2) log(1/δ(x))`.
pub fn cone_log_bound(domain: &DomainSpec, report: Option<&ConeReport>, x0: &CPoint) -> Result<ConeLogBound> {
    let report = report.ok_or(GoldilocksError::NoConeReport)?;
    if !report.all_verified() {
        return Err(GoldilocksError::ConeNotVerified);
    }
    let cones: Vec<_> = report.entries.iter().filter_map(|e| e.cone.as_ref()).collect();
    let aperture = cones.iter().map(|c| c.aperture).fold(f64::INFINITY, f64::min);
    let reach = cones.iter().map(|c| c.reach).fold(f64::INFINITY, f64::min);

    let mut alpha = (PI / aperture).max(1.0) * (1.0 + 1e-9);
    let mut radius = reach / 2f64.powf(1.0 / alpha);
    for _ in 0..20 {
        if cones.iter().all(|c| sector_inside(domain, &c.vertex, &c.axis, radius, alpha)) {
            break;
        }
        alpha *= 1.1;
        radius = reach / 2f64.powf(1.0 / alpha);
    }
    let core = crate::par::map_indexed(cones.len(), |i| {
        let q = cones[i].vertex.translate(&cones[i].axis, Complex64::new(radius, 0.0));
        kobayashi::distance(domain, x0, &q).map(|e| e.upper)
    });
    let mut c1: f64 = 0.0;
    for k in core {
        c1 = c1.max(k?);
    }
    let c = c1 + 0.5 * (2.0 * radius.powf(alpha)).ln();
    Ok(ConeLogBound { aperture, reach, alpha, radius, c1, c, slope: 0.5 * alpha })
}

// ---------------------------------------------------------------------------
// combined report

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GoldilocksConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub grid_points: usize,
    pub shell: ShellConfig,
    pub condition1: Condition1Config,
    pub delta_min: f64,
    pub delta_max: f64,
    pub approach_points: usize,
    pub cone_samples: usize,
    pub cone_delta: f64,
    pub cone: ConeCheckConfig,
}

impl Default for GoldilocksConfig {
    fn default() -> Self {
        GoldilocksConfig {
            r_min: 1e-4,
            r_max: 0.5,
            grid_points: 40,
            shell: ShellConfig::default(),
            condition1: Condition1Config::default(),
            delta_min: 1e-6,
            delta_max: 1e-1,
            approach_points: 25,
            cone_samples: 8,
            cone_delta: 1e-2,
            cone: ConeCheckConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConeSummary {
    pub samples: usize,
    pub verified: usize,
    pub min_aperture: Option<f64>,
    pub min_reach: Option<f64>,
    pub log_bound: Option<ConeLogBound>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoldilocksReport {
    pub shell_table: Vec<ShellRow>,
    pub condition1: Condition1Report,
    pub condition2: Condition2Fit,
    pub cone: ConeSummary,
}

pub fn goldilocks_report(domain: &DomainSpec, cfg: &GoldilocksConfig) -> Result<GoldilocksReport> {
    let r_max = cfg.r_max.min(0.5 * domain.enclosing_radius());
    let grid = sampling::geometric_grid(cfg.r_min, r_max, cfg.grid_points.max(3));
    let (shell_table, condition1) = condition1_test(domain, &grid, &cfg.shell, &cfg.condition1)?;

    let x0 = domain.interior_witness().clone();
    let u = sampling::sphere_directions(2 * domain.dim(), 1, cfg.shell.seed).remove(0);
    let deltas = sampling::geometric_grid(cfg.delta_min, cfg.delta_max, cfg.approach_points.max(3));
    let approach = radial_approach(domain, &x0, &u, &deltas)?;
    let condition2 = condition2_fit(domain, &x0, &approach)?;

    let samples = domain.near_boundary_samples(cfg.cone_samples, cfg.cone_delta, cfg.cone.seed);
    let report = domain.cone_condition_check(&samples, &cfg.cone);
    let log_bound = cone_log_bound(domain, Some(&report), &x0).ok();
    let cone = ConeSummary {
        samples: report.entries.len(),
        verified: report.entries.iter().filter(|e| e.cone.is_some()).count(),
        min_aperture: report.min_aperture,
        min_reach: report.min_reach,
        log_bound,
    };
    Ok(GoldilocksReport { shell_table, condition1, condition2, cone })
}

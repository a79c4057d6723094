//! Sampled curves, discrete curve shortening, unit-speed reparametrisation and
//! `(λ, κ)` certification.
//!
//! A path is the piecewise-linear curve through its samples. All lengths use the
//! same midpoint rule as [`crate::kobayashi::path_length`], so a path produced by
//! [`unit_speed_reparametrize`] has sampled speed exactly one.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{real_norm, CPoint};
use crate::domains::{DomainError, DomainSpec};
use crate::kobayashi::{self, LengthConfig, Side};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("path has zero Kobayashi length")]
    ZeroLength,
    #[error("no interior path found between the endpoints")]
    NoInteriorPath,
    #[error("declared quasi-geodesic constants violated at samples {i} and {j} (slack {slack:.3e})")]
    QuasiViolation { i: usize, j: usize, slack: f64 },
}

pub type Result<T> = std::result::Result<T, GeodesicError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PathRepr", into = "PathRepr")]
pub struct SampledPath {
    params: Vec<f64>,
    points: Vec<CPoint>,
}

#[derive(Serialize, Deserialize)]
struct PathRepr {
    params: Vec<f64>,
    points: Vec<CPoint>,
    #[serde(default)]
    resolution: usize,
}

impl TryFrom<PathRepr> for SampledPath {
    type Error = GeodesicError;
    fn try_from(r: PathRepr) -> Result<Self> {
        SampledPath::new(r.params, r.points)
    }
}

impl From<SampledPath> for PathRepr {
    fn from(p: SampledPath) -> Self {
        let resolution = p.resolution();
        PathRepr { params: p.params, points: p.points, resolution }
    }
}

impl SampledPath {
    pub fn new(params: Vec<f64>, points: Vec<CPoint>) -> Result<Self> {
        if points.is_empty() || params.len() != points.len() {
            return Err(GeodesicError::InvalidPath(format!(
                "{} params for {} points",
                params.len(),
                points.len()
            )));
        }
        if params.windows(2).any(|w| !(w[1] > w[0])) || params.iter().any(|t| !t.is_finite()) {
            return Err(GeodesicError::InvalidPath("params must be finite and strictly increasing".into()));
        }
        let d = points[0].dim();
        if points.iter().any(|p| p.dim() != d || !p.is_finite()) {
            return Err(GeodesicError::InvalidPath("points must be finite with a common dimension".into()));
        }
        Ok(SampledPath { params, points })
    }

    /// `n + 1` equally spaced samples of the segment `x → y`, params on `[0, 1]`.
    pub fn straight(x: &CPoint, y: &CPoint, n: usize) -> Self {
        let n = n.max(1);
        let params = (0..=n).map(|k| k as f64 / n as f64).collect();
        let points = (0..=n).map(|k| x.lerp(y, k as f64 / n as f64)).collect();
        SampledPath { params, points }
    }

    pub fn single(p: CPoint) -> Self {
        SampledPath { params: vec![0.0], points: vec![p] }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn points(&self) -> &[CPoint] {
        &self.points
    }

    /// Number of segments `N`.
    pub fn resolution(&self) -> usize {
        self.points.len() - 1
    }

    pub fn first(&self) -> &CPoint {
        &self.points[0]
    }

    pub fn last(&self) -> &CPoint {
        &self.points[self.points.len() - 1]
    }

    pub fn span(&self) -> (f64, f64) {
        (self.params[0], self.params[self.params.len() - 1])
    }

    /// Affine change of parameter onto `[a, b]`.
    pub fn rescaled(&self, a: f64, b: f64) -> Result<SampledPath> {
        let (t0, t1) = self.span();
        if self.params.len() == 1 {
            return Ok(SampledPath::single(self.points[0].clone()));
        }
        let s = (b - a) / (t1 - t0);
        SampledPath::new(self.params.iter().map(|t| a + (t - t0) * s).collect(), self.points.clone())
    }

    /// Samples `i..=j`.
    pub fn slice(&self, i: usize, j: usize) -> SampledPath {
        SampledPath { params: self.params[i..=j].to_vec(), points: self.points[i..=j].to_vec() }
    }

    /// Every `k`-th sample, always keeping the last.
    pub fn subsample(&self, k: usize) -> SampledPath {
        let k = k.max(1);
        let mut idx: Vec<usize> = (0..self.points.len()).step_by(k).collect();
        if *idx.last().unwrap() != self.points.len() - 1 {
            idx.push(self.points.len() - 1);
        }
        SampledPath {
            params: idx.iter().map(|&i| self.params[i]).collect(),
            points: idx.iter().map(|&i| self.points[i].clone()).collect(),
        }
    }

    /// CSV rows `t, Re z1, Im z1, …` with a header.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> std::result::Result<(), csv::Error> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let d = self.points[0].dim();
        let mut header = vec!["t".to_string()];
        for j in 1..=d {
            header.push(format!("re_z{j}"));
            header.push(format!("im_z{j}"));
        }
        out.write_record(&header)?;
        for (t, p) in self.params.iter().zip(&self.points) {
            let mut row = vec![fmt_num(*t)];
            row.extend(p.to_real().into_iter().map(fmt_num));
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Fixed 17-significant-digit formatting used by every CSV writer.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

// ---------------------------------------------------------------------------
// curve shortening

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathSearchConfig {
    pub initial_nodes: usize,
    pub final_nodes: usize,
    /// Relative length improvement below which a level counts as converged.
    pub rel_tol: f64,
    /// Number of sweeps the improvement is measured over.
    pub patience: usize,
    pub max_sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PathSearchConfig {
    fn default() -> Self {
        PathSearchConfig {
            initial_nodes: 8,
            final_nodes: 128,
            rel_tol: 1e-4,
            patience: 5,
            max_sweeps: 400,
            restarts: 1,
            seed: 0,
        }
    }
}

pub const MAX_NODES: usize = 4096;

fn seg(domain: &DomainSpec, a: &CPoint, b: &CPoint) -> Option<f64> {
    kobayashi::segment_length_single(domain, a, b, Side::Upper).ok().filter(|l| l.is_finite())
}

fn polyline_energy(domain: &DomainSpec, pts: &[CPoint]) -> Option<f64> {
    let mut e = 0.0;
    for w in pts.windows(2) {
        e += seg(domain, &w[0], &w[1])?;
    }
    Some(e)
}

/// Midpoints of all segments inside the domain, with a few extra probes per
/// segment for non-convex kinds.
fn polyline_interior(domain: &DomainSpec, pts: &[CPoint]) -> bool {
    let probes = if domain.is_convex() { 1 } else { 8 };
    pts.iter().all(|p| domain.contains(p))
        && pts.windows(2).all(|w| (1..=probes).all(|k| domain.contains(&w[0].lerp(&w[1], k as f64 / (probes + 1) as f64))))
}

/// Equal-length resampling of a polyline to `n` segments using midpoint lengths.
fn resample(domain: &DomainSpec, pts: &[CPoint], n: usize) -> Vec<CPoint> {
    let lens: Vec<f64> = pts.windows(2).map(|w| seg(domain, &w[0], &w[1]).unwrap_or(0.0)).collect();
    let total: f64 = lens.iter().sum();
    if total <= 0.0 {
        return (0..=n).map(|k| pts[0].lerp(&pts[pts.len() - 1], k as f64 / n as f64)).collect();
    }
    let mut out = Vec::with_capacity(n + 1);
    out.push(pts[0].clone());
    let (mut i, mut acc) = (0usize, 0.0);
    for k in 1..n {
        let s = total * k as f64 / n as f64;
        while i + 1 < lens.len() && acc + lens[i] < s {
            acc += lens[i];
            i += 1;
        }
        let f = if lens[i] > 0.0 { ((s - acc) / lens[i]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(pts[i].lerp(&pts[i + 1], f));
    }
    out.push(pts[pts.len() - 1].clone());
    out
}

fn initial_polyline(domain: &DomainSpec, x: &CPoint, y: &CPoint, n: usize) -> Option<Vec<CPoint>> {
    let straight: Vec<CPoint> = (0..=n).map(|k| x.lerp(y, k as f64 / n as f64)).collect();
    if polyline_interior(domain, &straight) {
        return Some(straight);
    }
    // detour through the interior witness
    let w = domain.interior_witness();
    let half = (n / 2).max(1);
    let mut pts: Vec<CPoint> = (0..=half).map(|k| x.lerp(w, k as f64 / half as f64)).collect();
    pts.extend((1..=half).map(|k| w.lerp(y, k as f64 / half as f64)));
    polyline_interior(domain, &pts).then_some(pts)
}

/// One Gauss–Seidel sweep of normal-projected descent. Returns the new energy.
fn sweep(domain: &DomainSpec, pts: &mut [CPoint], steps: &mut [f64]) -> f64 {
    let n = pts.len();
    for i in 1..n - 1 {
        let (prev, next) = (pts[i - 1].clone(), pts[i + 1].clone());
        let local = |q: &CPoint| -> Option<f64> {
            if !domain.contains(q) {
                return None;
            }
            if !domain.is_convex() && !(domain.contains(&prev.midpoint(q)) && domain.contains(&q.midpoint(&next))) {
                return None;
            }
            Some(seg(domain, &prev, q)? + seg(domain, q, &next)?)
        };
        let p = pts[i].clone();
        let Some(f0) = local(&p) else { continue };
        let scale = p.distance(&prev).min(p.distance(&next));
        if scale <= 0.0 {
            continue;
        }
        let mut chord = (&next - &prev).to_real();
        let cn = real_norm(&chord);
        if cn > 0.0 {
            chord.iter_mut().for_each(|c| *c /= cn);
        }
        let h = 1e-6 * scale;
        let pr = p.to_real();
        let mut g = vec![0.0; pr.len()];
        let mut ok = true;
        for k in 0..pr.len() {
            let mut e = vec![0.0; pr.len()];
            e[k] = 1.0;
            match (local(&p.offset_real(&e, h)), local(&p.offset_real(&e, -h))) {
                (Some(a), Some(b)) => g[k] = (a - b) / (2.0 * h),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let along: f64 = g.iter().zip(&chord).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(&chord).for_each(|(a, b)| *a -= along * b);
        let gn = real_norm(&g);
        if gn == 0.0 || !gn.is_finite() {
            continue;
        }
        g.iter_mut().for_each(|a| *a /= -gn);
        let mut alpha = steps[i];
        let mut accepted = false;
        for _ in 0..8 {
            let q = p.offset_real(&g, alpha * scale);
            if let Some(f1) = local(&q) {
                if f1 < f0 {
                    pts[i] = q;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        steps[i] = if accepted { (alpha * 1.5).min(0.5) } else { (alpha * 0.5).max(1e-12) };
    }
    polyline_energy(domain, pts).unwrap_or(f64::INFINITY)
}

fn shorten_level(domain: &DomainSpec, pts: &mut [CPoint], cfg: &PathSearchConfig) -> f64 {
    let mut steps = vec![0.25; pts.len()];
    let mut history = vec![polyline_energy(domain, pts).unwrap_or(f64::INFINITY)];
    if pts.len() < 3 {
        return history[0];
    }
    for _ in 0..cfg.max_sweeps {
        let e = sweep(domain, pts, &mut steps);
        history.push(e);
        let k = history.len() - 1;
        if k >= cfg.patience && history[k - cfg.patience] - e <= cfg.rel_tol * e {
            break;
        }
    }
    *history.last().unwrap()
}

fn perturb(domain: &DomainSpec, pts: &mut [CPoint], seed: u64) {
    let mut rng = crate::sampling::rng(seed);
    for i in 1..pts.len() - 1 {
        let delta = domain.boundary_distance(&pts[i]).unwrap_or(0.0);
        let u: Vec<f64> = (0..2 * pts[i].dim()).map(|_| crate::sampling::gaussian(&mut rng)).collect();
        let q = pts[i].offset_real(&u, 0.1 * delta / (1.0 + real_norm(&u)));
        if domain.contains(&q) {
            pts[i] = q;
        }
    }
}

/// Discrete curve shortening from `x` to `y`: Gauss–Seidel descent on the
/// upper-bound length, multiresolution from `initial_nodes` to `final_nodes`.
/// Params of the result are equally spaced on `[0, 1]`.
pub fn minimize_path(domain: &DomainSpec, x: &CPoint, y: &CPoint, cfg: &PathSearchConfig) -> Result<SampledPath> {
    domain.check_dim(x.dim())?;
    domain.check_dim(y.dim())?;
    if !domain.membership(x)? || !domain.membership(y)? {
        return Err(DomainError::Outside.into());
    }
    let target = cfg.final_nodes.clamp(1, MAX_NODES);
    if x == y {
        return Ok(SampledPath::straight(x, y, target));
    }
    let start = cfg.initial_nodes.clamp(2, target);
    let base = initial_polyline(domain, x, y, start).ok_or(GeodesicError::NoInteriorPath)?;

    let runs = crate::par::map_indexed(cfg.restarts.max(1), |r| {
        let mut pts = base.clone();
        if r > 0 {
            perturb(domain, &mut pts, cfg.seed.wrapping_add(r as u64));
        }
        let mut n = pts.len() - 1;
        let mut energy = shorten_level(domain, &mut pts, cfg);
        while n < target {
            n = (2 * n).min(target);
            let next = resample(domain, &pts, n);
            if polyline_interior(domain, &next) {
                pts = next;
            } else {
                // keep the old nodes and insert midpoints instead
                let mut dense = Vec::with_capacity(2 * pts.len());
                for w in pts.windows(2) {
                    dense.push(w[0].clone());
                    dense.push(w[0].midpoint(&w[1]));
                }
                dense.push(pts[pts.len() - 1].clone());
                pts = dense;
                n = pts.len() - 1;
            }
            energy = shorten_level(domain, &mut pts, cfg);
        }
        (energy, pts)
    });
    let (energy, pts) = runs
        .into_iter()
        .filter(|(e, _)| e.is_finite())
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(GeodesicError::NoInteriorPath)?;
    let _ = energy;
    let n = pts.len() - 1;
    Ok(SampledPath { params: (0..=n).map(|k| k as f64 / n as f64).collect(), points: pts })
}

// ---------------------------------------------------------------------------
// reparametrisation

/// Dense polyline where every piece's midpoint length is converged.
fn densify(domain: &DomainSpec, path: &SampledPath, cfg: &LengthConfig) -> Result<(Vec<CPoint>, Vec<f64>)> {
    let pts = path.points();
    let pieces = crate::par::map_indexed(pts.len() - 1, |i| -> Result<(Vec<CPoint>, Vec<f64>)> {
        let (a, b) = (&pts[i], &pts[i + 1]);
        if a == b {
            return Ok((vec![], vec![]));
        }
        let mut prev: Option<f64> = None;
        let mut depth = 0;
        loop {
            let n = 1usize << depth;
            let nodes: Vec<CPoint> = (0..=n).map(|k| a.lerp(b, k as f64 / n as f64)).collect();
            let mut lens = Vec::with_capacity(n);
            for w in nodes.windows(2) {
                lens.push(kobayashi::segment_length_single(domain, &w[0], &w[1], Side::Upper)?);
            }
            let sum: f64 = lens.iter().sum();
            let done = prev.is_some_and(|p| (sum - p).abs() <= cfg.rel_tol * sum + cfg.abs_tol);
            if done || depth >= cfg.max_depth {
                return Ok((nodes[..n].to_vec(), lens));
            }
            prev = Some(sum);
            depth += 1;
        }
    });
    let mut nodes = Vec::new();
    let mut lens = Vec::new();
    for piece in pieces {
        let (n, l) = piece?;
        nodes.extend(n);
        lens.extend(l);
    }
    nodes.push(path.last().clone());
    Ok((nodes, lens))
}

/// Equal spacing in Kobayashi arc length (upper side). Output params are the
/// cumulative midpoint lengths of the output segments, so the sampled speed is
/// one on every segment.
pub fn unit_speed_reparametrize(domain: &DomainSpec, path: &SampledPath) -> Result<SampledPath> {
    unit_speed_reparametrize_with(domain, path, path.resolution(), &LengthConfig::for_domain(domain))
}

pub fn unit_speed_reparametrize_with(
    domain: &DomainSpec,
    path: &SampledPath,
    segments: usize,
    cfg: &LengthConfig,
) -> Result<SampledPath> {
    for p in path.points() {
        if !domain.membership(p)? {
            return Err(DomainError::Outside.into());
        }
    }
    if path.resolution() == 0 {
        return Err(GeodesicError::ZeroLength);
    }
    let (nodes, lens) = densify(domain, path, cfg)?;
    let total: f64 = lens.iter().sum();
    if !(total > 0.0) {
        return Err(GeodesicError::ZeroLength);
    }
    let n = segments.max(1);
    let mut out = Vec::with_capacity(n + 1);
    out.push(path.first().clone());
    let (mut i, mut acc) = (0usize, 0.0);
    for k in 1..n {
        let s = total * k as f64 / n as f64;
        // left-continuous inverse: first piece whose right end reaches s
        while i + 1 < lens.len() && acc + lens[i] < s {
            acc += lens[i];
            i += 1;
        }
        let f = if lens[i] > 0.0 { ((s - acc) / lens[i]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(nodes[i].lerp(&nodes[i + 1], f));
    }
    out.push(path.last().clone());

    let mut params = Vec::with_capacity(n + 1);
    params.push(0.0);
    for w in out.windows(2) {
        let l = kobayashi::segment_length_single(domain, &w[0], &w[1], Side::Upper)?;
        params.push(params.last().unwrap() + l);
    }
    SampledPath::new(params, out)
}

// ---------------------------------------------------------------------------
// certification

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `|t − s|/λ − κ ≤ K`
    Lower,
    /// `K ≤ λ|t − s| + κ`
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSlack {
    pub i: usize,
    pub j: usize,
    pub s: f64,
    pub t: f64,
    pub k_lower: f64,
    pub k_upper: f64,
    pub clause: Clause,
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostGeodesicCertificate {
    pub lambda: f64,
    pub lambda_target: f64,
    pub kappa: f64,
    pub speed_max: f64,
    pub speed_clause_met: bool,
    pub pairwise_slack: Option<PairSlack>,
    pub euclidean_speed_max: f64,
    /// `λ/c₁`, the Euclidean Lipschitz bound implied by the certificate.
    pub lipschitz_bound: f64,
    pub pairs_checked: usize,
}

pub const SPEED_TOL: f64 = 1e-9;

/// Lower and upper distance bounds that are cheap enough for all-pairs use:
/// closed forms when available, otherwise the enclosing-ball lower bound and
/// no upper bound (the caller then falls back to subpath lengths).
pub(crate) fn pair_bounds(domain: &DomainSpec, x: &CPoint, y: &CPoint) -> (f64, f64) {
    if let Some(d) = kobayashi::exact_distance(domain, x, y) {
        return (d, d);
    }
    let r = domain.enclosing_radius();
    let lo = kobayashi::ball_distance(&x.scale_real(1.0 / r), &y.scale_real(1.0 / r))
        .max(kobayashi::lipschitz_lower_constant(domain) * x.distance(y));
    (lo, f64::INFINITY)
}

/// Smallest `κ` for which both clauses hold on every sampled pair, and the
/// sampled speed check. If some segment is faster than `lambda_target` the
/// reported `λ` is raised to the measured speed so the pair `(λ, κ)` stays valid.
pub fn certify(domain: &DomainSpec, path: &SampledPath, lambda_target: f64) -> Result<AlmostGeodesicCertificate> {
    for p in path.points() {
        if !domain.membership(p)? {
            return Err(DomainError::Outside.into());
        }
    }
    let c1 = kobayashi::lipschitz_lower_constant(domain);
    let lambda_target = lambda_target.max(1.0);
    let n = path.points().len();
    if n == 1 {
        return Ok(AlmostGeodesicCertificate {
            lambda: lambda_target,
            lambda_target,
            kappa: 0.0,
            speed_max: 0.0,
            speed_clause_met: true,
            pairwise_slack: None,
            euclidean_speed_max: 0.0,
            lipschitz_bound: lambda_target / c1,
            pairs_checked: 0,
        });
    }
    let (ts, ps) = (path.params(), path.points());
    let mut seg_len = Vec::with_capacity(n - 1);
    let mut speed_max: f64 = 0.0;
    let mut euclid_max: f64 = 0.0;
    for i in 0..n - 1 {
        let l = kobayashi::segment_length_single(domain, &ps[i], &ps[i + 1], Side::Upper)?;
        let dt = ts[i + 1] - ts[i];
        speed_max = speed_max.max(l / dt);
        euclid_max = euclid_max.max(ps[i].distance(&ps[i + 1]) / dt);
        seg_len.push(l);
    }
    let mut prefix = vec![0.0; n];
    for i in 0..n - 1 {
        prefix[i + 1] = prefix[i] + seg_len[i];
    }
    let speed_ok = speed_max <= lambda_target * (1.0 + SPEED_TOL);
    let lambda = if speed_ok { lambda_target } else { speed_max };

    let rows = crate::par::map_indexed(n, |i| {
        let mut worst: Option<PairSlack> = None;
        for j in i + 1..n {
            let dt = ts[j] - ts[i];
            let (lo, up) = pair_bounds(domain, &ps[i], &ps[j]);
            let up = if up.is_finite() { up } else { prefix[j] - prefix[i] };
            for (clause, slack) in [(Clause::Lower, dt / lambda - lo), (Clause::Upper, up - lambda * dt)] {
                if worst.map_or(true, |w| slack > w.slack) {
                    worst = Some(PairSlack { i, j, s: ts[i], t: ts[j], k_lower: lo, k_upper: up, clause, slack });
                }
            }
        }
        worst
    });
    let worst = rows.into_iter().flatten().max_by(|a, b| a.slack.total_cmp(&b.slack));
    Ok(AlmostGeodesicCertificate {
        lambda,
        lambda_target,
        kappa: worst.map_or(0.0, |w| w.slack.max(0.0)),
        speed_max,
        speed_clause_met: speed_ok,
        pairwise_slack: worst,
        euclidean_speed_max: euclid_max,
        lipschitz_bound: lambda / c1,
        pairs_checked: n * (n - 1) / 2,
    })
}

/// Convenience: shorten, reparametrise to unit speed and certify at `λ = 1`.
pub fn almost_geodesic(
    domain: &DomainSpec,
    x: &CPoint,
    y: &CPoint,
    cfg: &PathSearchConfig,
) -> Result<(SampledPath, AlmostGeodesicCertificate)> {
    let raw = minimize_path(domain, x, y, cfg)?;
    if x == y {
        let p = SampledPath::single(x.clone());
        let cert = certify(domain, &p, 1.0)?;
        return Ok((p, cert));
    }
    let path = unit_speed_reparametrize(domain, &raw)?;
    let cert = certify(domain, &path, 1.0)?;
    Ok((path, cert))
}

// ---------------------------------------------------------------------------
// quasi-geodesic smoothing

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmoothingResult {
    pub path: SampledPath,
    pub lambda0: f64,
    pub kappa0: f64,
    /// Hausdorff-closeness radius the construction guarantees.
    pub radius: f64,
    /// Sampled Hausdorff distance (upper bounds) between input and output.
    pub hausdorff_measured: f64,
    pub pieces: usize,
    pub certificate: AlmostGeodesicCertificate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    pub piece_segments: usize,
    pub search: PathSearchConfig,
    /// Slack allowed when checking the declared quasi-geodesic constants.
    pub check_tol: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            piece_segments: 32,
            search: PathSearchConfig { final_nodes: 32, ..PathSearchConfig::default() },
            check_tol: 1e-9,
        }
    }
}

/// `λ₀ = 2λ + 2κ + 2`, `κ₀ = 4λ + 5κ + 4`, `R = 2λ + 2κ + 2`.
pub fn smoothing_constants(lambda: f64, kappa: f64) -> (f64, f64, f64) {
    (2.0 * lambda + 2.0 * kappa + 2.0, 4.0 * lambda + 5.0 * kappa + 4.0, 2.0 * lambda + 2.0 * kappa + 2.0)
}

/// First sampled pair on which the declared `(λ, κ)` quasi-geodesic inequality
/// certainly fails, judged with the sound side of each distance bound.
pub fn quasi_violation(domain: &DomainSpec, q: &SampledPath, lambda: f64, kappa: f64, tol: f64) -> Option<(usize, usize, f64)> {
    let (ts, ps) = (q.params(), q.points());
    let n = ps.len();
    let rows = crate::par::map_indexed(n, |i| {
        let mut worst: Option<(usize, usize, f64)> = None;
        for j in i + 1..n {
            let dt = ts[j] - ts[i];
            let (lo, mut up) = pair_bounds(domain, &ps[i], &ps[j]);
            if !up.is_finite() {
                up = kobayashi::distance(domain, &ps[i], &ps[j]).map(|e| e.upper).unwrap_or(f64::INFINITY);
            }
            let slack = (dt / lambda - kappa - up).max(lo - lambda * dt - kappa);
            if slack > tol && worst.map_or(true, |w| slack > w.2) {
                worst = Some((i, j, slack));
            }
        }
        worst
    });
    rows.into_iter().flatten().max_by(|a, b| a.2.total_cmp(&b.2))
}

fn nearest_sample(q: &SampledPath, t: f64) -> usize {
    let ts = q.params();
    let k = ts.partition_point(|&s| s < t);
    if k == 0 {
        0
    } else if k >= ts.len() {
        ts.len() - 1
    } else if (ts[k] - t).abs() < (t - ts[k - 1]).abs() {
        k
    } else {
        k - 1
    }
}

fn bridge(domain: &DomainSpec, x: &CPoint, y: &CPoint, cfg: &SmoothingConfig) -> Result<SampledPath> {
    if x == y {
        return Ok(SampledPath::single(x.clone()));
    }
    let raw = minimize_path(domain, x, y, &cfg.search)?;
    unit_speed_reparametrize_with(domain, &raw, cfg.piece_segments, &LengthConfig::for_domain(domain))
}

fn sampled_hausdorff(domain: &DomainSpec, a: &SampledPath, b: &SampledPath) -> f64 {
    let one_side = |u: &SampledPath, v: &SampledPath| {
        crate::par::map_indexed(u.points().len(), |i| {
            v.points()
                .iter()
                .map(|q| {
                    let (lo, up) = pair_bounds(domain, &u.points()[i], q);
                    if up.is_finite() {
                        up
                    } else {
                        kobayashi::distance(domain, &u.points()[i], q).map(|e| e.upper).unwrap_or(lo.max(f64::INFINITY))
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .into_iter()
        .fold(0.0, f64::max)
    };
    one_side(a, b).max(one_side(b, a))
}

/// Replaces a sampled `(λ, κ)`-quasi-geodesic by a connected almost-geodesic:
/// partition the parameter range into cells of width in `[1/2, 1]`, join the
/// anchor samples by unit-speed shortened paths, and stretch each piece over its
/// cell. Ranges of length at most `1/2` get one unit-speed bridging piece.
pub fn quasi_to_almost(
    domain: &DomainSpec,
    qpath: &SampledPath,
    lambda: f64,
    kappa: f64,
    cfg: &SmoothingConfig,
) -> Result<SmoothingResult> {
    for p in qpath.points() {
        if !domain.membership(p)? {
            return Err(DomainError::Outside.into());
        }
    }
    if let Some((i, j, slack)) = quasi_violation(domain, qpath, lambda, kappa, cfg.check_tol) {
        return Err(GeodesicError::QuasiViolation { i, j, slack });
    }
    let (lambda0, kappa0, radius) = smoothing_constants(lambda, kappa);
    let (a, b) = qpath.span();
    let (path, pieces) = if b - a <= 0.5 {
        (bridge(domain, qpath.first(), qpath.last(), cfg)?, 1)
    } else {
        let cells = (b - a).ceil() as usize;
        let knots: Vec<f64> = (0..=cells).map(|k| a + (b - a) * k as f64 / cells as f64).collect();
        let anchors: Vec<CPoint> = knots
            .iter()
            .enumerate()
            .map(|(k, &t)| match k {
                0 => qpath.first().clone(),
                k if k == cells => qpath.last().clone(),
                _ => qpath.points()[nearest_sample(qpath, t)].clone(),
            })
            .collect();
        let parts = crate::par::map_indexed(cells, |k| bridge(domain, &anchors[k], &anchors[k + 1], cfg));
        let mut params = vec![a];
        let mut points = vec![anchors[0].clone()];
        for (k, part) in parts.into_iter().enumerate() {
            let part = part?;
            if part.points().len() == 1 {
                // constant cell
                params.push(knots[k + 1]);
                points.push(anchors[k + 1].clone());
                continue;
            }
            let part = part.rescaled(knots[k], knots[k + 1])?;
            params.extend_from_slice(&part.params()[1..]);
            points.extend_from_slice(&part.points()[1..]);
        }
        (SampledPath::new(params, points)?, cells)
    };
    let certificate = certify(domain, &path, lambda0)?;
    let hausdorff_measured = sampled_hausdorff(domain, qpath, &path);
    Ok(SmoothingResult { path, lambda0, kappa0, radius, hausdorff_measured, pieces, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn p1(re: f64, im: f64) -> CPoint {
        CPoint::from_pairs(&[(re, im)])
    }

    #[test]
    fn path_constructor_rejects_bad_params() {
        assert!(SampledPath::new(vec![0.0, 0.0], vec![p1(0.0, 0.0), p1(0.1, 0.0)]).is_err());
        assert!(SampledPath::new(vec![0.0], vec![]).is_err());
    }

    #[test]
    fn minimize_straight_radius() {
        let d = DomainSpec::unit_disk();
        let path = minimize_path(&d, &p1(0.0, 0.0), &p1(0.9, 0.0), &PathSearchConfig::default()).unwrap();
        let l = kobayashi::path_length(&d, &path, Side::Upper).unwrap();
        assert!((l - 0.9_f64.atanh()).abs() < 0.01 * 0.9_f64.atanh());
    }

    #[test]
    fn minimize_bends_toward_origin() {
        let d = DomainSpec::unit_disk();
        let x = CPoint(vec![Complex64::from_polar(0.9, std::f64::consts::FRAC_PI_4)]);
        let y = CPoint(vec![Complex64::from_polar(0.9, 3.0 * std::f64::consts::FRAC_PI_4)]);
        let chord = kobayashi::path_length(&d, &SampledPath::straight(&x, &y, 128), Side::Upper).unwrap();
        let path = minimize_path(&d, &x, &y, &PathSearchConfig::default()).unwrap();
        let l = kobayashi::path_length(&d, &path, Side::Upper).unwrap();
        let exact = kobayashi::disk_distance(x[0], y[0]);
        assert!(l < chord);
        assert!((l - exact).abs() < 0.02 * exact, "{l} vs {exact}");
    }

    #[test]
    fn reparametrized_straight_path_has_unit_speed() {
        let d = DomainSpec::unit_disk();
        let path = SampledPath::straight(&p1(0.0, 0.0), &p1(0.9, 0.0), 128);
        let u = unit_speed_reparametrize(&d, &path).unwrap();
        assert_eq!(u.first(), &p1(0.0, 0.0));
        assert_eq!(u.last(), &p1(0.9, 0.0));
        let cert = certify(&d, &u, 1.0).unwrap();
        assert!(cert.speed_clause_met);
        assert!((cert.speed_max - 1.0).abs() < 0.05);
        let l0 = kobayashi::path_length(&d, &path, Side::Upper).unwrap();
        let l1 = kobayashi::path_length(&d, &u, Side::Upper).unwrap();
        assert!((l0 - l1).abs() <= 1e-6 * l0);
        assert!(cert.kappa <= 0.05, "{cert:?}");
    }

    #[test]
    fn reparametrize_zero_length_fails() {
        let d = DomainSpec::unit_disk();
        let q = p1(0.2, 0.0);
        let path = SampledPath::new(vec![0.0, 1.0], vec![q.clone(), q]).unwrap();
        assert_eq!(unit_speed_reparametrize(&d, &path), Err(GeodesicError::ZeroLength));
    }

    #[test]
    fn constant_path_certificate() {
        let d = DomainSpec::unit_disk();
        let c = certify(&d, &SampledPath::single(p1(0.3, 0.1)), 1.0).unwrap();
        assert_eq!((c.lambda, c.kappa), (1.0, 0.0));
    }

    #[test]
    fn chord_is_worse_than_geodesic() {
        let d = DomainSpec::unit_disk();
        let x = CPoint(vec![Complex64::from_polar(0.9, std::f64::consts::FRAC_PI_4)]);
        let y = CPoint(vec![Complex64::from_polar(0.9, 3.0 * std::f64::consts::FRAC_PI_4)]);
        let chord = unit_speed_reparametrize(&d, &SampledPath::straight(&x, &y, 128)).unwrap();
        let (geo, gcert) = almost_geodesic(&d, &x, &y, &PathSearchConfig::default()).unwrap();
        let ccert = certify(&d, &chord, 1.0).unwrap();
        let gap = chord.span().1 - geo.span().1;
        assert!(gap > 0.0);
        assert!(ccert.kappa >= gcert.kappa + gap - 1e-3, "{} {} {}", ccert.kappa, gcert.kappa, gap);
    }

    #[test]
    fn short_quasi_range_uses_one_piece() {
        let d = DomainSpec::unit_disk();
        let q = SampledPath::new(vec![0.0, 0.3_f64.atanh()], vec![p1(0.0, 0.0), p1(0.3, 0.0)]).unwrap();
        let out = quasi_to_almost(&d, &q, 1.0, 0.0, &SmoothingConfig::default()).unwrap();
        assert_eq!(out.pieces, 1);
        assert_eq!(out.path.first(), q.first());
        assert_eq!(out.path.last(), q.last());
    }

    #[test]
    fn quasi_violation_is_reported() {
        let d = DomainSpec::unit_disk();
        // far apart in K but adjacent in t
        let q = SampledPath::new(vec![0.0, 0.1], vec![p1(0.0, 0.0), p1(0.99, 0.0)]).unwrap();
        match quasi_to_almost(&d, &q, 1.0, 0.0, &SmoothingConfig::default()) {
            Err(GeodesicError::QuasiViolation { i: 0, j: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let path = SampledPath::straight(&p1(0.0, 0.0), &p1(0.5, 0.0), 2);
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,re_z1,im_z1\n"));
        assert_eq!(s.lines().count(), 4);
    }
}

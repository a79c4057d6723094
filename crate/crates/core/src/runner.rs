//! Experiment configuration, orchestration and persistence.
//!
//! A run reads an [`ExperimentConfig`], executes one experiment, and writes a JSON
//! report, CSV tables and a `manifest.json` into the output directory. Every file
//! is written to a temporary name and renamed into place.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{CPoint, CVector};
use crate::corpus;
use crate::domains::DomainSpec;
use crate::dynamics::{self, ClassifyConfig, SelfMap, ValidationConfig};
use crate::geodesics::{self, fmt_num, PathSearchConfig, MAX_NODES};
use crate::goldilocks::{self, GoldilocksConfig};
use crate::kobayashi::{self, Side};
use crate::sampling;
use crate::visibility::{self, ApproachSequence, VisibilityConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "KOBAYASHI_THREADS";
pub const MAX_POINTS: usize = 100_000;
pub const MAX_ITERATIONS: usize = 100_000;
pub const MAX_TRIALS: usize = 256;
pub const MAX_GRID: usize = 2_000;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Unsupported(_) => "unsupported",
            RunError::Experiment(_) => "experiment",
            RunError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Unsupported(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}

fn fail<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Experiment(e.to_string())
}

pub type Result<T> = std::result::Result<T, RunError>;

// ---------------------------------------------------------------------------
// config

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainRef {
    Named(String),
    Spec(DomainSpec),
}

impl DomainRef {
    pub fn resolve(&self) -> Result<DomainSpec> {
        match self {
            DomainRef::Spec(s) => Ok(s.clone()),
            DomainRef::Named(n) => corpus::domain(n).ok_or_else(|| {
                RunError::Config(format!("unknown domain {n:?}; known: {}", corpus::domain_names().join(", ")))
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapRef {
    Named(String),
    Map(SelfMap),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricTableParams {
    pub points: usize,
    pub directions: usize,
    /// Points are drawn from the ball of this radius and kept if interior.
    pub radius: f64,
}

impl Default for MetricTableParams {
    fn default() -> Self {
        MetricTableParams { points: 64, directions: 4, radius: 0.95 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeodesicParams {
    /// Explicit endpoint pairs; random pairs are drawn when empty.
    pub pairs: Vec<(CPoint, CPoint)>,
    pub random_pairs: usize,
    pub radius: f64,
    pub search: PathSearchConfig,
}

impl Default for GeodesicParams {
    fn default() -> Self {
        GeodesicParams { pairs: vec![], random_pairs: 4, radius: 0.9, search: PathSearchConfig::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Radial,
    Tangential,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproachParams {
    pub xi: Option<CPoint>,
    pub eta: Option<CPoint>,
    pub base: Option<CPoint>,
    pub approach: Approach,
    pub delta_min: f64,
    pub delta_max: f64,
    pub trials: usize,
}

impl Default for ApproachParams {
    fn default() -> Self {
        ApproachParams {
            xi: None,
            eta: None,
            base: None,
            approach: Approach::Radial,
            delta_min: 1e-4,
            delta_max: 0.1,
            trials: 12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisibilityParams {
    #[serde(flatten)]
    pub approach: ApproachParams,
    #[serde(default)]
    pub config: VisibilityConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GromovParams {
    #[serde(flatten)]
    pub approach: ApproachParams,
    #[serde(default = "default_stabilization")]
    pub stabilization_tol: f64,
}

fn default_stabilization() -> f64 {
    0.01
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsParams {
    pub map: MapRef,
    #[serde(default)]
    pub bases: Vec<CPoint>,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub classify: ClassifyConfig,
    #[serde(default)]
    pub validation: ValidationConfig,
    #[serde(default = "default_xi_tol")]
    pub xi_tol: f64,
}

fn default_iterations() -> usize {
    100
}

fn default_xi_tol() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    MetricTable(#[serde(default)] MetricTableParams),
    Geodesic(#[serde(default)] GeodesicParams),
    Goldilocks(#[serde(default)] GoldilocksConfig),
    Visibility(VisibilityParams),
    Gromov(GromovParams),
    Dynamics(DynamicsParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MetricTable(_) => "metric-table",
            Experiment::Geodesic(_) => "geodesic",
            Experiment::Goldilocks(_) => "goldilocks",
            Experiment::Visibility(_) => "visibility",
            Experiment::Gromov(_) => "gromov",
            Experiment::Dynamics(_) => "dynamics",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub domain: DomainRef,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be positive, got {x}")))
    }
}

fn capped(name: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if (lo..=hi).contains(&n) {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must lie in [{lo}, {hi}], got {n}")))
    }
}

fn check_search(s: &PathSearchConfig) -> Result<()> {
    capped("search.initial_nodes", s.initial_nodes, 2, MAX_NODES)?;
    capped("search.final_nodes", s.final_nodes, s.initial_nodes, MAX_NODES)?;
    positive("search.rel_tol", s.rel_tol)
}

fn check_approach(a: &ApproachParams, domain: &DomainSpec) -> Result<()> {
    positive("delta_min", a.delta_min)?;
    positive("delta_max", a.delta_max)?;
    if a.delta_min >= a.delta_max {
        return Err(RunError::Config("delta_min must be below delta_max".into()));
    }
    capped("trials", a.trials, 4, MAX_TRIALS)?;
    for p in [&a.xi, &a.eta, &a.base].into_iter().flatten() {
        if p.dim() != domain.dim() {
            return Err(RunError::Config(format!("point dimension {} does not match domain {}", p.dim(), domain.dim())));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(p: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(p).map_err(|e| RunError::Config(format!("{}: {e}", p.display())))?;
        Self::from_json(&s)
    }

    /// Schema version, tolerances, caps and domain/experiment compatibility.
    pub fn validate(&self) -> Result<DomainSpec> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RunError::Config(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let domain = self.domain.resolve()?;
        match &self.experiment {
            Experiment::MetricTable(p) => {
                capped("points", p.points, 1, MAX_POINTS)?;
                capped("directions", p.directions, 1, 64)?;
                positive("radius", p.radius)?;
            }
            Experiment::Geodesic(p) => {
                capped("random_pairs", p.random_pairs, 0, MAX_TRIALS)?;
                positive("radius", p.radius)?;
                check_search(&p.search)?;
                if p.pairs.is_empty() && p.random_pairs == 0 {
                    return Err(RunError::Config("no endpoint pairs requested".into()));
                }
                if p.pairs.iter().any(|(a, b)| a.dim() != domain.dim() || b.dim() != domain.dim()) {
                    return Err(RunError::Config("pair dimension does not match domain".into()));
                }
            }
            Experiment::Goldilocks(g) => {
                positive("r_min", g.r_min)?;
                positive("r_max", g.r_max)?;
                positive("delta_min", g.delta_min)?;
                positive("delta_max", g.delta_max)?;
                if g.r_min >= g.r_max || g.delta_min >= g.delta_max {
                    return Err(RunError::Config("empty radius or delta range".into()));
                }
                capped("grid_points", g.grid_points, 3, MAX_GRID)?;
                capped("approach_points", g.approach_points, 3, MAX_GRID)?;
                if !domain.is_convex() && domain.finite_type_model().is_none() {
                    return Err(RunError::Unsupported(
                        "goldilocks needs a convex domain or an assumed lower-bound model".into(),
                    ));
                }
            }
            Experiment::Visibility(v) => {
                check_approach(&v.approach, &domain)?;
                check_search(&v.config.search)?;
                positive("lambda", v.config.lambda)?;
                if v.config.lambda < 1.0 {
                    return Err(RunError::Config("lambda must be at least 1".into()));
                }
                positive("stabilization_tol", v.config.stabilization_tol)?;
                if v.approach.approach == Approach::Tangential && domain.dim() != 1 {
                    return Err(RunError::Unsupported("tangential approach is defined for planar domains".into()));
                }
            }
            Experiment::Gromov(g) => {
                check_approach(&g.approach, &domain)?;
                positive("stabilization_tol", g.stabilization_tol)?;
                if g.approach.approach == Approach::Tangential && domain.dim() != 1 {
                    return Err(RunError::Unsupported("tangential approach is defined for planar domains".into()));
                }
            }
            Experiment::Dynamics(d) => {
                capped("iterations", d.iterations, 1, MAX_ITERATIONS)?;
                positive("xi_tol", d.xi_tol)?;
                let map = resolve_map(&d.map)?;
                if map.arity() != domain.dim() {
                    return Err(RunError::Unsupported(format!(
                        "map has {} components, domain dimension is {}",
                        map.arity(),
                        domain.dim()
                    )));
                }
                if d.bases.iter().any(|b| b.dim() != domain.dim()) {
                    return Err(RunError::Config("base point dimension does not match domain".into()));
                }
            }
        }
        Ok(domain)
    }
}

fn resolve_map(m: &MapRef) -> Result<SelfMap> {
    match m {
        MapRef::Map(m) => SelfMap::new(m.components.clone()).map_err(|e| RunError::Config(e.to_string())),
        MapRef::Named(n) => corpus::map(n).map(|e| e.map).ok_or_else(|| RunError::Config(format!("unknown map {n:?}"))),
    }
}

// ---------------------------------------------------------------------------
// threads

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreadSource {
    Default,
    Flag,
    Env,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThreadSetting {
    pub count: usize,
    pub source: ThreadSource,
    pub env_var: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub env_value: Option<String>,
}

/// The environment variable wins over the flag; both are recorded.
pub fn resolve_threads(flag: Option<usize>, env: Option<String>) -> Result<ThreadSetting> {
    let env_count = match &env {
        Some(v) => Some(
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| RunError::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?,
        ),
        None => None,
    };
    let (count, source) = match (env_count, flag) {
        (Some(n), _) => (n, ThreadSource::Env),
        (None, Some(0)) => return Err(RunError::Config("--threads must be positive".into())),
        (None, Some(n)) => (n, ThreadSource::Flag),
        (None, None) => (std::thread::available_parallelism().map_or(1, |n| n.get()), ThreadSource::Default),
    };
    Ok(ThreadSetting { count, source, env_var: THREADS_ENV.to_string(), env_value: env })
}

// ---------------------------------------------------------------------------
// persistence

/// Writes `bytes` to `dir/name` via a temporary file and rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    let target = dir.join(name);
    if let Some(parent) = target.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let file_name = target.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = target.with_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, &target)?;
    Ok(target)
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r).map_err(fail)?;
    }
    w.into_inner().map_err(fail)
}

fn coord_header(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).flat_map(|j| [format!("re_{prefix}{j}"), format!("im_{prefix}{j}")]).collect()
}

fn coords(p: &[num_complex::Complex64]) -> Vec<String> {
    p.iter().flat_map(|c| [fmt_num(c.re), fmt_num(c.im)]).collect()
}

#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_vec_pretty(v).map_err(fail)?;
        s.push(b'\n');
        self.add(name, s);
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub threads: ThreadSetting,
    pub config: ExperimentConfig,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub timings: Vec<Timing>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    /// Every listed file exists and is non-empty.
    pub fn verify(&self, dir: &Path) -> bool {
        !self.files.is_empty()
            && self.files.iter().all(|f| std::fs::metadata(dir.join(&f.path)).is_ok_and(|m| m.len() > 0 && m.len() == f.bytes))
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Value of the thread-count environment variable, if set.
    pub threads_env: Option<String>,
}

impl RunOptions {
    pub fn from_env(out_dir: Option<PathBuf>, seed: Option<u64>, threads: Option<usize>) -> Self {
        RunOptions { out_dir, seed, threads, threads_env: std::env::var(THREADS_ENV).ok() }
    }
}

/// Executes the experiment and writes all outputs plus the manifest.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<RunManifest> {
    let mut config = config.clone();
    if let Some(s) = opts.seed {
        config.seed = s;
    }
    let domain = config.validate()?;
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| config.out_dir.clone())
        .ok_or_else(|| RunError::Config("no output directory given".into()))?;
    let threads = resolve_threads(opts.threads, opts.threads_env.clone())?;
    let started = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
    let clock = Instant::now();
    let mut timings = Vec::new();

    let outputs = with_threads(threads.count, || execute(&domain, &config, &mut timings))?;

    std::fs::create_dir_all(&out_dir)?;
    let mut files = Vec::new();
    for (name, bytes) in &outputs.files {
        write_atomic(&out_dir, name, bytes)?;
        files.push(FileEntry { path: name.clone(), bytes: bytes.len() as u64 });
    }
    let manifest = RunManifest {
        tool: "kobayashi".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: config.experiment.name().into(),
        seed: config.seed,
        threads,
        config,
        started_unix: started,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        timings,
        files,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(fail)?;
    bytes.push(b'\n');
    write_atomic(&out_dir, "manifest.json", &bytes)?;
    Ok(manifest)
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_n: usize, f: impl FnOnce() -> T + Send) -> T {
    f()
}

fn timed<T>(timings: &mut Vec<Timing>, op: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push(Timing { operation: op.to_string(), seconds: t.elapsed().as_secs_f64() });
    out
}

fn execute(domain: &DomainSpec, cfg: &ExperimentConfig, timings: &mut Vec<Timing>) -> Result<Outputs> {
    match &cfg.experiment {
        Experiment::MetricTable(p) => metric_table(domain, p, cfg.seed, timings),
        Experiment::Geodesic(p) => geodesic(domain, p, cfg.seed, timings),
        Experiment::Goldilocks(g) => goldilocks(domain, g, cfg.seed, timings),
        Experiment::Visibility(v) => run_visibility(domain, v, timings),
        Experiment::Gromov(g) => gromov(domain, g, timings),
        Experiment::Dynamics(d) => run_dynamics(domain, d, cfg.seed, timings),
    }
}

fn interior_points(domain: &DomainSpec, count: usize, radius: f64, seed: u64) -> Vec<CPoint> {
    let mut rng = sampling::rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count {
        tries += 1;
        let p = sampling::ball_point(&mut rng, domain.dim(), radius * domain.enclosing_radius());
        if domain.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn metric_table(domain: &DomainSpec, p: &MetricTableParams, seed: u64, timings: &mut Vec<Timing>) -> Result<Outputs> {
    let pts = interior_points(domain, p.points, p.radius, seed);
    let dirs = sampling::unit_cvectors(domain.dim(), p.directions, seed.wrapping_add(1));
    let n = pts.len() * dirs.len();
    let est = timed(timings, "infinitesimal_metric", || {
        crate::par::map_indexed(n, |k| kobayashi::infinitesimal_metric(domain, &pts[k / dirs.len()], &dirs[k % dirs.len()]))
    });
    let d = domain.dim();
    let mut header = vec!["point".to_string(), "direction".to_string()];
    header.extend(coord_header("z", d));
    header.extend(coord_header("v", d));
    header.extend(["delta", "lower", "upper", "lower_source", "upper_source"].map(String::from));
    let mut rows = Vec::with_capacity(n);
    let mut widest: f64 = 1.0;
    for (k, e) in est.into_iter().enumerate() {
        let e = e.map_err(fail)?;
        let (i, j) = (k / dirs.len(), k % dirs.len());
        let mut row = vec![i.to_string(), j.to_string()];
        row.extend(coords(pts[i].coords()));
        row.extend(coords(dirs[j].coords()));
        row.push(fmt_num(domain.boundary_distance(&pts[i]).map_err(fail)?));
        row.push(fmt_num(e.lower));
        row.push(fmt_num(e.upper));
        row.push(e.provenance.lower.tag().into());
        row.push(e.provenance.upper.tag().into());
        if e.lower > 0.0 {
            widest = widest.max(e.upper / e.lower);
        }
        rows.push(row);
    }
    let mut out = Outputs::default();
    out.add("metric_table.csv", csv_bytes(&header, &rows)?);
    out.json(
        "report.json",
        &serde_json::json!({
            "experiment": "metric-table",
            "points": pts.len(),
            "directions": dirs.len(),
            "exact": domain.has_exact_metric(),
            "max_ratio_upper_lower": widest,
        }),
    )?;
    Ok(out)
}

#[derive(Serialize)]
struct GeodesicRow {
    index: usize,
    x: CPoint,
    y: CPoint,
    length_upper: f64,
    distance_lower: f64,
    distance_upper: f64,
    exact: Option<f64>,
    relative_error: Option<f64>,
    certificate: geodesics::AlmostGeodesicCertificate,
}

fn geodesic(domain: &DomainSpec, p: &GeodesicParams, seed: u64, timings: &mut Vec<Timing>) -> Result<Outputs> {
    let mut pairs = p.pairs.clone();
    let extra = interior_points(domain, 2 * p.random_pairs, p.radius, seed);
    pairs.extend(extra.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0].clone(), c[1].clone())));
    let search = PathSearchConfig { seed, ..p.search.clone() };
    let results = timed(timings, "almost_geodesic", || {
        crate::par::map_indexed(pairs.len(), |i| geodesics::almost_geodesic(domain, &pairs[i].0, &pairs[i].1, &search))
    });
    let mut out = Outputs::default();
    let mut rows = Vec::new();
    let header: Vec<String> = ["index", "length_upper", "distance_lower", "distance_upper", "exact", "relative_error", "lambda", "kappa", "speed_max"]
        .map(String::from)
        .to_vec();
    let mut table = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let (path, cert) = r.map_err(fail)?;
        let (x, y) = &pairs[i];
        let length = kobayashi::path_length(domain, &path, Side::Upper).map_err(fail)?;
        let dist = kobayashi::distance(domain, x, y).map_err(fail)?;
        let exact = kobayashi::exact_distance(domain, x, y);
        let rel = exact.filter(|&e| e > 0.0).map(|e| (length - e).abs() / e);
        let mut buf = Vec::new();
        path.write_csv(&mut buf).map_err(fail)?;
        out.add(format!("paths/geodesic_{i:03}.csv"), buf);
        table.push(vec![
            i.to_string(),
            fmt_num(length),
            fmt_num(dist.lower),
            fmt_num(dist.upper),
            exact.map(fmt_num).unwrap_or_default(),
            rel.map(fmt_num).unwrap_or_default(),
            fmt_num(cert.lambda),
            fmt_num(cert.kappa),
            fmt_num(cert.speed_max),
        ]);
        rows.push(GeodesicRow {
            index: i,
            x: x.clone(),
            y: y.clone(),
            length_upper: length,
            distance_lower: dist.lower,
            distance_upper: dist.upper,
            exact,
            relative_error: rel,
            certificate: cert,
        });
    }
    out.add("geodesics.csv", csv_bytes(&header, &table)?);
    out.json("report.json", &serde_json::json!({ "experiment": "geodesic", "pairs": rows }))?;
    Ok(out)
}

fn goldilocks(domain: &DomainSpec, g: &GoldilocksConfig, seed: u64, timings: &mut Vec<Timing>) -> Result<Outputs> {
    let mut g = g.clone();
    g.shell.seed ^= seed;
    let rep = timed(timings, "goldilocks_report", || goldilocks::goldilocks_report(domain, &g)).map_err(fail)?;
    let header: Vec<String> = ["r", "m_lower", "m_upper", "lower_source", "upper_source"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = rep
        .shell_table
        .iter()
        .map(|r| vec![fmt_num(r.r), fmt_num(r.lower), fmt_num(r.upper), r.lower_source.tag().into(), r.upper_source.tag().into()])
        .collect();
    let mut out = Outputs::default();
    out.add("shell_table.csv", csv_bytes(&header, &rows)?);
    let header: Vec<String> = ["delta", "k_upper", "residual"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = rep
        .condition2
        .samples
        .iter()
        .map(|s| vec![fmt_num(s.delta), fmt_num(s.k_upper), fmt_num(s.residual)])
        .collect();
    out.add("condition2.csv", csv_bytes(&header, &rows)?);
    out.json("report.json", &rep)?;
    Ok(out)
}

fn sequences(domain: &DomainSpec, a: &ApproachParams) -> Result<(ApproachSequence, ApproachSequence, CPoint)> {
    let o = a.base.clone().unwrap_or_else(|| domain.interior_witness().clone());
    let default_target = |j: usize| {
        let mut e = CVector::basis(domain.dim(), 0).0;
        if j == 1 {
            e[0] = num_complex::Complex64::new(0.0, 1.0);
        }
        let u = CVector(e).to_real();
        let l = domain.ray_to_boundary(&o, &u).map_err(fail)?;
        Ok::<_, RunError>(o.offset_real(&u, l))
    };
    let xi = match &a.xi {
        Some(x) => x.clone(),
        None => default_target(0)?,
    };
    let eta = match &a.eta {
        Some(x) => x.clone(),
        None => default_target(1)?,
    };
    let deltas: Vec<f64> = sampling::geometric_grid(a.delta_min, a.delta_max, a.trials).into_iter().rev().collect();
    let (s1, s2) = match a.approach {
        Approach::Radial => (
            ApproachSequence::radial(domain, xi, &o, &deltas).map_err(fail)?,
            ApproachSequence::radial(domain, eta, &o, &deltas).map_err(fail)?,
        ),
        Approach::Tangential => (
            ApproachSequence::tangential(domain, xi, &deltas, 1.0).map_err(fail)?,
            ApproachSequence::tangential(domain, eta, &deltas, -1.0).map_err(fail)?,
        ),
    };
    Ok((s1, s2, o))
}

fn run_visibility(domain: &DomainSpec, v: &VisibilityParams, timings: &mut Vec<Timing>) -> Result<Outputs> {
    let (s1, s2, o) = sequences(domain, &v.approach)?;
    let rep = timed(timings, "visibility_experiment", || visibility::visibility_experiment(domain, &s1, &s2, &o, &v.config))
        .map_err(fail)?;
    let header: Vec<String> = [
        "trial",
        "certified",
        "lambda",
        "kappa",
        "max_delta",
        "min_delta",
        "min_distance",
        "running_sup",
        "near_additivity_slack",
        "speed_shell_ratio",
        "skipped",
    ]
    .map(String::from)
    .to_vec();
    let mut sup_iter = rep.running_sup.iter();
    let rows: Vec<Vec<String>> = rep
        .trials
        .iter()
        .map(|t| {
            let sup = if t.skipped { None } else { sup_iter.next() };
            vec![
                t.index.to_string(),
                t.certified.to_string(),
                t.certificate.as_ref().map(|c| fmt_num(c.lambda)).unwrap_or_default(),
                t.certificate.as_ref().map(|c| fmt_num(c.kappa)).unwrap_or_default(),
                fmt_num(t.max_delta),
                fmt_num(t.min_delta),
                fmt_num(t.min_distance),
                sup.map(|&s| fmt_num(s)).unwrap_or_default(),
                fmt_num(t.near_additivity_slack),
                fmt_num(t.speed_shell_ratio),
                t.skipped.to_string(),
            ]
        })
        .collect();
    let mut out = Outputs::default();
    out.add("visibility_trials.csv", csv_bytes(&header, &rows)?);
    for (i, p) in rep.paths.iter().enumerate() {
        if let Some(p) = p {
            let mut buf = Vec::new();
            p.write_csv(&mut buf).map_err(fail)?;
            out.add(format!("paths/trial_{i:03}.csv"), buf);
        }
    }
    out.json("report.json", &rep)?;
    Ok(out)
}

fn gromov(domain: &DomainSpec, g: &GromovParams, timings: &mut Vec<Timing>) -> Result<Outputs> {
    let (s1, s2, o) = sequences(domain, &g.approach)?;
    let rep = timed(timings, "gromov_boundedness_experiment", || {
        visibility::gromov_boundedness_experiment(domain, &s1, &s2, &o, g.stabilization_tol)
    })
    .map_err(fail)?;
    let header: Vec<String> = ["n", "m", "lower", "upper"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = rep
        .entries
        .iter()
        .map(|e| vec![e.n.to_string(), e.m.to_string(), fmt_num(e.lower), fmt_num(e.upper)])
        .collect();
    let mut out = Outputs::default();
    out.add("gromov.csv", csv_bytes(&header, &rows)?);
    out.json(
        "report.json",
        &serde_json::json!({
            "experiment": "gromov",
            "max": rep.max,
            "running_max": rep.running_max,
            "stabilized": rep.stabilized,
            "verdict": rep.verdict,
        }),
    )?;
    Ok(out)
}

fn run_dynamics(domain: &DomainSpec, d: &DynamicsParams, seed: u64, timings: &mut Vec<Timing>) -> Result<Outputs> {
    let map = resolve_map(&d.map)?;
    let validation = ValidationConfig { seed: d.validation.seed ^ seed, ..d.validation.clone() };
    let map = timed(timings, "validate_map", || dynamics::validate_map(domain, &map, &validation)).map_err(fail)?;
    let bases = if d.bases.is_empty() {
        match &d.map {
            MapRef::Named(n) => corpus::map(n).map(|e| e.bases).unwrap_or_default(),
            MapRef::Map(_) => vec![],
        }
    } else {
        d.bases.clone()
    };
    let bases = if bases.is_empty() { vec![domain.interior_witness().clone()] } else { bases };
    let rep = timed(timings, "multi_start_consistency", || {
        dynamics::multi_start_consistency(domain, &map, &bases, d.iterations, &d.classify, d.xi_tol)
    })
    .map_err(fail)?;
    let mut out = Outputs::default();
    for (i, t) in rep.traces.iter().enumerate() {
        let mut buf = Vec::new();
        t.write_csv(&mut buf).map_err(fail)?;
        out.add(format!("orbit_{i:02}.csv"), buf);
    }
    let verdict = if rep.agree { rep.verdicts[0].label() } else { "inconsistent" };
    out.json(
        "report.json",
        &serde_json::json!({
            "experiment": "dynamics",
            "map": map,
            "verdict": verdict,
            "agree": rep.agree,
            "xi_spread": rep.xi_spread,
            "falsification_candidate": rep.falsification_candidate,
            "verdicts": rep.verdicts,
            "orbit_lengths": rep.traces.iter().map(|t| t.len()).collect::<Vec<_>>(),
            "note": "maps are validated on samples; validation is a precondition, not a proof",
        }),
    )?;
    Ok(out)
}

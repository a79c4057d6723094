//! Invariant checks shared by the property tests and the acceptance harness.
//! Each check draws its inputs from `seed` and returns the first violation.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;

use kobayashi::complex::{CPoint, CVector};
use kobayashi::corpus;
use kobayashi::domains::{ConvexBody, DomainKind, DomainSpec, FiniteTypeModel};
use kobayashi::dynamics::{self, ClassifyConfig, Component, OrbitKind, SelfMap, Term, ValidationConfig};
use kobayashi::geodesics::{self, PathSearchConfig};
use kobayashi::goldilocks::{self, Condition1Config, ShellConfig, Verdict};
use kobayashi::kobayashi as kob;
use kobayashi::runner::{self, ExperimentConfig, RunOptions};
use kobayashi::sampling;
use kobayashi::visibility::{self, ApproachSequence, VisibilityConfig};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

pub fn interior_point(domain: &DomainSpec, rng: &mut impl Rng, radius: f64) -> CPoint {
    loop {
        let p = sampling::ball_point(rng, domain.dim(), radius * domain.enclosing_radius());
        if domain.contains(&p) {
            return p;
        }
    }
}

pub fn random_cvector(dim: usize, rng: &mut impl Rng) -> CVector {
    let v = CVector((0..dim).map(|_| Complex64::new(sampling::gaussian(rng), sampling::gaussian(rng))).collect());
    if v.is_zero() {
        CVector::basis(dim, 0)
    } else {
        v
    }
}

fn named(name: &str) -> DomainSpec {
    corpus::domain(name).expect("corpus domain")
}

pub fn fast_convex_domains() -> Vec<DomainSpec> {
    ["unit-disk", "ball-2", "ball-3", "polydisk-2", "lens-2", "ball-ellipsoid-2"].map(named).to_vec()
}

pub fn sampled_convex_domains() -> Vec<DomainSpec> {
    ["egg-2-1-2", "psi-0.5"].map(named).to_vec()
}

fn pick<'a, T>(xs: &'a [T], rng: &mut impl Rng) -> &'a T {
    &xs[rng.gen_range(0..xs.len())]
}

// ---------------------------------------------------------------------------
// domains

/// `δ(p) ≤ ray_to_boundary(p, u)` over 100 random directions.
pub fn delta_below_ray_exits(domain: &DomainSpec, seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let p = interior_point(domain, &mut rng, 0.95);
    let delta = domain.boundary_distance(&p).map_err(err)?;
    for u in sampling::sphere_directions(2 * domain.dim(), 100, seed ^ 0xd1) {
        let t = domain.ray_to_boundary(&p, &u).map_err(err)?;
        ensure!(delta <= t + 1e-8, "δ = {delta} exceeds exit {t} at {p:?}");
    }
    Ok(())
}

/// `r_Ω(z; v) ≥ δ(z)`, and the radius does not depend on the scale of `v`.
pub fn disk_radius_vs_delta_and_scaling(domain: &DomainSpec, seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let z = interior_point(domain, &mut rng, 0.95);
    let v = random_cvector(domain.dim(), &mut rng);
    let delta = domain.boundary_distance(&z).map_err(err)?;
    let r = domain.disk_radius_in_complex_line(&z, &v).map_err(err)?;
    ensure!(r.upper >= delta - 1e-8, "disk radius {} below δ {delta}", r.upper);
    ensure!(r.lower >= delta * (1.0 - 1e-4) - 1e-8, "certified radius {} below δ {delta}", r.lower);
    let c = Complex64::from_polar(rng.gen_range(0.1..10.0), rng.gen_range(0.0..std::f64::consts::TAU));
    let rc = domain.disk_radius_in_complex_line(&z, &v.scale(c)).map_err(err)?;
    let tol = if domain.has_exact_metric() || r.lower == r.upper { 1e-9 } else { 1e-4 };
    ensure!((rc.value() - r.value()).abs() <= tol * r.value(), "scaling changed radius {} → {}", r.value(), rc.value());
    Ok(())
}

/// Intersection membership is the conjunction and `δ` the minimum.
pub fn intersection_is_conjunction(seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let a = ConvexBody::Ball { center: CPoint::from_pairs(&[(-0.3, 0.0), (0.0, 0.1)]), radius: 1.0 };
    let b = ConvexBody::Ellipsoid { center: CPoint::from_pairs(&[(0.2, 0.0), (0.0, 0.0)]), semi_axes: vec![0.9, 0.7] };
    let dom = DomainSpec::new(DomainKind::Intersection { first: a.clone(), second: b.clone() }).map_err(err)?;
    let da = DomainSpec::new(DomainKind::ConvexSupport { body: a }).map_err(err)?;
    let db = DomainSpec::new(DomainKind::ConvexSupport { body: b }).map_err(err)?;
    for _ in 0..200 {
        let p = sampling::ball_point(&mut rng, 2, 1.4);
        let both = da.contains(&p) && db.contains(&p);
        ensure!(dom.contains(&p) == both, "membership mismatch at {p:?}");
        if both {
            let d = dom.boundary_distance(&p).map_err(err)?;
            let m = da.boundary_distance(&p).map_err(err)?.min(db.boundary_distance(&p).map_err(err)?);
            ensure!((d - m).abs() <= 1e-8, "δ {d} vs min {m}");
        }
    }
    Ok(())
}

/// `δ(p) = 1 − ‖p‖` on balls.
pub fn ball_delta_exact(seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    for dim in 1..=4 {
        let dom = DomainSpec::unit_ball(dim);
        let p = interior_point(&dom, &mut rng, 1.0);
        let d = dom.boundary_distance(&p).map_err(err)?;
        ensure!(d == 1.0 - p.norm(), "ball δ {d} vs {}", 1.0 - p.norm());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// kobayashi

/// The exact ball metric lies in the convex-body bracket, which is at most a factor 2 wide.
pub fn sandwich_soundness(seed: u64, samples: usize) -> Check {
    let mut rng = sampling::rng(seed);
    let convex = DomainSpec::ball_as_convex(2);
    for _ in 0..samples {
        let z = interior_point(&convex, &mut rng, 1.0);
        let v = random_cvector(2, &mut rng);
        let exact = kob::ball_metric(&z, &v);
        let e = kob::infinitesimal_metric(&convex, &z, &v).map_err(err)?;
        ensure!(e.contains(exact, 1e-12 * exact), "{exact} not in [{}, {}] at {z:?}", e.lower, e.upper);
        ensure!(e.upper / e.lower <= 2.0 + 1e-6, "bracket ratio {}", e.upper / e.lower);
    }
    Ok(())
}

/// `k_{A∩B} ≥ k_A` on the lower side.
pub fn inclusion_monotone(seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let a = ConvexBody::Ball { center: CPoint::from_pairs(&[(-0.5, 0.0), (0.0, 0.0)]), radius: 1.0 };
    let b = ConvexBody::Ball { center: CPoint::from_pairs(&[(0.5, 0.0), (0.0, 0.0)]), radius: 1.0 };
    let inter = DomainSpec::new(DomainKind::Intersection { first: a.clone(), second: b }).map_err(err)?;
    let da = DomainSpec::new(DomainKind::ConvexSupport { body: a }).map_err(err)?;
    for _ in 0..50 {
        let z = interior_point(&inter, &mut rng, 1.0);
        let v = random_cvector(2, &mut rng);
        let li = kob::infinitesimal_metric(&inter, &z, &v).map_err(err)?.lower;
        let la = kob::infinitesimal_metric(&da, &z, &v).map_err(err)?.lower;
        ensure!(li >= la * (1.0 - 1e-12), "intersection lower {li} below component lower {la} at {z:?}");
    }
    Ok(())
}

/// Upper distance bounds satisfy the triangle inequality and are symmetric.
pub fn distance_triangle_and_symmetry(domain: &DomainSpec, seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let (x, y, z) = (
        interior_point(domain, &mut rng, 0.9),
        interior_point(domain, &mut rng, 0.9),
        interior_point(domain, &mut rng, 0.9),
    );
    let opts = kob::DistanceOptions { optimize_witness: true, ..Default::default() };
    let d = |a: &CPoint, b: &CPoint| kob::distance_with(domain, a, b, &opts).map_err(err);
    let (xz, xy, yz) = (d(&x, &z)?, d(&x, &y)?, d(&y, &z)?);
    // two optimised witnesses, each within the solver's relative accuracy
    let path_tol = if domain.has_exact_metric() { 1e-9 } else { 1e-3 };
    let slack = 2.0 * path_tol * (1.0 + xy.upper + yz.upper);
    ensure!(xz.upper <= xy.upper + yz.upper + slack, "triangle: {} > {} + {}", xz.upper, xy.upper, yz.upper);
    let yx = d(&y, &x)?;
    ensure!((yx.upper - xy.upper).abs() <= 1e-6 * (1.0 + xy.upper), "asymmetric upper {} vs {}", xy.upper, yx.upper);
    ensure!((yx.lower - xy.lower).abs() <= 1e-9 * (1.0 + xy.lower), "asymmetric lower {} vs {}", xy.lower, yx.lower);
    Ok(())
}

/// `k(z; cv) = |c|·k(z; v)`.
pub fn metric_scaling(domain: &DomainSpec, seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let z = interior_point(domain, &mut rng, 0.95);
    let v = random_cvector(domain.dim(), &mut rng);
    let c = Complex64::from_polar(rng.gen_range(0.05..20.0), rng.gen_range(0.0..std::f64::consts::TAU));
    let a = kob::infinitesimal_metric(domain, &z, &v).map_err(err)?;
    let b = kob::infinitesimal_metric(domain, &z, &v.scale(c)).map_err(err)?;
    let tol = if a.is_exact() { 1e-12 } else { 1e-4 };
    for (x, y) in [(a.lower, b.lower), (a.upper, b.upper)] {
        ensure!((y - c.norm() * x).abs() <= tol * c.norm() * x, "scaling: {y} vs |c|·{x}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// geodesics

fn random_geodesic(domain: &DomainSpec, seed: u64) -> Result<(geodesics::SampledPath, geodesics::AlmostGeodesicCertificate), String> {
    let mut rng = sampling::rng(seed);
    let x = interior_point(domain, &mut rng, 0.85);
    let y = interior_point(domain, &mut rng, 0.85);
    let cfg = PathSearchConfig { final_nodes: 64, seed, ..PathSearchConfig::default() };
    geodesics::almost_geodesic(domain, &x, &y, &cfg).map_err(err)
}

/// Certified almost-geodesics are `λ/c₁`-Lipschitz in the Euclidean norm.
pub fn lipschitz_bound(domain: &DomainSpec, seed: u64) -> Check {
    let (_, cert) = random_geodesic(domain, seed)?;
    ensure!(
        cert.euclidean_speed_max <= cert.lipschitz_bound * (1.0 + 1e-9),
        "Euclidean speed {} above λ/c₁ = {}",
        cert.euclidean_speed_max,
        cert.lipschitz_bound
    );
    Ok(())
}

/// Sub-arcs of shortened paths are no longer than their endpoint distance plus
/// the global excess `ℓ(σ) − K(x, y)`.
pub fn restriction_property(seed: u64) -> Check {
    let domain = DomainSpec::unit_disk();
    let mut rng = sampling::rng(seed);
    let x = interior_point(&domain, &mut rng, 0.95);
    let y = interior_point(&domain, &mut rng, 0.95);
    let path = geodesics::minimize_path(&domain, &x, &y, &PathSearchConfig { seed, ..Default::default() }).map_err(err)?;
    let total = kob::path_length(&domain, &path, kob::Side::Upper).map_err(err)?;
    let eps = total - kob::distance(&domain, &x, &y).map_err(err)?.upper;
    let n = path.points().len();
    for _ in 0..20 {
        let i = rng.gen_range(0..n - 1);
        let j = rng.gen_range(i + 1..n);
        let sub = kob::path_length(&domain, &path.slice(i, j), kob::Side::Upper).map_err(err)?;
        let k = kob::distance(&domain, &path.points()[i], &path.points()[j]).map_err(err)?.upper;
        ensure!(sub <= k + eps.max(0.0) + 1e-9 * (1.0 + total), "restriction: {sub} > {k} + {eps}");
    }
    Ok(())
}

/// `K(a, σ(t)) + K(σ(t), b) ≤ K(a, b) + 3κ` at every sample of a certified path.
pub fn near_additivity(domain: &DomainSpec, seed: u64) -> Check {
    let (path, cert) = random_geodesic(domain, seed)?;
    let (a, b) = (path.first(), path.last());
    let kab = kob::distance(domain, a, b).map_err(err)?.lower;
    let extra = (cert.lambda - 1.0 / cert.lambda) * (path.span().1 - path.span().0);
    let n = path.points().len();
    let k_up = |i: usize, j: usize| -> Result<f64, String> {
        let d = kob::distance(domain, &path.points()[i], &path.points()[j]).map_err(err)?.upper;
        Ok(d.min(kob::path_length(domain, &path.slice(i, j), kob::Side::Upper).map_err(err)?))
    };
    for (i, p) in path.points().iter().enumerate().skip(1).take(n - 2) {
        let s = k_up(0, i)? + k_up(i, n - 1)?;
        ensure!(
            s <= kab + 3.0 * cert.kappa + extra + 1e-9 * (1.0 + kab),
            "near-additivity at {p:?}: {s} > {kab} + 3·{}",
            cert.kappa
        );
    }
    Ok(())
}

/// Reparametrising a unit-speed path again changes nothing beyond tolerance.
pub fn reparametrization_idempotent(domain: &DomainSpec, seed: u64) -> Check {
    let (once, _) = random_geodesic(domain, seed)?;
    let twice = geodesics::unit_speed_reparametrize(domain, &once).map_err(err)?;
    ensure!(once.points().len() == twice.points().len(), "resolution changed");
    let l = once.span().1;
    // the polydisk metric is only Lipschitz, bracketed ones only as smooth as their root finding
    let smooth = matches!(domain.kind(), DomainKind::UnitDisk | DomainKind::UnitBall { .. });
    let tol = if smooth { 1e-6 } else { 1e-3 };
    for (k, (p, q)) in once.points().iter().zip(twice.points()).enumerate() {
        ensure!(p.distance(q) <= tol, "point {k} moved by {}", p.distance(q));
        ensure!(
            (once.params()[k] - twice.params()[k]).abs() <= tol * (1.0 + l),
            "param {k} moved {} → {}",
            once.params()[k],
            twice.params()[k]
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// goldilocks

fn small_shell(seed: u64) -> ShellConfig {
    ShellConfig { rays: 16, seed, ..ShellConfig::default() }
}

/// Raw shell estimates are nondecreasing in `r` (up to sampling tolerance) and
/// the lower side never exceeds the upper side.
pub fn shell_monotone_and_ordered(domain: &DomainSpec, seed: u64) -> Check {
    let cfg = small_shell(seed);
    let rs = sampling::geometric_grid(1e-3, 0.3, 6);
    let mut prev: Option<f64> = None;
    for &r in &rs {
        let e = goldilocks::estimate_m(domain, r, &cfg).map_err(err)?;
        ensure!(e.lower <= e.upper * (1.0 + 1e-12), "lower {} above upper {} at r = {r}", e.lower, e.upper);
        if let Some(p) = prev {
            ensure!(e.upper >= p * (1.0 - 0.05), "M̂ dropped from {p} to {} at r = {r}", e.upper);
        }
        prev = Some(e.upper);
    }
    Ok(())
}

/// Condition 1 verdicts on the named families; returns `(name, verdict)` pairs.
pub fn condition1_family_verdicts() -> Result<Vec<(&'static str, Verdict)>, String> {
    let egg = DomainSpec::egg(vec![1.0, 2.0])
        .and_then(|d| d.with_finite_type_model(FiniteTypeModel { c: 0.5, epsilon: 0.25 }))
        .map_err(err)?;
    let family = [
        ("unit-disk", DomainSpec::unit_disk(), 40),
        ("ball-2", DomainSpec::unit_ball(2), 40),
        ("polydisk-2", named("polydisk-2"), 40),
        ("egg-2-1-2+model", egg, 12),
    ];
    let mut out = Vec::new();
    for (name, d, n) in family {
        let grid = sampling::geometric_grid(1e-4, 0.25, n);
        let shell = if n < 40 { small_shell(11) } else { ShellConfig::default() };
        let (_, rep) = goldilocks::condition1_test(&d, &grid, &shell, &Condition1Config::default()).map_err(err)?;
        out.push((name, rep.verdict));
    }
    Ok(out)
}

/// The inflated Condition-2 line bounds every sample from above.
pub fn condition2_no_positive_residual(domain: &DomainSpec, seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let x0 = interior_point(domain, &mut rng, 0.5);
    let u = sampling::sphere_directions(2 * domain.dim(), 1, seed).remove(0);
    let deltas = sampling::geometric_grid(1e-6, 1e-1, 15);
    let pts = goldilocks::radial_approach(domain, &x0, &u, &deltas).map_err(err)?;
    let fit = goldilocks::condition2_fit(domain, &x0, &pts).map_err(err)?;
    ensure!(fit.max_positive_residual == 0.0, "positive residual {}", fit.max_positive_residual);
    ensure!(fit.samples.iter().all(|s| s.residual <= 0.0), "sample above the line");
    ensure!(fit.alpha > 0.0, "α = {}", fit.alpha);
    Ok(())
}

/// Complex-line gaps in the ball grow no faster than `C·δ^{1/2}`.
pub fn ball_two_convex(seed: u64) -> Check {
    let dom = DomainSpec::unit_ball(2);
    let pts = dom.near_boundary_samples(16, 1e-3, seed);
    let dirs = sampling::unit_cvectors(2, 8, seed ^ 7);
    let c = dom.m_convexity_constant(&pts, &dirs, 2.0).map_err(err)?;
    let far = dom.near_boundary_samples(16, 0.2, seed);
    let c_far = dom.m_convexity_constant(&far, &dirs, 2.0).map_err(err)?;
    ensure!(c.is_finite() && c <= 2f64.sqrt() + 1e-9, "C = {c} near the boundary");
    ensure!(c_far <= 2f64.sqrt() + 1e-9, "C = {c_far} away from the boundary");
    Ok(())
}

// ---------------------------------------------------------------------------
// visibility

fn disk_deltas(n: usize) -> Vec<f64> {
    sampling::geometric_grid(1e-4, 0.1, n).into_iter().rev().collect()
}

/// Near-additivity at the closest approach and the speed–shell bound hold on
/// every recorded trial.
pub fn visibility_trial_invariants(seed: u64) -> Check {
    let d = DomainSpec::unit_disk();
    let mut rng = sampling::rng(seed);
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let b = a + rng.gen_range(0.8..std::f64::consts::PI);
    let xi = CPoint(vec![Complex64::from_polar(1.0, a)]);
    let eta = CPoint(vec![Complex64::from_polar(1.0, b)]);
    let o = CPoint::origin(1);
    let s1 = ApproachSequence::radial(&d, xi, &o, &disk_deltas(6)).map_err(err)?;
    let s2 = ApproachSequence::radial(&d, eta, &o, &disk_deltas(6)).map_err(err)?;
    let cfg = VisibilityConfig { search: PathSearchConfig { final_nodes: 64, ..Default::default() }, ..Default::default() };
    let rep = visibility::visibility_experiment(&d, &s1, &s2, &o, &cfg).map_err(err)?;
    for t in &rep.trials {
        ensure!(!t.skipped, "trial {} skipped: {:?}", t.index, t.error);
        ensure!(t.near_additivity_ok, "trial {}: near-additivity slack {}", t.index, t.near_additivity_slack);
        ensure!(t.speed_shell_ok, "trial {}: speed/shell ratio {}", t.index, t.speed_shell_ratio);
    }
    Ok(())
}

/// Gromov products are nonnegative: exactly with exact distances, up to the
/// interval width otherwise.
pub fn gromov_nonnegative(domain: &DomainSpec, seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    for _ in 0..5 {
        let (x, y, o) = (
            interior_point(domain, &mut rng, 0.9),
            interior_point(domain, &mut rng, 0.9),
            interior_point(domain, &mut rng, 0.9),
        );
        let g = visibility::gromov_product(domain, &x, &y, &o).map_err(err)?;
        if g.is_exact() {
            ensure!(g.lower >= -1e-12, "negative exact product {}", g.lower);
        } else {
            ensure!(g.lower >= -(g.upper - g.lower) - 1e-12, "product {} below interval slack", g.lower);
            ensure!(g.upper >= 0.0, "upper product {} negative", g.upper);
        }
    }
    Ok(())
}

/// Running max of Gromov products for distinct targets stays below the
/// same-target control once `δ < 0.01`.
pub fn control_separation(seed: u64) -> Check {
    let d = DomainSpec::unit_disk();
    let mut rng = sampling::rng(seed);
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let o = CPoint::origin(1);
    let deltas: Vec<f64> = sampling::geometric_grid(1e-3, 0.1, 9).into_iter().rev().collect();
    let xi = CPoint(vec![Complex64::from_polar(1.0, a)]);
    let eta = CPoint(vec![Complex64::from_polar(1.0, a + rng.gen_range(1.0..3.0))]);
    let s_xi = ApproachSequence::radial(&d, xi, &o, &deltas).map_err(err)?;
    let s_eta = ApproachSequence::radial(&d, eta, &o, &deltas).map_err(err)?;
    let test = visibility::gromov_boundedness_experiment(&d, &s_xi, &s_eta, &o, 0.01).map_err(err)?;
    let control = visibility::gromov_boundedness_experiment(&d, &s_xi, &s_xi, &o, 0.01).map_err(err)?;
    for (n, &delta) in deltas.iter().enumerate() {
        if delta < 0.01 {
            ensure!(
                test.running_max[n] < control.running_max[n],
                "N = {n}: test {} not below control {}",
                test.running_max[n],
                control.running_max[n]
            );
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// dynamics

fn validated(entry: &corpus::MapEntry) -> Result<(DomainSpec, SelfMap), String> {
    let d = named(entry.domain);
    let m = dynamics::validate_map(&d, &entry.map, &ValidationConfig::default()).map_err(err)?;
    Ok((d, m))
}

/// `K(f^{n+1}o, f^{n+1}o′) ≤ K(f^n o, f^n o′)` and `K(f^m o, f^n o) ≤ K(f^{m−n} o, o)`.
pub fn orbit_distance_decreasing(seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let maps = corpus::maps();
    let entry = pick(&maps, &mut rng);
    let (d, m) = validated(entry)?;
    let o = interior_point(&d, &mut rng, 0.8);
    let o2 = interior_point(&d, &mut rng, 0.8);
    let t1 = dynamics::iterate(&d, &m, &o, 30).map_err(err)?;
    let t2 = dynamics::iterate(&d, &m, &o2, 30).map_err(err)?;
    let n = t1.len().min(t2.len());
    let k = |a: &CPoint, b: &CPoint| kob::distance(&d, a, b).map(|e| e.upper).map_err(err);
    // closed-form distances lose about `ε/δ` relative accuracy near the boundary
    let slack = |x: f64, delta: f64| (1.0 + x) * (1e-9 + 8.0 * f64::EPSILON / delta);
    let mut prev = k(&t1.points[0], &t2.points[0])?;
    for i in 1..n {
        let cur = k(&t1.points[i], &t2.points[i])?;
        let delta = t1.delta[i].min(t2.delta[i]);
        ensure!(cur <= prev + slack(prev, delta), "{}: step {i} distance grew {prev} → {cur}", entry.name);
        prev = cur;
    }
    for _ in 0..10 {
        let mi = rng.gen_range(1..t1.len());
        let ni = rng.gen_range(0..mi);
        let lhs = k(&t1.points[mi], &t1.points[ni])?;
        let rhs = t1.displacement_upper[mi - ni];
        let delta = t1.delta[mi].min(t1.delta[ni]);
        ensure!(lhs <= rhs + slack(rhs, delta), "{}: subadditivity K(f^{mi}, f^{ni}) = {lhs} > {rhs}", entry.name);
    }
    Ok(())
}

/// Classifying every other orbit point gives the same verdict.
pub fn subsample_invariance(seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let maps = corpus::maps();
    let entry = pick(&maps, &mut rng);
    let (d, m) = validated(entry)?;
    let o = pick(&entry.bases, &mut rng).clone();
    let t = dynamics::iterate(&d, &m, &o, 100).map_err(err)?;
    let cfg = ClassifyConfig::default();
    let full = dynamics::classify(&d, &t, &cfg);
    let half = dynamics::classify(&d, &t.subsample(&d, 2).map_err(err)?, &cfg);
    ensure!(full.label() == half.label(), "{}: {} vs {} after subsampling", entry.name, full.label(), half.label());
    Ok(())
}

/// `z ↦ (z + a e^{iθ}) / (1 + a e^{−iθ} z)` fixes `±e^{iθ}` and attracts to `sign(a)·e^{iθ}`.
pub fn automorphism_wolff_point(seed: u64) -> Check {
    let mut rng = sampling::rng(seed);
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let a = rng.gen_range(0.2..0.8) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let e = Complex64::from_polar(1.0, theta);
    let c = a * e;
    let map = SelfMap::new(vec![Component {
        numerator: vec![Term::new(Complex64::new(1.0, 0.0), vec![1]), Term::new(c, vec![0])],
        denominator: vec![Term::new(Complex64::new(1.0, 0.0), vec![0]), Term::new(c.conj(), vec![1])],
    }])
    .map_err(err)?;
    let d = DomainSpec::unit_disk();
    let map = dynamics::validate_map(&d, &map, &ValidationConfig::default()).map_err(err)?;
    let o = interior_point(&d, &mut rng, 0.7);
    let t = dynamics::iterate(&d, &map, &o, 300).map_err(err)?;
    let want = e * a.signum();
    match dynamics::classify(&d, &t, &ClassifyConfig::default()).kind {
        OrbitKind::Wolff { xi } => {
            ensure!((xi[0] - want).norm() < 1e-3, "ξ = {} vs attracting fixed point {want}", xi[0]);
            Ok(())
        }
        other => Err(format!("expected a Wolff verdict, got {other:?}")),
    }
}

// ---------------------------------------------------------------------------
// runner

pub fn quick_configs() -> Vec<&'static str> {
    vec![
        r#"{"schema_version":1,"domain":"unit-disk","experiment":{"kind":"geodesic","random_pairs":3,"search":{"final_nodes":32}}}"#,
        r#"{"schema_version":1,"domain":"unit-disk","experiment":{"kind":"dynamics","map":"disk-automorphism","iterations":60}}"#,
        r#"{"schema_version":1,"domain":"unit-disk","experiment":{"kind":"gromov","xi":[[1,0]],"eta":[[0,1]],"trials":6}}"#,
        r#"{"schema_version":1,"domain":"lens-2","experiment":{"kind":"metric-table","points":12,"directions":2}}"#,
        r#"{"schema_version":1,"domain":"ball-2","experiment":{"kind":"goldilocks","grid_points":12,"shell":{"rays":8},"approach_points":8,"cone_samples":3}}"#,
        r#"{"schema_version":1,"domain":"unit-disk","experiment":{"kind":"visibility","xi":[[1,0]],"eta":[[-1,0]],"trials":4,"config":{"search":{"final_nodes":32}}}}"#,
    ]
}

fn csv_files(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

/// Same config and seed give byte-identical CSVs, with different thread counts;
/// the manifest lists only present, non-empty files and at least one report.
pub fn runner_determinism(config: &str, seed: u64) -> Check {
    let cfg = ExperimentConfig::from_json(config).map_err(err)?;
    let tmp = tempfile::tempdir().map_err(err)?;
    let mut outputs = Vec::new();
    for (k, threads) in [1usize, 2].into_iter().enumerate() {
        let dir = tmp.path().join(format!("run{k}"));
        let opts = RunOptions { out_dir: Some(dir.clone()), seed: Some(seed), threads: Some(threads), threads_env: None };
        let manifest = runner::run(&cfg, &opts).map_err(err)?;
        ensure!(manifest.verify(&dir), "manifest lists missing or empty files");
        ensure!(manifest.files.iter().any(|f| f.path == "report.json"), "no report written");
        outputs.push(csv_files(&dir));
    }
    ensure!(!outputs[0].is_empty(), "no CSV written");
    ensure!(outputs[0] == outputs[1], "CSV outputs differ between runs");
    Ok(())
}

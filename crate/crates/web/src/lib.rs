//! Browser entry points for the demo page. Each export takes plain numbers or
//! corpus names and returns a JSON string; the pure functions underneath are
//! ordinary Rust and are tested natively.

use kobayashi::corpus;
use kobayashi::domains::DomainSpec;
use kobayashi::dynamics::{classify, iterate, validate_map, ClassifyConfig, ValidationConfig};
use kobayashi::geodesics::{almost_geodesic, PathSearchConfig};
use kobayashi::goldilocks::{shell_table, ShellConfig};
use kobayashi::kobayashi::disk_distance;
use kobayashi::CPoint;
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct GeodesicView {
    pub points: Vec<[f64; 2]>,
    pub length: f64,
    pub exact_distance: f64,
    pub lambda: f64,
    pub kappa: f64,
}

#[derive(Debug, Serialize)]
pub struct ShellView {
    pub domain: String,
    pub r: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct OrbitView {
    pub map: String,
    pub domain: String,
    /// First two real coordinates of each orbit point.
    pub points: Vec<[f64; 2]>,
    pub delta: Vec<f64>,
    pub verdict: String,
    pub expected: String,
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn disk_point(x: f64, y: f64) -> Result<CPoint, String> {
    if !(x.is_finite() && y.is_finite()) || x * x + y * y >= 1.0 {
        return Err(format!("({x}, {y}) is not inside the unit disk"));
    }
    Ok(CPoint::new(vec![Complex64::new(x, y)]))
}

fn planar(p: &CPoint) -> [f64; 2] {
    let r = p.to_real();
    [r[0], r.get(1).copied().unwrap_or(0.0)]
}

/// Shortened, unit-speed path between two disk points.
pub fn disk_geodesic(ax: f64, ay: f64, bx: f64, by: f64, nodes: usize) -> Result<GeodesicView, String> {
    let domain = DomainSpec::unit_disk();
    let (a, b) = (disk_point(ax, ay)?, disk_point(bx, by)?);
    let cfg = PathSearchConfig { final_nodes: nodes.clamp(8, 256), ..Default::default() };
    let (path, cert) = almost_geodesic(&domain, &a, &b, &cfg).map_err(err)?;
    let (t0, t1) = path.span();
    Ok(GeodesicView {
        points: path.points().iter().map(planar).collect(),
        length: t1 - t0,
        exact_distance: disk_distance(a.coords()[0], b.coords()[0]),
        lambda: cert.lambda,
        kappa: cert.kappa,
    })
}

/// `M(r)` interval on a log-spaced grid for a named corpus domain.
pub fn shell_profile(domain: &str, points: usize, rays: usize) -> Result<ShellView, String> {
    let spec = corpus::domain(domain).ok_or_else(|| format!("unknown domain '{domain}'"))?;
    let n = points.clamp(2, 40);
    let rs: Vec<f64> = (0..n).map(|i| 0.3 * (1e-3f64 / 0.3).powf(i as f64 / (n - 1) as f64)).collect();
    let cfg = ShellConfig { rays: rays.clamp(4, 64), ..Default::default() };
    let rows = shell_table(&spec, &rs, &cfg).map_err(err)?;
    Ok(ShellView {
        domain: domain.to_string(),
        r: rows.iter().map(|x| x.r).collect(),
        lower: rows.iter().map(|x| x.lower).collect(),
        upper: rows.iter().map(|x| x.upper).collect(),
    })
}

/// Orbit of a named corpus map from one of its listed base points.
pub fn wolff_orbit(map: &str, base: usize, steps: usize) -> Result<OrbitView, String> {
    let entry = corpus::map(map).ok_or_else(|| format!("unknown map '{map}'"))?;
    let domain = corpus::domain(entry.domain).ok_or_else(|| format!("unknown domain '{}'", entry.domain))?;
    let o = entry.bases.get(base).ok_or_else(|| format!("map '{map}' has {} base points", entry.bases.len()))?;
    let f = validate_map(&domain, &entry.map, &ValidationConfig::default()).map_err(err)?;
    let trace = iterate(&domain, &f, o, steps.clamp(1, 2000)).map_err(err)?;
    let verdict = classify(&domain, &trace, &ClassifyConfig::default());
    Ok(OrbitView {
        map: map.to_string(),
        domain: entry.domain.to_string(),
        points: trace.points.iter().map(planar).collect(),
        delta: trace.delta.clone(),
        verdict: verdict.label().to_string(),
        expected: entry.expected.to_string(),
    })
}

fn to_json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = diskGeodesic)]
pub fn disk_geodesic_json(ax: f64, ay: f64, bx: f64, by: f64, nodes: usize) -> Result<String, JsError> {
    to_json(disk_geodesic(ax, ay, bx, by, nodes))
}

#[wasm_bindgen(js_name = shellProfile)]
pub fn shell_profile_json(domain: &str, points: usize, rays: usize) -> Result<String, JsError> {
    to_json(shell_profile(domain, points, rays))
}

#[wasm_bindgen(js_name = wolffOrbit)]
pub fn wolff_orbit_json(map: &str, base: usize, steps: usize) -> Result<String, JsError> {
    to_json(wolff_orbit(map, base, steps))
}

#[wasm_bindgen(js_name = domainNames)]
pub fn domain_names_json() -> String {
    serde_json::to_string(&corpus::domain_names()).unwrap_or_else(|_| "[]".into())
}

#[wasm_bindgen(js_name = mapNames)]
pub fn map_names_json() -> String {
    let names: Vec<_> = corpus::maps().iter().map(|m| m.name).collect();
    serde_json::to_string(&names).unwrap_or_else(|_| "[]".into())
}

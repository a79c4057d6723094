//! Built-in domains, self-maps and quasi-geodesics used by the runner and tests.

use num_complex::Complex64;
use serde::Serialize;

use crate::complex::CPoint;
use crate::domains::{ConvexBody, DomainKind, DomainSpec};
use crate::dynamics::{Component, SelfMap, Term};
use crate::geodesics::{pair_bounds, SampledPath};

#[derive(Clone, Debug, Serialize)]
pub struct Tags {
    pub convex: bool,
    pub goldilocks_expected: bool,
    pub taut_documented: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DomainEntry {
    pub name: &'static str,
    pub spec: DomainSpec,
    pub tags: Tags,
    /// Theorem hypotheses the domain is believed to satisfy. Not verdicts.
    pub hypotheses: Vec<&'static str>,
    pub note: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct MapEntry {
    pub name: &'static str,
    pub domain: &'static str,
    pub map: SelfMap,
    pub expected: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wolff_point: Option<CPoint>,
    pub bases: Vec<CPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasiGeodesicEntry {
    pub name: &'static str,
    pub domain: &'static str,
    pub lambda: f64,
    pub kappa: f64,
    #[serde(skip)]
    pub path: SampledPath,
}

#[derive(Clone, Debug, Serialize)]
pub struct Listing {
    pub domains: Vec<DomainEntry>,
    pub maps: Vec<MapEntry>,
    pub quasi_geodesics: Vec<QuasiGeodesicEntry>,
}

const VIS: &str = "visibility";
const WD_TAUT: &str = "wolff-denjoy-taut";
const WD_COMPLETE: &str = "wolff-denjoy-complete";

fn p(pairs: &[(f64, f64)]) -> CPoint {
    CPoint::from_pairs(pairs)
}

fn entry(name: &'static str, spec: DomainSpec, goldilocks: bool, taut: bool, note: &'static str) -> DomainEntry {
    let convex = spec.is_convex();
    let mut hypotheses = Vec::new();
    if goldilocks {
        hypotheses.push(VIS);
        if taut {
            hypotheses.push(WD_TAUT);
        }
        if convex {
            hypotheses.push(WD_COMPLETE);
        }
    }
    DomainEntry {
        name,
        spec,
        tags: Tags { convex, goldilocks_expected: goldilocks, taut_documented: taut },
        hypotheses,
        note,
    }
}

pub fn domains() -> Vec<DomainEntry> {
    let ball = |c: (f64, f64), r: f64| ConvexBody::Ball { center: p(&[c, (0.0, 0.0)]), radius: r };
    vec![
        entry("unit-disk", DomainSpec::unit_disk(), true, true, "exact metric"),
        entry("ball-2", DomainSpec::unit_ball(2), true, true, "exact metric"),
        entry("ball-3", DomainSpec::unit_ball(3), true, true, "exact metric"),
        entry("polydisk-2", DomainSpec::polydisk(vec![1.0, 1.0]).unwrap(), false, true, "flat boundary faces"),
        entry("egg-2-1-2", DomainSpec::egg(vec![1.0, 2.0]).unwrap(), true, true, "finite type"),
        entry(
            "psi-0.5",
            DomainSpec::new(DomainKind::PsiSupported { dim: 2, s: 0.5 }).unwrap(),
            true,
            true,
            "infinitely flat, integrable envelope",
        ),
        entry(
            "psi-1.5",
            DomainSpec::new(DomainKind::PsiSupported { dim: 2, s: 1.5 }).unwrap(),
            false,
            true,
            "infinitely flat, non-integrable envelope",
        ),
        entry(
            "lens-2",
            DomainSpec::new(DomainKind::Intersection { first: ball((-0.5, 0.0), 1.0), second: ball((0.5, 0.0), 1.0) })
                .unwrap(),
            true,
            true,
            "two shifted balls",
        ),
        entry(
            "ball-ellipsoid-2",
            DomainSpec::new(DomainKind::Intersection {
                first: ball((0.0, 0.0), 1.0),
                second: ConvexBody::Ellipsoid { center: p(&[(0.2, 0.0), (0.0, 0.0)]), semi_axes: vec![1.0, 0.6] },
            })
            .unwrap(),
            true,
            true,
            "ball cut by an ellipsoid",
        ),
        entry(
            "cusp-notch",
            DomainSpec::new(DomainKind::CuspNotch { steepness: 1e3 }).unwrap(),
            false,
            false,
            "non-convex cone-condition test case",
        ),
    ]
}

pub fn domain(name: &str) -> Option<DomainSpec> {
    domains().into_iter().find(|e| e.name == name).map(|e| e.spec)
}

pub fn domain_names() -> Vec<&'static str> {
    domains().iter().map(|e| e.name).collect()
}

fn term(re: f64, im: f64, e: &[u32]) -> Term {
    Term::new(Complex64::new(re, im), e.to_vec())
}

fn poly1(num: Vec<Term>, den: Vec<Term>) -> Component {
    Component { numerator: num, denominator: den }
}

pub fn maps() -> Vec<MapEntry> {
    let disk_bases = vec![p(&[(0.0, 0.0)]), p(&[(0.0, 0.5)]), p(&[(-0.7, 0.0)]), p(&[(0.3, 0.3)]), p(&[(0.0, -0.2)])];
    let ball_bases = vec![
        p(&[(0.0, 0.0), (0.0, 0.0)]),
        p(&[(0.5, 0.0), (0.0, 0.3)]),
        p(&[(-0.6, 0.2), (0.1, 0.0)]),
        p(&[(0.0, 0.0), (0.7, 0.0)]),
        p(&[(0.2, -0.4), (-0.3, 0.3)]),
    ];
    vec![
        MapEntry {
            name: "rotation",
            domain: "unit-disk",
            map: SelfMap::new(vec![poly1(vec![term(0.0, 1.0, &[1])], vec![])]).unwrap().named("rotation"),
            expected: "compact",
            wolff_point: None,
            bases: disk_bases.iter().map(|b| if b.norm() == 0.0 { p(&[(0.5, 0.0)]) } else { b.clone() }).collect(),
        },
        MapEntry {
            name: "disk-automorphism",
            domain: "unit-disk",
            map: SelfMap::new(vec![poly1(
                vec![term(1.0, 0.0, &[1]), term(0.5, 0.0, &[0])],
                vec![term(1.0, 0.0, &[0]), term(0.5, 0.0, &[1])],
            )])
            .unwrap()
            .named("disk-automorphism"),
            expected: "wolff",
            wolff_point: Some(p(&[(1.0, 0.0)])),
            bases: disk_bases.clone(),
        },
        MapEntry {
            name: "disk-contraction",
            domain: "unit-disk",
            map: SelfMap::new(vec![poly1(vec![term(0.5, 0.0, &[1])], vec![])]).unwrap().named("disk-contraction"),
            expected: "compact",
            wolff_point: None,
            bases: disk_bases,
        },
        MapEntry {
            name: "ball-boundary-contraction",
            domain: "ball-2",
            map: SelfMap::new(vec![
                poly1(vec![term(0.5, 0.0, &[0, 0]), term(0.5, 0.0, &[1, 0])], vec![]),
                poly1(vec![term(0.5, 0.0, &[0, 1])], vec![]),
            ])
            .unwrap()
            .named("ball-boundary-contraction"),
            expected: "wolff",
            wolff_point: Some(p(&[(1.0, 0.0), (0.0, 0.0)])),
            bases: ball_bases,
        },
    ]
}

pub fn map(name: &str) -> Option<MapEntry> {
    maps().into_iter().find(|m| m.name == name)
}

/// Smallest `κ` (plus a small margin) for which the sampled path satisfies the
/// `λ` quasi-geodesic inequalities, using the sound side of each bound.
pub fn fit_kappa(domain: &DomainSpec, path: &SampledPath, lambda: f64) -> f64 {
    let (ts, ps) = (path.params(), path.points());
    let mut k: f64 = 0.0;
    for i in 0..ps.len() {
        for j in i + 1..ps.len() {
            let dt = ts[j] - ts[i];
            let (lo, up) = pair_bounds(domain, &ps[i], &ps[j]);
            k = k.max(dt / lambda - up).max(lo - lambda * dt);
        }
    }
    k + 1e-6
}

fn sampled(n: usize, t0: f64, t1: f64, f: impl Fn(f64) -> CPoint) -> SampledPath {
    let params: Vec<f64> = (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect();
    let points = params.iter().map(|&t| f(t)).collect();
    SampledPath::new(params, points).expect("corpus path")
}

fn quasi(name: &'static str, dom: &'static str, lambda: f64, path: SampledPath) -> QuasiGeodesicEntry {
    let spec = domain(dom).expect("corpus domain");
    let kappa = fit_kappa(&spec, &path, lambda);
    QuasiGeodesicEntry { name, domain: dom, lambda, kappa, path }
}

fn polar(r: f64, a: f64) -> Complex64 {
    Complex64::from_polar(r, a)
}

/// Ten sampled quasi-geodesics on exact-metric domains. `κ` is fitted per path.
pub fn quasi_geodesics() -> Vec<QuasiGeodesicEntry> {
    let d1 = |z: Complex64| CPoint(vec![z]);
    vec![
        quasi("radial", "unit-disk", 1.0, sampled(24, 0.0, 2.5, |t| d1(polar(t.tanh(), 0.0)))),
        quasi("diameter", "unit-disk", 1.0, sampled(32, -2.0, 2.0, |t| d1(polar(t.tanh(), 0.7)))),
        quasi(
            "time-distorted",
            "unit-disk",
            1.5,
            sampled(32, 0.0, 3.0, |t| d1(polar((t + 0.3 * t.sin()).tanh(), 0.0))),
        ),
        quasi(
            "wobbly-radial",
            "unit-disk",
            1.2,
            sampled(32, 0.0, 2.5, |t| d1(polar(t.tanh(), 0.15 * (3.0 * t).sin()))),
        ),
        quasi(
            "broken-at-origin",
            "unit-disk",
            1.0,
            sampled(32, -1.5, 1.5, |t| d1(if t < 0.0 { polar((-t).tanh(), 0.0) } else { polar(t.tanh(), 1.2) })),
        ),
        quasi("short", "unit-disk", 1.0, sampled(8, 0.0, 0.4, |t| d1(polar(t.tanh(), 2.0)))),
        quasi(
            "ball-radial",
            "ball-2",
            1.0,
            sampled(24, 0.0, 2.5, |t| CPoint(vec![polar(0.6 * t.tanh(), 0.0), polar(0.8 * t.tanh(), 0.5)])),
        ),
        quasi(
            "ball-slice-wobble",
            "ball-2",
            1.3,
            sampled(24, -1.5, 1.5, |t| CPoint(vec![polar(t.tanh(), 0.0), polar(0.1 * (2.0 * t).sin(), 0.0)])),
        ),
        quasi(
            "ball3-diameter",
            "ball-3",
            1.0,
            sampled(24, -1.8, 1.8, |t| {
                let r = t.tanh() / 3f64.sqrt();
                CPoint(vec![polar(r, 0.0), polar(r, 1.0), polar(r, 2.0)])
            }),
        ),
        quasi(
            "polydisk-diagonal",
            "polydisk-2",
            1.0,
            sampled(24, 0.0, 2.0, |t| CPoint(vec![polar(t.tanh(), 0.0), polar((0.8 * t).tanh(), 1.0)])),
        ),
    ]
}

pub fn listing() -> Listing {
    Listing { domains: domains(), maps: maps(), quasi_geodesics: quasi_geodesics() }
}

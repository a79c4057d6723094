use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use kobayashi::complex::CPoint;
use kobayashi::domains::DomainSpec;
use kobayashi::geodesics::{self as geo, PathSearchConfig, SampledPath, SmoothingConfig};
use kobayashi::kobayashi::{self as kob, Side};

fn c(re: f64, im: f64) -> CPoint {
    CPoint(vec![Complex64::new(re, im)])
}

fn polar(r: f64, a: f64) -> CPoint {
    CPoint(vec![Complex64::from_polar(r, a)])
}

fn mobius(z: Complex64, w: Complex64) -> f64 {
    ((z - w).norm() / (1.0 - w.conj() * z).norm()).atanh()
}

#[test]
fn radial_path_stays_straight() {
    let d = DomainSpec::unit_disk();
    let path = geo::minimize_path(&d, &c(0.0, 0.0), &c(0.9, 0.0), &PathSearchConfig::default()).unwrap();
    let l = kob::path_length(&d, &path, Side::Upper).unwrap();
    assert!((l - 0.9f64.atanh()).abs() < 0.01 * 0.9f64.atanh());
    assert!(path.points().iter().all(|q| q[0].im.abs() < 1e-6));
}

#[test]
fn diameter_passes_through_center() {
    let d = DomainSpec::unit_disk();
    let path = geo::minimize_path(&d, &c(-0.9, 0.0), &c(0.9, 0.0), &PathSearchConfig::default()).unwrap();
    let l = kob::path_length(&d, &path, Side::Upper).unwrap();
    assert!((l - 2.0 * 0.9f64.atanh()).abs() < 0.02 * 0.9f64.atanh());
    let closest = path.points().iter().map(|q| q.norm()).fold(f64::INFINITY, f64::min);
    assert!(closest < 0.05);
}

#[test]
fn off_axis_pair_beats_chord() {
    let d = DomainSpec::unit_disk();
    let (x, y) = (polar(0.9, FRAC_PI_4), polar(0.9, 3.0 * FRAC_PI_4));
    let path = geo::minimize_path(&d, &x, &y, &PathSearchConfig::default()).unwrap();
    let l = kob::path_length(&d, &path, Side::Upper).unwrap();
    let chord = kob::path_length(&d, &SampledPath::straight(&x, &y, 128), Side::Upper).unwrap();
    let want = mobius(x[0], y[0]);
    assert!(l < chord);
    assert!((l - want).abs() < 0.02 * want, "{l} vs {want}");
}

#[test]
fn reparametrized_speed_is_one() {
    let d = DomainSpec::unit_disk();
    let path = geo::unit_speed_reparametrize(&d, &SampledPath::straight(&c(0.0, 0.0), &c(0.9, 0.0), 128)).unwrap();
    for (w, t) in path.points().windows(2).zip(path.params().windows(2)) {
        // disk metric at the segment midpoint, recomputed from the closed form
        let mid = 0.5 * (w[0][0] + w[1][0]);
        let speed = (w[1][0] - w[0][0]).norm() / (1.0 - mid.norm_sqr()) / (t[1] - t[0]);
        assert!((speed - 1.0).abs() <= 0.05);
    }
}

#[test]
fn geodesic_certificate_examples() {
    let d = DomainSpec::unit_disk();
    let raw = SampledPath::straight(&c(0.0, 0.0), &c(0.9, 0.0), 128);
    let path = geo::unit_speed_reparametrize(&d, &raw).unwrap();
    let cert = geo::certify(&d, &path, 1.0).unwrap();
    assert_eq!(cert.lambda, 1.0);
    assert!(cert.kappa <= 0.05);
    let cert = geo::certify(&d, &SampledPath::single(c(0.4, 0.0)), 1.0).unwrap();
    assert_eq!((cert.lambda, cert.kappa), (1.0, 0.0));
}

#[test]
fn chord_kappa_exceeds_geodesic_by_length_gap() {
    let d = DomainSpec::unit_disk();
    let (x, y) = (polar(0.9, FRAC_PI_4), polar(0.9, 3.0 * FRAC_PI_4));
    let chord = geo::unit_speed_reparametrize(&d, &SampledPath::straight(&x, &y, 128)).unwrap();
    let ccert = geo::certify(&d, &chord, 1.0).unwrap();
    let (geod, gcert) = geo::almost_geodesic(&d, &x, &y, &PathSearchConfig::default()).unwrap();
    let gap = chord.span().1 - mobius(x[0], y[0]);
    assert!(gap > 0.0);
    assert!(ccert.kappa > gcert.kappa);
    assert!(ccert.kappa >= gap - 1e-6 - (geod.span().1 - mobius(x[0], y[0])).abs());
}

#[test]
fn smoothing_true_geodesic_stays_close() {
    let d = DomainSpec::unit_disk();
    let n = 40;
    let l = 0.9f64.atanh();
    let params: Vec<f64> = (0..=n).map(|k| l * k as f64 / n as f64).collect();
    let points: Vec<CPoint> = params.iter().map(|t| c(t.tanh(), 0.0)).collect();
    let q = SampledPath::new(params, points).unwrap();
    let out = geo::quasi_to_almost(&d, &q, 1.0, 0.0, &SmoothingConfig::default()).unwrap();
    assert_eq!(out.radius, 4.0);
    assert!(out.hausdorff_measured <= 4.0);
    assert!(out.certificate.lambda <= 4.0 && out.certificate.kappa <= 8.0);
}

#[test]
fn smoothing_connects_a_jump() {
    // two samples at bounded distance with a gap in between: a (1, κ)-quasi-geodesic
    // that is not a curve
    let d = DomainSpec::unit_disk();
    let (x, y) = (c(0.0, 0.0), c(0.0, 0.6));
    let k = mobius(x[0], y[0]);
    let q = SampledPath::new(vec![0.0, 2.0], vec![x.clone(), y.clone()]).unwrap();
    let kappa = (2.0 - k).abs() + 1e-9;
    let out = geo::quasi_to_almost(&d, &q, 1.0, kappa, &SmoothingConfig::default()).unwrap();
    assert!(out.path.points().len() > 2);
    assert_eq!(out.path.first(), &x);
    assert_eq!(out.path.last(), &y);
    assert!(out.certificate.lambda <= out.lambda0 && out.certificate.kappa <= out.kappa0);
    assert!(out.path.points().iter().all(|p| d.contains(p)));
}

#[test]
fn short_range_is_one_bridge() {
    let d = DomainSpec::unit_disk();
    let q = SampledPath::new(vec![0.0, 0.4], vec![c(0.1, 0.0), c(0.1, 0.3)]).unwrap();
    let out = geo::quasi_to_almost(&d, &q, 1.5, 0.5, &SmoothingConfig::default()).unwrap();
    assert_eq!(out.pieces, 1);
}

#[test]
fn path_csv_round_trip() {
    let path = SampledPath::straight(&c(0.0, 0.0), &c(0.5, 0.25), 4);
    let mut buf = Vec::new();
    path.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    let last: Vec<f64> = rows[4].iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    assert!(!text.contains('\r'));
}

//! Deterministic sample generators shared by the geometry and experiment code.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{real_normalize, CPoint, CVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal draw via Box–Muller; avoids pulling in `rand_distr` for one use.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// `count` unit vectors in `R^real_dim`. The signed coordinate axes come first,
/// followed by uniformly random directions. In the plane the directions are an
/// equally spaced fan instead.
pub fn sphere_directions(real_dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    if real_dim == 2 {
        return (0..count)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut out = Vec::with_capacity(count);
    for j in 0..real_dim {
        for s in [1.0, -1.0] {
            if out.len() < count {
                let mut e = vec![0.0; real_dim];
                e[j] = s;
                out.push(e);
            }
        }
    }
    let mut r = rng(seed);
    while out.len() < count {
        let mut u: Vec<f64> = (0..real_dim).map(|_| gaussian(&mut r)).collect();
        if real_normalize(&mut u) > 1e-12 {
            out.push(u);
        }
    }
    out
}

/// Random unit complex vectors in `C^dim`.
pub fn unit_cvectors(dim: usize, count: usize, seed: u64) -> Vec<CVector> {
    sphere_directions(2 * dim, count, seed)
        .into_iter()
        .map(|u| CVector::from_real(&u))
        .collect()
}

/// Orthonormal basis (real) of the complement of the unit vector `n` in `R^m`.
pub fn orthonormal_complement(n: &[f64]) -> Vec<Vec<f64>> {
    let m = n.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m - 1);
    for j in 0..m {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        let mut proj = crate::complex::real_dot(&e, n);
        for (a, b) in e.iter_mut().zip(n) {
            *a -= proj * b;
        }
        for q in &basis {
            proj = crate::complex::real_dot(&e, q);
            for (a, b) in e.iter_mut().zip(q) {
                *a -= proj * b;
            }
        }
        if real_normalize(&mut e) > 1e-8 {
            basis.push(e);
        }
        if basis.len() == m - 1 {
            break;
        }
    }
    basis
}

/// Orthonormal basis (complex) of the complex-orthogonal complement of `n` in `C^d`.
pub fn complex_tangent_basis(n: &CVector) -> Vec<CVector> {
    let d = n.dim();
    let n = match n.normalized() {
        Some(n) => n,
        None => return (0..d).map(|j| CVector::basis(d, j)).collect(),
    };
    let mut basis: Vec<CVector> = Vec::new();
    for j in 0..d {
        let mut e = CVector::basis(d, j);
        let p = e.hermitian(&n.0);
        e = CVector(e.0.iter().zip(&n.0).map(|(a, b)| a - b * p).collect());
        for q in &basis {
            let p = e.hermitian(&q.0);
            e = CVector(e.0.iter().zip(&q.0).map(|(a, b)| a - b * p).collect());
        }
        if let Some(u) = e.normalized() {
            if e.norm() > 1e-8 {
                basis.push(u);
            }
        }
        if basis.len() + 1 == d {
            break;
        }
    }
    basis
}

/// Geometric grid of `n` values from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Uniform random point of the unit ball of `C^dim` scaled by `radius`.
pub fn ball_point<R: Rng>(rng: &mut R, dim: usize, radius: f64) -> CPoint {
    let mut u: Vec<f64> = (0..2 * dim).map(|_| gaussian(rng)).collect();
    real_normalize(&mut u);
    let s: f64 = rng.gen::<f64>().powf(1.0 / (2 * dim) as f64) * radius;
    CPoint::from_real(&u.iter().map(|a| a * s).collect::<Vec<_>>())
}

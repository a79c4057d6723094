//! Points and tangent vectors in `C^d`.
//!
//! Both types are thin newtypes over a `Vec<Complex64>`. Geometry routines
//! frequently need the underlying `R^{2d}` picture (rays, cones, nearest
//! boundary points), so both expose a real view with the layout
//! `(Re z₁, Im z₁, Re z₂, Im z₂, …)`.

use std::ops::{Add, Index, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CPoint(pub Vec<Complex64>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CVector(pub Vec<Complex64>);

macro_rules! shared_impl {
    ($t:ident) => {
        impl $t {
            pub fn new(coords: Vec<Complex64>) -> Self {
                Self(coords)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![Complex64::new(0.0, 0.0); dim])
            }

            /// Builds from `(re, im)` pairs.
            pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
                Self(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            }

            pub fn from_real(x: &[f64]) -> Self {
                assert!(x.len() % 2 == 0, "real view must have even length");
                Self(x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
            }

            pub fn to_real(&self) -> Vec<f64> {
                self.0.iter().flat_map(|z| [z.re, z.im]).collect()
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn coords(&self) -> &[Complex64] {
                &self.0
            }

            pub fn norm_sqr(&self) -> f64 {
                self.0.iter().map(|z| z.norm_sqr()).sum()
            }

            pub fn norm(&self) -> f64 {
                self.norm_sqr().sqrt()
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            }

            /// Hermitian product `⟨self, other⟩ = Σ self_j · conj(other_j)`.
            pub fn hermitian(&self, other: &[Complex64]) -> Complex64 {
                self.0.iter().zip(other).map(|(a, b)| a * b.conj()).sum()
            }

            pub fn scale(&self, c: Complex64) -> Self {
                Self(self.0.iter().map(|z| z * c).collect())
            }

            pub fn scale_real(&self, c: f64) -> Self {
                Self(self.0.iter().map(|z| z * c).collect())
            }
        }

        impl Index<usize> for $t {
            type Output = Complex64;
            fn index(&self, i: usize) -> &Complex64 {
                &self.0[i]
            }
        }
    };
}

shared_impl!(CPoint);
shared_impl!(CVector);

impl CPoint {
    pub fn origin(dim: usize) -> Self {
        Self::zeros(dim)
    }

    pub fn distance(&self, other: &CPoint) -> f64 {
        (self - other).norm()
    }

    /// `self + t·u` for a real direction `u` given in the real view.
    pub fn offset_real(&self, u: &[f64], t: f64) -> CPoint {
        CPoint(
            self.0
                .iter()
                .enumerate()
                .map(|(j, z)| Complex64::new(z.re + t * u[2 * j], z.im + t * u[2 * j + 1]))
                .collect(),
        )
    }

    pub fn translate(&self, v: &CVector, t: Complex64) -> CPoint {
        CPoint(self.0.iter().zip(&v.0).map(|(z, w)| z + w * t).collect())
    }

    /// Affine interpolation `(1-s)·self + s·other`.
    pub fn lerp(&self, other: &CPoint, s: f64) -> CPoint {
        CPoint(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + (b - a) * s)
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &CPoint) -> CPoint {
        self.lerp(other, 0.5)
    }
}

impl CVector {
    /// Unit vector `e_j` in `C^dim`.
    pub fn basis(dim: usize, j: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[j] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn normalized(&self) -> Option<CVector> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scale_real(1.0 / n))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

impl Sub for &CPoint {
    type Output = CVector;
    fn sub(self, rhs: &CPoint) -> CVector {
        CVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add<&CVector> for &CPoint {
    type Output = CPoint;
    fn add(self, rhs: &CVector) -> CPoint {
        CPoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Mul<f64> for &CVector {
    type Output = CVector;
    fn mul(self, rhs: f64) -> CVector {
        self.scale_real(rhs)
    }
}

/// Euclidean norm of a real vector.
pub(crate) fn real_norm(x: &[f64]) -> f64 {
    x.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn real_normalize(x: &mut [f64]) -> f64 {
    let n = real_norm(x);
    if n > 0.0 {
        x.iter_mut().for_each(|a| *a /= n);
    }
    n
}

pub(crate) fn real_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

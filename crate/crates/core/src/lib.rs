//! Numerical estimates of the Kobayashi metric and distance on bounded domains
//! in `C^d`, together with the experiments built on top of them: certified
//! almost-geodesics, the two Goldilocks boundary-growth conditions, visibility
//! and Gromov-product checks, and Wolff–Denjoy orbit classification.
//!
//! Every metric quantity is reported as a [`MetricEstimate`] interval whose
//! sides carry the rule that produced them, so downstream code can always tell
//! a closed form from a sandwich bound or a path witness.

pub mod complex;
pub mod corpus;
pub mod domains;
pub mod dynamics;
pub mod geodesics;
pub mod goldilocks;
pub mod kobayashi;
pub mod runner;
pub mod sampling;
pub mod visibility;

mod par;

pub use complex::{CPoint, CVector};
pub use domains::{ConeReport, ConeSpec, ConvexBody, DomainError, DomainSpec};
pub use geodesics::{AlmostGeodesicCertificate, SampledPath};
pub use kobayashi::{BoundSource, MetricEstimate, Side};

/// Normalisation used throughout: `k_Δ(z; 1) = 1 / (1 - |z|²)` on the unit disk,
/// so that `K_Δ(0, s) = artanh(s)`.
pub const DISK_CURVATURE_NORMALISATION: &str = "k(z;1) = 1/(1-|z|^2), K(0,s) = artanh(s)";

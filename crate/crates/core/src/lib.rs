//! Numerical verification laboratory for the regularity theory of the
//! Maxwell operator on Lipschitz domains.
//!
//! The crate evaluates, on graph domains `x₃ > φ(x')`, the geometric and
//! analytic ingredients of the a priori estimates `‖u‖_{W¹₂} ≤ C ‖u‖_F`:
//! external-ball radii, convex smoothing by mollification, the 3×3 trace
//! inequality, integration-by-parts identities with curvature boundary
//! terms, weak boundary-condition residuals, diffeomorphism pullbacks and
//! empirical estimate sweeps. Every check is a quadrature computation whose
//! convergence can be measured.

pub mod convergence;
pub mod diffeo;
pub mod error;
pub mod experiment;
pub mod fd;
pub mod fields;
pub mod geometry;
pub mod matalg;
pub mod maxwell;
pub mod mollify;
pub mod names;
pub mod quadrature;
pub mod rng;

pub use error::{Error, Result};

pub use num_complex::Complex64;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
pub type CVec3 = nalgebra::Vector3<Complex64>;
pub type CMat3 = nalgebra::Matrix3<Complex64>;

pub(crate) fn complexify_vec(v: &Vec3) -> CVec3 {
    v.map(Complex64::from)
}

pub(crate) fn complexify_mat(m: &Mat3) -> CMat3 {
    m.map(Complex64::from)
}

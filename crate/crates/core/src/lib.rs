//! Medial axis transform of oriented point clouds by per-sphere nonlinear
//! least squares, plus the sphere-shrinking baseline it generalizes.
//!
//! The crate is organized bottom-up:
//!
//! 1. [`cloud`] – oriented point clouds, text IO, noise/outlier injection
//!    and radius / nearest-neighbor queries backed by [`kdtree`].
//! 2. [`fields`] – the compact kernel, the MLS signed distance and the
//!    sphere penetration distances with their gradients.
//! 3. [`solver`] – residual assembly, damped Gauss-Newton steps and the
//!    fixed-point sphere iteration, including ablation and IRLS variants.
//! 4. [`shrink`] – the sphere-shrinking baseline.
//! 5. [`eval`] – rasterized ground-truth medial axes and E_avg / E_max.
//! 6. [`shapes`] – parametric fixtures (circle, star, annulus, ...) used by
//!    the CLI and the test suites.
//!
//! All length-like tunables are expressed in percent of the bounding-box
//! diagonal and converted to world units once, on solver entry.

pub mod cloud;
pub mod eval;
pub mod fields;
pub mod kdtree;
pub mod parallel;
pub mod shapes;
pub mod shrink;
pub mod solver;

pub use cloud::{CloudError, NoiseMode, NoiseSpec, OrientedPointCloud};
pub use fields::Sphere;
pub use solver::{MedialAtom, MedialResult, Method, SolverConfig, SolverError};

/// Fixed-size column vector used for points, normals and centers.
pub type Vector<const D: usize> = nalgebra::SVector<f64, D>;

/// Converts a percent-of-diagonal quantity to world units.
#[inline]
pub fn pct_to_world(pct: f64, diag: f64) -> f64 {
    pct * diag / 100.0
}

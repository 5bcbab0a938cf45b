//! Estimation of distant (environment-map) lighting for a reconstructed scene.
//!
//! The pipeline path-traces a dense Jacobian of pixel intensities with respect to
//! the radiance of every discretized environment direction, then fits that radiance
//! to reference photographs with a robust objective, projected gradient descent and
//! a sequential Monte Carlo outer loop that re-traces with an importance
//! distribution built from the latest estimate.

// Parameter checks are written `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod env;
pub mod error;
pub mod estimate;
pub mod image;
pub mod io;
pub mod scene;
pub mod synthetic;
pub mod tracer;

pub use error::{Error, Result};

/// 3D point or direction in world space (meters).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Linear RGB triple (reflectance, radiance or irradiance depending on context).
pub type Rgb = [f64; 3];

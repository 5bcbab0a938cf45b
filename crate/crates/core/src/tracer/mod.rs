//! Monte Carlo light transport producing per-pixel light Jacobians and renders.
//!
//! Image formation is linear in the environment radiance: tracing records, for every
//! pixel, light and channel, the coefficient `∂I/∂λ`, and a render is that matrix
//! applied to λ.

mod jacobian;
mod trace;

pub use jacobian::{JacobianSidecar, LightJacobian};
pub use trace::{render, render_sphere_light, trace_jacobian, SphereLight};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Rgb, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TraceConfig {
    /// Primary rays per pixel (M).
    pub samples_per_pixel: usize,
    /// Path vertices that receive light samples; 1 means direct lighting only.
    pub max_bounces: usize,
    /// Light samples drawn at every path vertex (N).
    pub env_samples_per_vertex: usize,
    pub rng_seed: u64,
    /// Uniform share mixed into the light-selection distribution.
    pub floor_weight: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            samples_per_pixel: 64,
            max_bounces: 3,
            env_samples_per_vertex: 16,
            rng_seed: 0,
            floor_weight: 0.1,
        }
    }
}

impl TraceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_pixel == 0 || self.max_bounces == 0 || self.env_samples_per_vertex == 0 {
            return Err(Error::InvalidParameter(format!(
                "trace counts must be at least 1 (spp {}, bounces {}, light samples {})",
                self.samples_per_pixel, self.max_bounces, self.env_samples_per_vertex
            )));
        }
        if !(self.floor_weight > 0.0 && self.floor_weight <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "floor weight must lie in (0, 1], got {}",
                self.floor_weight
            )));
        }
        Ok(())
    }
}

/// Lambertian BRDF value `ρ/π`.
pub fn lambertian_brdf(albedo: &Rgb) -> Rgb {
    albedo.map(|a| a / PI)
}

/// Cosine-weighted direction about `n`; returns the direction and its solid-angle pdf.
pub fn cosine_sample_hemisphere(n: &Vec3, u1: f64, u2: f64) -> (Vec3, f64) {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let (t, b) = orthonormal_basis(n);
    let z = (1.0 - u1).max(0.0).sqrt();
    let dir = (r * phi.cos() * t + r * phi.sin() * b + z * n).normalize();
    (dir, dir.dot(n).max(0.0) / PI)
}

/// Tangent frame for a unit normal (Duff et al. 2017).
pub(crate) fn orthonormal_basis(n: &Vec3) -> (Vec3, Vec3) {
    let sign = 1f64.copysign(n.z);
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    (
        Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x),
        Vec3::new(b, sign + n.y * n.y * a, -n.y),
    )
}

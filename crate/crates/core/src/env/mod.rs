//! Ring-discretized environment light.
//!
//! The unit sphere (z up) is cut into `R` rings at polar angles `θ_i = π·i/(R−1)`.
//! Each pole is a single direction; ring `i` carries `ceil(2π·sinθ_i / Δθ)` directions
//! evenly spaced in azimuth starting at azimuth 0, so the along-ring spacing is as close
//! as possible to the ring spacing `Δθ = π/(R−1)`.
//!
//! Every direction also owns a sampling tile: the polar band `θ_i ± Δθ/2` cut into
//! equal azimuth sectors. The tiles partition the sphere, which lets the tracer draw
//! directions uniformly inside the region a light represents.

mod distribution;
mod serialize;

pub use distribution::LightSampleDistribution;
pub use serialize::EnvMapDocument;

use std::f64::consts::PI;

use crate::{Error, Result, Rgb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ring {
    theta: f64,
    /// Band limits in cos θ: `z_lo <= cos θ <= z_hi` inside the tile.
    z_lo: f64,
    z_hi: f64,
    start: usize,
    count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentMap {
    ring_count: usize,
    rings: Vec<Ring>,
    directions: Vec<Vec3>,
    ring_index: Vec<usize>,
    radiance: Vec<Rgb>,
}

/// Number of directions on each ring for `ring_count` rings.
pub fn ring_sizes(ring_count: usize) -> Result<Vec<usize>> {
    if ring_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "ring count must be at least 2, got {ring_count}"
        )));
    }
    let last = ring_count - 1;
    Ok((0..ring_count)
        .map(|i| {
            // Mirror rings share one evaluation so counts are exactly symmetric.
            let k = i.min(last - i);
            if k == 0 {
                1
            } else {
                let theta = PI * k as f64 / last as f64;
                let dtheta = PI / last as f64;
                // Guard against sinθ rounding an exact integer ratio upwards.
                (2.0 * PI * theta.sin() / dtheta - 1e-9).ceil() as usize
            }
        })
        .collect())
}

/// Discretizes the sphere into `ring_count` rings with all radiance set to zero.
pub fn discretize_sphere(ring_count: usize) -> Result<EnvironmentMap> {
    let sizes = ring_sizes(ring_count)?;
    let last = ring_count - 1;
    let dtheta = PI / last as f64;
    let total: usize = sizes.iter().sum();
    let mut rings = Vec::with_capacity(ring_count);
    let mut directions = Vec::with_capacity(total);
    let mut ring_index = Vec::with_capacity(total);
    for (i, &count) in sizes.iter().enumerate() {
        let k = i.min(last - i);
        let theta_k = PI * k as f64 / last as f64;
        let (sin_t, cos_k) = (theta_k.sin(), theta_k.cos());
        let southern = i > last - i;
        let z = if southern { -cos_k } else { cos_k };
        let band = |t: f64| t.clamp(0.0, PI).cos();
        let (mut z_hi, mut z_lo) = (band(theta_k - 0.5 * dtheta), band(theta_k + 0.5 * dtheta));
        if southern {
            (z_hi, z_lo) = (-z_lo, -z_hi);
        }
        let theta = if southern { PI - theta_k } else { theta_k };
        rings.push(Ring {
            theta,
            z_lo,
            z_hi,
            start: directions.len(),
            count,
        });
        for j in 0..count {
            let phi = 2.0 * PI * j as f64 / count as f64;
            let d = if k == 0 {
                Vec3::new(0.0, 0.0, z)
            } else {
                Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), z)
            };
            directions.push(d);
            ring_index.push(i);
        }
    }
    Ok(EnvironmentMap {
        ring_count,
        rings,
        radiance: vec![[0.0; 3]; directions.len()],
        directions,
        ring_index,
    })
}

impl EnvironmentMap {
    pub fn ring_count(&self) -> usize {
        self.ring_count
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn directions(&self) -> &[Vec3] {
        &self.directions
    }

    pub fn ring_index(&self) -> &[usize] {
        &self.ring_index
    }

    /// Per-direction RGB radiance λ.
    pub fn radiance_values(&self) -> &[Rgb] {
        &self.radiance
    }

    /// λ flattened as `[j*3 + c]`.
    pub fn radiance_flat(&self) -> &[f64] {
        self.radiance.as_flattened()
    }

    pub fn set_radiance(&mut self, radiance: Vec<Rgb>) -> Result<()> {
        if radiance.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} radiance values for {} directions",
                radiance.len(),
                self.len()
            )));
        }
        if let Some(bad) = radiance
            .iter()
            .flatten()
            .find(|v| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidParameter(format!(
                "radiance must be finite and nonnegative, found {bad}"
            )));
        }
        self.radiance = radiance;
        Ok(())
    }

    pub fn set_radiance_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != 3 * self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} radiance entries for {} directions",
                flat.len(),
                self.len()
            )));
        }
        self.set_radiance(flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    /// Sets the same radiance on every direction.
    pub fn fill(&mut self, value: Rgb) -> Result<()> {
        self.set_radiance(vec![value; self.len()])
    }

    /// Index of the stored direction closest to `dir` (largest dot product, smallest
    /// index on ties).
    pub fn nearest_direction(&self, dir: &Vec3) -> usize {
        let last = self.ring_count - 1;
        let dtheta = PI / last as f64;
        let theta = dir.z.clamp(-1.0, 1.0).acos();
        let guess = (theta / dtheta).round() as isize;
        let mut phi = dir.y.atan2(dir.x);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let mut best = usize::MAX;
        let mut best_dot = f64::NEG_INFINITY;
        let mut consider = |j: usize| {
            let d = dir.dot(&self.directions[j]);
            if d > best_dot || (d == best_dot && j < best) {
                best_dot = d;
                best = j;
            }
        };
        // The nearest stored direction is always within one tile diagonal (< Δθ),
        // so rings beyond ±2 can never win. Within a ring the dot product only
        // depends on azimuth distance, so the two azimuth neighbours suffice.
        for i in (guess - 2).max(0)..=(guess + 2).min(last as isize) {
            let ring = &self.rings[i as usize];
            let n = ring.count;
            if n <= 3 {
                (ring.start..ring.start + n).for_each(&mut consider);
                continue;
            }
            let k = (phi * n as f64 / (2.0 * PI)).floor() as isize;
            for dk in -1..=2 {
                let j = (k + dk).rem_euclid(n as isize) as usize;
                consider(ring.start + j);
            }
        }
        best
    }

    /// λ of the stored direction nearest to `dir`.
    pub fn radiance(&self, dir: &Vec3) -> Rgb {
        self.radiance[self.nearest_direction(dir)]
    }

    /// Solid angle of the sampling tile owned by light `j`. The tiles sum to 4π.
    pub fn cell_solid_angle(&self, j: usize) -> f64 {
        let ring = &self.rings[self.ring_index[j]];
        2.0 * PI * (ring.z_hi - ring.z_lo) / ring.count as f64
    }

    /// Uniform sample inside light `j`'s tile from two uniforms in `[0, 1)`.
    pub fn sample_cell(&self, j: usize, u1: f64, u2: f64) -> Vec3 {
        let ring = &self.rings[self.ring_index[j]];
        let z = ring.z_lo + u1 * (ring.z_hi - ring.z_lo);
        let k = (j - ring.start) as f64;
        let width = 2.0 * PI / ring.count as f64;
        let phi = (k - 0.5 + u2) * width;
        let r = (1.0 - z * z).max(0.0).sqrt();
        Vec3::new(r * phi.cos(), r * phi.sin(), z)
    }

    /// Polar angle of ring `i`.
    pub fn ring_theta(&self, i: usize) -> f64 {
        self.rings[i].theta
    }

    /// Number of directions on ring `i`.
    pub fn ring_len(&self, i: usize) -> usize {
        self.rings[i].count
    }
}

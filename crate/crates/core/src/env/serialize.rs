use serde::{Deserialize, Serialize};

use super::{discretize_sphere, EnvironmentMap};
use crate::image::Image;
use crate::{Error, Result, Rgb, Vec3};

/// JSON form of an environment map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvMapDocument {
    pub ring_count: usize,
    pub directions: Vec<[f64; 3]>,
    pub radiance: Vec<Rgb>,
}

impl From<&EnvironmentMap> for EnvMapDocument {
    fn from(env: &EnvironmentMap) -> Self {
        Self {
            ring_count: env.ring_count(),
            directions: env.directions().iter().map(|d| [d.x, d.y, d.z]).collect(),
            radiance: env.radiance_values().to_vec(),
        }
    }
}

impl TryFrom<EnvMapDocument> for EnvironmentMap {
    type Error = Error;

    /// Rebuilds the discretization from `ring_count` and checks the stored directions
    /// against it.
    fn try_from(doc: EnvMapDocument) -> Result<Self> {
        let mut env = discretize_sphere(doc.ring_count)?;
        if doc.directions.len() != env.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} rings imply {} directions, document lists {}",
                doc.ring_count,
                env.len(),
                doc.directions.len()
            )));
        }
        for (j, (d, e)) in doc.directions.iter().zip(env.directions()).enumerate() {
            if (Vec3::from(*d) - e).norm() > 1e-9 {
                return Err(Error::DimensionMismatch(format!(
                    "direction {j} does not match the {}-ring discretization",
                    doc.ring_count
                )));
            }
        }
        env.set_radiance(doc.radiance)?;
        Ok(env)
    }
}

impl EnvironmentMap {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&EnvMapDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: EnvMapDocument = serde_json::from_str(text)?;
        doc.try_into()
    }

    /// Equirectangular visualization (`width = 2·height`): row 0 is the +z pole,
    /// column 0 is azimuth 0; each pixel shows the nearest direction's λ.
    pub fn to_equirect(&self, height: usize) -> Image {
        let width = 2 * height;
        let mut img = Image::new(width, height);
        for y in 0..height {
            let theta = std::f64::consts::PI * (y as f64 + 0.5) / height as f64;
            for x in 0..width {
                let phi = 2.0 * std::f64::consts::PI * (x as f64 + 0.5) / width as f64;
                let d = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                img.set(x, y, self.radiance(&d));
            }
        }
        img
    }
}

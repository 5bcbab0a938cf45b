//! JSON scene configuration.
//!
//! ```json
//! {
//!   "mesh": "scene.ply",
//!   "rings": 9,
//!   "views": [{ "image": "ref.pfm", "mask": "mask.png", "camera": { ... } }],
//!   "trace": { "samples_per_pixel": 64 },
//!   "objective": { "cauchy_scale": 0.05 }
//! }
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_image, load_mask};
use crate::camera::CameraModel;
use crate::estimate::{ObjectiveConfig, View};
use crate::image::ReferenceImage;
use crate::{Error, Result};

fn default_rings() -> usize {
    9
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewConfig {
    pub image: PathBuf,
    /// Optional validity mask image; nonzero pixels are valid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<PathBuf>,
    pub camera: CameraModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub mesh: PathBuf,
    #[serde(default = "default_rings")]
    pub rings: usize,
    pub views: Vec<ViewConfig>,
    #[serde(default)]
    pub trace: crate::tracer::TraceConfig,
    #[serde(default)]
    pub objective: ObjectiveConfig,
}

impl SceneConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Reads a config file and resolves its paths. Does not validate.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.mesh);
        for v in &mut self.views {
            fix(&mut v.image);
            if let Some(m) = &mut v.mask {
                fix(m);
            }
        }
    }

    /// Checks parameters and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if self.rings < 2 {
            return Err(Error::Config(format!("rings must be >= 2, got {}", self.rings)));
        }
        if self.views.is_empty() {
            return Err(Error::Config("at least one view is required".into()));
        }
        self.trace.validate()?;
        self.objective.validate()?;
        let mut files = vec![&self.mesh];
        for v in &self.views {
            files.push(&v.image);
            files.extend(v.mask.as_ref());
        }
        for f in files {
            if !f.is_file() {
                return Err(Error::Config(format!("missing file: {}", f.display())));
            }
        }
        Ok(())
    }

    /// Loads every reference image and mask, checking sizes against the cameras.
    pub fn load_views(&self) -> Result<Vec<View>> {
        self.views
            .iter()
            .map(|v| {
                let image = load_image(&v.image)?;
                if image.width() != v.camera.width || image.height() != v.camera.height {
                    return Err(Error::DimensionMismatch(format!(
                        "{}: image is {}x{}, camera is {}x{}",
                        v.image.display(),
                        image.width(),
                        image.height(),
                        v.camera.width,
                        v.camera.height
                    )));
                }
                let reference = match &v.mask {
                    Some(m) => ReferenceImage::new(image, load_mask(m)?)?,
                    None => ReferenceImage::unmasked(image)?,
                };
                Ok(View {
                    camera: v.camera.clone(),
                    reference,
                })
            })
            .collect()
    }
}

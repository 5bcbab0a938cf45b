//! File formats and scene-level helpers: meshes, images, configs, masks and error maps.

mod config;
mod mesh;
mod pfm;
mod png;

pub use config::{SceneConfig, ViewConfig};
pub use mesh::{load_mesh, save_mesh};
pub use pfm::{decode_pfm, encode_pfm};
pub use png::{decode_png, encode_png, linear_to_srgb, srgb_to_linear};

use std::path::Path;

use crate::camera::CameraModel;
use crate::image::{Image, ReferenceImage};
use crate::scene::Accel;
use crate::{Error, Result};

/// Loads a PFM (linear) or PNG (sRGB, linearized) image.
pub fn load_image(path: &Path) -> Result<Image> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    match mesh::extension(path).as_deref() {
        Some("pfm") => decode_pfm(&bytes),
        Some("png") => decode_png(&bytes),
        _ => Err(Error::Config(format!(
            "{}: unsupported image format (expected .pfm or .png)",
            path.display()
        ))),
    }
}

/// Saves as PFM (exact `f32`) or PNG (sRGB preview), chosen by extension.
pub fn save_image(path: &Path, img: &Image) -> Result<()> {
    let bytes = match mesh::extension(path).as_deref() {
        Some("pfm") => encode_pfm(img),
        Some("png") => encode_png(img)?,
        _ => {
            return Err(Error::Config(format!(
                "{}: unsupported image format (expected .pfm or .png)",
                path.display()
            )))
        }
    };
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Loads a mask image: a pixel is valid when any channel is nonzero.
pub fn load_mask(path: &Path) -> Result<Vec<bool>> {
    Ok(load_image(path)?
        .pixels()
        .iter()
        .map(|p| p.iter().any(|&v| v > 0.0))
        .collect())
}

/// Per-pixel validity from geometry: the central ray hits a front-facing surface.
pub fn compute_mask(accel: &Accel, camera: &CameraModel) -> Vec<bool> {
    (0..camera.pixel_count())
        .map(|i| {
            let ray = camera.center_ray(i % camera.width, i / camera.width);
            accel.intersect(&ray).is_some_and(|h| h.front_facing)
        })
        .collect()
}

/// `|I_o − I_r| · scale` per channel, black where the reference is masked out.
pub fn error_map(reference: &ReferenceImage, render: &Image, scale: f64) -> Result<Image> {
    if !reference.image.same_size(render) {
        return Err(Error::DimensionMismatch(format!(
            "reference {}x{} vs render {}x{}",
            reference.width(),
            reference.height(),
            render.width(),
            render.height()
        )));
    }
    let pixels = reference
        .image
        .pixels()
        .iter()
        .zip(render.pixels())
        .zip(&reference.mask)
        .map(|((o, r), &valid)| {
            if valid {
                [0, 1, 2].map(|c| (o[c] - r[c]).abs() * scale)
            } else {
                [0.0; 3]
            }
        })
        .collect();
    Image::from_pixels(render.width(), render.height(), pixels)
}

//! Pinhole camera with world-from-camera pose.
//!
//! Camera axes follow the computer-vision convention: +x right, +y down, +z forward.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::scene::Ray;
use crate::{Error, Result, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraDoc", into = "CameraDoc")]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// World-from-camera rotation.
    pub rotation: Matrix3<f64>,
    /// Camera center in world coordinates.
    pub translation: Vec3,
}

impl CameraModel {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        rotation: Matrix3<f64>,
        translation: Vec3,
    ) -> Result<Self> {
        let cam = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            rotation,
            translation,
        };
        cam.validate()?;
        Ok(cam)
    }

    /// Camera at `eye` looking at `target` with a vertical field of view in radians,
    /// principal point at the image center.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        up: Vec3,
        fov_y: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let forward = (target - eye).normalize();
        let right = forward.cross(&up);
        if right.norm() < 1e-12 {
            return Err(Error::InvalidParameter(
                "look_at: up vector parallel to view direction".into(),
            ));
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rotation = Matrix3::from_columns(&[right, down, forward]);
        let f = 0.5 * height as f64 / (0.5 * fov_y).tan();
        Self::new(
            f,
            f,
            0.5 * width as f64,
            0.5 * height as f64,
            width,
            height,
            rotation,
            eye,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParameter(format!("camera: {m}")));
        if self.width == 0 || self.height == 0 {
            return fail(format!("zero-area image {}x{}", self.width, self.height));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return fail(format!("focal lengths must be positive ({}, {})", self.fx, self.fy));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64 && self.cy > 0.0 && self.cy < self.height as f64)
        {
            return fail(format!(
                "principal point ({}, {}) outside the image",
                self.cx, self.cy
            ));
        }
        let r = &self.rotation;
        let orth = (r.transpose() * r - Matrix3::identity()).abs().max();
        if !(orth <= 1e-9) || (r.determinant() - 1.0).abs() > 1e-9 {
            return fail("rotation is not a proper orthonormal matrix".into());
        }
        if !self.translation.iter().all(|v| v.is_finite()) {
            return fail("translation is not finite".into());
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Primary ray through continuous image coordinates (pixel `(x, y)` spans
    /// `[x, x+1) × [y, y+1)`).
    pub fn ray(&self, u: f64, v: f64) -> Ray {
        let d_cam = Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0);
        let dir = (self.rotation * d_cam).normalize();
        Ray::unbounded(self.translation, dir)
    }

    /// Ray through the center of pixel `(x, y)`.
    pub fn center_ray(&self, x: usize, y: usize) -> Ray {
        self.ray(x as f64 + 0.5, y as f64 + 0.5)
    }

    /// Projects a world point to continuous image coordinates. `None` if behind the camera.
    pub fn project(&self, p: &Vec3) -> Option<(f64, f64)> {
        let q = self.rotation.transpose() * (p - self.translation);
        if q.z <= 0.0 {
            return None;
        }
        Some((self.fx * q.x / q.z + self.cx, self.fy * q.y / q.z + self.cy))
    }
}

#[derive(Serialize, Deserialize)]
struct CameraDoc {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    /// Row-major world-from-camera rotation.
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
}

impl TryFrom<CameraDoc> for CameraModel {
    type Error = Error;

    fn try_from(d: CameraDoc) -> Result<Self> {
        let r = d.rotation;
        CameraModel::new(
            d.fx,
            d.fy,
            d.cx,
            d.cy,
            d.width,
            d.height,
            Matrix3::new(
                r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
            ),
            Vec3::from(d.translation),
        )
    }
}

impl From<CameraModel> for CameraDoc {
    fn from(c: CameraModel) -> Self {
        let r = c.rotation;
        CameraDoc {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            rotation: [
                [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
                [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
                [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
            ],
            translation: c.translation.into(),
        }
    }
}

//! Triangle-mesh geometry, BVH acceleration, nearest-hit and visibility queries.

mod bvh;
mod mesh;

pub use bvh::Accel;
pub use mesh::{intersect_triangle, TriangleMesh};

use crate::{Rgb, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    /// Unit direction.
    pub dir: Vec3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Self {
        debug_assert!((dir.norm() - 1.0).abs() < 1e-6, "ray direction not unit");
        debug_assert!(t_min >= 0.0 && t_min < t_max);
        Self {
            origin,
            dir,
            t_min,
            t_max,
        }
    }

    pub fn unbounded(origin: Vec3, dir: Vec3) -> Self {
        Self::new(origin, dir, 0.0, f64::INFINITY)
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + t * self.dir
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceHit {
    pub point: Vec3,
    /// Interpolated shading normal, unit length.
    pub normal: Vec3,
    /// Face normal flipped into the hemisphere of `normal`.
    pub geometric_normal: Vec3,
    pub albedo: Rgb,
    pub triangle: usize,
    pub t: f64,
    /// The ray arrived from the side the normals point to.
    pub front_facing: bool,
}

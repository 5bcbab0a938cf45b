//! Procedural scenes used by the test suites, the bundled fixtures and demos.

use crate::camera::CameraModel;
use crate::scene::TriangleMesh;
use crate::tracer::SphereLight;
use crate::{Result, Rgb, Vec3};

/// Square floor of side `size` centered at the origin in the `z = 0` plane, facing +z.
/// Triangle 0 is `(-,-) (+,-) (+,+)`, triangle 1 is `(-,-) (+,+) (-,+)`.
pub fn floor(size: f64, albedo: Rgb) -> TriangleMesh {
    let h = 0.5 * size;
    quad(
        [
            Vec3::new(-h, -h, 0.0),
            Vec3::new(h, -h, 0.0),
            Vec3::new(h, h, 0.0),
            Vec3::new(-h, h, 0.0),
        ],
        albedo,
    )
}

/// Planar quad with counter-clockwise corners; the normal follows the winding.
pub fn quad(corners: [Vec3; 4], albedo: Rgb) -> TriangleMesh {
    let n = (corners[1] - corners[0])
        .cross(&(corners[2] - corners[0]))
        .normalize();
    TriangleMesh::new(
        corners.to_vec(),
        Some(vec![n; 4]),
        vec![albedo; 4],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("quad is valid by construction")
}

/// Axis-aligned box between `lo` and `hi` with flat per-face normals.
/// `inward` flips the faces so the inside is the lit side.
pub fn cuboid(lo: Vec3, hi: Vec3, albedo: Rgb, inward: bool) -> TriangleMesh {
    let c = |x: bool, y: bool, z: bool| {
        Vec3::new(
            if x { hi.x } else { lo.x },
            if y { hi.y } else { lo.y },
            if z { hi.z } else { lo.z },
        )
    };
    // Counter-clockwise seen from outside.
    let faces = [
        [c(false, false, true), c(true, false, true), c(true, true, true), c(false, true, true)],
        [c(false, false, false), c(false, true, false), c(true, true, false), c(true, false, false)],
        [c(false, false, false), c(true, false, false), c(true, false, true), c(false, false, true)],
        [c(false, true, false), c(false, true, true), c(true, true, true), c(true, true, false)],
        [c(false, false, false), c(false, false, true), c(false, true, true), c(false, true, false)],
        [c(true, false, false), c(true, true, false), c(true, true, true), c(true, false, true)],
    ];
    let mut mesh: Option<TriangleMesh> = None;
    for mut f in faces {
        if inward {
            f.reverse();
        }
        let q = quad(f, albedo);
        match mesh.as_mut() {
            Some(m) => m.merge(&q),
            None => mesh = Some(q),
        }
    }
    mesh.expect("six faces")
}

/// Closed cube of side `size` centered at the origin, faces pointing inward.
pub fn closed_box(size: f64, albedo: Rgb) -> TriangleMesh {
    let h = 0.5 * size;
    cuboid(Vec3::repeat(-h), Vec3::repeat(h), albedo, true)
}

/// Floor with two colored blocks: the standard synthetic estimation scene.
pub fn box_scene() -> TriangleMesh {
    let mut mesh = floor(4.0, [0.6, 0.6, 0.6]);
    mesh.merge(&cuboid(
        Vec3::new(-1.0, -0.1, 0.0),
        Vec3::new(-0.2, 0.7, 0.8),
        [0.7, 0.3, 0.3],
        false,
    ));
    mesh.merge(&cuboid(
        Vec3::new(0.45, -0.65, 0.0),
        Vec3::new(0.95, -0.15, 1.2),
        [0.3, 0.5, 0.7],
        false,
    ));
    mesh
}

/// Camera viewing [`box_scene`] obliquely from the -y side.
pub fn box_scene_camera(width: usize, height: usize) -> Result<CameraModel> {
    CameraModel::look_at(
        Vec3::new(0.4, -4.2, 3.4),
        Vec3::new(0.0, 0.0, 0.3),
        Vec3::z(),
        50f64.to_radians(),
        width,
        height,
    )
}

/// Camera looking straight down at the origin from `height` above it.
pub fn top_down_camera(height_above: f64, fov_y: f64, width: usize, height: usize) -> Result<CameraModel> {
    CameraModel::look_at(
        Vec3::new(0.0, 0.0, height_above),
        Vec3::zeros(),
        Vec3::y(),
        fov_y,
        width,
        height,
    )
}

/// Unit vector with the given elevation above the xy-plane and azimuth from +x.
pub fn bearing(elevation: f64, azimuth: f64) -> Vec3 {
    Vec3::new(
        elevation.cos() * azimuth.cos(),
        elevation.cos() * azimuth.sin(),
        elevation.sin(),
    )
}

/// Distant spherical area light used as ground truth for [`box_scene`]:
/// 55° elevation, 40° azimuth, 30 m away, 3 m radius.
pub fn box_scene_light() -> SphereLight {
    let dir = bearing(55f64.to_radians(), 40f64.to_radians());
    SphereLight {
        center: 30.0 * dir,
        radius: 3.0,
        radiance: [30.0, 28.0, 25.0],
    }
}

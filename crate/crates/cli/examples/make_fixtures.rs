//! Regenerates the bundled scenes in `crates/cli/fixtures`.
//!
//! ```text
//! cargo run --release -p envest-cli --example make_fixtures
//! ```

use std::path::{Path, PathBuf};

use envest_core::camera::CameraModel;
use envest_core::env::discretize_sphere;
use envest_core::image::Image;
use envest_core::io::{save_image, save_mesh, SceneConfig, ViewConfig};
use envest_core::scene::{Accel, TriangleMesh};
use envest_core::synthetic;
use envest_core::tracer::{render, render_sphere_light, TraceConfig};

fn write_config(dir: &Path, name: &str, mesh: &str, image: &str, camera: CameraModel, trace: TraceConfig) {
    let cfg = SceneConfig {
        mesh: PathBuf::from(mesh),
        rings: 9,
        views: vec![ViewConfig {
            image: PathBuf::from(image),
            mask: None,
            camera,
        }],
        trace,
        objective: Default::default(),
    };
    std::fs::write(dir.join(name), cfg.to_json().unwrap() + "\n").unwrap();
}

fn save(dir: &Path, name: &str, mesh: &TriangleMesh) {
    save_mesh(&dir.join(name), mesh).unwrap();
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir).unwrap();

    // Box scene lit by a single environment light: exactly representable.
    let mesh = synthetic::box_scene();
    save(&dir, "box.ply", &mesh);
    let accel = Accel::build(mesh).unwrap();
    let camera = synthetic::box_scene_camera(160, 120).unwrap();
    let trace = TraceConfig::default();
    let mut env = discretize_sphere(9).unwrap();
    let active = env.nearest_direction(&synthetic::bearing(50f64.to_radians(), 40f64.to_radians()));
    let mut lambda = vec![[0.0; 3]; env.len()];
    lambda[active] = [4.0, 3.5, 3.0];
    env.set_radiance(lambda).unwrap();
    std::fs::write(dir.join("box_env.json"), env.to_json().unwrap() + "\n").unwrap();
    let reference = render(&accel, &env, &camera, &trace).unwrap().image;
    save_image(&dir.join("box_ref.pfm"), &reference).unwrap();
    write_config(&dir, "box.json", "box.ply", "box_ref.pfm", camera.clone(), TraceConfig::default());

    // Same scene under a spherical area light the map cannot represent exactly.
    let sphere_cfg = TraceConfig { samples_per_pixel: 256, rng_seed: 1234, ..TraceConfig::default() };
    let reference = render_sphere_light(&accel, &synthetic::box_scene_light(), &camera, &sphere_cfg)
        .unwrap()
        .image;
    save_image(&dir.join("box_sphere_ref.pfm"), &reference).unwrap();
    write_config(&dir, "box_sphere.json", "box.ply", "box_sphere_ref.pfm", camera, TraceConfig::default());

    // Large Lambertian plane (ρ = 0.5) under a uniform sky of radiance 1: every pixel is 0.5.
    save(&dir, "plane.ply", &synthetic::floor(40.0, [0.5; 3]));
    let camera = synthetic::top_down_camera(1.0, 0.6, 16, 12).unwrap();
    let analytic = Image::from_pixels(16, 12, vec![[0.5; 3]; 16 * 12]).unwrap();
    save_image(&dir.join("plane_ref.pfm"), &analytic).unwrap();
    let direct = TraceConfig { max_bounces: 1, ..TraceConfig::default() };
    write_config(&dir, "plane.json", "plane.ply", "plane_ref.pfm", camera, direct);
    let mut sky = discretize_sphere(9).unwrap();
    sky.fill([1.0; 3]).unwrap();
    std::fs::write(dir.join("uniform_env.json"), sky.to_json().unwrap() + "\n").unwrap();
    println!("fixtures written to {}", dir.display());
}

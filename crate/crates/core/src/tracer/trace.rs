use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cosine_sample_hemisphere, lambertian_brdf, orthonormal_basis, LightJacobian, TraceConfig};
use crate::camera::CameraModel;
use crate::env::{EnvironmentMap, LightSampleDistribution};
use crate::image::{Image, Rendered};
use crate::scene::{Accel, SurfaceHit};
use crate::{Error, Result, Rgb, Vec3};

/// Spherical emitter at finite distance, used to synthesize references whose lighting
/// the environment model cannot represent exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereLight {
    pub center: Vec3,
    pub radius: f64,
    pub radiance: Rgb,
}

/// Independent stream per pixel so results do not depend on scheduling.
fn pixel_rng(seed: u64, pixel: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pixel as u64);
    rng
}

fn primary_hit(accel: &Accel, camera: &CameraModel, u: f64, v: f64) -> Option<SurfaceHit> {
    accel.intersect(&camera.ray(u, v)).filter(|h| h.front_facing)
}

/// Walks `spp` camera paths through pixel `(x, y)` and calls `visit` at every path
/// vertex with the throughput accumulated before that vertex.
fn walk_pixel(
    accel: &Accel,
    camera: &CameraModel,
    cfg: &TraceConfig,
    x: usize,
    y: usize,
    rng: &mut ChaCha8Rng,
    mut visit: impl FnMut(&SurfaceHit, &Rgb, &mut ChaCha8Rng),
) {
    for _ in 0..cfg.samples_per_pixel {
        let (jx, jy): (f64, f64) = (rng.random(), rng.random());
        let Some(mut hit) = primary_hit(accel, camera, x as f64 + jx, y as f64 + jy) else {
            continue;
        };
        let mut throughput = [1.0; 3];
        for bounce in 0..cfg.max_bounces {
            visit(&hit, &throughput, rng);
            if bounce + 1 == cfg.max_bounces {
                break;
            }
            let (u1, u2): (f64, f64) = (rng.random(), rng.random());
            let (dir, pdf) = cosine_sample_hemisphere(&hit.normal, u1, u2);
            if pdf <= 0.0 || dir.dot(&hit.geometric_normal) <= 0.0 {
                break;
            }
            // f·cosθ/pdf collapses to the albedo for a Lambertian surface.
            for c in 0..3 {
                throughput[c] *= hit.albedo[c];
            }
            if throughput.iter().all(|&t| t == 0.0) {
                break;
            }
            match accel.intersect(&accel.spawn_ray(&hit, &dir, f64::INFINITY)) {
                Some(next) if next.front_facing => hit = next,
                _ => break,
            }
        }
    }
}

fn check_inputs(env_len: usize, camera: &CameraModel, cfg: &TraceConfig) -> Result<()> {
    cfg.validate()?;
    if camera.pixel_count() == 0 {
        return Err(Error::InvalidParameter("zero-area image".into()));
    }
    if env_len == 0 {
        return Err(Error::InvalidParameter("environment map has no lights".into()));
    }
    Ok(())
}

/// Traces the light Jacobian of one view.
///
/// At every path vertex `N` lights are drawn from `dist`; for a drawn light `j` a
/// direction ω is sampled uniformly in its tile (solid angle Ω_j), and
/// `V·T·f·cosθ·Ω_j / (q_j·M·N)` is added to entry `j`. Each light thus emits λ_j over
/// its own tile, and the tiles partition the sphere.
pub fn trace_jacobian(
    accel: &Accel,
    env: &EnvironmentMap,
    camera: &CameraModel,
    cfg: &TraceConfig,
    dist: &LightSampleDistribution,
) -> Result<LightJacobian> {
    check_inputs(env.len(), camera, cfg)?;
    if dist.len() != env.len() {
        return Err(Error::DimensionMismatch(format!(
            "distribution over {} lights for an environment with {}",
            dist.len(),
            env.len()
        )));
    }
    let lights = env.len();
    let width = camera.width;
    let norm = 1.0 / (cfg.samples_per_pixel * cfg.env_samples_per_vertex) as f64;
    let mut jac = LightJacobian::zeros(width, camera.height, lights, cfg.rng_seed);
    let (data, coverage) = jac.rows_mut();
    data.par_chunks_mut(3 * lights)
        .zip(coverage.par_iter_mut())
        .enumerate()
        .try_for_each(|(pixel, (row, covered))| {
            let (x, y) = (pixel % width, pixel / width);
            *covered = primary_hit(accel, camera, x as f64 + 0.5, y as f64 + 0.5).is_some();
            if !*covered {
                return Ok(());
            }
            let mut rng = pixel_rng(cfg.rng_seed, pixel);
            walk_pixel(accel, camera, cfg, x, y, &mut rng, |hit, throughput, rng| {
                let f = lambertian_brdf(&hit.albedo);
                for _ in 0..cfg.env_samples_per_vertex {
                    let (j, q) = dist.sample(rng.random());
                    let dir = env.sample_cell(j, rng.random(), rng.random());
                    let cos = hit.normal.dot(&dir);
                    if cos <= 0.0 || dir.dot(&hit.geometric_normal) <= 0.0 {
                        continue;
                    }
                    if accel.occluded_from(hit, &dir) {
                        continue;
                    }
                    let w = cos * env.cell_solid_angle(j) / q * norm;
                    for c in 0..3 {
                        row[3 * j + c] += throughput[c] * f[c] * w;
                    }
                }
            });
            match row.iter().find(|v| !v.is_finite()) {
                Some(v) => Err(Error::NonFinite(format!(
                    "Jacobian accumulation at pixel ({x}, {y}) produced {v}"
                ))),
                None => Ok(()),
            }
        })?;
    jac.validate()?;
    Ok(jac)
}

/// Forward render under the environment's current radiance: the Jacobian traced with
/// the λ-proportional distribution, contracted with λ.
pub fn render(
    accel: &Accel,
    env: &EnvironmentMap,
    camera: &CameraModel,
    cfg: &TraceConfig,
) -> Result<Rendered> {
    cfg.validate()?;
    let dist = LightSampleDistribution::from_env(env, cfg.floor_weight)?;
    trace_jacobian(accel, env, camera, cfg, &dist)?.apply(env.radiance_flat())
}

/// Forward render lit only by a spherical area light, with next-event estimation by
/// uniform cone sampling of the sphere.
pub fn render_sphere_light(
    accel: &Accel,
    light: &SphereLight,
    camera: &CameraModel,
    cfg: &TraceConfig,
) -> Result<Rendered> {
    check_inputs(1, camera, cfg)?;
    if !(light.radius > 0.0) || light.radiance.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter("sphere light needs positive radius and finite nonnegative radiance".into()));
    }
    let width = camera.width;
    let norm = 1.0 / (cfg.samples_per_pixel * cfg.env_samples_per_vertex) as f64;
    let results: Vec<(Rgb, bool)> = (0..camera.pixel_count())
        .into_par_iter()
        .map(|pixel| {
            let (x, y) = (pixel % width, pixel / width);
            if primary_hit(accel, camera, x as f64 + 0.5, y as f64 + 0.5).is_none() {
                return ([0.0; 3], false);
            }
            let mut rng = pixel_rng(cfg.rng_seed, pixel);
            let mut sum = [0.0; 3];
            walk_pixel(accel, camera, cfg, x, y, &mut rng, |hit, throughput, rng| {
                let f = lambertian_brdf(&hit.albedo);
                for _ in 0..cfg.env_samples_per_vertex {
                    let (u1, u2): (f64, f64) = (rng.random(), rng.random());
                    let Some((dir, dist, pdf)) = sample_sphere_cone(light, &hit.point, u1, u2) else {
                        continue;
                    };
                    let cos = hit.normal.dot(&dir);
                    if cos <= 0.0 || dir.dot(&hit.geometric_normal) <= 0.0 {
                        continue;
                    }
                    let shadow = accel.spawn_ray(hit, &dir, dist);
                    if accel.any_hit(&shadow) {
                        continue;
                    }
                    for c in 0..3 {
                        sum[c] += throughput[c] * f[c] * cos * light.radiance[c] / pdf * norm;
                    }
                }
            });
            (sum, true)
        })
        .collect();
    let (pixels, coverage): (Vec<Rgb>, Vec<bool>) = results.into_iter().unzip();
    if let Some(v) = pixels.iter().flatten().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("sphere-light render produced {v}")));
    }
    Ok(Rendered {
        image: Image::from_pixels(width, camera.height, pixels)?,
        coverage,
    })
}

/// Uniform direction inside the cone subtended by the sphere from `p`.
/// Returns the direction, distance to the sphere surface, and solid-angle pdf.
fn sample_sphere_cone(light: &SphereLight, p: &Vec3, u1: f64, u2: f64) -> Option<(Vec3, f64, f64)> {
    let to_center = light.center - p;
    let d2 = to_center.norm_squared();
    let r2 = light.radius * light.radius;
    if d2 <= r2 {
        return None;
    }
    let d = d2.sqrt();
    let axis = to_center / d;
    let sin2_max = r2 / d2;
    let cos_max = (1.0 - sin2_max).sqrt();
    // 1 − cos α_max without cancellation for small cones.
    let one_minus_cos_max = sin2_max / (1.0 + cos_max);
    let one_minus_cos = u1 * one_minus_cos_max;
    let cos_a = 1.0 - one_minus_cos;
    let sin_a = (one_minus_cos * (2.0 - one_minus_cos)).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    let (t, b) = orthonormal_basis(&axis);
    let dir = (sin_a * phi.cos() * t + sin_a * phi.sin() * b + cos_a * axis).normalize();
    // Near intersection with the sphere along dir.
    let proj = to_center.dot(&dir);
    let disc = (r2 - (d2 - proj * proj)).max(0.0);
    let dist = proj - disc.sqrt();
    let pdf = 1.0 / (2.0 * PI * one_minus_cos_max);
    Some((dir, dist, pdf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::discretize_sphere;
    use crate::synthetic;

    fn floor_setup() -> (Accel, CameraModel) {
        let accel = Accel::build(synthetic::floor(4.0, [0.5; 3])).unwrap();
        let cam = synthetic::top_down_camera(1.0, 0.5, 8, 6).unwrap();
        (accel, cam)
    }

    #[test]
    fn closed_box_has_zero_jacobian() {
        let accel = Accel::build(synthetic::closed_box(2.0, [0.8; 3])).unwrap();
        let cam = CameraModel::look_at(
            Vec3::new(0.1, -0.2, 0.0),
            Vec3::new(0.5, 1.0, -0.3),
            Vec3::z(),
            1.2,
            8,
            6,
        )
        .unwrap();
        let env = discretize_sphere(5).unwrap();
        let dist = LightSampleDistribution::uniform(env.len()).unwrap();
        let cfg = TraceConfig { samples_per_pixel: 8, ..Default::default() };
        let j = trace_jacobian(&accel, &env, &cam, &cfg, &dist).unwrap();
        assert!(j.coverage().iter().all(|&c| c));
        assert!(j.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn down_facing_light_never_lights_the_floor() {
        let (accel, cam) = floor_setup();
        let env = discretize_sphere(2).unwrap();
        let dist = LightSampleDistribution::uniform(2).unwrap();
        let cfg = TraceConfig { samples_per_pixel: 16, max_bounces: 1, ..Default::default() };
        let j = trace_jacobian(&accel, &env, &cam, &cfg, &dist).unwrap();
        assert!(j.column_is_zero(1));
        assert!(!j.column_is_zero(0));
    }

    #[test]
    fn render_is_jacobian_contraction() {
        let (accel, cam) = floor_setup();
        let mut env = discretize_sphere(5).unwrap();
        let lam: Vec<Rgb> = (0..env.len()).map(|j| [(j % 3) as f64, 0.5, 0.1 * j as f64]).collect();
        env.set_radiance(lam).unwrap();
        let cfg = TraceConfig { samples_per_pixel: 4, ..Default::default() };
        let a = render(&accel, &env, &cam, &cfg).unwrap();
        let dist = LightSampleDistribution::from_env(&env, cfg.floor_weight).unwrap();
        let b = trace_jacobian(&accel, &env, &cam, &cfg, &dist)
            .unwrap()
            .apply(env.radiance_flat())
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_inputs() {
        let (accel, cam) = floor_setup();
        let env = discretize_sphere(3).unwrap();
        let dist = LightSampleDistribution::uniform(5).unwrap();
        let cfg = TraceConfig::default();
        assert!(matches!(
            trace_jacobian(&accel, &env, &cam, &cfg, &dist),
            Err(Error::DimensionMismatch(_))
        ));
        let mut flat = cam.clone();
        flat.width = 0;
        let dist = LightSampleDistribution::uniform(env.len()).unwrap();
        assert!(trace_jacobian(&accel, &env, &flat, &cfg, &dist).is_err());
    }

    #[test]
    fn cone_samples_hit_the_sphere() {
        let light = SphereLight { center: Vec3::new(3.0, 1.0, 4.0), radius: 0.7, radiance: [1.0; 3] };
        let p = Vec3::new(0.1, 0.0, 0.0);
        for i in 0..16 {
            for k in 0..16 {
                let (dir, dist, pdf) = sample_sphere_cone(&light, &p, i as f64 / 16.0, k as f64 / 16.0).unwrap();
                let q = p + dist * dir;
                assert!(((q - light.center).norm() - light.radius).abs() < 1e-9);
                assert!(pdf > 0.0);
            }
        }
    }
}

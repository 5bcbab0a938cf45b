use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use envest_core::env::EnvironmentMap;
use envest_core::estimate::{estimate_lights, EstimationReport};
use envest_core::image::{Image, ReferenceImage, Rendered};
use envest_core::io::{error_map, load_image, load_mask, load_mesh, save_image, SceneConfig};
use envest_core::scene::Accel;
use envest_core::tracer;
use envest_core::{Error, Result};
use serde::Serialize;

use crate::manifest::{load_config, RunManifest};
use crate::{ErrmapArgs, EstimateArgs, RenderArgs};

/// Rows of the equirectangular environment preview.
const EQUIRECT_HEIGHT: usize = 64;

#[derive(Debug, Serialize)]
struct ViewStats {
    image: PathBuf,
    /// Pixels counted: unmasked in the reference and covered by geometry.
    valid_pixels: usize,
    rmse: f64,
    reference_mean: f64,
    /// `rmse / reference_mean`.
    relative_rmse: f64,
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    estimation: &'a EstimationReport,
    views: Vec<ViewStats>,
}

/// Reference restricted to the pixels the render covers.
fn covered_reference(reference: &ReferenceImage, render: &Rendered) -> Result<ReferenceImage> {
    let mask = reference.mask.iter().zip(&render.coverage).map(|(a, b)| *a && *b).collect();
    ReferenceImage::new(reference.image.clone(), mask)
}

fn view_stats(image: &Path, reference: &ReferenceImage, render: &Image) -> ViewStats {
    let (mut sq, mut sum, mut n) = (0.0, 0.0, 0usize);
    for ((o, r), _) in reference
        .image
        .pixels()
        .iter()
        .zip(render.pixels())
        .zip(&reference.mask)
        .filter(|(_, m)| **m)
    {
        n += 1;
        for c in 0..3 {
            sq += (o[c] - r[c]).powi(2);
            sum += o[c];
        }
    }
    let count = (3 * n).max(1) as f64;
    let rmse = (sq / count).sqrt();
    let reference_mean = sum / count;
    ViewStats {
        image: image.to_path_buf(),
        valid_pixels: n,
        rmse,
        reference_mean,
        relative_rmse: if reference_mean > 0.0 { rmse / reference_mean } else { f64::NAN },
    }
}

fn create_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::Config(format!("{}: {e}", out.display())))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn load_accel(cfg: &SceneConfig) -> Result<Accel> {
    Accel::build(load_mesh(&cfg.mesh)?)
}

/// Writes `render_<i>.pfm` and `render_<i>.png`; returns their paths.
fn write_render(out: &Path, i: usize, image: &Image) -> Result<Vec<PathBuf>> {
    let paths = vec![out.join(format!("render_{i}.pfm")), out.join(format!("render_{i}.png"))];
    for p in &paths {
        save_image(p, image)?;
    }
    Ok(paths)
}

pub fn estimate(args: &EstimateArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let (mut cfg, _) = load_config(&args.config)?;
    args.apply(&mut cfg);
    cfg.validate()?;
    if !(args.error_scale >= 0.0 && args.error_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("error scale must be finite and nonnegative, got {}", args.error_scale)));
    }
    let accel = load_accel(&cfg)?;
    let views = cfg.load_views()?;
    log::info!(
        "estimating {} rings from {} view(s), {} spp, {} bounce(s)",
        cfg.rings,
        views.len(),
        cfg.trace.samples_per_pixel,
        cfg.trace.max_bounces
    );
    let estimate = estimate_lights(&accel, &views, cfg.rings, &cfg.objective, &cfg.trace)?;
    let estimate_seconds = started.elapsed().as_secs_f64();

    let render_started = Instant::now();
    let renders = views
        .iter()
        .map(|v| tracer::render(&accel, &estimate.env, &v.camera, &cfg.trace))
        .collect::<Result<Vec<_>>>()?;
    let render_seconds = render_started.elapsed().as_secs_f64();

    let out = &args.out;
    create_dir(out)?;
    let mut outputs = vec![out.join("env_map.json"), out.join("env_map.pfm")];
    write_text(&outputs[0], &estimate.env.to_json()?)?;
    save_image(&outputs[1], &estimate.env.to_equirect(EQUIRECT_HEIGHT))?;
    let mut stats = Vec::new();
    for (i, ((view, render), vc)) in views.iter().zip(&renders).zip(&cfg.views).enumerate() {
        outputs.extend(write_render(out, i, &render.image)?);
        let reference = covered_reference(&view.reference, render)?;
        let err = error_map(&reference, &render.image, args.error_scale)?;
        for name in [format!("error_{i}.pfm"), format!("error_{i}.png")] {
            let p = out.join(name);
            save_image(&p, &err)?;
            outputs.push(p);
        }
        let s = view_stats(&vc.image, &reference, &render.image);
        log::info!("view {i}: RMSE {:.4e} ({:.2}% of mean)", s.rmse, 100.0 * s.relative_rmse);
        stats.push(s);
    }
    let report = Report {
        estimation: &estimate.report,
        views: stats,
    };
    let report_path = out.join("report.json");
    write_text(&report_path, &serde_json::to_string_pretty(&report)?)?;
    outputs.push(report_path);

    let converged = estimate.report.converged;
    let mut manifest = RunManifest::new("estimate", cfg);
    manifest.timings.estimate_seconds = Some(estimate_seconds);
    manifest.timings.render_seconds = render_seconds;
    manifest.timings.total_seconds = started.elapsed().as_secs_f64();
    manifest.outputs = outputs;
    manifest.write(&out.join("manifest.json"))?;
    if converged {
        log::info!("converged after {} round(s)", estimate.report.rounds.len());
        Ok(ExitCode::SUCCESS)
    } else {
        log::warn!("stopped at the round cap of {} without converging", estimate.report.rounds.len());
        Ok(ExitCode::from(2))
    }
}

pub fn render(args: &RenderArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let (mut cfg, manifest) = load_config(&args.config)?;
    args.trace.apply(&mut cfg);
    let env_path = args
        .env
        .clone()
        .or_else(|| manifest.as_ref().and_then(|m| m.env_map.clone()))
        .ok_or_else(|| Error::Config("--env is required unless the config is a render manifest".into()))?;
    let spp = args
        .spp
        .or_else(|| manifest.as_ref().and_then(|m| m.render_spp))
        .unwrap_or(1024);
    cfg.trace.samples_per_pixel = spp;
    cfg.trace.validate()?;
    if cfg.views.is_empty() {
        return Err(Error::Config("at least one view is required".into()));
    }
    let text = std::fs::read_to_string(&env_path)
        .map_err(|e| Error::Config(format!("{}: {e}", env_path.display())))?;
    let env = EnvironmentMap::from_json(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", env_path.display())))?;
    if env.ring_count() != cfg.rings {
        return Err(Error::DimensionMismatch(format!(
            "{} holds {} rings ({} lights) but the config asks for {} rings",
            env_path.display(),
            env.ring_count(),
            env.len(),
            cfg.rings
        )));
    }
    let accel = load_accel(&cfg)?;
    let images = cfg
        .views
        .iter()
        .map(|v| {
            v.camera.validate()?;
            Ok(tracer::render(&accel, &env, &v.camera, &cfg.trace)?.image)
        })
        .collect::<Result<Vec<_>>>()?;

    log::info!("rendered {} view(s) at {spp} spp in {:.1?}", images.len(), started.elapsed());
    create_dir(&args.out)?;
    let mut outputs = Vec::new();
    for (i, img) in images.iter().enumerate() {
        outputs.extend(write_render(&args.out, i, img)?);
    }
    let mut manifest = RunManifest::new("render", cfg);
    manifest.env_map = Some(std::path::absolute(&env_path).unwrap_or(env_path));
    manifest.render_spp = Some(spp);
    manifest.timings.render_seconds = started.elapsed().as_secs_f64();
    manifest.timings.total_seconds = manifest.timings.render_seconds;
    manifest.outputs = outputs;
    manifest.write(&args.out.join("manifest.json"))?;
    Ok(ExitCode::SUCCESS)
}

pub fn errmap(args: &ErrmapArgs) -> Result<ExitCode> {
    if !(args.scale >= 0.0 && args.scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be finite and nonnegative, got {}", args.scale)));
    }
    let reference = load_image(&args.reference)?;
    let render = load_image(&args.render)?;
    let reference = match &args.mask {
        Some(m) => ReferenceImage::new(reference, load_mask(m)?)?,
        None => ReferenceImage::unmasked(reference)?,
    };
    let err = error_map(&reference, &render, args.scale)?;
    save_image(&args.out, &err)?;
    Ok(ExitCode::SUCCESS)
}

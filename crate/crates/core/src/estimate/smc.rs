use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{gradient_descent, DescentStatus, LinearProblem, ObjectiveConfig};
use crate::camera::CameraModel;
use crate::env::{discretize_sphere, EnvironmentMap, LightSampleDistribution};
use crate::image::{Image, ReferenceImage, Rendered};
use crate::io::compute_mask;
use crate::scene::Accel;
use crate::tracer::{trace_jacobian, LightJacobian, TraceConfig};
use crate::{Error, Result};

/// One reference photograph and the camera that took it.
#[derive(Debug, Clone)]
pub struct View {
    pub camera: CameraModel,
    pub reference: ReferenceImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    /// Photometric error after this round's descent.
    #[serde(rename = "E_p")]
    pub e_p: f64,
    #[serde(rename = "Phi")]
    pub phi: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// Objective at the start of the descent, on the freshly traced Jacobians.
    #[serde(rename = "E_start")]
    pub e_start: f64,
    pub gd_iters: usize,
    pub gd_status: DescentStatus,
    /// `E` after every accepted step of this round's descent.
    pub gd_energies: Vec<f64>,
    pub lambda_delta: f64,
    pub trace_seconds: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaStats {
    /// Sum of λ over lights and channels.
    pub total: f64,
    pub max: f64,
    /// Lights with any nonzero channel.
    pub active_lights: usize,
    pub peak_light: usize,
    pub peak_direction: [f64; 3],
}

impl LambdaStats {
    pub fn of(env: &EnvironmentMap) -> Self {
        let sums: Vec<f64> = env.radiance_values().iter().map(|l| l.iter().sum()).collect();
        let peak_light = sums
            .iter()
            .enumerate()
            .fold(0, |best, (j, s)| if *s > sums[best] { j } else { best });
        let d = env.directions()[peak_light];
        Self {
            total: sums.iter().sum(),
            max: env.radiance_flat().iter().fold(0.0, |m, v| m.max(*v)),
            active_lights: sums.iter().filter(|s| **s > 0.0).count(),
            peak_light,
            peak_direction: [d.x, d.y, d.z],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub rounds: Vec<RoundReport>,
    pub final_lambda_stats: LambdaStats,
    pub converged: bool,
    /// References were divided by this (their 99th percentile) before fitting.
    pub intensity_scale: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cauchy_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Estimate {
    /// Estimated environment in the references' intensity units.
    pub env: EnvironmentMap,
    pub report: EstimationReport,
    /// Jacobians of the last round.
    pub jacobians: Vec<LightJacobian>,
    /// Last-round Jacobians applied to the final λ, in reference units.
    pub renders: Vec<Rendered>,
}

/// α such that the activation slope at zero, `αβ`, is `cfg.alpha_fraction` of the
/// largest photometric pull `−∂E_p/∂λ` at the starting point. Lights the data pulls on
/// less than that are switched off in the first steps; a larger α would switch off all.
fn calibrate_alpha(
    jacobians: &[LightJacobian],
    refs: &[ReferenceImage],
    cfg: &ObjectiveConfig,
    lambda: &[f64],
) -> Result<f64> {
    if cfg.beta == 0.0 {
        return Ok(0.0);
    }
    let problem = LinearProblem {
        jacobians,
        refs,
        cauchy_scale: cfg.cauchy_scale,
        alpha: 0.0,
        beta: cfg.beta,
    };
    let (_, grad) = problem.objective_and_gradient(lambda)?;
    let pull = grad.iter().fold(0.0f64, |m, g| m.max(-g));
    Ok(cfg.alpha_fraction * pull / cfg.beta)
}

/// Value below which a fraction `q` of the samples lie (nearest rank).
fn percentile(mut values: Vec<f64>, q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let rank = ((q * values.len() as f64).ceil() as usize).clamp(1, values.len());
    values[rank - 1]
}

/// Sequential Monte Carlo light estimation.
///
/// Starting from a uniform near-zero λ, each round builds the light-selection
/// distribution from the current λ, re-traces every view's Jacobian and runs projected
/// gradient descent on the fixed-Jacobian objective. The loop ends when the relative
/// λ change between rounds drops below `cfg.smc_tol` or after `cfg.max_smc_iters` rounds.
pub fn estimate_lights(
    accel: &Accel,
    views: &[View],
    ring_count: usize,
    cfg: &ObjectiveConfig,
    trace: &TraceConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    trace.validate()?;
    if views.is_empty() {
        return Err(Error::InvalidParameter("at least one reference view is required".into()));
    }
    let mut env = discretize_sphere(ring_count)?;
    let lights = env.len();

    // Pixels usable for fitting: reference mask and front-facing central-ray coverage.
    let mut valid_values = Vec::new();
    let mut refs = Vec::with_capacity(views.len());
    for (v, view) in views.iter().enumerate() {
        let r = &view.reference;
        if (r.width(), r.height()) != (view.camera.width, view.camera.height) {
            return Err(Error::DimensionMismatch(format!(
                "view {v}: reference {}x{} but camera {}x{}",
                r.width(),
                r.height(),
                view.camera.width,
                view.camera.height
            )));
        }
        let coverage = compute_mask(accel, &view.camera);
        let mask: Vec<bool> = r.mask.iter().zip(&coverage).map(|(a, b)| *a && *b).collect();
        for (p, _) in r.image.pixels().iter().zip(&mask).filter(|(_, m)| **m) {
            valid_values.extend_from_slice(p);
        }
        refs.push(mask);
    }
    let valid_pixels = valid_values.len() / 3;
    if valid_pixels == 0 {
        return Err(Error::Degenerate("no reference pixel is both unmasked and covered".into()));
    }
    let scale = percentile(valid_values, 0.99);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Degenerate(format!(
            "reference 99th percentile is {scale}; nothing to fit"
        )));
    }
    let refs: Vec<ReferenceImage> = views
        .iter()
        .zip(refs)
        .map(|(view, mask)| {
            let pixels = view.reference.image.pixels().iter().map(|p| p.map(|v| v / scale)).collect();
            let img = Image::from_pixels(view.reference.width(), view.reference.height(), pixels)?;
            ReferenceImage::new(img, mask)
        })
        .collect::<Result<_>>()?;
    let beta = cfg.beta;
    let mut alpha = cfg.alpha;

    let mut lambda = vec![cfg.lambda_init; 3 * lights];
    let mut rounds = Vec::new();
    let mut converged = false;
    let mut jacobians = Vec::new();
    for round in 0..cfg.max_smc_iters {
        let started = Instant::now();
        env.set_radiance_flat(&lambda)?;
        let dist = LightSampleDistribution::from_env(&env, trace.floor_weight)?;
        jacobians = views
            .iter()
            .map(|view| trace_jacobian(accel, &env, &view.camera, trace, &dist))
            .collect::<Result<_>>()?;
        let trace_seconds = started.elapsed().as_secs_f64();
        let alpha = match alpha {
            Some(a) => a,
            None => *alpha.insert(calibrate_alpha(&jacobians, &refs, cfg, &lambda)?),
        };
        let problem = LinearProblem {
            jacobians: &jacobians,
            refs: &refs,
            cauchy_scale: cfg.cauchy_scale,
            alpha,
            beta,
        };
        let previous = lambda.clone();
        let outcome = gradient_descent(&problem, &mut lambda, cfg).inspect_err(|e| {
            if matches!(e, Error::NonFinite(_)) {
                log::error!(
                    "round {round}: non-finite objective; λ max {}, λ sum {}",
                    previous.iter().fold(0.0f64, |m, v| m.max(*v)),
                    previous.iter().sum::<f64>()
                );
            }
        })?;
        let peak = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let change = lambda
            .iter()
            .zip(&previous)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let lambda_delta = if peak > 0.0 { change / peak } else { change };
        log::info!(
            "round {round}: E {:.6e} -> {:.6e} in {} steps ({:?}), Δλ {lambda_delta:.3e}",
            outcome.start.total(),
            outcome.end.total(),
            outcome.iterations,
            outcome.status
        );
        rounds.push(RoundReport {
            e_p: outcome.end.photometric,
            phi: outcome.end.activation,
            e: outcome.end.total(),
            e_start: outcome.start.total(),
            gd_iters: outcome.iterations,
            gd_status: outcome.status,
            gd_energies: outcome.energies,
            lambda_delta,
            trace_seconds,
            seconds: started.elapsed().as_secs_f64(),
        });
        if lambda_delta <= cfg.smc_tol {
            converged = true;
            break;
        }
    }

    let renders = jacobians
        .iter()
        .map(|j| {
            let mut r = j.apply(&lambda)?;
            for p in r.image.pixels_mut() {
                *p = p.map(|v| v * scale);
            }
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let absolute: Vec<f64> = lambda.iter().map(|v| v * scale).collect();
    env.set_radiance_flat(&absolute)?;
    let report = EstimationReport {
        rounds,
        final_lambda_stats: LambdaStats::of(&env),
        converged,
        intensity_scale: scale,
        alpha: alpha.unwrap_or(0.0),
        beta,
        cauchy_scale: cfg.cauchy_scale,
    };
    Ok(Estimate {
        env,
        report,
        jacobians,
        renders,
    })
}

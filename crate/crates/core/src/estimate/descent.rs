use serde::{Deserialize, Serialize};

use super::{Energy, LinearProblem, ObjectiveConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStatus {
    /// Projected-gradient norm fell below tolerance.
    Converged,
    MaxIterations,
    /// Backtracking shrank the step below `1e-12·step0` without sufficient decrease.
    StepUnderflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub status: DescentStatus,
    pub iterations: usize,
    pub start: Energy,
    pub end: Energy,
    /// `E` at the start and after every accepted step.
    pub energies: Vec<f64>,
    /// Accepted step sizes.
    pub steps: Vec<f64>,
}

/// Gradient with components zeroed where the bound `λ = 0` is active and the
/// gradient points out of the feasible set.
pub fn projected_gradient(lambda: &[f64], grad: &[f64]) -> Vec<f64> {
    lambda
        .iter()
        .zip(grad)
        .map(|(&l, &g)| if l <= 0.0 && g >= 0.0 { 0.0 } else { g })
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn project_step(lambda: &[f64], grad: &[f64], step: f64, out: &mut [f64]) {
    for ((o, l), g) in out.iter_mut().zip(lambda).zip(grad) {
        let v = l - step * g;
        *o = if v > 0.0 { v } else { 0.0 };
    }
}

/// Projected gradient descent onto `λ ≥ 0` with Armijo backtracking.
///
/// The first trial step is `step0`; after an accepted step `s` the next search starts
/// at `s/τ`. Iterates satisfy `E(λ⁺) ≤ E(λ) − c₁·s·‖P∇E‖²`.
pub fn gradient_descent(
    problem: &LinearProblem<'_>,
    lambda: &mut [f64],
    cfg: &ObjectiveConfig,
) -> Result<DescentOutcome> {
    cfg.validate()?;
    if lambda.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidParameter("descent must start from a feasible λ".into()));
    }
    let (mut energy, mut grad) = problem.objective_and_gradient(lambda)?;
    check_finite(&energy)?;
    let start = energy;
    let mut pg = projected_gradient(lambda, &grad);
    let tol = cfg.gradient_tol * max_abs(&pg);
    let mut energies = vec![energy.total()];
    let mut steps = Vec::new();
    let mut step = cfg.step0;
    let mut trial = vec![0.0; lambda.len()];
    let mut status = DescentStatus::MaxIterations;
    let mut iterations = 0;
    while iterations < cfg.max_gd_iters {
        if max_abs(&pg) <= tol {
            status = DescentStatus::Converged;
            break;
        }
        let pg_sq: f64 = pg.iter().map(|g| g * g).sum();
        let e0 = energy.total();
        let accepted = loop {
            project_step(lambda, &grad, step, &mut trial);
            let e = problem.energy(&trial)?;
            if e.total().is_finite() && e.total() <= e0 - cfg.armijo * step * pg_sq {
                break Some(e);
            }
            step *= cfg.backtrack;
            if step < 1e-12 * cfg.step0 {
                break None;
            }
        };
        let Some(new_energy) = accepted else {
            log::warn!("line search underflow after {iterations} iterations at E = {e0}");
            status = DescentStatus::StepUnderflow;
            break;
        };
        assert!(new_energy.total() <= e0, "accepted step increased the objective");
        lambda.copy_from_slice(&trial);
        debug_assert!(lambda.iter().all(|&v| v >= 0.0));
        iterations += 1;
        steps.push(step);
        (energy, grad) = problem.objective_and_gradient(lambda)?;
        check_finite(&energy)?;
        energies.push(energy.total());
        pg = projected_gradient(lambda, &grad);
        step /= cfg.backtrack;
    }
    if status == DescentStatus::MaxIterations && max_abs(&pg) <= tol {
        status = DescentStatus::Converged;
    }
    Ok(DescentOutcome {
        status,
        iterations,
        start,
        end: energy,
        energies,
        steps,
    })
}

fn check_finite(e: &Energy) -> Result<()> {
    if e.total().is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!(
            "objective E_p = {}, Φ = {}",
            e.photometric, e.activation
        )))
    }
}

//! The inverse problem: robust photometric fit of environment radiance.

mod descent;
mod objective;
mod smc;

pub use descent::{gradient_descent, projected_gradient, DescentOutcome, DescentStatus};
pub use objective::{
    activation_gradient, activation_penalty, cauchy_influence, cauchy_loss, photometric_error,
    Energy, LinearProblem, PhotometricError,
};
pub use smc::{estimate_lights, Estimate, EstimationReport, LambdaStats, RoundReport, View};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveConfig {
    /// Cauchy scale `c`, in units of the normalized reference (99th percentile = 1).
    pub cauchy_scale: f64,
    /// Activation weight α. `None` calibrates it on the first traced Jacobians so that
    /// `αβ` is `alpha_fraction` times the steepest initial photometric descent.
    pub alpha: Option<f64>,
    pub alpha_fraction: f64,
    /// Activation weight β.
    pub beta: f64,
    /// Initial radiance of every light, normalized units.
    pub lambda_init: f64,
    /// First trial step of the line search.
    pub step0: f64,
    /// Backtracking factor τ.
    pub backtrack: f64,
    /// Armijo sufficient-decrease constant c₁.
    pub armijo: f64,
    /// Stop when ‖P∇E‖∞ falls below this fraction of its value at the start of a phase.
    pub gradient_tol: f64,
    /// Stop the outer loop when max|Δλ| / max|λ| drops below this.
    pub smc_tol: f64,
    pub max_gd_iters: usize,
    pub max_smc_iters: usize,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            cauchy_scale: 0.05,
            alpha: None,
            alpha_fraction: 0.5,
            beta: 10.0,
            lambda_init: 1e-3,
            step0: 1.0,
            backtrack: 0.5,
            armijo: 1e-4,
            gradient_tol: 1e-6,
            smc_tol: 1e-3,
            max_gd_iters: 1000,
            max_smc_iters: 10,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("objective: {m}")));
        if !(self.cauchy_scale > 0.0) {
            return bad("cauchy_scale must be positive");
        }
        if let Some(a) = self.alpha {
            if !(a >= 0.0) {
                return bad("alpha must be nonnegative");
            }
        }
        if !(self.alpha_fraction > 0.0 && self.alpha_fraction < 1.0) {
            return bad("alpha_fraction must lie in (0, 1)");
        }
        if !(self.beta >= 0.0) {
            return bad("beta must be nonnegative");
        }
        if !(self.lambda_init > 0.0) {
            return bad("lambda_init must be positive");
        }
        if !(self.step0 > 0.0) {
            return bad("step0 must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack factor must lie in (0, 1)");
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad("armijo constant must lie in (0, 1)");
        }
        if !(self.gradient_tol > 0.0) || !(self.smc_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_gd_iters == 0 || self.max_smc_iters == 0 {
            return bad("iteration limits must be at least 1");
        }
        Ok(())
    }
}

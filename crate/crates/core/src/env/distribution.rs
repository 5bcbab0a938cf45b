use super::EnvironmentMap;
use crate::{Error, Result};

/// Discrete light-selection distribution with an inversion table.
#[derive(Debug, Clone, PartialEq)]
pub struct LightSampleDistribution {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl LightSampleDistribution {
    /// Equal probability for `n` lights.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; n])
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("distribution over zero lights".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidParameter(
                "distribution weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidParameter("distribution weights sum to zero".into()));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        Ok(Self::from_probs(probs))
    }

    fn from_probs(probs: Vec<f64>) -> Self {
        let mut acc = 0.0;
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        // Pin the tail so u close to 1 always lands on the last nonzero light.
        let last_nonzero = probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1);
        for c in &mut cdf[last_nonzero..] {
            *c = 1.0;
        }
        Self { probs, cdf }
    }

    /// Mixture of λ-proportional selection and a uniform floor:
    /// `q_j = (1 − w)·Σ_c λ_{j,c} / Σ λ + w / N`. Exactly uniform when all λ are zero.
    pub fn from_env(env: &EnvironmentMap, floor_weight: f64) -> Result<Self> {
        if !(floor_weight > 0.0 && floor_weight <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "floor weight must lie in (0, 1], got {floor_weight}"
            )));
        }
        let n = env.len();
        let per_light: Vec<f64> = env.radiance_values().iter().map(|l| l.iter().sum()).collect();
        let total: f64 = per_light.iter().sum();
        if total <= 0.0 {
            return Ok(Self::from_probs(vec![1.0 / n as f64; n]));
        }
        let floor = floor_weight / n as f64;
        let probs = per_light
            .iter()
            .map(|s| (1.0 - floor_weight) * (s / total) + floor)
            .collect();
        Ok(Self::from_probs(probs))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn probability(&self, j: usize) -> f64 {
        self.probs[j]
    }

    /// Inversion sample for `u` in `[0, 1)`: returns `(j, q_j)`.
    pub fn sample(&self, u: f64) -> (usize, f64) {
        let j = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        (j, self.probs[j])
    }
}

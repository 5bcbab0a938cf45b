use crate::image::{ReferenceImage, Rendered};
use crate::tracer::LightJacobian;
use crate::{Error, Result, Rgb};

/// Cauchy robust loss `(c²/2)·log(1 + (r/c)²)`.
pub fn cauchy_loss(r: f64, c: f64) -> f64 {
    let x = r / c;
    0.5 * c * c * (x * x).ln_1p()
}

/// Derivative of [`cauchy_loss`]: `r / (1 + (r/c)²)`.
pub fn cauchy_influence(r: f64, c: f64) -> f64 {
    let x = r / c;
    r / (1.0 + x * x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotometricError {
    pub value: f64,
    /// `I_o − I_r` per view and pixel; zero where the pixel is not counted.
    pub residuals: Vec<Vec<Rgb>>,
    pub valid_pixels: usize,
}

/// Robust photometric error over all views. A pixel counts when its reference mask
/// and its render coverage are both set.
pub fn photometric_error(
    refs: &[ReferenceImage],
    renders: &[Rendered],
    cauchy_scale: f64,
) -> Result<PhotometricError> {
    if refs.len() != renders.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} references for {} renders",
            refs.len(),
            renders.len()
        )));
    }
    let mut value = 0.0;
    let mut valid_pixels = 0;
    let mut residuals = Vec::with_capacity(refs.len());
    for (v, (reference, render)) in refs.iter().zip(renders).enumerate() {
        if !reference.image.same_size(&render.image) || render.coverage.len() != render.image.len() {
            return Err(Error::DimensionMismatch(format!(
                "view {v}: reference {}x{} vs render {}x{}",
                reference.width(),
                reference.height(),
                render.image.width(),
                render.image.height()
            )));
        }
        let mut res = vec![[0.0; 3]; reference.image.len()];
        for (i, r) in res.iter_mut().enumerate() {
            if !(reference.mask[i] && render.coverage[i]) {
                continue;
            }
            valid_pixels += 1;
            let (o, p) = (reference.image.pixels()[i], render.image.pixels()[i]);
            for c in 0..3 {
                r[c] = o[c] - p[c];
                value += cauchy_loss(r[c], cauchy_scale);
            }
        }
        residuals.push(res);
    }
    if valid_pixels == 0 {
        return Err(Error::Degenerate("no valid pixels in any view".into()));
    }
    Ok(PhotometricError {
        value,
        residuals,
        valid_pixels,
    })
}

/// `Φ = Σ_i α·log(1 + β·Σ_c λ_{i,c})`.
pub fn activation_penalty(lambda: &[Rgb], alpha: f64, beta: f64) -> f64 {
    lambda
        .iter()
        .map(|l| alpha * (beta * (l[0] + l[1] + l[2])).ln_1p())
        .sum()
}

/// `∂Φ/∂λ_{i,c} = αβ / (1 + β·Σ_c λ_{i,c})`, flattened as `[i·3 + c]`.
pub fn activation_gradient(lambda: &[Rgb], alpha: f64, beta: f64) -> Vec<f64> {
    lambda
        .iter()
        .flat_map(|l| {
            let g = alpha * beta / (1.0 + beta * (l[0] + l[1] + l[2]));
            [g; 3]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub photometric: f64,
    pub activation: f64,
}

impl Energy {
    pub fn total(&self) -> f64 {
        self.photometric + self.activation
    }
}

/// The objective with all Jacobians held fixed: `E(λ) = E_p(J·λ) + Φ(λ)`.
#[derive(Debug, Clone, Copy)]
pub struct LinearProblem<'a> {
    pub jacobians: &'a [LightJacobian],
    pub refs: &'a [ReferenceImage],
    pub cauchy_scale: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LinearProblem<'_> {
    pub fn light_count(&self) -> usize {
        self.jacobians.first().map_or(0, |j| j.light_count())
    }

    pub fn renders(&self, lambda: &[f64]) -> Result<Vec<Rendered>> {
        self.jacobians.iter().map(|j| j.apply(lambda)).collect()
    }

    pub fn energy(&self, lambda: &[f64]) -> Result<Energy> {
        let renders = self.renders(lambda)?;
        let ep = photometric_error(self.refs, &renders, self.cauchy_scale)?;
        Ok(Energy {
            photometric: ep.value,
            activation: activation_penalty(as_rgb(lambda), self.alpha, self.beta),
        })
    }

    /// `E` and `∇E`, where `∂E/∂λ_{j,c} = −Σ ψ(r_{i,c})·J_{i,j,c} + ∂Φ_j/∂λ_{j,c}`.
    pub fn objective_and_gradient(&self, lambda: &[f64]) -> Result<(Energy, Vec<f64>)> {
        let renders = self.renders(lambda)?;
        let ep = photometric_error(self.refs, &renders, self.cauchy_scale)?;
        let mut grad = vec![0.0; lambda.len()];
        for (jac, res) in self.jacobians.iter().zip(&ep.residuals) {
            let weights: Vec<Rgb> = res
                .iter()
                .map(|r| r.map(|v| -cauchy_influence(v, self.cauchy_scale)))
                .collect();
            jac.accumulate_transpose(&weights, &mut grad)?;
        }
        let lam = as_rgb(lambda);
        for (g, a) in grad.iter_mut().zip(activation_gradient(lam, self.alpha, self.beta)) {
            *g += a;
        }
        let energy = Energy {
            photometric: ep.value,
            activation: activation_penalty(lam, self.alpha, self.beta),
        };
        Ok((energy, grad))
    }
}

pub(crate) fn as_rgb(flat: &[f64]) -> &[Rgb] {
    let (chunks, rest) = flat.as_chunks::<3>();
    debug_assert!(rest.is_empty());
    chunks
}

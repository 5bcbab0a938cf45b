use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::image::{Image, Rendered};
use crate::{Error, Result, Rgb};

/// Rows per block when reducing over pixels; fixed so sums do not depend on threads.
const REDUCE_BLOCK: usize = 256;

/// Dense `∂I_{i,c}/∂λ_{j,c}` for one view, stored pixel-major as `[(i·N + j)·3 + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LightJacobian {
    width: usize,
    height: usize,
    lights: usize,
    seed: u64,
    data: Vec<f64>,
    coverage: Vec<bool>,
}

/// JSON sidecar written next to a raw Jacobian dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianSidecar {
    pub m_pix: usize,
    pub n_lights: usize,
    pub channels: usize,
    pub seed: u64,
}

impl LightJacobian {
    pub fn zeros(width: usize, height: usize, lights: usize, seed: u64) -> Self {
        Self {
            width,
            height,
            lights,
            seed,
            data: vec![0.0; width * height * lights * 3],
            coverage: vec![false; width * height],
        }
    }

    /// Builds a Jacobian from raw parts, checking every invariant.
    pub fn from_parts(
        width: usize,
        height: usize,
        lights: usize,
        data: Vec<f64>,
        coverage: Vec<bool>,
    ) -> Result<Self> {
        let pixels = width * height;
        if data.len() != pixels * lights * 3 || coverage.len() != pixels {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients and {} coverage flags for {pixels} pixels x {lights} lights",
                data.len(),
                coverage.len()
            )));
        }
        let j = Self {
            width,
            height,
            lights,
            seed: 0,
            data,
            coverage,
        };
        j.validate()?;
        Ok(j)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn light_count(&self) -> usize {
        self.lights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn coverage(&self) -> &[bool] {
        &self.coverage
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn entry(&self, pixel: usize, light: usize, channel: usize) -> f64 {
        self.data[(pixel * self.lights + light) * 3 + channel]
    }

    /// All coefficients of one pixel, `[j·3 + c]`.
    pub fn row(&self, pixel: usize) -> &[f64] {
        let n = 3 * self.lights;
        &self.data[pixel * n..(pixel + 1) * n]
    }

    pub(crate) fn rows_mut(&mut self) -> (&mut [f64], &mut [bool]) {
        (&mut self.data, &mut self.coverage)
    }

    /// Nonnegative, finite, and zero on uncovered pixels.
    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("Jacobian coefficient {v}")));
        }
        if let Some(v) = self.data.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidParameter(format!("negative Jacobian coefficient {v}")));
        }
        for (i, covered) in self.coverage.iter().enumerate() {
            if !covered && self.row(i).iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "uncovered pixel {i} has nonzero coefficients"
                )));
            }
        }
        Ok(())
    }

    fn check_lambda(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != 3 * self.lights {
            return Err(Error::DimensionMismatch(format!(
                "{} radiance entries for a Jacobian over {} lights",
                lambda.len(),
                self.lights
            )));
        }
        Ok(())
    }

    /// `I_{i,c} = Σ_j J_{i,j,c}·λ_{j,c}`, summed in increasing `j` for every pixel.
    ///
    /// Lights with λ = 0 in every channel are skipped; entries are finite, so the terms
    /// they would add are `+0.0` and the sums are unchanged.
    pub fn apply(&self, lambda: &[f64]) -> Result<Rendered> {
        self.check_lambda(lambda)?;
        let n = 3 * self.lights;
        let active: Vec<usize> = (0..self.lights)
            .filter(|&j| lambda[3 * j..3 * j + 3].iter().any(|v| *v != 0.0))
            .collect();
        let pixels: Vec<Rgb> = self
            .data
            .par_chunks(n.max(1))
            .take(self.pixel_count())
            .map(|row| {
                let mut out = [0.0; 3];
                for &j in &active {
                    let (coef, lam) = (&row[3 * j..3 * j + 3], &lambda[3 * j..3 * j + 3]);
                    for c in 0..3 {
                        out[c] += coef[c] * lam[c];
                    }
                }
                out
            })
            .collect();
        let pixels = if self.lights == 0 {
            vec![[0.0; 3]; self.pixel_count()]
        } else {
            pixels
        };
        Ok(Rendered {
            image: Image::from_pixels(self.width, self.height, pixels)?,
            coverage: self.coverage.clone(),
        })
    }

    /// `out[j·3 + c] += Σ_i w_{i,c}·J_{i,j,c}` with a thread-count independent
    /// summation order.
    pub fn accumulate_transpose(&self, weights: &[Rgb], out: &mut [f64]) -> Result<()> {
        self.check_lambda(out)?;
        if weights.len() != self.pixel_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} pixel weights for {} pixels",
                weights.len(),
                self.pixel_count()
            )));
        }
        let n = 3 * self.lights;
        let partials: Vec<Vec<f64>> = weights
            .par_chunks(REDUCE_BLOCK)
            .enumerate()
            .map(|(b, block)| {
                let mut acc = vec![0.0; n];
                for (k, w) in block.iter().enumerate() {
                    if w.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    let row = self.row(b * REDUCE_BLOCK + k);
                    for (a, coef) in acc.chunks_exact_mut(3).zip(row.chunks_exact(3)) {
                        for c in 0..3 {
                            a[c] += w[c] * coef[c];
                        }
                    }
                }
                acc
            })
            .collect();
        for p in partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        Ok(())
    }

    /// Image of column `j` (the render under unit radiance on light `j` only).
    pub fn column(&self, j: usize) -> Image {
        let pixels = (0..self.pixel_count())
            .map(|i| {
                let r = &self.row(i)[3 * j..3 * j + 3];
                [r[0], r[1], r[2]]
            })
            .collect();
        Image::from_pixels(self.width, self.height, pixels).expect("sized by construction")
    }

    /// Whether light `j` has any nonzero coefficient.
    pub fn column_is_zero(&self, j: usize) -> bool {
        (0..self.pixel_count()).all(|i| self.row(i)[3 * j..3 * j + 3].iter().all(|&v| v == 0.0))
    }

    /// Writes the coefficients as little-endian `f32` in storage order plus a JSON
    /// sidecar at `<path>.json`.
    pub fn dump(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.data.len() * 4);
        for v in &self.data {
            bytes.extend_from_slice(&(*v as f32).to_le_bytes());
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(path, e))?;
        let sidecar = JacobianSidecar {
            m_pix: self.pixel_count(),
            n_lights: self.lights,
            channels: 3,
            seed: self.seed,
        };
        let side_path = sidecar_path(path);
        std::fs::write(&side_path, serde_json::to_string_pretty(&sidecar)?)
            .map_err(|e| Error::io(&side_path, e))
    }
}

pub(crate) fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

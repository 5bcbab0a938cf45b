//! In-memory float images.

use crate::{Error, Result, Rgb};

/// Linear RGB image, row-major with row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl Image {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![[0.0; 3]; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self> {
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: Rgb) {
        self.pixels[y * self.width + x] = value;
    }

    pub fn same_size(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Mean over all pixels and channels.
    pub fn mean(&self) -> f64 {
        if self.pixels.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.pixels.iter().flat_map(|p| p.iter()).sum();
        sum / (3 * self.pixels.len()) as f64
    }
}

/// A linear-irradiance photograph together with its validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceImage {
    pub image: Image,
    pub mask: Vec<bool>,
}

impl ReferenceImage {
    pub fn new(image: Image, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != image.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries, image has {} pixels",
                mask.len(),
                image.len()
            )));
        }
        if let Some(bad) = image
            .pixels()
            .iter()
            .flat_map(|p| p.iter())
            .find(|v| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "reference values must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(Self { image, mask })
    }

    /// Reference with every pixel marked valid.
    pub fn unmasked(image: Image) -> Result<Self> {
        let mask = vec![true; image.len()];
        Self::new(image, mask)
    }

    pub fn width(&self) -> usize {
        self.image.width()
    }

    pub fn height(&self) -> usize {
        self.image.height()
    }
}

/// A rendered image plus the per-pixel coverage flag of the trace that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub image: Image,
    pub coverage: Vec<bool>,
}

//! 8-bit sRGB PNG previews.

use crate::image::Image;
use crate::Result;

/// sRGB electro-optical transfer function.
pub fn srgb_to_linear(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

pub fn linear_to_srgb(l: f64) -> f64 {
    if l <= 0.003_130_8 {
        12.92 * l
    } else {
        1.055 * l.powf(1.0 / 2.4) - 0.055
    }
}

pub fn decode_png(bytes: &[u8]) -> Result<Image> {
    let rgb = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb
        .pixels()
        .map(|p| p.0.map(|c| srgb_to_linear(c as f64 / 255.0)))
        .collect();
    Image::from_pixels(w, h, pixels)
}

/// Inverse sRGB transfer with clamping to `[0, 1]`, quantized to 8 bits.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    let mut buf = image::RgbImage::new(img.width() as u32, img.height() as u32);
    for (dst, src) in buf.pixels_mut().zip(img.pixels()) {
        dst.0 = src.map(|l| {
            let l = if l.is_nan() { 0.0 } else { l.clamp(0.0, 1.0) };
            (linear_to_srgb(l) * 255.0).round() as u8
        });
    }
    let mut out = std::io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)?;
    Ok(out.into_inner())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_128_linearizes() {
        assert!((srgb_to_linear(128.0 / 255.0) - 0.2158605).abs() < 1e-6);
    }

    #[test]
    fn transfer_roundtrip_on_8bit_codes() {
        for c in 0..=255u8 {
            let l = srgb_to_linear(c as f64 / 255.0);
            assert_eq!((linear_to_srgb(l) * 255.0).round() as u8, c);
        }
    }

    #[test]
    fn png_roundtrip_and_clamping() {
        let img = Image::from_pixels(2, 1, vec![[0.2158605, 2.0, -1.0], [0.0, 1.0, 0.5]]).unwrap();
        let back = decode_png(&encode_png(&img).unwrap()).unwrap();
        assert!((back.get(0, 0)[0] - 0.2158605).abs() < 1e-6);
        assert_eq!(back.get(0, 0)[1], 1.0);
        assert_eq!(back.get(0, 0)[2], 0.0);
        assert!((back.get(1, 0)[2] - 0.5).abs() < 0.01);
    }
}

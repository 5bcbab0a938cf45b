//! Portable float map: `PF`/`Pf` header, dimensions, scale (negative means little
//! endian), then rows from bottom to top.

use crate::image::Image;
use crate::{Error, Result};

fn malformed(offset: usize, message: impl Into<String>) -> Error {
    Error::Malformed {
        format: "PFM",
        offset,
        message: message.into(),
    }
}

/// Reads the next whitespace-delimited header token; returns it and the offset just past it.
fn token(bytes: &[u8], mut pos: usize) -> Result<(&str, usize, usize)> {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    if start == pos {
        return Err(malformed(start, "unexpected end of header"));
    }
    let s = std::str::from_utf8(&bytes[start..pos]).map_err(|_| malformed(start, "non-ASCII header"))?;
    Ok((s, start, pos))
}

pub fn decode_pfm(bytes: &[u8]) -> Result<Image> {
    let (magic, at, pos) = token(bytes, 0)?;
    let channels = match magic {
        "PF" => 3,
        "Pf" => 1,
        _ => return Err(malformed(at, format!("bad magic {magic:?}"))),
    };
    let (w, at, pos) = token(bytes, pos)?;
    let width: usize = w.parse().map_err(|_| malformed(at, format!("bad width {w:?}")))?;
    let (h, at, pos) = token(bytes, pos)?;
    let height: usize = h.parse().map_err(|_| malformed(at, format!("bad height {h:?}")))?;
    let (s, at, pos) = token(bytes, pos)?;
    let scale: f32 = s.parse().map_err(|_| malformed(at, format!("bad scale {s:?}")))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(malformed(at, "scale must be finite and nonzero"));
    }
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(malformed(pos, "missing separator after scale"));
    }
    let data = pos + 1;
    let expected = width * height * channels * 4;
    if bytes.len() - data != expected {
        return Err(malformed(
            data,
            format!("expected {expected} bytes of samples, found {}", bytes.len() - data),
        ));
    }
    let little = scale < 0.0;
    let read = |k: usize| {
        let b: [u8; 4] = bytes[data + 4 * k..data + 4 * k + 4].try_into().expect("4 bytes");
        if little {
            f32::from_le_bytes(b)
        } else {
            f32::from_be_bytes(b)
        }
    };
    let mut img = Image::new(width, height);
    for row in 0..height {
        let y = height - 1 - row;
        for x in 0..width {
            let k = (row * width + x) * channels;
            let px = if channels == 3 {
                [read(k) as f64, read(k + 1) as f64, read(k + 2) as f64]
            } else {
                [read(k) as f64; 3]
            };
            img.set(x, y, px);
        }
    }
    Ok(img)
}

/// Encodes as little-endian RGB PFM with scale −1.0.
pub fn encode_pfm(img: &Image) -> Vec<u8> {
    let header = format!("PF\n{} {}\n-1.0\n", img.width(), img.height());
    let mut out = Vec::with_capacity(header.len() + img.len() * 12);
    out.extend_from_slice(header.as_bytes());
    for y in (0..img.height()).rev() {
        for x in 0..img.width() {
            for v in img.get(x, y) {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values_and_row_order() {
        let mut bytes = b"PF\n2 2\n-1.0\n".to_vec();
        // Bottom row first.
        for v in [1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let img = decode_pfm(&bytes).unwrap();
        assert_eq!(img.get(0, 1), [1.0, 2.0, 3.0]);
        assert_eq!(img.get(1, 1), [4.0, 5.0, 6.0]);
        assert_eq!(img.get(0, 0), [7.0, 8.0, 9.0]);
        assert_eq!(encode_pfm(&img), bytes);
    }

    #[test]
    fn big_endian_and_grayscale() {
        let mut bytes = b"Pf 1 1 1.0\n".to_vec();
        bytes.extend_from_slice(&0.25f32.to_be_bytes());
        assert_eq!(decode_pfm(&bytes).unwrap().get(0, 0), [0.25; 3]);
    }

    #[test]
    fn errors_report_offsets() {
        match decode_pfm(b"P6\n1 1\n255\n") {
            Err(Error::Malformed { offset: 0, .. }) => {}
            other => panic!("{other:?}"),
        }
        match decode_pfm(b"PF\n1 x\n-1.0\n") {
            Err(Error::Malformed { offset: 5, .. }) => {}
            other => panic!("{other:?}"),
        }
        match decode_pfm(b"PF\n1 1\n-1.0\n\0\0") {
            Err(Error::Malformed { offset: 12, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(decode_pfm(b"PF\n1 1\n").is_err());
    }
}

//! Binary PGM (P5) rasters of density fields. Solid material is black.

use trussweb_core::topopt::DensityField;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gray {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub pixels: Vec<u8>,
}

impl Gray {
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// One pixel per element, `scale`×`scale` pixels when scale > 1.
    pub fn from_field(field: &DensityField, scale: usize) -> Gray {
        let s = scale.max(1);
        let (w, h) = (field.nelx * s, field.nely * s);
        let mut pixels = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                let v = field.get(x / s, y / s).clamp(0.0, 1.0);
                pixels[y * w + x] = (255.0 * (1.0 - v)).round() as u8;
            }
        }
        Gray { width: w, height: h, pixels }
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn from_pgm(bytes: &[u8]) -> Result<Gray> {
        let bad = |m: &str| Error::parse(1, None, format!("pgm: {m}"));
        let mut fields = Vec::new();
        let mut pos = 0;
        while fields.len() < 4 {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(bad("truncated header"));
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("header is not text"))?);
        }
        if fields[0] != "P5" {
            return Err(bad("not a binary graymap"));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad("bad header number"));
        let (width, height, max) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
        if max != 255 {
            return Err(bad("only 8-bit graymaps are supported"));
        }
        // Exactly one whitespace byte separates the header from the data.
        let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing pixel data"))?;
        if data.len() != width * height {
            return Err(bad("pixel count does not match the header"));
        }
        Ok(Gray { width, height, pixels: data.to_vec() })
    }

    /// Density read back from a pixel.
    pub fn density(&self, x: usize, y: usize) -> f64 {
        1.0 - self.get(x, y) as f64 / 255.0
    }

    /// Mean |ρ(x, y) − ρ(w−1−x, y)| over the raster.
    pub fn mirror_asymmetry(&self) -> f64 {
        let mut s = 0.0;
        for y in 0..self.height {
            for x in 0..self.width {
                s += (self.density(x, y) - self.density(self.width - 1 - x, y)).abs();
            }
        }
        s / self.pixels.len().max(1) as f64
    }

    /// Number of 4-connected regions of pixels darker than `threshold`.
    pub fn solid_components(&self, threshold: u8) -> usize {
        let (w, h) = (self.width, self.height);
        let mut seen = vec![false; w * h];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..w * h {
            if seen[start] || self.pixels[start] >= threshold {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(p) = stack.pop() {
                let (x, y) = (p % w, p / w);
                let mut visit = |q: usize| {
                    if !seen[q] && self.pixels[q] < threshold {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if x > 0 {
                    visit(p - 1);
                }
                if x + 1 < w {
                    visit(p + 1);
                }
                if y > 0 {
                    visit(p - w);
                }
                if y + 1 < h {
                    visit(p + w);
                }
            }
        }
        count
    }
}

pub fn density_image(field: &DensityField) -> Vec<u8> {
    Gray::from_field(field, 1).to_pgm()
}

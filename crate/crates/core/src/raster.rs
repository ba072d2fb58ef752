//! Sampled images on the square `[-b, b]²`.
//!
//! Pixels are sampled at their centers, stored row-major, and the top row
//! holds the largest `y`.

use crate::atoms::Pattern;
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::scalar::{lit, to_f64, Scalar};

/// Grid geometry without pixel data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterShape {
    pub width: usize,
    pub height: usize,
    pub extent: f64,
}

impl RasterShape {
    pub fn new(width: usize, height: usize, extent: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "raster size {width}x{height} is empty"
            )));
        }
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "raster extent must be > 0, got {extent}"
            )));
        }
        Ok(Self {
            width,
            height,
            extent,
        })
    }

    pub fn square(n: usize, extent: f64) -> Result<Self> {
        Self::new(n, n, extent)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixel_width(&self) -> f64 {
        2.0 * self.extent / self.width as f64
    }

    pub fn pixel_height(&self) -> f64 {
        2.0 * self.extent / self.height as f64
    }

    pub fn pixel_area(&self) -> f64 {
        self.pixel_width() * self.pixel_height()
    }

    /// x coordinate of column `i`.
    pub fn x_at(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.pixel_width()
    }

    /// y coordinate of row `j` (row 0 is the top).
    pub fn y_at(&self, j: usize) -> f64 {
        self.extent - (j as f64 + 0.5) * self.pixel_height()
    }

    /// Column whose center is nearest to `x`, clamped into the image.
    pub fn column_of(&self, x: f64) -> usize {
        let i = ((x + self.extent) / self.pixel_width() - 0.5).round();
        i.clamp(0.0, (self.width - 1) as f64) as usize
    }

    pub fn row_of(&self, y: f64) -> usize {
        let j = ((self.extent - y) / self.pixel_height() - 0.5).round();
        j.clamp(0.0, (self.height - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub extent: f64,
    pub pixels: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, extent: f64, pixels: Vec<f64>) -> Result<Self> {
        RasterShape::new(width, height, extent)?;
        if pixels.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "expected {} pixels for {width}x{height}, got {}",
                width * height,
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            extent,
            pixels,
        })
    }

    pub fn zeros(shape: RasterShape) -> Self {
        Self {
            width: shape.width,
            height: shape.height,
            extent: shape.extent,
            pixels: vec![0.0; shape.len()],
        }
    }

    pub fn shape(&self) -> RasterShape {
        RasterShape {
            width: self.width,
            height: self.height,
            extent: self.extent,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pixels[j * self.width + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.pixels[j * self.width + i] = v;
    }

    /// Riemann sum of the squared pixels, an estimate of the L² norm squared.
    pub fn energy(&self) -> f64 {
        self.pixels.iter().map(|v| v * v).sum::<f64>() * self.shape().pixel_area()
    }

    /// Pixelwise `self - other`; shapes must agree.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::InvalidArgument("raster shapes differ".into()));
        }
        let pixels = self
            .pixels
            .iter()
            .zip(&other.pixels)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            pixels,
            ..self.clone()
        })
    }

    pub fn rms(&self) -> f64 {
        (self.pixels.iter().map(|v| v * v).sum::<f64>() / self.pixels.len() as f64).sqrt()
    }
}

/// Exponent below which an atom's contribution to a pixel is skipped.
const RASTER_CUTOFF: f64 = 50.0;

/// Samples `p` at every pixel center of `shape`.
pub fn evaluate_pattern<S: Scalar>(p: &Pattern<S>, shape: RasterShape) -> Result<RasterImage> {
    let shape = RasterShape::new(shape.width, shape.height, shape.extent)?;
    let mut img = RasterImage::zeros(shape);
    for atom in p.atoms() {
        if atom.coeff == S::zero() {
            continue;
        }
        let prec = atom.precision();
        let reach = to_f64(atom.sigma().x.max(atom.sigma().y)) * RASTER_CUTOFF.sqrt();
        let (tx, ty) = (to_f64(atom.tau.x), to_f64(atom.tau.y));
        let (i0, i1) = (shape.column_of(tx - reach), shape.column_of(tx + reach));
        let (j0, j1) = (shape.row_of(ty + reach), shape.row_of(ty - reach));
        for j in j0..=j1 {
            let y: S = lit(shape.y_at(j));
            for i in i0..=i1 {
                let x: S = lit(shape.x_at(i));
                let d = Vec2::new(x, y) - atom.tau;
                let e = prec.quad(d);
                if to_f64(e) > RASTER_CUTOFF {
                    continue;
                }
                img.pixels[j * shape.width + i] += to_f64(atom.coeff * (-e).exp());
            }
        }
    }
    Ok(img)
}

//! Greedy matching pursuit over a sampled Gaussian dictionary.
//!
//! Dictionary centers sit on (a subsampling of) the pixel centers, so every
//! atom with a given `(ψ, σx, σy)` is an integer shift of one template and
//! its correlation with the residual is a windowed dot product.

use std::f64::consts::PI;

use crate::atoms::{Atom, Pattern};
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::raster::{RasterImage, RasterShape};

/// Template samples with `exp(-x) < e^{-40}` are dropped.
const TEMPLATE_RADIUS: f64 = 6.4;

/// Sampling grids of the dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct DictionarySpec {
    pub psi_steps: Vec<f64>,
    /// Atom centers are every `tau_stride`-th pixel center along each axis.
    pub tau_stride: usize,
    /// Used for both `σx` and `σy`.
    pub sigma_values: Vec<f64>,
}

impl DictionarySpec {
    /// Eight angles in `[0, π)`, every second pixel center, and scales
    /// `{0.05, 0.1, 0.2, 0.4, 0.8, 1.2} · extent`.
    pub fn default_for(shape: RasterShape) -> Self {
        Self {
            psi_steps: (0..8).map(|k| k as f64 * PI / 8.0).collect(),
            tau_stride: 2,
            sigma_values: [0.05, 0.1, 0.2, 0.4, 0.8, 1.2]
                .iter()
                .map(|s| s * shape.extent)
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.psi_steps.is_empty() || self.sigma_values.is_empty() || self.tau_stride == 0 {
            return Err(Error::InvalidArgument(
                "dictionary grids must be nonempty".into(),
            ));
        }
        if self
            .sigma_values
            .iter()
            .any(|s| !(*s > 0.0) || !s.is_finite())
        {
            return Err(Error::InvalidArgument(
                "dictionary scales must be positive".into(),
            ));
        }
        if self.psi_steps.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument(
                "dictionary angles must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PursuitResult {
    pub pattern: Pattern,
    /// Residual energy before the first step and after every step.
    pub residual_energy: Vec<f64>,
    pub residual: RasterImage,
    /// Raster of the accumulated model.
    pub model: RasterImage,
    /// Set when some step found no correlated atom; those atoms carry a zero
    /// coefficient.
    pub degenerate: bool,
}

struct Template {
    psi: f64,
    sigma: Vec2<f64>,
    /// Half extents in pixels.
    kx: usize,
    ky: usize,
    values: Vec<f64>,
}

impl Template {
    fn new(psi: f64, sigma: Vec2<f64>, shape: RasterShape) -> Result<Self> {
        let (pw, ph) = (shape.pixel_width(), shape.pixel_height());
        let reach = TEMPLATE_RADIUS * sigma.x.max(sigma.y);
        let kx = ((reach / pw).ceil() as usize).min(shape.width - 1);
        let ky = ((reach / ph).ceil() as usize).min(shape.height - 1);
        let atom = Atom::new(1.0, psi, Vec2::zero(), sigma)?;
        let (w, h) = (2 * kx + 1, 2 * ky + 1);
        let mut values = vec![0.0; w * h];
        for dj in 0..h {
            for di in 0..w {
                // Row offsets grow downwards while y grows upwards.
                let x = (di as f64 - kx as f64) * pw;
                let y = -(dj as f64 - ky as f64) * ph;
                values[dj * w + di] = atom.value_at(Vec2::new(x, y));
            }
        }
        Ok(Self {
            psi,
            sigma,
            kx,
            ky,
            values,
        })
    }

    /// Calls `f(pixel_index, template_value)` for every template sample that
    /// lands inside the image when centered on pixel `(ci, cj)`.
    fn for_each(
        &self,
        shape: RasterShape,
        ci: usize,
        cj: usize,
        mut f: impl FnMut(usize, &[f64], std::ops::Range<usize>),
    ) {
        let w = 2 * self.kx + 1;
        let i0 = ci.saturating_sub(self.kx);
        let i1 = (ci + self.kx).min(shape.width - 1);
        let j0 = cj.saturating_sub(self.ky);
        let j1 = (cj + self.ky).min(shape.height - 1);
        for j in j0..=j1 {
            let trow = (j + self.ky - cj) * w;
            let t0 = trow + i0 + self.kx - ci;
            f(
                j * shape.width + i0,
                &self.values[t0..t0 + (i1 - i0 + 1)],
                i0..i1 + 1,
            );
        }
    }

    fn dot(&self, shape: RasterShape, ci: usize, cj: usize, pixels: &[f64]) -> f64 {
        let mut acc = 0.0;
        self.for_each(shape, ci, cj, |start, t, cols| {
            let row = &pixels[start..start + cols.len()];
            acc += row.iter().zip(t).map(|(a, b)| a * b).sum::<f64>();
        });
        acc
    }

    fn norm_sq(&self, shape: RasterShape, ci: usize, cj: usize) -> f64 {
        let mut acc = 0.0;
        self.for_each(shape, ci, cj, |_, t, _| {
            acc += t.iter().map(|v| v * v).sum::<f64>()
        });
        acc
    }

    fn add_scaled(&self, shape: RasterShape, ci: usize, cj: usize, c: f64, pixels: &mut [f64]) {
        self.for_each(shape, ci, cj, |start, t, cols| {
            for (p, v) in pixels[start..start + cols.len()].iter_mut().zip(t) {
                *p += c * v;
            }
        });
    }
}

/// Decomposes `img` into `n_atoms` dictionary atoms.
///
/// Each step picks the atom maximizing `|⟨r, φ⟩| / ‖φ‖` on the raster (lowest
/// dictionary index on ties), gives it coefficient `⟨r, φ⟩ / ‖φ‖²` and
/// subtracts it from the residual `r`.
pub fn matching_pursuit(
    img: &RasterImage,
    dict: &DictionarySpec,
    n_atoms: usize,
) -> Result<PursuitResult> {
    if n_atoms == 0 {
        return Err(Error::InvalidArgument("n_atoms must be >= 1".into()));
    }
    dict.validate()?;
    let shape = img.shape();
    let mut templates = Vec::new();
    for (k, &psi) in dict.psi_steps.iter().enumerate() {
        for &sx in &dict.sigma_values {
            for &sy in &dict.sigma_values {
                // Rotating an isotropic atom changes nothing.
                if sx == sy && k > 0 {
                    continue;
                }
                templates.push(Template::new(psi, Vec2::new(sx, sy), shape)?);
            }
        }
    }
    let cols: Vec<usize> = (0..shape.width).step_by(dict.tau_stride).collect();
    let rows: Vec<usize> = (0..shape.height).step_by(dict.tau_stride).collect();
    let mut norms = Vec::with_capacity(templates.len() * rows.len() * cols.len());
    for t in &templates {
        for &cj in &rows {
            for &ci in &cols {
                norms.push(t.norm_sq(shape, ci, cj));
            }
        }
    }

    let mut residual = img.clone();
    let mut model = RasterImage::zeros(shape);
    let mut residual_energy = vec![residual.energy()];
    let mut atoms = Vec::with_capacity(n_atoms);
    let mut degenerate = false;
    for _ in 0..n_atoms {
        let mut best = (0usize, 0.0f64, 0.0f64);
        let mut idx = 0;
        for t in &templates {
            for &cj in &rows {
                for &ci in &cols {
                    let n2 = norms[idx];
                    if n2 > 0.0 {
                        let c = t.dot(shape, ci, cj, &residual.pixels);
                        let score = c.abs() / n2.sqrt();
                        if score > best.1 {
                            best = (idx, score, c / n2);
                        }
                    }
                    idx += 1;
                }
            }
        }
        let (index, score, coeff) = best;
        let per_shape = rows.len() * cols.len();
        let t = &templates[index / per_shape];
        let (cj, ci) = (
            rows[(index % per_shape) / cols.len()],
            cols[index % cols.len()],
        );
        if score == 0.0 {
            degenerate = true;
        } else {
            t.add_scaled(shape, ci, cj, -coeff, &mut residual.pixels);
            t.add_scaled(shape, ci, cj, coeff, &mut model.pixels);
        }
        let tau = Vec2::new(shape.x_at(ci), shape.y_at(cj));
        atoms.push(Atom::new(coeff, t.psi, tau, t.sigma)?);
        residual_energy.push(residual.energy());
    }
    Ok(PursuitResult {
        pattern: Pattern::new(atoms)?,
        residual_energy,
        residual,
        model,
        degenerate,
    })
}

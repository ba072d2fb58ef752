//! Gaussian atoms, patterns built from them, and the closed-form algebra on
//! both: inner products, norms, smoothing by an isotropic Gaussian kernel and
//! translation.
//!
//! An atom with coefficient `c`, rotation `psi`, center `tau` and scales
//! `(sigma_x, sigma_y)` is the function
//!
//! ```text
//! c · exp(-‖σ⁻¹ Ψ⁻¹ (X - τ)‖²)
//! ```
//!
//! so every atom is determined by its covariance-like matrix `Ψ σ² Ψᵀ`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{Sym2, Vec2};
use crate::scalar::{exp_cut, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<S = f64> {
    pub coeff: S,
    psi: S,
    pub tau: Vec2<S>,
    sigma: Vec2<S>,
}

impl<S: Scalar> Atom<S> {
    /// Builds an atom, reducing `psi` to `[0, 2π)`.
    pub fn new(coeff: S, psi: S, tau: Vec2<S>, sigma: Vec2<S>) -> Result<Self> {
        if !(sigma.x > S::zero() && sigma.y > S::zero())
            || !sigma.x.is_finite()
            || !sigma.y.is_finite()
        {
            return Err(Error::InvalidAtom(format!(
                "scales must be positive and finite, got ({}, {})",
                sigma.x, sigma.y
            )));
        }
        if !coeff.is_finite() || !psi.is_finite() || !tau.x.is_finite() || !tau.y.is_finite() {
            return Err(Error::InvalidAtom("non-finite parameter".into()));
        }
        Ok(Self {
            coeff,
            psi: reduce_angle(psi),
            tau,
            sigma,
        })
    }

    pub fn isotropic(coeff: S, tau: Vec2<S>, sigma: S) -> Result<Self> {
        Self::new(coeff, S::zero(), tau, Vec2::new(sigma, sigma))
    }

    pub fn psi(&self) -> S {
        self.psi
    }

    pub fn sigma(&self) -> Vec2<S> {
        self.sigma
    }

    /// `|σ| = σx σy`.
    pub fn scale_det(&self) -> S {
        self.sigma.x * self.sigma.y
    }

    /// `Ψ σ² Ψ⁻¹`.
    pub fn covariance(&self) -> Sym2<S> {
        Sym2::rotated_diag(
            self.psi,
            self.sigma.x * self.sigma.x,
            self.sigma.y * self.sigma.y,
        )
    }

    /// `Ψ σ⁻² Ψ⁻¹`, the quadratic form in the exponent.
    pub fn precision(&self) -> Sym2<S> {
        Sym2::rotated_diag(
            self.psi,
            S::one() / (self.sigma.x * self.sigma.x),
            S::one() / (self.sigma.y * self.sigma.y),
        )
    }

    pub fn with_coeff(mut self, coeff: S) -> Self {
        self.coeff = coeff;
        self
    }

    pub fn translated(mut self, u: Vec2<S>) -> Self {
        self.tau = self.tau + u;
        self
    }

    /// Value of the weighted atom at `x`.
    pub fn value_at(&self, x: Vec2<S>) -> S {
        let d = x - self.tau;
        self.coeff * exp_cut(-self.precision().quad(d))
    }

    /// The atom convolved with the unit-mass kernel `exp(-‖X‖²/ρ²)/(πρ²)`.
    pub fn smoothed(&self, rho: S) -> Self {
        if rho == S::zero() {
            return *self;
        }
        let r2 = rho * rho;
        let sx2 = r2 + self.sigma.x * self.sigma.x;
        let sy2 = r2 + self.sigma.y * self.sigma.y;
        let coeff = self.coeff * self.scale_det() / (sx2 * sy2).sqrt();
        Self {
            coeff,
            psi: self.psi,
            tau: self.tau,
            sigma: Vec2::new(sx2.sqrt(), sy2.sqrt()),
        }
    }
}

fn reduce_angle<S: Scalar>(psi: S) -> S {
    let full: S = lit(TAU);
    let r = psi % full;
    let r = if r < S::zero() { r + full } else { r };
    // `r + full` can round up to `full` for tiny negative inputs.
    if r >= full {
        S::zero()
    } else {
        r
    }
}

/// `c_a c_b ∫ φ_a φ_b`.
pub fn atom_inner_product<S: Scalar>(a: &Atom<S>, b: &Atom<S>) -> S {
    let weight = a.coeff * b.coeff;
    if weight == S::zero() {
        return S::zero();
    }
    let half: S = lit(0.5);
    let sigma = (a.covariance() + b.covariance()).scale(half);
    let det = sigma.det();
    let inv = Sym2::new(sigma.yy / det, -sigma.xy / det, sigma.xx / det);
    let d = b.tau - a.tau;
    let scales = a.scale_det() * b.scale_det();
    weight * S::PI() * scales / (lit::<S>(2.0) * det.sqrt()) * exp_cut(-half * inv.quad(d))
}

/// A finite weighted sum of Gaussian atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern<S = f64> {
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> Pattern<S> {
    pub fn new(atoms: Vec<Atom<S>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyPattern);
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// True when every coefficient is zero (the pattern is the zero function).
    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.coeff == S::zero())
    }

    pub fn ensure_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroPattern)
        } else {
            Ok(())
        }
    }

    pub fn value_at(&self, x: Vec2<S>) -> S {
        self.atoms.iter().map(|a| a.value_at(x)).sum()
    }

    pub fn scaled(&self, s: S) -> Self {
        let atoms = self
            .atoms
            .iter()
            .map(|a| a.with_coeff(a.coeff * s))
            .collect();
        Self { atoms }
    }

    /// Atom list of `self + other`.
    pub fn sum(&self, other: &Self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend_from_slice(&other.atoms);
        Self { atoms }
    }

    pub fn translate(&self, u: Vec2<S>) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| a.translated(u)).collect(),
        }
    }

    pub fn smooth(&self, rho: S) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| a.smoothed(rho)).collect(),
        }
    }

    pub fn inner_product(&self, other: &Self) -> S {
        pattern_inner_product(self, other)
    }

    pub fn norm(&self) -> S {
        pattern_norm(self)
    }

    /// Largest scale parameter over all atoms.
    pub fn max_sigma(&self) -> S {
        self.atoms
            .iter()
            .map(|a| a.sigma.x.max(a.sigma.y))
            .fold(S::zero(), S::max)
    }

    /// Radius of a centered disc holding every atom out to six scales.
    pub fn support_radius(&self) -> S {
        let six: S = lit(6.0);
        self.atoms
            .iter()
            .map(|a| a.tau.norm() + six * a.sigma.x.max(a.sigma.y))
            .fold(S::zero(), S::max)
    }
}

/// Bilinear extension of [`atom_inner_product`] over all atom pairs.
pub fn pattern_inner_product<S: Scalar>(p: &Pattern<S>, q: &Pattern<S>) -> S {
    let mut total = S::zero();
    for a in p.atoms() {
        for b in q.atoms() {
            total = total + atom_inner_product(a, b);
        }
    }
    total
}

/// `‖p‖`, clamped at zero against rounding.
pub fn pattern_norm<S: Scalar>(p: &Pattern<S>) -> S {
    pattern_inner_product(p, p).max(S::zero()).sqrt()
}

pub fn smooth_pattern<S: Scalar>(p: &Pattern<S>, rho: S) -> Result<Pattern<S>> {
    if !(rho >= S::zero()) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "filter size must be >= 0, got {rho}"
        )));
    }
    Ok(p.smooth(rho))
}

pub fn translate_pattern<S: Scalar>(p: &Pattern<S>, u: Vec2<S>) -> Pattern<S> {
    p.translate(u)
}

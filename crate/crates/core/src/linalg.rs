//! Two-dimensional vectors and symmetric 2×2 matrices.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Vec2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    /// Unit vector at angle `theta` from the x axis.
    pub fn from_angle(theta: S) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, other: Self) -> S {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.x.hypot(self.y)
    }

    pub fn scale(self, s: S) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl<S: Scalar> Add for Vec2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Scalar> Sub for Vec2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Scalar> Neg for Vec2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<S: Scalar> Mul<S> for Vec2<S> {
    type Output = Self;
    fn mul(self, s: S) -> Self {
        self.scale(s)
    }
}

/// Symmetric matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2<S> {
    pub xx: S,
    pub xy: S,
    pub yy: S,
}

impl<S: Scalar> Sym2<S> {
    pub fn new(xx: S, xy: S, yy: S) -> Self {
        Self { xx, xy, yy }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    pub fn diag(a: S, b: S) -> Self {
        Self::new(a, S::zero(), b)
    }

    /// `R diag(d1, d2) Rᵀ` for the rotation by `psi`.
    pub fn rotated_diag(psi: S, d1: S, d2: S) -> Self {
        let (s, c) = psi.sin_cos();
        Self::new(
            c * c * d1 + s * s * d2,
            c * s * (d1 - d2),
            s * s * d1 + c * c * d2,
        )
    }

    /// Outer product `v vᵀ`.
    pub fn outer(v: Vec2<S>) -> Self {
        Self::new(v.x * v.x, v.x * v.y, v.y * v.y)
    }

    pub fn det(&self) -> S {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> S {
        self.xx + self.yy
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if !(det.abs() > S::min_positive_value()) || !det.is_finite() {
            return None;
        }
        Some(Self::new(self.yy / det, -self.xy / det, self.xx / det))
    }

    pub fn apply(&self, v: Vec2<S>) -> Vec2<S> {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Quadratic form `uᵀ M v`.
    pub fn bilinear(&self, u: Vec2<S>, v: Vec2<S>) -> S {
        u.dot(self.apply(v))
    }

    pub fn quad(&self, v: Vec2<S>) -> S {
        self.bilinear(v, v)
    }

    /// Eigenvalues `(smaller, larger)`.
    pub fn eigenvalues(&self) -> (S, S) {
        let half = lit::<S>(0.5);
        let mean = half * (self.xx + self.yy);
        let r = (half * (self.xx - self.yy)).hypot(self.xy);
        (mean - r, mean + r)
    }

    pub fn lambda_min(&self) -> S {
        self.eigenvalues().0
    }

    pub fn lambda_max(&self) -> S {
        self.eigenvalues().1
    }

    /// Ratio of eigenvalue magnitudes; infinite for singular matrices.
    pub fn condition_number(&self) -> S {
        let (lo, hi) = self.eigenvalues();
        let (lo, hi) = (lo.abs().min(hi.abs()), lo.abs().max(hi.abs()));
        if lo > S::zero() {
            hi / lo
        } else {
            S::infinity()
        }
    }

    pub fn scale(&self, s: S) -> Self {
        Self::new(self.xx * s, self.xy * s, self.yy * s)
    }
}

impl<S: Scalar> Add for Sym2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.xx + o.xx, self.xy + o.xy, self.yy + o.yy)
    }
}

impl<S: Scalar> Sub for Sym2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.xx - o.xx, self.xy - o.xy, self.yy - o.yy)
    }
}

//! Closed-form SSD distance between a pattern and translated copies.
//!
//! For a unit direction `T` every atom pair `(j, k)` contributes through the
//! constants
//!
//! ```text
//! a = ½ Tᵀ Σ⁻¹ T,  b = ½ Tᵀ Σ⁻¹ d,  c = ½ dᵀ Σ⁻¹ d,  Q = π|σ_j σ_k| e^{-c} / √|Σ|
//! ```
//!
//! with `Σ = ½(Ψ_j σ_j² Ψ_jᵀ + Ψ_k σ_k² Ψ_kᵀ)` and `d = τ_k - τ_j`, and
//!
//! ```text
//! f(tT) = Σ_jk c_j c_k Q (1 - e^{-(a t² + 2 b t)}).
//! ```
//!
//! Exponents are always combined as `-(c + a t² + 2 b t) ≤ 0` before
//! exponentiating so that no intermediate overflows.

use crate::atoms::{pattern_inner_product, Atom, Pattern};
use crate::error::{Error, Result};
use crate::linalg::{Sym2, Vec2};
use crate::scalar::{exp_cut, lit, to_f64, Scalar};

/// Constants of one ordered atom pair along one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTerms<S = f64> {
    pub sigma_jk: Sym2<S>,
    pub a: S,
    pub b: S,
    pub c: S,
    pub q: S,
    pub direction: Vec2<S>,
}

/// `Σ_jk`, its inverse and `π|σ_j σ_k| / √|Σ_jk|`, shared by every direction.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairGeometry<S> {
    pub sigma: Sym2<S>,
    pub inv: Sym2<S>,
    pub prefactor: S,
    pub d: Vec2<S>,
}

fn singular_threshold<S: Scalar>() -> S {
    lit::<S>(0.01) / S::epsilon()
}

impl<S: Scalar> PairGeometry<S> {
    pub fn new(j: &Atom<S>, k: &Atom<S>) -> Result<Self> {
        let sigma = (j.covariance() + k.covariance()).scale(lit(0.5));
        let condition = sigma.condition_number();
        if !(condition <= singular_threshold()) {
            return Err(Error::SingularPairMatrix {
                condition: to_f64(condition),
            });
        }
        let inv = sigma.inverse().ok_or(Error::SingularPairMatrix {
            condition: f64::INFINITY,
        })?;
        let prefactor = S::PI() * j.scale_det() * k.scale_det() / sigma.det().sqrt();
        Ok(Self {
            sigma,
            inv,
            prefactor,
            d: k.tau - j.tau,
        })
    }

    pub fn c(&self) -> S {
        lit::<S>(0.5) * self.inv.quad(self.d)
    }

    /// `(a, b)` along `t`.
    pub fn ab(&self, t: Vec2<S>) -> (S, S) {
        let half = lit::<S>(0.5);
        (half * self.inv.quad(t), half * self.inv.bilinear(t, self.d))
    }
}

/// Pair constants for atoms `j`, `k` along the unit vector `t`.
pub fn pair_terms<S: Scalar>(j: &Atom<S>, k: &Atom<S>, t: Vec2<S>) -> Result<PairTerms<S>> {
    check_unit(t)?;
    let g = PairGeometry::new(j, k)?;
    let (a, b) = g.ab(t);
    let c = g.c();
    Ok(PairTerms {
        sigma_jk: g.sigma,
        a,
        b,
        c,
        q: g.prefactor * exp_cut(-c),
        direction: t,
    })
}

fn check_unit<S: Scalar>(t: Vec2<S>) -> Result<()> {
    let tol: S = lit(1e-12_f64.max(to_f64(S::epsilon()) * 8.0));
    if (t.norm() - S::one()).abs() > tol {
        return Err(Error::InvalidArgument(format!(
            "direction must be a unit vector, got norm {}",
            t.norm()
        )));
    }
    Ok(())
}

/// A translation `t T` with `t ≥ 0` and `‖T‖ = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Translation<S = f64> {
    pub t: S,
    pub direction: Vec2<S>,
}

impl<S: Scalar> Translation<S> {
    pub fn new(t: S, direction: Vec2<S>) -> Result<Self> {
        if !(t >= S::zero()) || !t.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "translation magnitude must be >= 0, got {t}"
            )));
        }
        check_unit(direction)?;
        Ok(Self { t, direction })
    }

    /// Splits a displacement into magnitude and direction; the zero vector
    /// gets direction `(1, 0)`.
    pub fn from_vector(u: Vec2<S>) -> Self {
        let t = u.norm();
        if t == S::zero() {
            Self {
                t,
                direction: Vec2::new(S::one(), S::zero()),
            }
        } else {
            Self {
                t,
                direction: u.scale(S::one() / t),
            }
        }
    }

    pub fn vector(&self) -> Vec2<S> {
        self.direction.scale(self.t)
    }
}

/// `‖p - q(· - u)‖²`.
///
/// When `q` is `p` itself the cancellation-free self-distance form is used,
/// so the result is exactly zero at `u = 0`.
pub fn pattern_distance<S: Scalar>(p: &Pattern<S>, q: &Pattern<S>, u: Translation<S>) -> S {
    if p == q {
        if let Ok(profile) = DistanceProfile::new(p, u.direction) {
            return profile.value(u.t);
        }
    }
    let shifted = q.translate(u.vector());
    let two: S = lit(2.0);
    let v = pattern_inner_product(p, p) + pattern_inner_product(&shifted, &shifted)
        - two * pattern_inner_product(p, &shifted);
    v.max(S::zero())
}

/// `d f(tT) / dt` for the self-distance of `p`.
pub fn distance_derivative<S: Scalar>(p: &Pattern<S>, u: Translation<S>) -> Result<S> {
    Ok(DistanceProfile::new(p, u.direction)?.derivative(u.t))
}

/// `d² f(tT) / dt²` for the self-distance of `p`.
pub fn distance_second_derivative<S: Scalar>(p: &Pattern<S>, u: Translation<S>) -> Result<S> {
    Ok(DistanceProfile::new(p, u.direction)?.second_derivative(u.t))
}

/// One unordered atom pair of a pattern with its direction-independent data.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairEntry<S> {
    /// `w c_j c_k π|σ_j σ_k| / √|Σ|`, with `w = 2` folding in the mirrored pair.
    pub weight: S,
    pub geometry: PairGeometry<S>,
    pub c: S,
}

/// All unordered atom pairs of one pattern (zero-coefficient pairs dropped).
#[derive(Debug, Clone)]
pub struct PatternPairs<S = f64> {
    pub(crate) entries: Vec<PairEntry<S>>,
}

impl<S: Scalar> PatternPairs<S> {
    pub fn new(p: &Pattern<S>) -> Result<Self> {
        let atoms = p.atoms();
        let mut entries = Vec::with_capacity(atoms.len() * (atoms.len() + 1) / 2);
        let two: S = lit(2.0);
        for (j, aj) in atoms.iter().enumerate() {
            for (k, ak) in atoms.iter().enumerate().skip(j) {
                let cc = aj.coeff * ak.coeff;
                if cc == S::zero() {
                    continue;
                }
                let geometry = PairGeometry::new(aj, ak)?;
                let w = if j == k { S::one() } else { two };
                entries.push(PairEntry {
                    weight: w * cc * geometry.prefactor,
                    c: geometry.c(),
                    geometry,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The distance profile along the unit vector `direction`.
    pub fn profile(&self, direction: Vec2<S>) -> Result<DistanceProfile<S>> {
        check_unit(direction)?;
        let terms = self
            .entries
            .iter()
            .map(|e| {
                let (a, b) = e.geometry.ab(direction);
                ProfileTerm {
                    weight: e.weight,
                    a,
                    b,
                    c: e.c,
                }
            })
            .collect();
        Ok(DistanceProfile { direction, terms })
    }
}

#[derive(Debug, Clone, Copy)]
struct ProfileTerm<S> {
    weight: S,
    a: S,
    b: S,
    c: S,
}

/// The self-distance `t ↦ f(tT)` of a pattern along one fixed direction,
/// with all pair constants precomputed over unordered pairs.
#[derive(Debug, Clone)]
pub struct DistanceProfile<S = f64> {
    direction: Vec2<S>,
    terms: Vec<ProfileTerm<S>>,
}

impl<S: Scalar> DistanceProfile<S> {
    pub fn new(p: &Pattern<S>, direction: Vec2<S>) -> Result<Self> {
        check_unit(direction)?;
        PatternPairs::new(p)?.profile(direction)
    }

    pub fn direction(&self) -> Vec2<S> {
        self.direction
    }

    /// `f(tT)`.
    pub fn value(&self, t: S) -> S {
        let half: S = lit(0.5);
        let two: S = lit(2.0);
        let mut total = S::zero();
        for term in &self.terms {
            let at2 = term.a * t * t;
            let bt2 = two * term.b * t;
            let plus = one_minus_exp(term.c, at2 + bt2);
            let minus = one_minus_exp(term.c, at2 - bt2);
            total = total + term.weight * half * (plus + minus);
        }
        total
    }

    /// `d f(tT) / dt`.
    pub fn derivative(&self, t: S) -> S {
        let two: S = lit(2.0);
        let mut total = S::zero();
        for term in &self.terms {
            let at = term.a * t;
            let base = term.c + at * t;
            let e_plus = exp_cut(-(base + two * term.b * t));
            let e_minus = exp_cut(-(base - two * term.b * t));
            total = total + term.weight * ((at + term.b) * e_plus + (at - term.b) * e_minus);
        }
        total
    }

    /// `d² f(tT) / dt²`.
    pub fn second_derivative(&self, t: S) -> S {
        let two: S = lit(2.0);
        let mut total = S::zero();
        for term in &self.terms {
            let at = term.a * t;
            let base = term.c + at * t;
            let e_plus = exp_cut(-(base + two * term.b * t));
            let e_minus = exp_cut(-(base - two * term.b * t));
            let sp = at + term.b;
            let sm = at - term.b;
            total = total
                + term.weight
                    * ((term.a - two * sp * sp) * e_plus + (term.a - two * sm * sm) * e_minus);
        }
        total
    }

    /// `(weight, a, b, c)` per unordered pair; `b` belongs to the `(j, k)`
    /// ordering and the mirrored pair is folded into the weight.
    pub(crate) fn weighted_terms(&self) -> impl Iterator<Item = (S, S, S, S)> + '_ {
        self.terms.iter().map(|t| (t.weight, t.a, t.b, t.c))
    }
}

/// `e^{-c} - e^{-(c + x)}`, accurate for small `x`.
fn one_minus_exp<S: Scalar>(c: S, x: S) -> S {
    let e_c = exp_cut(-c);
    if e_c > S::zero() && x.abs() < lit(0.5) {
        -e_c * (-x).exp_m1()
    } else {
        e_c - exp_cut(-(c + x))
    }
}

/// Registration objective `u ↦ ‖q - p(· - u)‖²` with its gradient, for a
/// fixed pair of patterns.
#[derive(Debug, Clone)]
pub struct DistanceField<S = f64> {
    constant: S,
    pairs: Vec<FieldPair<S>>,
}

#[derive(Debug, Clone, Copy)]
struct FieldPair<S> {
    /// `c_i c_j π|σ_i σ_j| / √|Σ|`, twice the pair inner product at zero offset.
    weight: S,
    inv: Sym2<S>,
    d0: Vec2<S>,
}

impl<S: Scalar> DistanceField<S> {
    /// Field for reference `p` moved over target `q`.
    pub fn new(p: &Pattern<S>, q: &Pattern<S>) -> Result<Self> {
        let constant = pattern_inner_product(p, p) + pattern_inner_product(q, q);
        let mut pairs = Vec::with_capacity(p.len() * q.len());
        for qi in q.atoms() {
            for pj in p.atoms() {
                let cc = qi.coeff * pj.coeff;
                if cc == S::zero() {
                    continue;
                }
                let g = PairGeometry::new(qi, pj)?;
                pairs.push(FieldPair {
                    weight: cc * g.prefactor,
                    inv: g.inv,
                    d0: g.d,
                });
            }
        }
        Ok(Self { constant, pairs })
    }

    /// `‖q - p(· - u)‖²`, clamped at zero against rounding.
    pub fn value(&self, u: Vec2<S>) -> S {
        let half: S = lit(0.5);
        let mut cross = S::zero();
        for pair in &self.pairs {
            let d = pair.d0 + u;
            cross = cross + pair.weight * exp_cut(-half * pair.inv.quad(d));
        }
        (self.constant - cross).max(S::zero())
    }

    /// `⟨q, p(· - u)⟩`.
    pub fn correlation(&self, u: Vec2<S>) -> S {
        let half: S = lit(0.5);
        let mut cross = S::zero();
        for pair in &self.pairs {
            let d = pair.d0 + u;
            cross = cross + pair.weight * exp_cut(-half * pair.inv.quad(d));
        }
        half * cross
    }

    /// Value and gradient with respect to `u`.
    pub fn value_and_gradient(&self, u: Vec2<S>) -> (S, Vec2<S>) {
        let half: S = lit(0.5);
        let mut cross = S::zero();
        let mut grad = Vec2::zero();
        for pair in &self.pairs {
            let d = pair.d0 + u;
            let g = pair.inv.apply(d);
            let e = pair.weight * exp_cut(-half * d.dot(g));
            cross = cross + e;
            grad = grad + g.scale(e);
        }
        ((self.constant - cross).max(S::zero()), grad)
    }
}

//! Guaranteed single-extremum neighborhood (SIDEN) estimates.
//!
//! Along a direction `T` the distance `f(tT)` is certified to increase on
//! `0 < t < δ_T`, where `δ_T` is the positive root of
//! `|α₄| t³ - α₃ t² - α₁`. The star-shaped region `{ tT : 0 ≤ t ≤ δ_T }` is
//! the estimate `Q`.

use std::f64::consts::PI;

use crate::atoms::Pattern;
use crate::distance::{DistanceProfile, PatternPairs};
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::scalar::{exp_cut, lit, Scalar};

/// Literal constant of the quartic remainder term.
const ALPHA4_CONSTANT: f64 = 1.37;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCoefficients<S = f64> {
    pub alpha1: S,
    pub alpha3: S,
    pub alpha4: S,
}

impl<S: Scalar> AlphaCoefficients<S> {
    /// `|α₄| t³ - α₃ t² - α₁`.
    pub fn polynomial(&self, t: S) -> S {
        (self.alpha4.abs() * t - self.alpha3) * t * t - self.alpha1
    }

    /// The positive root of [`Self::polynomial`], or 0 when `α₁ ≤ 0`.
    pub fn delta(&self) -> S {
        if !(self.alpha1 > S::zero()) || !(self.alpha4 < S::zero()) {
            return S::zero();
        }
        let mut hi = S::one();
        let two: S = lit(2.0);
        while self.polynomial(hi) <= S::zero() {
            hi = hi * two;
        }
        let mut lo = S::zero();
        let half: S = lit(0.5);
        for _ in 0..400 {
            let mid = half * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.polynomial(mid) > S::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        half * (lo + hi)
    }
}

impl<S: Scalar> DistanceProfile<S> {
    /// Cubic-bound coefficients along this profile's direction.
    pub fn alpha_coefficients(&self) -> AlphaCoefficients<S> {
        let (two, four, eight): (S, S, S) = (lit(2.0), lit(4.0), lit(8.0));
        let eight_thirds: S = lit(8.0 / 3.0);
        let mut alpha1 = S::zero();
        let mut alpha3 = S::zero();
        let mut alpha4 = S::zero();
        for (w, a, b, c) in self.weighted_terms() {
            let q = w * exp_cut(-c);
            let b2 = b * b;
            alpha1 = alpha1 + q * (two * a - four * b2);
            alpha3 = alpha3 + q * (-eight_thirds * b2 * b2 + eight * b2 * a - two * a * a);
            // b²/a ≤ c, so the combined exponent never overflows.
            alpha4 = alpha4 + w.abs() * exp_cut(b2 / a - c) * a * a * a.sqrt();
        }
        AlphaCoefficients {
            alpha1,
            alpha3,
            alpha4: -lit::<S>(ALPHA4_CONSTANT) * alpha4,
        }
    }
}

pub fn alpha_coefficients<S: Scalar>(
    p: &Pattern<S>,
    direction: Vec2<S>,
) -> Result<AlphaCoefficients<S>> {
    Ok(DistanceProfile::new(p, direction)?.alpha_coefficients())
}

/// Guaranteed SIDEN radius along `direction`; 0 when nothing is certified.
pub fn delta_t<S: Scalar>(p: &Pattern<S>, direction: Vec2<S>) -> Result<S> {
    Ok(alpha_coefficients(p, direction)?.delta())
}

/// Direction-sampled boundary of the estimate `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SidenEstimate<S = f64> {
    /// Unit directions at angles `2πi/n`, so the second half mirrors the first.
    pub directions: Vec<Vec2<S>>,
    pub delta: Vec<S>,
    /// Filter size the pattern was smoothed with.
    pub rho: S,
    /// Directions with `α₁ ≤ 0` (reported as `δ = 0`).
    pub degenerate: Vec<bool>,
}

impl<S: Scalar> SidenEstimate<S> {
    pub fn min_delta(&self) -> S {
        self.delta.iter().copied().fold(S::infinity(), S::min)
    }

    pub fn max_delta(&self) -> S {
        self.delta.iter().copied().fold(S::zero(), S::max)
    }

    pub fn mean_delta(&self) -> S {
        self.delta.iter().copied().sum::<S>() / lit(self.delta.len() as f64)
    }

    /// Index of the smallest radius (lowest index on ties).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, d) in self.delta.iter().enumerate() {
            if *d < self.delta[best] {
                best = i;
            }
        }
        best
    }

    pub fn area(&self) -> S {
        siden_area(self)
    }
}

/// Samples `δ_T` at `n_directions` uniform angles; only the half in `[0, π)`
/// is computed and mirrored.
pub fn siden_boundary<S: Scalar>(p: &Pattern<S>, n_directions: usize) -> Result<SidenEstimate<S>> {
    estimate_with_rho(p, S::zero(), n_directions)
}

/// [`siden_boundary`] of `p` smoothed with filter size `rho`.
pub fn smoothed_siden_boundary<S: Scalar>(
    p: &Pattern<S>,
    rho: S,
    n_directions: usize,
) -> Result<SidenEstimate<S>> {
    let smoothed = crate::atoms::smooth_pattern(p, rho)?;
    estimate_with_rho(&smoothed, rho, n_directions)
}

fn estimate_with_rho<S: Scalar>(p: &Pattern<S>, rho: S, n: usize) -> Result<SidenEstimate<S>> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "direction count must be even and >= 4, got {n}"
        )));
    }
    let half = n / 2;
    let pairs = PatternPairs::new(p)?;
    let mut directions = vec![Vec2::zero(); n];
    let mut delta = vec![S::zero(); n];
    let mut degenerate = vec![false; n];
    for i in 0..half {
        let theta: S = lit(PI * i as f64 / half as f64);
        let t = Vec2::from_angle(theta);
        let alphas = pairs.profile(t)?.alpha_coefficients();
        let d = alphas.delta();
        let bad = !(alphas.alpha1 > S::zero());
        directions[i] = t;
        directions[i + half] = -t;
        delta[i] = d;
        delta[i + half] = d;
        degenerate[i] = bad;
        degenerate[i + half] = bad;
    }
    Ok(SidenEstimate {
        directions,
        delta,
        rho,
        degenerate,
    })
}

/// Shoelace area of the polygon through the boundary points `δ_i T_i`.
pub fn siden_area<S: Scalar>(est: &SidenEstimate<S>) -> S {
    let n = est.delta.len();
    let mut twice = S::zero();
    for i in 0..n {
        let j = (i + 1) % n;
        let a = est.directions[i].scale(est.delta[i]);
        let b = est.directions[j].scale(est.delta[j]);
        twice = twice + (a.x * b.y - a.y * b.x);
    }
    (twice * lit(0.5)).abs()
}

/// First zero crossing of `df(tT)/dt` in `(0, t_max]`.
///
/// A dense scan with step `t_max / 2000` finds the first sample where the
/// derivative is `≤ 0`; bisection then narrows the crossing to `1e-8`.
pub fn true_siden_boundary<S: Scalar>(
    p: &Pattern<S>,
    direction: Vec2<S>,
    t_max: S,
) -> Result<Option<S>> {
    if !(t_max > S::zero()) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be > 0, got {t_max}"
        )));
    }
    let profile = DistanceProfile::new(p, direction)?;
    Ok(profile.first_crossing(t_max, 2000))
}

impl<S: Scalar> DistanceProfile<S> {
    /// First `t` in `(0, t_max]` where `df(tT)/dt ≤ 0`: a scan with `steps`
    /// uniform samples, then bisection down to `1e-8`.
    pub fn first_crossing(&self, t_max: S, steps: usize) -> Option<S> {
        let step = t_max / lit(steps as f64);
        let mut prev = S::zero();
        for i in 1..=steps {
            let t = step * lit(i as f64);
            if self.derivative(t) <= S::zero() {
                let (mut lo, mut hi) = (prev, t);
                let tol: S = lit(1e-8);
                let half: S = lit(0.5);
                while hi - lo > tol {
                    let mid = half * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.derivative(mid) <= S::zero() {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            prev = t;
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::Atom;

    fn unit() -> Pattern {
        Pattern::new(vec![Atom::isotropic(1.0, Vec2::zero(), 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn unit_atom_alphas_and_delta() {
        let al = alpha_coefficients(&unit(), Vec2::from_angle(0.4)).unwrap();
        assert!((al.alpha1 - PI).abs() < 1e-14);
        assert!((al.alpha3 + PI / 2.0).abs() < 1e-14);
        assert!((al.alpha4 + 1.37 * PI * 2f64.powf(-2.5)).abs() < 1e-14);
        assert!((al.alpha4 + 0.760_844).abs() < 1e-6);
        let d = al.delta();
        assert!((d - 1.135_86).abs() < 1e-5);
        assert!(al.polynomial(d).abs() < 1e-12);
    }

    #[test]
    fn degenerate_alpha_gives_zero() {
        let al = AlphaCoefficients {
            alpha1: -1.0,
            alpha3: 0.0,
            alpha4: -1.0,
        };
        assert_eq!(al.delta(), 0.0);
        let al = AlphaCoefficients {
            alpha1: 0.0,
            alpha3: 0.0,
            alpha4: -1.0,
        };
        assert_eq!(al.delta(), 0.0);
    }

    #[test]
    fn boundary_shape_and_area() {
        let est = siden_boundary(&unit(), 8).unwrap();
        assert_eq!(est.delta.len(), 8);
        for d in &est.delta {
            assert!((d - est.delta[0]).abs() < 1e-10);
        }
        assert!(siden_boundary(&unit(), 6).is_ok());
        assert!(siden_boundary(&unit(), 7).is_err());
        assert!(siden_boundary(&unit(), 2).is_err());
        let est = siden_boundary(&unit(), 512).unwrap();
        let disc = PI * est.delta[0] * est.delta[0];
        assert!((est.area() - disc).abs() / disc < 5e-3);
        assert!((est.area() - 4.053).abs() / 4.053 < 5e-3);
        let zero = SidenEstimate {
            delta: vec![0.0; 8],
            ..siden_boundary(&unit(), 8).unwrap()
        };
        assert_eq!(siden_area(&zero), 0.0);
    }

    #[test]
    fn positive_atom_has_no_crossing() {
        let r = true_siden_boundary(&unit(), Vec2::new(1.0, 0.0), 20.0).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn dipole_crossing_lies_just_past_the_gap() {
        let p = Pattern::new(vec![
            Atom::isotropic(1.0, Vec2::zero(), 1.0).unwrap(),
            Atom::isotropic(-1.0, Vec2::new(3.0, 0.0), 1.0).unwrap(),
        ])
        .unwrap();
        let t = Vec2::new(1.0, 0.0);
        let w = true_siden_boundary(&p, t, 20.0).unwrap().unwrap();
        assert!(w > 3.0 && w < 3.2, "{w}");
        assert!(delta_t(&p, t).unwrap() <= w);
    }
}

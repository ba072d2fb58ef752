//! Alignment error bounds under Gaussian and generic noise.
//!
//! The Gaussian-noise bound combines three kinds of constants:
//!
//! * `r̲₀, r̲₂, r̲₃` bound `d²f(tT)/dt² ≥ r̲₀ + r̲₂ t² + r̲₃ t³` from below;
//! * `C_{σ²Δh}` and `C_{σ²h″}` bound the variances of `h(0) - h(tT)` and of
//!   `h″(tT)` per unit `η²` on the ball of radius `t̄₀`;
//! * `t̄₀` ties them together.
//!
//! The generic-noise bounds only need `‖p‖`, an upper bound on
//! `‖d²p(· + tT)/dt²‖` and, for the sharper variant, a uniform bound on the
//! correlation between the noise and the translates of `p`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::atoms::{Atom, Pattern};
use crate::distance::{DistanceField, PatternPairs};
use crate::error::{Error, Result};
use crate::linalg::{Sym2, Vec2};
use crate::scalar::{exp_cut, lit, to_f64, Scalar};

/// Which noise model a [`NoiseSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    GaussianAnalytic,
    Generic,
}

impl NoiseKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseKind::GaussianAnalytic => "gaussian-analytic",
            NoiseKind::Generic => "generic",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-analytic" | "gaussian" => Ok(NoiseKind::GaussianAnalytic),
            "generic" => Ok(NoiseKind::Generic),
            other => Err(Error::Parse(format!("unknown noise kind '{other}'"))),
        }
    }
}

/// Parameters of the noise model.
///
/// The analytic model places `l` isotropic atoms of scale `epsilon` at
/// centers uniform on `[-b, b]²` with `N(0, eta²)` coefficients. The generic
/// model only fixes the noise norm `nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec<S = f64> {
    pub kind: NoiseKind,
    pub l: usize,
    pub epsilon: S,
    pub eta: S,
    pub b: S,
    pub nu: S,
}

impl<S: Scalar> NoiseSpec<S> {
    pub fn gaussian(l: usize, epsilon: S, eta: S, b: S) -> Result<Self> {
        Self {
            kind: NoiseKind::GaussianAnalytic,
            l,
            epsilon,
            eta,
            b,
            nu: S::zero(),
        }
        .validated()
    }

    pub fn generic(nu: S) -> Result<Self> {
        Self {
            kind: NoiseKind::Generic,
            l: 1,
            epsilon: S::one(),
            eta: S::zero(),
            b: S::one(),
            nu,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.l < 1 {
            return bad("noise.L must be >= 1");
        }
        if !(self.epsilon > S::zero()) || !self.epsilon.is_finite() {
            return bad("noise.epsilon must be > 0");
        }
        if !(self.b > S::zero()) || !self.b.is_finite() {
            return bad("noise.b must be > 0");
        }
        if !(self.eta >= S::zero()) || !self.eta.is_finite() {
            return bad("noise.eta must be >= 0");
        }
        if !(self.nu >= S::zero()) || !self.nu.is_finite() {
            return bad("noise.nu must be >= 0");
        }
        Ok(self)
    }

    pub fn with_eta(mut self, eta: S) -> Self {
        self.eta = eta;
        self
    }
}

/// `(r̲₀, r̲₂, r̲₃)` of the second-derivative lower bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDerivativeConstants<S = f64> {
    pub r0: S,
    pub r2: S,
    pub r3: S,
}

impl<S: Scalar> SecondDerivativeConstants<S> {
    /// `r̲₀ + r̲₂ t² + r̲₃ t³`.
    pub fn lower_bound(&self, t: S) -> S {
        self.r0 + (self.r2 + self.r3 * t) * t * t
    }

    pub fn tbar0(&self) -> S {
        tbar0(self.r0, self.r2, self.r3)
    }
}

/// `R₀ = Σ_jk c_j c_k Q_jk (Σ⁻¹ - Σ⁻¹ d dᵀ Σ⁻¹)`; `Tᵀ R₀ T` is `d²f/dt²` at 0.
pub fn curvature_matrix<S: Scalar>(p: &Pattern<S>) -> Result<Sym2<S>> {
    let pairs = PatternPairs::new(p)?;
    Ok(curvature_matrix_from(&pairs))
}

fn curvature_matrix_from<S: Scalar>(pairs: &PatternPairs<S>) -> Sym2<S> {
    let mut r0 = Sym2::zero();
    for e in &pairs.entries {
        let g = &e.geometry;
        let q = e.weight * exp_cut(-e.c);
        let v = g.inv.apply(g.d);
        r0 = r0 + (g.inv - Sym2::outer(v)).scale(q);
    }
    r0
}

/// Constants of the lower bound on `d²f(tT)/dt²`.
pub fn second_derivative_constants<S: Scalar>(
    p: &Pattern<S>,
) -> Result<SecondDerivativeConstants<S>> {
    p.ensure_nonzero()?;
    let pairs = PatternPairs::new(p)?;
    let r0 = curvature_matrix_from(&pairs).lambda_min();
    if !(r0 > S::zero()) {
        return Err(Error::NotPositiveDefinite {
            lambda_min: to_f64(r0),
        });
    }
    let (quarter, eighth, sixteenth): (S, S, S) = (lit(0.25), lit(0.125), lit(1.0 / 16.0));
    let (six, eight, twenty_four): (S, S, S) = (lit(6.0), lit(8.0), lit(24.0));
    let r3_const: S = lit(5.46 / 2f64.powf(2.5));
    let mut r2 = S::zero();
    let mut r3 = S::zero();
    for e in &pairs.entries {
        let g = &e.geometry;
        let q = e.weight * exp_cut(-e.c);
        let (lmin, lmax) = g.inv.eigenvalues();
        let a_hi2 = quarter * lmax * lmax;
        let a_lo2 = quarter * lmin * lmin;
        let r2_max = g.inv.apply(g.d).norm_sq();
        let b2a = eighth * r2_max * lmax;
        let b4 = sixteenth * r2_max * r2_max;
        if e.weight > S::zero() {
            r2 = r2 + q * (-eight * b4 - six * a_hi2);
        } else {
            r2 = r2 + q * (twenty_four * b2a - six * a_lo2);
        }
        r3 = r3 - r3_const * e.weight.abs() * lmax * lmax * lmax.sqrt();
    }
    Ok(SecondDerivativeConstants {
        r0,
        r2: r2.min(S::zero()),
        r3,
    })
}

/// `t̄₀ = √(r̲₀ / (2|r̲₂| + 2^{2/3} r̲₀^{1/3} |r̲₃|^{2/3}))`.
pub fn tbar0<S: Scalar>(r0_lb: S, r2_lb: S, r3_lb: S) -> S {
    let two: S = lit(2.0);
    let third: S = lit(1.0 / 3.0);
    let two_thirds: S = lit(2.0 / 3.0);
    let denom =
        two * r2_lb.abs() + two.powf(two_thirds) * r0_lb.powf(third) * r3_lb.abs().powf(two_thirds);
    (r0_lb / denom).sqrt()
}

/// Per-atom data of the noise-variance bounds: `α_k ≤ β_k` are the
/// eigenvalues of `Φ_k = Ψ_k (σ_k² + E²)⁻¹ Ψ_kᵀ` and `κ_k` the inner product
/// scale of an atom against a noise atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseAtomTerms<S = f64> {
    pub phi: Sym2<S>,
    pub alpha: S,
    pub beta: S,
    pub kappa: S,
}

pub fn noise_atom_terms<S: Scalar>(atom: &Atom<S>, epsilon: S) -> NoiseAtomTerms<S> {
    let e2 = epsilon * epsilon;
    let s = atom.sigma();
    let (vx, vy) = (s.x * s.x + e2, s.y * s.y + e2);
    let phi = Sym2::rotated_diag(atom.psi(), S::one() / vx, S::one() / vy);
    let (alpha, beta) = phi.eigenvalues();
    let kappa = S::PI() * s.x * s.y * e2 / (vx * vy).sqrt();
    NoiseAtomTerms {
        phi,
        alpha,
        beta,
        kappa,
    }
}

struct PairNoise<S> {
    b: S,
    tbar0: S,
}

impl<S: Scalar> PairNoise<S> {
    fn sq(x: S) -> S {
        x * x
    }

    /// `𝔟`, `𝔠` and `𝔡` along one axis.
    fn frak(&self, bj: S, bk: S, tj: S, tk: S) -> (S, S, S) {
        let sum = bj + bk;
        let m = (bj * tj + bk * tk) / sum;
        let (b, t0) = (self.b, self.tbar0);
        let fb = sum * Self::sq(b + t0 - m).max(Self::sq(-b - t0 - m));
        let shift = t0 * bj / sum;
        let fc = sum * Self::sq(b + shift - m).max(Self::sq(-b - shift - m));
        let dt = tk - tj;
        let fd = bj * bk / sum * Self::sq(-t0 + dt).max(Self::sq(t0 + dt));
        (fb, fc, fd)
    }

    /// `𝒟` along one axis for eigenvalue pair `(λ_j, λ_k)`.
    fn d_axis(&self, lj: S, lk: S, tj: S, tk: S) -> S {
        let sum = lj + lk;
        let h = -(lj * tj + lk * tk) / sum;
        let g = (lj * tj * tj + lk * tk * tk) / sum;
        let root = sum.sqrt();
        let four: S = lit(4.0);
        let pref = S::PI().sqrt() / (four * self.b) / root;
        pref * exp_cut(-sum * (g - h * h))
            * ((root * (self.b + h)).erf() - (root * (-self.b + h)).erf())
    }
}

/// Both uniform bounds of one atom pair: `(B̄̄, B̲̲, c̄, d̲)`.
fn pair_bounds<S: Scalar>(
    pn: &PairNoise<S>,
    tj: Vec2<S>,
    tk: Vec2<S>,
    nj: &NoiseAtomTerms<S>,
    nk: &NoiseAtomTerms<S>,
) -> (S, S, S, S) {
    let four: S = lit(4.0);
    let two: S = lit(2.0);
    let dist2 = (tk - tj).norm_sq();
    let (bj, bk) = (nj.beta, nk.beta);
    let (aj, ak) = (nj.alpha, nk.alpha);
    let (fbx, fcx, fdx) = pn.frak(bj, bk, tj.x, tk.x);
    let (fby, fcy, fdy) = pn.frak(bj, bk, tj.y, tk.y);
    let b_lo = exp_cut(-fbx - fby - bj * bk * dist2 / (bj + bk));
    let c_hi = S::PI() / (four * pn.b * pn.b * (aj + ak));
    let b_hi = c_hi * exp_cut(-aj * ak * dist2 / (aj + ak));
    let c_lo = exp_cut(-fcx - fcy - fdx - fdy);
    let d_lo = pn.d_axis(bj, bk, tj.x, tk.x) * pn.d_axis(bj, bk, tj.y, tk.y);
    let d_hi = pn.d_axis(aj, ak, tj.x, tk.x) * pn.d_axis(aj, ak, tj.y, tk.y);
    let c_bar = b_hi - two * c_lo + d_hi;
    let d_bar = b_lo - two * c_hi + d_lo;
    (b_hi, b_lo, c_bar, d_bar)
}

/// `C_{σ²Δh}`: the variance of `h(0) - h(tT)` is below `C_{σ²Δh} η²` on the
/// ball of radius `tbar0`.
pub fn var_dh_constant<S: Scalar>(p: &Pattern<S>, noise: &NoiseSpec<S>, tbar0: S) -> Result<S> {
    check_tbar0(tbar0)?;
    let pn = PairNoise { b: noise.b, tbar0 };
    let terms: Vec<_> = p
        .atoms()
        .iter()
        .map(|a| noise_atom_terms(a, noise.epsilon))
        .collect();
    let mut total = S::zero();
    for (j, aj) in p.atoms().iter().enumerate() {
        for (k, ak) in p.atoms().iter().enumerate() {
            let cc = aj.coeff * ak.coeff;
            if cc == S::zero() {
                continue;
            }
            let (_, _, c_bar, d_bar) = pair_bounds(&pn, aj.tau, ak.tau, &terms[j], &terms[k]);
            let w = cc * terms[j].kappa * terms[k].kappa;
            total = total + w * if cc > S::zero() { c_bar } else { d_bar };
        }
    }
    Ok(lit::<S>(4.0) * lit::<S>(noise.l as f64) * total)
}

/// `C_{σ²h″}`: the variance of `h″(tT)` is below `C_{σ²h″} η²` on the ball
/// of radius `tbar0`.
pub fn var_h2_constant<S: Scalar>(p: &Pattern<S>, noise: &NoiseSpec<S>, tbar0: S) -> Result<S> {
    check_tbar0(tbar0)?;
    let pn = PairNoise { b: noise.b, tbar0 };
    let terms: Vec<_> = p
        .atoms()
        .iter()
        .map(|a| noise_atom_terms(a, noise.epsilon))
        .collect();
    let four: S = lit(4.0);
    let two: S = lit(2.0);
    let four_b2 = four * noise.b * noise.b;
    let l_const: S = lit(
        (3f64.powf(0.75) + 3f64.powf(1.25)) * (-(3f64.sqrt()) / 2.0).exp() / 16.0
            + 3.0 * PI.sqrt() / 2f64.powf(4.5),
    );
    let n_const: S = lit((-0.5f64).exp() / 4.0 + PI.sqrt() / 2f64.powf(2.5));
    // (Ē̄_j, F̄̄_j) per atom.
    let ef: Vec<(S, S)> = terms
        .iter()
        .map(|t| {
            let a = t.alpha;
            let l_bar = l_const / (a * a * a.sqrt());
            let m_bar = (S::PI() / (two * a)).sqrt();
            let n_bar = n_const / (a * a.sqrt());
            let b4 = t.beta * t.beta * t.beta * t.beta;
            (
                b4 / four_b2 * (two * l_bar * m_bar + two * n_bar * n_bar),
                m_bar * m_bar / four_b2,
            )
        })
        .collect();
    let (eight, sixteen): (S, S) = (lit(8.0), lit(16.0));
    let mut total = S::zero();
    for (j, aj) in p.atoms().iter().enumerate() {
        for (k, ak) in p.atoms().iter().enumerate() {
            let cc = aj.coeff * ak.coeff;
            if cc == S::zero() {
                continue;
            }
            let (tj, tk) = (&terms[j], &terms[k]);
            let (b_hi, b_lo, _, _) = pair_bounds(&pn, aj.tau, ak.tau, tj, tk);
            let (ej, fj) = ef[j];
            let (ek, fk) = ef[k];
            let val = if cc > S::zero() {
                sixteen * (ej * ek).sqrt() + four * tj.beta * tk.beta * b_hi
            } else {
                -eight * tk.beta * (ej * fk).sqrt() - eight * tj.beta * (fj * ek).sqrt()
                    + four * tj.alpha * tk.alpha * b_lo
            };
            total = total + cc * tj.kappa * tk.kappa * val;
        }
    }
    Ok(four * lit::<S>(noise.l as f64) * total)
}

fn check_tbar0<S: Scalar>(tbar0: S) -> Result<()> {
    if !(tbar0 > S::zero()) || !tbar0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tbar0 must be > 0, got {tbar0}"
        )));
    }
    Ok(())
}

/// `E[h(tT)] = (π/2) L η² ε²`, independent of the translation.
pub fn mean_deviation<S: Scalar>(noise: &NoiseSpec<S>) -> S {
    lit::<S>(PI / 2.0)
        * lit::<S>(noise.l as f64)
        * noise.eta
        * noise.eta
        * noise.epsilon
        * noise.epsilon
}

/// The pattern whose values are the inner products of `p` with a noise atom
/// centered at each point: `πε² · smooth(p, ε)`.
pub fn noise_response<S: Scalar>(p: &Pattern<S>, epsilon: S) -> Pattern<S> {
    p.smooth(epsilon).scaled(S::PI() * epsilon * epsilon)
}

/// Sharper, sampled variants of `C_{σ²Δh}` and `C_{σ²h″}`.
///
/// Both variances integrate a squared response over the uniform noise
/// centers; integrating over the whole plane instead of `[-b, b]²` keeps
/// them upper bounds and gives closed forms in the response pattern `G`:
/// `Var Δh(tT) ≤ (L η² / b²) ‖G(· + tT) - G‖²` and
/// `Var h″(tT) ≤ (L η² / b²) ‖∂²_T G‖²`. The maxima over the `tbar0` ball
/// are sampled on 64 directions × 33 radii and inflated by 5%.
pub fn sharpened_variance_constants<S: Scalar>(
    p: &Pattern<S>,
    noise: &NoiseSpec<S>,
    tbar0: S,
) -> Result<(S, S)> {
    check_tbar0(tbar0)?;
    let g = noise_response(p, noise.epsilon);
    let pairs = PatternPairs::new(&g)?;
    let mut max_dh = S::zero();
    let mut max_h2 = S::zero();
    for i in 0..32 {
        let dir = Vec2::from_angle(lit::<S>(PI * i as f64 / 32.0));
        let profile = pairs.profile(dir)?;
        for s in 0..=32 {
            let t = tbar0 * lit(s as f64 / 32.0);
            max_dh = max_dh.max(profile.value(t));
        }
        max_h2 = max_h2.max(directional_second_derivative_norm_sq(&pairs, dir));
    }
    let scale = lit::<S>(1.05) * lit::<S>(noise.l as f64) / (noise.b * noise.b);
    Ok((scale * max_dh, scale * max_h2))
}

/// `‖∂²_T p‖²`, which does not depend on the translation.
fn directional_second_derivative_norm_sq<S: Scalar>(pairs: &PatternPairs<S>, dir: Vec2<S>) -> S {
    let (twelve, sixteen, forty_eight, half): (S, S, S, S) =
        (lit(12.0), lit(16.0), lit(48.0), lit(0.5));
    let mut total = S::zero();
    for e in &pairs.entries {
        let (a, b) = e.geometry.ab(dir);
        let b2 = b * b;
        let q = e.weight * exp_cut(-e.c);
        total = total + half * q * (sixteen * b2 * b2 - forty_eight * a * b2 + twelve * a * a);
    }
    total
}

/// Upper bound `R_{p″}` on `‖d²p(· + tT)/dt²‖`: the closed-form norm
/// maximized over 64 directions and inflated by 5%.
pub fn second_derivative_norm_bound<S: Scalar>(p: &Pattern<S>) -> Result<S> {
    let pairs = PatternPairs::new(p)?;
    let mut best = S::zero();
    for i in 0..64 {
        let dir = Vec2::from_angle(lit::<S>(PI * i as f64 / 64.0));
        best = best.max(directional_second_derivative_norm_sq(&pairs, dir));
    }
    Ok(lit::<S>(1.05) * best.max(S::zero()).sqrt())
}

/// Uniform bound `r_pz` on `|⟨p(· + tT), z⟩|` over `t ≤ t_max`.
///
/// A polar grid (64 directions × 200 radii) is searched, the eight best
/// samples are refined by a shrinking compass search, and the maximum is
/// inflated by 2%.
pub fn correlation_bound<S: Scalar>(p: &Pattern<S>, z: &Pattern<S>, t_max: S) -> Result<S> {
    if !(t_max >= S::zero()) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be >= 0, got {t_max}"
        )));
    }
    let field = DistanceField::new(p, z)?;
    let corr = |u: Vec2<S>| field.correlation(u).abs();
    let mut samples: Vec<(S, Vec2<S>)> = vec![(corr(Vec2::zero()), Vec2::zero())];
    for i in 0..64 {
        let dir = Vec2::from_angle(lit::<S>(2.0 * PI * i as f64 / 64.0));
        for r in 1..=200 {
            let u = dir.scale(t_max * lit(r as f64 / 200.0));
            samples.push((corr(u), u));
        }
    }
    samples.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut best = samples[0].0;
    let step0 = t_max / lit(200.0);
    for &(v0, u0) in samples.iter().take(8) {
        let (mut v, mut u, mut step) = (v0, u0, step0.max(lit(1e-3)));
        for _ in 0..60 {
            let mut moved = false;
            for d in [
                Vec2::new(S::one(), S::zero()),
                Vec2::new(S::zero(), S::one()),
            ] {
                for sgn in [S::one(), -S::one()] {
                    let cand = u + d.scale(step * sgn);
                    if cand.norm() > t_max {
                        continue;
                    }
                    let cv = corr(cand);
                    if cv > v {
                        v = cv;
                        u = cand;
                        moved = true;
                    }
                }
            }
            if !moved {
                step = step * lit(0.5);
            }
        }
        best = best.max(v);
    }
    Ok(lit::<S>(1.02) * best)
}

/// Default translation range for [`correlation_bound`]: far enough that
/// no atom of the shifted `p` overlaps any atom of `z`.
pub fn default_correlation_range<S: Scalar>(p: &Pattern<S>, z: &Pattern<S>) -> S {
    p.support_radius() + z.support_radius()
}

/// Generic-noise admissible level and error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenericBound<S = f64> {
    pub nu0: S,
    /// Omitted when `nu > nu0`.
    pub ru0: Option<S>,
}

/// Pattern-only quantities shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternConstants<S = f64> {
    pub second: SecondDerivativeConstants<S>,
    pub tbar0: S,
    pub rp: S,
    pub rp2: S,
}

impl<S: Scalar> PatternConstants<S> {
    pub fn new(p: &Pattern<S>) -> Result<Self> {
        let second = second_derivative_constants(p)?;
        Ok(Self {
            tbar0: second.tbar0(),
            second,
            rp: p.norm(),
            rp2: second_derivative_norm_bound(p)?,
        })
    }

    pub fn generic(&self, nu: S, two_sided: bool) -> GenericBound<S> {
        let (eight, two): (S, S) = (lit(8.0), lit(2.0));
        let k: S = if two_sided { two } else { S::one() };
        let (r0, t2) = (self.second.r0, self.tbar0 * self.tbar0);
        let nu0 = t2 * r0 / (k * (eight * self.rp + two * self.rp2 * t2));
        let denom = r0 - k * two * self.rp2 * nu;
        let ru0 = if nu <= nu0 && denom > S::zero() {
            Some((k * eight * self.rp * nu / denom).sqrt())
        } else {
            None
        };
        GenericBound { nu0, ru0 }
    }

    /// Small-correlation admissible level and `Q_{u₀}` for a given `r_pz`.
    pub fn uncorrelated(&self, rpz: S, nu: S) -> Result<UncorrelatedBound<S>> {
        let (eight, two): (S, S) = (lit(8.0), lit(2.0));
        let (r0, t2) = (self.second.r0, self.tbar0 * self.tbar0);
        let threshold = t2 * r0 / eight;
        if !(rpz < threshold) {
            return Err(Error::CorrelationTooLarge {
                r_pz: to_f64(rpz),
                threshold: to_f64(threshold),
            });
        }
        let nu0 = (t2 * r0 - eight * rpz) / (two * self.rp2 * t2);
        let denom = r0 - two * self.rp2 * nu;
        let qu0 = if nu <= nu0 && denom > S::zero() {
            Some((eight * rpz / denom).sqrt())
        } else {
            None
        };
        Ok(UncorrelatedBound { rpz, nu0, qu0 })
    }
}

/// Generic-noise bound `(ν₀, R_{u₀})`; two-sided noise doubles `ν`.
pub fn generic_bound<S: Scalar>(p: &Pattern<S>, nu: S, two_sided: bool) -> Result<GenericBound<S>> {
    Ok(PatternConstants::new(p)?.generic(nu, two_sided))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncorrelatedBound<S = f64> {
    pub rpz: S,
    pub nu0: S,
    /// Omitted when `nu > nu0`.
    pub qu0: Option<S>,
}

/// Small-correlation bound for the noise pattern `z` with norm `nu`.
pub fn uncorrelated_bound<S: Scalar>(
    p: &Pattern<S>,
    z: &Pattern<S>,
    nu: S,
) -> Result<UncorrelatedBound<S>> {
    let consts = PatternConstants::new(p)?;
    let rpz = correlation_bound(p, z, default_correlation_range(p, z))?;
    consts.uncorrelated(rpz, nu)
}

/// Which variance constants feed the Gaussian bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarianceMode {
    /// Closed-form constants over the noise support `[-b, b]²`.
    #[default]
    ClosedForm,
    /// [`sharpened_variance_constants`].
    Sharpened,
}

/// Every bound constant for one pattern and noise specification.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<S = f64> {
    pub r0_lb: S,
    pub r2_lb: S,
    pub r3_lb: S,
    pub c_var_dh: S,
    pub c_var_h2: S,
    pub tbar0: S,
    pub eta: S,
    pub eta0: S,
    pub s: S,
    pub rt0: Option<S>,
    pub probability: S,
    pub two_sided: bool,
    pub mu_h: S,
    pub rp: S,
    pub rp2: S,
    pub nu: S,
    pub nu0: S,
    pub ru0: Option<S>,
    pub rpz: Option<S>,
    pub nu0_uncorrelated: Option<S>,
    pub qu0: Option<S>,
    pub diagnostics: Vec<String>,
}

/// Gaussian-noise bound: `η₀`, `R_{t₀}` (when `η ≤ η₀`) and the generic
/// fields for `noise.nu`.
pub fn gaussian_bound<S: Scalar>(
    p: &Pattern<S>,
    noise: &NoiseSpec<S>,
    s: S,
    two_sided: bool,
) -> Result<BoundReport<S>> {
    gaussian_bound_with(p, noise, s, two_sided, VarianceMode::ClosedForm)
}

pub fn gaussian_bound_with<S: Scalar>(
    p: &Pattern<S>,
    noise: &NoiseSpec<S>,
    s: S,
    two_sided: bool,
    mode: VarianceMode,
) -> Result<BoundReport<S>> {
    let noise = noise.validated()?;
    let two: S = lit(2.0);
    if !(s > two.sqrt()) {
        return Err(Error::InvalidArgument(format!(
            "s must exceed sqrt(2), got {s}"
        )));
    }
    let consts = PatternConstants::new(p)?;
    let t0 = consts.tbar0;
    let (c_dh, c_h2) = match mode {
        VarianceMode::ClosedForm => (
            var_dh_constant(p, &noise, t0)?,
            var_h2_constant(p, &noise, t0)?,
        ),
        VarianceMode::Sharpened => sharpened_variance_constants(p, &noise, t0)?,
    };
    let mut diagnostics = Vec::new();
    let k: S = if two_sided { two.sqrt() } else { S::one() };
    let (cs_dh, cs_h2) = (c_dh.max(S::zero()).sqrt(), c_h2.max(S::zero()).sqrt());
    let r0 = consts.second.r0;
    let eta0 = t0 * t0 * r0 / (k * (two * s * cs_dh + t0 * t0 * s * cs_h2));
    let (r_dh, r_h2) = (cs_dh * noise.eta, cs_h2 * noise.eta);
    let denom = r0 - k * s * r_h2;
    let rt0 = if noise.eta > eta0 {
        diagnostics.push(format!(
            "eta = {} exceeds eta0 = {}; R_t0 omitted",
            noise.eta, eta0
        ));
        None
    } else if !(denom > S::zero()) {
        diagnostics.push("r0 - s R_sigma_h'' is not positive; R_t0 omitted".to_string());
        None
    } else {
        Some((k * two * s * r_dh / denom).sqrt())
    };
    let generic = consts.generic(noise.nu, two_sided);
    if generic.ru0.is_none() {
        diagnostics.push(format!(
            "nu = {} exceeds nu0 = {}; R_u0 omitted",
            noise.nu, generic.nu0
        ));
    }
    Ok(BoundReport {
        r0_lb: r0,
        r2_lb: consts.second.r2,
        r3_lb: consts.second.r3,
        c_var_dh: c_dh,
        c_var_h2: c_h2,
        tbar0: t0,
        eta: noise.eta,
        eta0,
        s,
        rt0,
        probability: S::one() - two / (s * s),
        two_sided,
        mu_h: mean_deviation(&noise),
        rp: consts.rp,
        rp2: consts.rp2,
        nu: noise.nu,
        nu0: generic.nu0,
        ru0: generic.ru0,
        rpz: None,
        nu0_uncorrelated: None,
        qu0: None,
        diagnostics,
    })
}

impl<S: Scalar> BoundReport<S> {
    /// Fills the small-correlation fields for the noise pattern `z`.
    pub fn with_correlation(mut self, p: &Pattern<S>, z: &Pattern<S>) -> Result<Self> {
        let rpz = correlation_bound(p, z, default_correlation_range(p, z))?;
        self.rpz = Some(rpz);
        let consts = PatternConstants {
            second: SecondDerivativeConstants {
                r0: self.r0_lb,
                r2: self.r2_lb,
                r3: self.r3_lb,
            },
            tbar0: self.tbar0,
            rp: self.rp,
            rp2: self.rp2,
        };
        match consts.uncorrelated(rpz, self.nu) {
            Ok(u) => {
                self.nu0_uncorrelated = Some(u.nu0);
                self.qu0 = u.qu0;
            }
            Err(e) => self.diagnostics.push(e.to_string()),
        }
        Ok(self)
    }

    /// Column names of [`Self::to_csv_row`], in order.
    pub const CSV_COLUMNS: [&'static str; 21] = [
        "r0_lb",
        "r2_lb",
        "r3_lb",
        "c_var_dh",
        "c_var_h2",
        "tbar0",
        "eta",
        "eta0",
        "s",
        "rt0",
        "probability",
        "two_sided",
        "mu_h",
        "rp",
        "rp2",
        "nu",
        "nu0",
        "ru0",
        "rpz",
        "nu0_uncorrelated",
        "qu0",
    ];

    fn fields(&self) -> Vec<(&'static str, String)> {
        let f = |x: S| format!("{:e}", to_f64(x));
        let o = |x: Option<S>| x.map(f).unwrap_or_default();
        let values = vec![
            f(self.r0_lb),
            f(self.r2_lb),
            f(self.r3_lb),
            f(self.c_var_dh),
            f(self.c_var_h2),
            f(self.tbar0),
            f(self.eta),
            f(self.eta0),
            f(self.s),
            o(self.rt0),
            f(self.probability),
            self.two_sided.to_string(),
            f(self.mu_h),
            f(self.rp),
            f(self.rp2),
            f(self.nu),
            f(self.nu0),
            o(self.ru0),
            o(self.rpz),
            o(self.nu0_uncorrelated),
            o(self.qu0),
        ];
        Self::CSV_COLUMNS.iter().copied().zip(values).collect()
    }

    /// `key = value` lines, one per constant, then any diagnostics.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(out, "{k} = {v}");
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "# {d}");
        }
        out
    }

    pub fn csv_header() -> String {
        Self::CSV_COLUMNS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.fields()
            .into_iter()
            .map(|(_, v)| v)
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Pattern {
        Pattern::new(vec![Atom::isotropic(1.0, Vec2::zero(), 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn unit_atom_second_derivative_constants() {
        let c = second_derivative_constants(&unit()).unwrap();
        assert!((c.r0 - PI).abs() < 1e-14);
        assert!((c.r2 + 1.5 * PI).abs() < 1e-14);
        assert!((c.r3 + 5.46 / 2f64.powf(2.5) * PI).abs() < 1e-13);
        assert!((c.r3 + 3.0323).abs() < 1e-4);
        assert!((c.tbar0() - 0.4688).abs() < 1e-3);
    }

    #[test]
    fn zero_pattern_is_rejected() {
        let p = Pattern::new(vec![Atom::isotropic(0.0, Vec2::zero(), 1.0).unwrap()]).unwrap();
        assert!(matches!(
            second_derivative_constants(&p),
            Err(Error::ZeroPattern)
        ));
    }

    #[test]
    fn tbar0_without_r2() {
        let t = tbar0(2.0, 0.0, -1.0);
        assert!((t - (2.0 / (2f64.powf(2.0 / 3.0) * 2f64.powf(1.0 / 3.0))).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unit_atom_second_derivative_norm() {
        let r = second_derivative_norm_bound(&unit()).unwrap();
        assert!((r - 1.05 * (1.5 * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_atom_variance_constants_reduce_structurally() {
        let p = unit();
        let noise = NoiseSpec::gaussian(750, 0.1, 0.01, 4.0).unwrap();
        let t0 = 0.4688;
        let nt = noise_atom_terms(&p.atoms()[0], 0.1);
        let pn = PairNoise { b: 4.0, tbar0: t0 };
        let (_, _, c_bar, _) = pair_bounds(&pn, Vec2::zero(), Vec2::zero(), &nt, &nt);
        let c = var_dh_constant(&p, &noise, t0).unwrap();
        assert!((c - 4.0 * 750.0 * nt.kappa * nt.kappa * c_bar).abs() <= 1e-12 * c.abs());
        let double = NoiseSpec { l: 1500, ..noise };
        assert!((var_dh_constant(&p, &double, t0).unwrap() - 2.0 * c).abs() <= 1e-12 * c.abs());
        let h = var_h2_constant(&p, &noise, t0).unwrap();
        assert!((var_h2_constant(&p, &double, t0).unwrap() - 2.0 * h).abs() <= 1e-12 * h.abs());
    }

    #[test]
    fn zero_noise_gives_zero_bounds() {
        let noise = NoiseSpec::gaussian(750, 0.1, 0.0, 4.0).unwrap();
        let r = gaussian_bound(&unit(), &noise, 2.0, false).unwrap();
        assert_eq!(r.rt0, Some(0.0));
        assert_eq!(r.ru0, Some(0.0));
        assert!((r.probability - 0.5).abs() < 1e-15);
        assert!(gaussian_bound(&unit(), &noise, 1.4, false).is_err());
    }

    #[test]
    fn uncorrelated_threshold_is_enforced() {
        let consts = PatternConstants::new(&unit()).unwrap();
        let thr = consts.tbar0 * consts.tbar0 * consts.second.r0 / 8.0;
        assert!(matches!(
            consts.uncorrelated(thr, 0.0),
            Err(Error::CorrelationTooLarge { .. })
        ));
        let u = consts.uncorrelated(0.0, 0.01).unwrap();
        assert_eq!(u.qu0, Some(0.0));
    }

    #[test]
    fn report_serializes_every_column() {
        let noise = NoiseSpec::gaussian(750, 0.1, 0.001, 4.0).unwrap();
        let r = gaussian_bound(&unit(), &noise, 2.0, false).unwrap();
        let row = r.to_csv_row();
        assert_eq!(
            row.split(',').count(),
            BoundReport::<f64>::CSV_COLUMNS.len()
        );
        assert!(r.to_key_value().contains("r0_lb = 3.141592653589793e0"));
    }
}

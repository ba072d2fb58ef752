//! Noise sampling: the analytic Gaussian-atom field, per-pixel digital noise,
//! generic structured noise patterns, and random reference patterns.
//!
//! Every sampler draws from a ChaCha8 generator seeded with the root seed
//! and positioned on a stream (one stream per trial), so any trial can be
//! replayed on its own. Normals come from the Box–Muller transform.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atoms::{Atom, Pattern};
use crate::bounds::{NoiseKind, NoiseSpec};
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::raster::RasterImage;

/// Generator for trial `stream` under `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Box–Muller normal sampler; the second value of each pair is kept for the
/// next call.
#[derive(Debug, Clone, Default)]
pub struct Normal {
    spare: Option<f64>,
}

impl Normal {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], so the log is finite.
        let u1 = 1.0 - rng.gen::<f64>();
        let u2 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// One realization of the analytic noise field.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub pattern: Pattern,
    pub seed: u64,
    pub spec: NoiseSpec,
}

/// `L` isotropic atoms of scale `ε`, centers uniform on `[-b, b]²`,
/// coefficients `N(0, η²)`.
pub fn sample_gaussian_field(spec: &NoiseSpec, seed: u64) -> Result<NoiseDraw> {
    let mut rng = trial_rng(seed, 0);
    let pattern = sample_gaussian_field_with(spec, &mut rng)?;
    Ok(NoiseDraw {
        pattern,
        seed,
        spec: *spec,
    })
}

/// [`sample_gaussian_field`] drawing from a caller-supplied generator.
pub fn sample_gaussian_field_with<R: Rng + ?Sized>(
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<Pattern> {
    let spec = spec.validated()?;
    if spec.kind != NoiseKind::GaussianAnalytic {
        return Err(Error::InvalidArgument(
            "noise.kind must be gaussian-analytic".into(),
        ));
    }
    let mut normal = Normal::new();
    let mut atoms = Vec::with_capacity(spec.l);
    for _ in 0..spec.l {
        let x = rng.gen_range(-spec.b..=spec.b);
        let y = rng.gen_range(-spec.b..=spec.b);
        let zeta = spec.eta * normal.sample(rng);
        atoms.push(Atom::isotropic(zeta, Vec2::new(x, y), spec.epsilon)?);
    }
    Pattern::new(atoms)
}

/// Adds i.i.d. `N(0, η²)` to every pixel.
pub fn add_digital_noise(img: &RasterImage, eta: f64, seed: u64) -> RasterImage {
    let mut rng = trial_rng(seed, 0);
    let mut normal = Normal::new();
    let mut out = img.clone();
    if eta == 0.0 {
        return out;
    }
    for v in &mut out.pixels {
        *v += eta * normal.sample(&mut rng);
    }
    out
}

/// How [`make_generic_noise`] builds its pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenericNoiseMode {
    /// A random subset of the reference atoms with their own coefficients.
    CorrelatedSubset,
    /// Small random atoms spread over the reference's center range.
    RandomAtoms,
}

impl std::str::FromStr for GenericNoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correlated-subset" | "correlated" => Ok(Self::CorrelatedSubset),
            "random-atoms" | "random" => Ok(Self::RandomAtoms),
            other => Err(Error::Parse(format!(
                "unknown generic noise mode '{other}'"
            ))),
        }
    }
}

/// Scale range of the atoms drawn in [`GenericNoiseMode::RandomAtoms`].
pub const RANDOM_NOISE_SIGMA: (f64, f64) = (0.05, 0.15);

/// Structured noise pattern with norm `target_nu`.
pub fn make_generic_noise(
    p: &Pattern,
    mode: GenericNoiseMode,
    n_atoms: usize,
    target_nu: f64,
    seed: u64,
) -> Result<Pattern> {
    if n_atoms == 0 {
        return Err(Error::InvalidArgument("n_atoms must be >= 1".into()));
    }
    if !(target_nu >= 0.0) || !target_nu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "target nu must be >= 0, got {target_nu}"
        )));
    }
    let mut rng = trial_rng(seed, 0);
    let raw = match mode {
        GenericNoiseMode::CorrelatedSubset => {
            if n_atoms > p.len() {
                return Err(Error::InvalidArgument(format!(
                    "n_atoms = {n_atoms} exceeds the pattern's {} atoms",
                    p.len()
                )));
            }
            let mut idx = sample(&mut rng, p.len(), n_atoms).into_vec();
            idx.sort_unstable();
            Pattern::new(idx.into_iter().map(|i| p.atoms()[i]).collect())?
        }
        GenericNoiseMode::RandomAtoms => {
            let half = p
                .atoms()
                .iter()
                .map(|a| a.tau.x.abs().max(a.tau.y.abs()))
                .fold(1.0, f64::max);
            let mut atoms = Vec::with_capacity(n_atoms);
            for _ in 0..n_atoms {
                let tau = Vec2::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half));
                let sigma = Vec2::new(
                    rng.gen_range(RANDOM_NOISE_SIGMA.0..=RANDOM_NOISE_SIGMA.1),
                    rng.gen_range(RANDOM_NOISE_SIGMA.0..=RANDOM_NOISE_SIGMA.1),
                );
                let coeff = rng.gen_range(-1.0..=1.0);
                atoms.push(Atom::new(coeff, rng.gen_range(0.0..PI), tau, sigma)?);
            }
            Pattern::new(atoms)?
        }
    };
    let norm = raw.norm();
    if target_nu == 0.0 {
        return Ok(raw.scaled(0.0));
    }
    if norm == 0.0 {
        return Err(Error::ZeroPattern);
    }
    Ok(raw.scaled(target_nu / norm))
}

/// Noise parameters after smoothing with filter size `rho`: the atoms widen
/// to `√(ε² + ρ²)` and the coefficients shrink by `ε² / (ε² + ρ²)`.
pub fn smoothed_noise_params(spec: &NoiseSpec, rho: f64) -> NoiseSpec {
    if rho == 0.0 {
        return *spec;
    }
    let e2 = spec.epsilon * spec.epsilon;
    let total = e2 + rho * rho;
    NoiseSpec {
        epsilon: total.sqrt(),
        eta: spec.eta * e2 / total,
        ..*spec
    }
}

/// Parameter ranges of randomly generated reference patterns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPatternSpec {
    pub n_atoms: usize,
    pub coeff: (f64, f64),
    pub tau: (f64, f64),
    pub sigma: (f64, f64),
}

impl Default for RandomPatternSpec {
    fn default() -> Self {
        Self {
            n_atoms: 20,
            coeff: (-1.0, 1.0),
            tau: (-4.0, 4.0),
            sigma: (0.3, 2.0),
        }
    }
}

impl RandomPatternSpec {
    pub fn validated(self) -> Result<Self> {
        let ordered = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if self.n_atoms == 0 {
            return Err(Error::InvalidArgument("pattern.K must be >= 1".into()));
        }
        if !ordered(self.coeff)
            || !ordered(self.tau)
            || !ordered(self.sigma)
            || !(self.sigma.0 > 0.0)
        {
            return Err(Error::InvalidArgument(
                "pattern ranges must be ordered with sigma > 0".into(),
            ));
        }
        Ok(self)
    }
}

/// Atoms with uniform coefficient, center, scales and angle.
pub fn random_pattern<R: Rng + ?Sized>(spec: &RandomPatternSpec, rng: &mut R) -> Result<Pattern> {
    let spec = spec.validated()?;
    let u = |rng: &mut R, (lo, hi): (f64, f64)| if lo == hi { lo } else { rng.gen_range(lo..hi) };
    let mut atoms = Vec::with_capacity(spec.n_atoms);
    for _ in 0..spec.n_atoms {
        let coeff = u(rng, spec.coeff);
        let tau = Vec2::new(u(rng, spec.tau), u(rng, spec.tau));
        let sigma = Vec2::new(u(rng, spec.sigma), u(rng, spec.sigma));
        let psi = rng.gen_range(0.0..PI);
        atoms.push(Atom::new(coeff, psi, tau, sigma)?);
    }
    Pattern::new(atoms)
}

/// Deviation `h(u) = -2⟨p(· + u) - p, w⟩ + ‖w‖²` between the noisy and the
/// noiseless distance when the target is `(p + w)(· - u)`.
pub fn distance_deviation(p: &Pattern, w: &Pattern, u: Vec2<f64>) -> f64 {
    let shifted = p.translate(-u);
    -2.0 * (shifted.inner_product(w) - p.inner_product(w)) + w.inner_product(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_eta_gives_zero_coefficients() {
        let spec = NoiseSpec::gaussian(50, 0.1, 0.0, 4.0).unwrap();
        let d = sample_gaussian_field(&spec, 7).unwrap();
        assert_eq!(d.pattern.len(), 50);
        assert!(d.pattern.atoms().iter().all(|a| a.coeff == 0.0));
    }

    #[test]
    fn field_atoms_respect_the_spec() {
        let spec = NoiseSpec::gaussian(200, 0.1, 0.05, 2.0).unwrap();
        let d = sample_gaussian_field(&spec, 3).unwrap();
        for a in d.pattern.atoms() {
            assert!(a.tau.x.abs() <= 2.0 && a.tau.y.abs() <= 2.0);
            assert_eq!(a.sigma(), Vec2::new(0.1, 0.1));
        }
        assert_eq!(d, sample_gaussian_field(&spec, 3).unwrap());
        assert_ne!(d.pattern, sample_gaussian_field(&spec, 4).unwrap().pattern);
        let generic = NoiseSpec::generic(0.1).unwrap();
        assert!(sample_gaussian_field(&generic, 0).is_err());
    }

    #[test]
    fn streams_are_independent() {
        let a: u64 = trial_rng(1, 0).gen();
        let b: u64 = trial_rng(1, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, trial_rng(1, 0).gen::<u64>());
    }

    #[test]
    fn smoothed_params() {
        let spec = NoiseSpec::gaussian(750, 0.1, 1.0, 4.0).unwrap();
        let s = smoothed_noise_params(&spec, 1.0);
        assert!((s.epsilon - 1.01f64.sqrt()).abs() < 1e-15);
        assert!((s.eta - 0.01 / 1.01).abs() < 1e-15);
        assert_eq!(smoothed_noise_params(&spec, 0.0), spec);
    }

    #[test]
    fn generic_noise_modes() {
        let mut rng = trial_rng(5, 0);
        let p = random_pattern(&RandomPatternSpec::default(), &mut rng).unwrap();
        let z =
            make_generic_noise(&p, GenericNoiseMode::CorrelatedSubset, p.len(), 0.3, 1).unwrap();
        assert!((z.norm() - 0.3).abs() < 1e-10);
        let full = p.scaled(0.3 / p.norm());
        for (a, b) in z.atoms().iter().zip(full.atoms()) {
            assert!((a.coeff - b.coeff).abs() < 1e-15);
            assert_eq!(a.tau, b.tau);
        }
        assert!(make_generic_noise(&p, GenericNoiseMode::CorrelatedSubset, 21, 0.3, 1).is_err());
        let z = make_generic_noise(&p, GenericNoiseMode::RandomAtoms, 10, 0.05, 2).unwrap();
        assert_eq!(z.len(), 10);
        assert!((z.norm() - 0.05).abs() < 1e-10);
        let z = make_generic_noise(&p, GenericNoiseMode::RandomAtoms, 10, 0.0, 2).unwrap();
        assert!(z.is_zero());
    }
}

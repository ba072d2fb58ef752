//! Translation registration: gradient descent on the SSD distance, covering
//! grids built from SIDEN estimates, grid + descent registration and
//! coarse-to-fine filter schedules.

use crate::atoms::Pattern;
use crate::bounds::{NoiseKind, NoiseSpec};
use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::linalg::Vec2;
use crate::scalar::{lit, to_f64, Scalar};
use crate::siden::smoothed_siden_boundary;

/// Backtracking gradient-descent parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions<S = f64> {
    pub max_iters: usize,
    pub grad_tol: S,
    /// Armijo sufficient-decrease constant.
    pub armijo: S,
    pub shrink: S,
    pub initial_step: S,
    /// Longest allowed move per iteration; `None` leaves steps uncapped.
    pub max_step: Option<S>,
}

impl<S: Scalar> Default for DescentOptions<S> {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: lit(1e-8),
            armijo: lit(1e-4),
            shrink: lit(0.5),
            initial_step: S::one(),
            max_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult<S = f64> {
    /// Estimated translation of the target relative to the reference.
    pub translation: Vec2<S>,
    pub distance_value: S,
    pub iterations: usize,
    /// `(rho, estimate)` after each stage of a multiscale run.
    pub stage_trace: Vec<(S, Vec2<S>)>,
    pub converged: bool,
}

impl<S: Scalar> RegistrationResult<S> {
    pub const CSV_HEADER: &'static str =
        "seed,rho,eta_or_nu,true_tx,true_ty,est_tx,est_ty,error,iterations,converged";

    pub fn error(&self, truth: Vec2<S>) -> S {
        (self.translation - truth).norm()
    }

    /// One row under [`Self::CSV_HEADER`].
    pub fn csv_row(&self, seed: u64, rho: S, eta_or_nu: S, truth: Vec2<S>) -> String {
        let f = |x: S| format!("{:e}", to_f64(x));
        format!(
            "{seed},{},{},{},{},{},{},{},{},{}",
            f(rho),
            f(eta_or_nu),
            f(truth.x),
            f(truth.y),
            f(self.translation.x),
            f(self.translation.y),
            f(self.error(truth)),
            self.iterations,
            self.converged
        )
    }
}

/// Minimizes `u ↦ ‖q - p(· - u)‖²` from `init`.
pub fn descend<S: Scalar>(
    p: &Pattern<S>,
    q: &Pattern<S>,
    init: Vec2<S>,
    opts: &DescentOptions<S>,
) -> Result<RegistrationResult<S>> {
    let field = DistanceField::new(p, q)?;
    Ok(descend_field(&field, init, opts))
}

/// [`descend`] on a prebuilt distance field.
///
/// The first trial step of each line search is the Barzilai-Borwein step of
/// the last move (or `initial_step` before any move); Armijo backtracking
/// then keeps every accepted move a strict decrease. When no representable
/// decrease is left the value sits at its rounding floor, which also counts
/// as converged.
pub fn descend_field<S: Scalar>(
    field: &DistanceField<S>,
    init: Vec2<S>,
    opts: &DescentOptions<S>,
) -> RegistrationResult<S> {
    let mut u = init;
    let (mut value, mut grad) = field.value_and_gradient(u);
    let mut iterations = 0;
    let mut converged = grad.norm() <= opts.grad_tol;
    let tiny: S = lit(1e-30);
    let mut trial = opts.initial_step;
    while !converged && iterations < opts.max_iters {
        let gnorm = grad.norm();
        let mut step = trial;
        if let Some(cap) = opts.max_step {
            step = step.min(cap / gnorm);
        }
        let g2 = gnorm * gnorm;
        let mut accepted = None;
        while step * gnorm > tiny {
            let cand = u - grad.scale(step);
            let v = field.value(cand);
            if v < value && v <= value - opts.armijo * step * g2 {
                accepted = Some((cand, step));
                break;
            }
            step = step * opts.shrink;
        }
        let Some((next, taken)) = accepted else {
            converged = true;
            break;
        };
        let (next_value, next_grad) = field.value_and_gradient(next);
        let (s, y) = (next - u, next_grad - grad);
        let sy = s.dot(y);
        trial = if sy > S::zero() {
            s.norm_sq() / sy
        } else {
            taken / opts.shrink
        };
        u = next;
        value = next_value;
        grad = next_grad;
        iterations += 1;
        converged = grad.norm() <= opts.grad_tol;
    }
    RegistrationResult {
        translation: u,
        distance_value: value,
        iterations,
        stage_trace: Vec::new(),
        converged,
    }
}

/// Square grid whose cells lie inside the SIDEN estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationGrid<S = f64> {
    pub spacing: S,
    /// Points per axis.
    pub n: usize,
    /// Row-major (`y` then `x`, both ascending).
    pub points: Vec<Vec2<S>>,
    pub rho: S,
    /// Every point of the covered square is within this distance of a grid point.
    pub r_cover: S,
}

impl<S: Scalar> TranslationGrid<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Grid point closest to `x`.
    pub fn nearest(&self, x: Vec2<S>) -> Vec2<S> {
        let half: S = lit((self.n as f64 - 1.0) / 2.0);
        let idx = |c: S| {
            let k = (c / self.spacing + half).round();
            to_f64(k).clamp(0.0, (self.n - 1) as f64) as usize
        };
        self.points[idx(x.y) * self.n + idx(x.x)]
    }
}

/// Grid with spacing `√2 · min_T δ̂_T` covering `[-t_range, t_range]²`.
pub fn build_grid<S: Scalar>(
    p: &Pattern<S>,
    rho: S,
    t_range: S,
    n_directions: usize,
) -> Result<TranslationGrid<S>> {
    if !(t_range > S::zero()) || !t_range.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_range must be > 0, got {t_range}"
        )));
    }
    p.ensure_nonzero()?;
    let est = smoothed_siden_boundary(p, rho, n_directions)?;
    let i = est.argmin();
    let r_min = est.delta[i];
    if est.degenerate.iter().any(|&d| d) || !(r_min > S::zero()) {
        let j = est.degenerate.iter().position(|&d| d).unwrap_or(i);
        let t = est.directions[j];
        return Err(Error::DegenerateSiden {
            tx: to_f64(t.x),
            ty: to_f64(t.y),
            delta: to_f64(est.delta[j]),
        });
    }
    let spacing = lit::<S>(2.0).sqrt() * r_min;
    let n = to_f64((lit::<S>(2.0) * t_range / spacing).ceil()).max(1.0) as usize;
    let half: S = lit((n as f64 - 1.0) / 2.0);
    let coord = |k: usize| (lit::<S>(k as f64) - half) * spacing;
    let mut points = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            points.push(Vec2::new(coord(col), coord(row)));
        }
    }
    Ok(TranslationGrid {
        spacing,
        n,
        points,
        rho,
        r_cover: r_min,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageOptions<S = f64> {
    pub n_directions: usize,
    /// `max_step = None` caps each descent move at the grid's `r_cover`.
    pub descent: DescentOptions<S>,
}

impl<S: Scalar> Default for TwoStageOptions<S> {
    fn default() -> Self {
        Self {
            n_directions: 64,
            descent: DescentOptions::default(),
        }
    }
}

/// Grid search over a SIDEN-covering grid on the `rho`-smoothed pair, then
/// descent from the best grid point.
pub fn two_stage_register<S: Scalar>(
    p: &Pattern<S>,
    q: &Pattern<S>,
    rho: S,
    t_range: S,
) -> Result<RegistrationResult<S>> {
    two_stage_register_with(p, q, rho, t_range, &TwoStageOptions::default())
}

pub fn two_stage_register_with<S: Scalar>(
    p: &Pattern<S>,
    q: &Pattern<S>,
    rho: S,
    t_range: S,
    opts: &TwoStageOptions<S>,
) -> Result<RegistrationResult<S>> {
    let grid = build_grid(p, rho, t_range, opts.n_directions)?;
    let (ps, qs) = (p.smooth(rho), q.smooth(rho));
    let field = DistanceField::new(&ps, &qs)?;
    let mut best = 0;
    let mut best_value = S::infinity();
    for (i, &g) in grid.points.iter().enumerate() {
        let v = field.value(g);
        if v < best_value {
            best_value = v;
            best = i;
        }
    }
    let mut descent = opts.descent;
    descent.max_step = Some(descent.max_step.unwrap_or(grid.r_cover));
    let mut result = descend_field(&field, grid.points[best], &descent);
    result.stage_trace.push((rho, result.translation));
    Ok(result)
}

/// Lower limit of the first filter size.
pub const RHO_FLOOR: f64 = 0.1;

/// Decreasing filter sizes for coarse-to-fine registration.
///
/// `ρ₁ = max(√(t*² - 1), 0.1)`; later sizes follow the noise-driven update
/// for the spec's kind and fall back to halving whenever that update is
/// undefined or fails to decrease. The last size is clamped below by `rho_min`.
pub fn plan_schedule(
    t_star_hint: f64,
    noise: &NoiseSpec,
    n_stages: usize,
    rho_min: f64,
) -> Result<Vec<f64>> {
    if !(t_star_hint > 0.0) || !t_star_hint.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "t_star_hint must be > 0, got {t_star_hint}"
        )));
    }
    if n_stages == 0 {
        return Err(Error::InvalidArgument("n_stages must be >= 1".into()));
    }
    let rho1 = (t_star_hint * t_star_hint - 1.0)
        .max(0.0)
        .sqrt()
        .max(RHO_FLOOR);
    let mut out = vec![rho1];
    for _ in 1..n_stages {
        let prev = *out.last().expect("nonempty");
        let radicand = match noise.kind {
            NoiseKind::GaussianAnalytic => {
                let er = noise.eta * prev;
                noise.eta * prev.powi(3) / (1.0 - er) - 1.0
            }
            NoiseKind::Generic => noise.nu / (1.0 - noise.nu) * (1.0 + prev * prev) - 1.0,
        };
        let rule = radicand.sqrt();
        let next = if radicand > 0.0 && rule.is_finite() && rule < prev {
            rule
        } else {
            0.5 * prev
        };
        out.push(next);
    }
    if n_stages > 1 {
        let last = out.len() - 1;
        if rho_min < out[last - 1] {
            out[last] = out[last].max(rho_min);
        }
    }
    Ok(out)
}

/// Two-stage registration at the first filter size, then descent at each
/// later size starting from the previous estimate.
pub fn multiscale_register<S: Scalar>(
    p: &Pattern<S>,
    q: &Pattern<S>,
    schedule: &[S],
    t_range: S,
) -> Result<RegistrationResult<S>> {
    let (&first, rest) = schedule
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("schedule must be nonempty".into()))?;
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "schedule must be strictly decreasing".into(),
        ));
    }
    let mut result = two_stage_register(p, q, first, t_range)?;
    let opts = DescentOptions::default();
    for &rho in rest {
        let field = DistanceField::new(&p.smooth(rho), &q.smooth(rho))?;
        let stage = descend_field(&field, result.translation, &opts);
        let mut trace = std::mem::take(&mut result.stage_trace);
        trace.push((rho, stage.translation));
        result = RegistrationResult {
            iterations: result.iterations + stage.iterations,
            stage_trace: trace,
            ..stage
        };
    }
    Ok(result)
}

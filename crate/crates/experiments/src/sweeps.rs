//! The seeded sweeps behind each subcommand.
//!
//! Trials run on a rayon pool and are collected in index order, so the CSV
//! never depends on scheduling.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use gaussreg_core::bounds::PatternConstants;
use gaussreg_core::distance::DistanceProfile;
use gaussreg_core::ingestion::{
    load_raster, matching_pursuit, pattern_to_csv, DictionarySpec, RasterFormat,
};
use gaussreg_core::noise::sample_gaussian_field_with;
use gaussreg_core::{
    build_grid, correlation_bound, default_correlation_range, gaussian_bound, make_generic_noise,
    smoothed_noise_params, trial_rng, two_stage_register, BoundReport, GenericNoiseMode, NoiseKind,
    NoiseSpec, Pattern, RegistrationResult, Vec2,
};

use crate::config::{stream, SweepConfig};
use crate::ExpError;

/// Scan step of the true SIDEN boundary search.
const OMEGA_STEP: f64 = 0.01;

/// Registration accuracy below which an error never counts against a bound;
/// noiseless targets have `R_{t₀} = 0` but converge only to rounding level.
pub const REGISTRATION_TOL: f64 = 1e-6;

fn pool(cfg: &SweepConfig) -> Result<rayon::ThreadPool, ExpError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| ExpError::Config(format!("threads: {e}")))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Estimated and true SIDEN radius of one random pattern along one random
/// direction, per filter size.
#[derive(Debug, Clone, PartialEq)]
pub struct SidenTrial {
    pub direction: Vec2<f64>,
    pub delta: Vec<f64>,
    /// First zero crossing of `df/dt`, when one exists in the scanned range.
    pub omega: Vec<Option<f64>>,
}

pub fn siden_trials(cfg: &SweepConfig) -> Result<Vec<SidenTrial>, ExpError> {
    cfg.validate()?;
    let n = cfg.pattern_count();
    pool(cfg)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let p = cfg.pattern(i)?;
                let angle = trial_rng(cfg.seed, stream(1, i, 0)).gen_range(0.0..2.0 * PI);
                let direction = Vec2::from_angle(angle);
                let mut delta = Vec::with_capacity(cfg.rho_list.len());
                let mut omega = Vec::with_capacity(cfg.rho_list.len());
                for &rho in &cfg.rho_list {
                    let ps = p.smooth(rho);
                    let profile = DistanceProfile::new(&ps, direction)?;
                    delta.push(profile.alpha_coefficients().delta());
                    let t_max = 2.0 * ps.support_radius();
                    let steps = (t_max / OMEGA_STEP).ceil() as usize;
                    omega.push(profile.first_crossing(t_max, steps));
                }
                Ok(SidenTrial {
                    direction,
                    delta,
                    omega,
                })
            })
            .collect()
    })
}

/// Mean estimated and true radius per filter size over the trials with a
/// crossing at every filter size.
pub fn run_siden_sweep(cfg: &SweepConfig) -> Result<String, ExpError> {
    let trials = siden_trials(cfg)?;
    let valid: Vec<&SidenTrial> = trials
        .iter()
        .filter(|t| t.omega.iter().all(Option::is_some))
        .collect();
    let mut out = String::from("rho,mean_delta_hat,mean_omega_hat,n_valid\n");
    for (k, &rho) in cfg.rho_list.iter().enumerate() {
        let d: Vec<f64> = valid.iter().map(|t| t.delta[k]).collect();
        let w: Vec<f64> = valid.iter().filter_map(|t| t.omega[k]).collect();
        // Without valid trials the estimate is averaged over all of them.
        let d = if d.is_empty() {
            trials.iter().map(|t| t.delta[k]).collect()
        } else {
            d
        };
        let _ = writeln!(
            out,
            "{},{},{},{}",
            num(rho),
            opt(mean(&d)),
            opt(mean(&w)),
            valid.len()
        );
    }
    Ok(out)
}

/// Errors and bounds of one `(rho, level)` cell of an error sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCell {
    pub rho: f64,
    /// `eta` for Gaussian noise, `nu` for generic noise.
    pub level: f64,
    /// One entry per `(pattern, trial)`.
    pub errors: Vec<f64>,
    /// The matching bound, when the noise level is admissible.
    pub bounds: Vec<Option<f64>>,
}

impl ErrorCell {
    pub fn mean_error(&self) -> f64 {
        mean(&self.errors).unwrap_or(0.0)
    }

    pub fn mean_bound(&self) -> Option<f64> {
        mean(&self.bounds.iter().flatten().copied().collect::<Vec<_>>())
    }

    /// Fraction of trials with a bound whose error exceeds it by more than
    /// [`REGISTRATION_TOL`].
    pub fn violation_rate(&self) -> Option<f64> {
        let checked: Vec<bool> = self
            .errors
            .iter()
            .zip(&self.bounds)
            .filter_map(|(e, b)| b.map(|b| *e > b + REGISTRATION_TOL))
            .collect();
        if checked.is_empty() {
            None
        } else {
            Some(checked.iter().filter(|&&v| v).count() as f64 / checked.len() as f64)
        }
    }
}

struct TrialOutcome {
    /// Indexed `[rho][level]`.
    errors: Vec<Vec<f64>>,
    bounds: Vec<Vec<Option<f64>>>,
}

fn gaussian_trial(
    cfg: &SweepConfig,
    p: &Pattern,
    i: usize,
    j: usize,
    consts: &[Vec<Option<f64>>],
) -> Result<TrialOutcome, ExpError> {
    let t_range = cfg.translation_range();
    let mut rng = trial_rng(cfg.seed, stream(2, i, j));
    let truth = Vec2::new(
        rng.gen_range(-t_range..=t_range),
        rng.gen_range(-t_range..=t_range),
    );
    // One unit-variance field per trial, scaled to every level.
    let unit = sample_gaussian_field_with(&cfg.noise_spec(1.0, 0.0)?, &mut rng)?;
    let mut errors = vec![Vec::new(); cfg.rho_list.len()];
    for (r, &rho) in cfg.rho_list.iter().enumerate() {
        for &eta in &cfg.eta_list {
            let q = if eta == 0.0 {
                p.translate(truth)
            } else {
                p.sum(&unit.scaled(eta)).translate(truth)
            };
            errors[r].push(two_stage_register(p, &q, rho, t_range)?.error(truth));
        }
    }
    Ok(TrialOutcome {
        errors,
        bounds: consts.to_vec(),
    })
}

fn generic_trial(
    cfg: &SweepConfig,
    p: &Pattern,
    i: usize,
    j: usize,
    consts: &[Option<PatternConstants>],
) -> Result<TrialOutcome, ExpError> {
    let t_range = cfg.translation_range();
    let mut rng = trial_rng(cfg.seed, stream(2, i, j));
    let truth = Vec2::new(
        rng.gen_range(-t_range..=t_range),
        rng.gen_range(-t_range..=t_range),
    );
    let unit = make_generic_noise(p, cfg.generic_mode, cfg.generic_atoms, 1.0, rng.gen())?;
    let mut errors = vec![Vec::new(); cfg.rho_list.len()];
    let mut bounds = vec![Vec::new(); cfg.rho_list.len()];
    for (r, &rho) in cfg.rho_list.iter().enumerate() {
        let (ps, us) = (p.smooth(rho), unit.smooth(rho));
        let unit_norm = us.norm();
        let rpz_unit = match cfg.generic_mode {
            GenericNoiseMode::RandomAtoms => Some(correlation_bound(
                &ps,
                &us,
                default_correlation_range(&ps, &us),
            )?),
            GenericNoiseMode::CorrelatedSubset => None,
        };
        for &nu in &cfg.nu_list {
            let q = if nu == 0.0 {
                p.translate(truth)
            } else {
                p.sum(&unit.scaled(nu)).translate(truth)
            };
            errors[r].push(two_stage_register(p, &q, rho, t_range)?.error(truth));
            let nu_hat = nu * unit_norm;
            let bound = consts[r].as_ref().and_then(|c| match rpz_unit {
                None => c.generic(nu_hat, cfg.two_sided).ru0,
                Some(rpz) => c.uncorrelated(rpz * nu, nu_hat).ok().and_then(|u| u.qu0),
            });
            bounds[r].push(bound);
        }
    }
    Ok(TrialOutcome { errors, bounds })
}

/// Registers noisy translated copies of every reference pattern at every
/// filter size and noise level.
pub fn error_cells(cfg: &SweepConfig) -> Result<Vec<ErrorCell>, ExpError> {
    cfg.validate()?;
    let gaussian = cfg.noise_kind == NoiseKind::GaussianAnalytic;
    let levels = if gaussian {
        &cfg.eta_list
    } else {
        &cfg.nu_list
    };
    let n_patterns = cfg.pattern_count();
    let pool = pool(cfg)?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..n_patterns)
            .into_par_iter()
            .map(|i| -> Result<Vec<TrialOutcome>, ExpError> {
                let p = cfg.pattern(i)?;
                if gaussian {
                    let mut bounds = Vec::with_capacity(cfg.rho_list.len());
                    for &rho in &cfg.rho_list {
                        let ps = p.smooth(rho);
                        let mut row = Vec::with_capacity(levels.len());
                        for &eta in levels {
                            row.push(gaussian_level_bound(cfg, &ps, rho, eta));
                        }
                        bounds.push(row);
                    }
                    (0..cfg.trials)
                        .into_par_iter()
                        .map(|j| gaussian_trial(cfg, &p, i, j, &bounds))
                        .collect()
                } else {
                    let consts: Vec<Option<PatternConstants>> = cfg
                        .rho_list
                        .iter()
                        .map(|&rho| PatternConstants::new(&p.smooth(rho)).ok())
                        .collect();
                    (0..cfg.trials)
                        .into_par_iter()
                        .map(|j| generic_trial(cfg, &p, i, j, &consts))
                        .collect()
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(|v| v.into_iter().flatten().collect())
    })?;
    let mut cells = Vec::new();
    for (r, &rho) in cfg.rho_list.iter().enumerate() {
        for (l, &level) in levels.iter().enumerate() {
            cells.push(ErrorCell {
                rho,
                level,
                errors: outcomes.iter().map(|o| o.errors[r][l]).collect(),
                bounds: outcomes.iter().map(|o| o.bounds[r][l]).collect(),
            });
        }
    }
    Ok(cells)
}

/// `R_{t₀}` of the smoothed pattern under the smoothed noise, when defined.
fn gaussian_level_bound(cfg: &SweepConfig, ps: &Pattern, rho: f64, eta: f64) -> Option<f64> {
    let spec = cfg.noise_spec(eta, 0.0).ok()?;
    let spec = smoothed_noise_params(&spec, rho);
    gaussian_bound(ps, &spec, cfg.s, cfg.two_sided).ok()?.rt0
}

pub fn run_error_sweep(cfg: &SweepConfig) -> Result<String, ExpError> {
    let cells = error_cells(cfg)?;
    let level = if cfg.noise_kind == NoiseKind::GaussianAnalytic {
        "eta"
    } else {
        "nu"
    };
    let mut out = format!("rho,{level},mean_error,mean_bound,bound_violation_rate\n");
    for c in &cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            num(c.rho),
            num(c.level),
            num(c.mean_error()),
            opt(c.mean_bound()),
            opt(c.violation_rate())
        );
    }
    Ok(out)
}

/// Mean grid size per filter size.
pub fn grid_counts(cfg: &SweepConfig) -> Result<Vec<(f64, f64)>, ExpError> {
    cfg.validate()?;
    let t_range = cfg.translation_range();
    let n = cfg.pattern_count();
    let per_pattern: Vec<Vec<usize>> = pool(cfg)?.install(|| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let p = cfg.pattern(i)?;
                cfg.rho_list
                    .iter()
                    .map(|&rho| Ok(build_grid(&p, rho, t_range, cfg.n_directions)?.len()))
                    .collect::<Result<Vec<_>, ExpError>>()
            })
            .collect::<Result<_, _>>()
    })?;
    Ok(cfg
        .rho_list
        .iter()
        .enumerate()
        .map(|(k, &rho)| {
            (
                rho,
                per_pattern.iter().map(|c| c[k] as f64).sum::<f64>() / n as f64,
            )
        })
        .collect())
}

pub fn run_grid_count(cfg: &SweepConfig) -> Result<String, ExpError> {
    let mut out = String::from("rho,grid_points,product\n");
    for (rho, count) in grid_counts(cfg)? {
        let _ = writeln!(
            out,
            "{},{},{}",
            num(rho),
            count,
            num(count * (1.0 + rho * rho))
        );
    }
    Ok(out)
}

/// Bound reports of the first reference pattern at every filter size: a
/// `key = value` block per size and the matching CSV.
pub fn run_bounds_report(cfg: &SweepConfig) -> Result<(String, String), ExpError> {
    cfg.validate()?;
    let p = cfg.pattern(0)?;
    let spec: NoiseSpec = cfg.noise_spec(cfg.noise_eta, cfg.noise_nu)?;
    // The report always has a generic side; small patterns lend all their atoms.
    let n_atoms = match cfg.generic_mode {
        GenericNoiseMode::CorrelatedSubset => cfg.generic_atoms.min(p.len()),
        GenericNoiseMode::RandomAtoms => cfg.generic_atoms,
    };
    let z = make_generic_noise(
        &p,
        cfg.generic_mode,
        n_atoms,
        cfg.noise_nu,
        trial_rng(cfg.seed, stream(3, 0, 0)).gen(),
    )?;
    let mut text = String::new();
    let mut csv = format!("rho,{}\n", BoundReport::<f64>::csv_header());
    for &rho in &cfg.rho_list {
        let ps = p.smooth(rho);
        let mut report = gaussian_bound(
            &ps,
            &smoothed_noise_params(&spec, rho),
            cfg.s,
            cfg.two_sided,
        )?;
        report.nu = z.smooth(rho).norm();
        let generic = PatternConstants::new(&ps)?.generic(report.nu, cfg.two_sided);
        report.nu0 = generic.nu0;
        report.ru0 = generic.ru0;
        let report = report.with_correlation(&ps, &z.smooth(rho))?;
        let _ = writeln!(text, "[rho = {rho}]");
        text.push_str(&report.to_key_value());
        let _ = writeln!(csv, "{},{}", num(rho), report.to_csv_row());
    }
    Ok((text, csv))
}

/// Registers a target against a reference at every filter size.
pub fn run_register(cfg: &SweepConfig) -> Result<String, ExpError> {
    cfg.validate()?;
    let t_range = cfg.translation_range();
    let p = match &cfg.register_reference {
        Some(path) => gaussreg_core::ingestion::load_pattern(path)?,
        None => cfg.pattern(0)?,
    };
    let (q, truth) = match &cfg.register_target {
        Some(path) => {
            let truth = cfg
                .register_tx
                .zip(cfg.register_ty)
                .map(|(x, y)| Vec2::new(x, y));
            (gaussreg_core::ingestion::load_pattern(path)?, truth)
        }
        None => {
            let mut rng = trial_rng(cfg.seed, stream(4, 0, 0));
            let truth = Vec2::new(
                cfg.register_tx
                    .unwrap_or_else(|| rng.gen_range(-t_range..=t_range)),
                cfg.register_ty
                    .unwrap_or_else(|| rng.gen_range(-t_range..=t_range)),
            );
            let q = if cfg.noise_eta > 0.0 && cfg.noise_kind == NoiseKind::GaussianAnalytic {
                let w = sample_gaussian_field_with(&cfg.noise_spec(cfg.noise_eta, 0.0)?, &mut rng)?;
                p.sum(&w).translate(truth)
            } else {
                p.translate(truth)
            };
            (q, Some(truth))
        }
    };
    let mut out = format!("{}\n", RegistrationResult::<f64>::CSV_HEADER);
    for &rho in &cfg.rho_list {
        let r = two_stage_register(&p, &q, rho, t_range)?;
        match truth {
            Some(t) => {
                let _ = writeln!(out, "{}", r.csv_row(cfg.seed, rho, cfg.noise_eta, t));
            }
            None => {
                let _ = writeln!(
                    out,
                    "{},{},{},,,{},{},,{},{}",
                    cfg.seed,
                    num(rho),
                    num(cfg.noise_eta),
                    num(r.translation.x),
                    num(r.translation.y),
                    r.iterations,
                    r.converged
                );
            }
        }
    }
    Ok(out)
}

/// Matching-pursuit decomposition of a raster file; returns the pattern CSV
/// and the captured energy fraction.
pub fn run_decompose(cfg: &SweepConfig) -> Result<(String, f64), ExpError> {
    let input = cfg
        .decompose_input
        .as_ref()
        .ok_or_else(|| ExpError::Config("decompose needs decompose.input (--input)".into()))?;
    if cfg.decompose_atoms == 0 {
        return Err(ExpError::Config("decompose.atoms must be >= 1".into()));
    }
    let format = RasterFormat::from_path(input).map_err(|e| ExpError::Config(e.to_string()))?;
    let img = load_raster(input, format, cfg.decompose_extent)?;
    let mut dict = DictionarySpec::default_for(img.shape());
    dict.tau_stride = cfg.decompose_tau_stride;
    let result = matching_pursuit(&img, &dict, cfg.decompose_atoms)?;
    let e = &result.residual_energy;
    let captured = if e[0] > 0.0 {
        1.0 - e[e.len() - 1] / e[0]
    } else {
        0.0
    };
    Ok((pattern_to_csv(&result.pattern), captured))
}

//! Flat `key = value` sweep configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gaussreg_core::ingestion::{digit_pattern, face_pattern, load_pattern};
use gaussreg_core::{
    random_pattern, trial_rng, GenericNoiseMode, NoiseKind, NoiseSpec, Pattern, RandomPatternSpec,
};

use crate::ExpError;

/// Where reference patterns come from.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternSource {
    Random,
    File(PathBuf),
    Face,
    Digit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub source: PatternSource,
    pub random: RandomPatternSpec,
    /// Reference patterns per sweep (random source only).
    pub patterns: usize,
    /// Targets per reference pattern.
    pub trials: usize,
    pub rho_list: Vec<f64>,
    pub eta_list: Vec<f64>,
    pub nu_list: Vec<f64>,
    /// Translations are drawn from `[-t_range, t_range]²`; 0 picks the
    /// random pattern center range (at least 1), or 1 for other sources.
    pub t_range: f64,
    pub n_directions: usize,
    pub s: f64,
    pub two_sided: bool,
    pub noise_kind: NoiseKind,
    pub noise_l: usize,
    pub noise_epsilon: f64,
    pub noise_eta: f64,
    /// Noise support half-width; 0 picks the same default as `t_range`.
    pub noise_b: f64,
    pub noise_nu: f64,
    pub generic_mode: GenericNoiseMode,
    pub generic_atoms: usize,
    pub register_reference: Option<PathBuf>,
    pub register_target: Option<PathBuf>,
    pub register_tx: Option<f64>,
    pub register_ty: Option<f64>,
    pub decompose_input: Option<PathBuf>,
    pub decompose_atoms: usize,
    pub decompose_extent: f64,
    pub decompose_tau_stride: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out: None,
            threads: 1,
            source: PatternSource::Random,
            random: RandomPatternSpec::default(),
            patterns: 5,
            trials: 10,
            rho_list: vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            eta_list: vec![0.0, 0.01, 0.02, 0.03, 0.04, 0.051],
            nu_list: vec![0.0, 0.005, 0.01],
            t_range: 0.0,
            n_directions: 64,
            s: 2.0,
            two_sided: false,
            noise_kind: NoiseKind::GaussianAnalytic,
            noise_l: 750,
            noise_epsilon: 0.1,
            noise_eta: 0.01,
            noise_b: 0.0,
            noise_nu: 0.01,
            generic_mode: GenericNoiseMode::CorrelatedSubset,
            generic_atoms: 10,
            register_reference: None,
            register_target: None,
            register_tx: None,
            register_ty: None,
            decompose_input: None,
            decompose_atoms: 20,
            decompose_extent: 1.0,
            decompose_tau_stride: 2,
        }
    }
}

/// Every recognized key, in `--show-config` order.
pub const KEYS: &[&str] = &[
    "seed",
    "out",
    "threads",
    "pattern.source",
    "pattern.file",
    "pattern.K",
    "pattern.coeff_min",
    "pattern.coeff_max",
    "pattern.tau_min",
    "pattern.tau_max",
    "pattern.sigma_min",
    "pattern.sigma_max",
    "patterns",
    "trials",
    "rho_list",
    "eta_list",
    "nu_list",
    "t_range",
    "n_directions",
    "s",
    "two_sided",
    "noise.kind",
    "noise.L",
    "noise.epsilon",
    "noise.eta",
    "noise.b",
    "noise.nu",
    "generic.mode",
    "generic.atoms",
    "register.reference",
    "register.target",
    "register.tx",
    "register.ty",
    "decompose.input",
    "decompose.atoms",
    "decompose.extent",
    "decompose.tau_stride",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ExpError> {
    value
        .trim()
        .parse()
        .map_err(|_| ExpError::Config(format!("{key}: cannot parse '{value}'")))
}

/// Empty means unset, matching what `--show-config` prints for it.
fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>, ExpError> {
    if value.trim().is_empty() {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ExpError> {
    let v: Vec<f64> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_, _>>()?;
    if v.is_empty() {
        return Err(ExpError::Config(format!("{key}: list must be nonempty")));
    }
    Ok(v)
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_path(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_default()
}

fn opt_num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl SweepConfig {
    /// Defaults tuned per subcommand.
    pub fn for_command(command: &str) -> Self {
        let mut cfg = Self::default();
        match command {
            "siden-sweep" => {
                cfg.random.n_atoms = 40;
                cfg.patterns = 300;
            }
            "grid-count" => cfg.patterns = 10,
            "bounds" => cfg.patterns = 1,
            _ => {}
        }
        cfg
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ExpError> {
        let path = |v: &str| {
            if v.trim().is_empty() {
                None
            } else {
                Some(PathBuf::from(v.trim()))
            }
        };
        match key {
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = path(value),
            "threads" => self.threads = parse(key, value)?,
            "pattern.source" => {
                self.source = match value.trim() {
                    "random" => PatternSource::Random,
                    "face" => PatternSource::Face,
                    "digit" => PatternSource::Digit,
                    "file" => PatternSource::File(match &self.source {
                        PatternSource::File(p) => p.clone(),
                        _ => PathBuf::new(),
                    }),
                    other => {
                        return Err(ExpError::Config(format!(
                            "pattern.source: unknown source '{other}'"
                        )))
                    }
                }
            }
            "pattern.file" => {
                if let Some(file) = path(value) {
                    self.source = PatternSource::File(file);
                }
            }
            "pattern.K" => self.random.n_atoms = parse(key, value)?,
            "pattern.coeff_min" => self.random.coeff.0 = parse(key, value)?,
            "pattern.coeff_max" => self.random.coeff.1 = parse(key, value)?,
            "pattern.tau_min" => self.random.tau.0 = parse(key, value)?,
            "pattern.tau_max" => self.random.tau.1 = parse(key, value)?,
            "pattern.sigma_min" => self.random.sigma.0 = parse(key, value)?,
            "pattern.sigma_max" => self.random.sigma.1 = parse(key, value)?,
            "patterns" => self.patterns = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "rho_list" => self.rho_list = parse_list(key, value)?,
            "eta_list" => self.eta_list = parse_list(key, value)?,
            "nu_list" => self.nu_list = parse_list(key, value)?,
            "t_range" => self.t_range = parse(key, value)?,
            "n_directions" => self.n_directions = parse(key, value)?,
            "s" => self.s = parse(key, value)?,
            "two_sided" => self.two_sided = parse(key, value)?,
            "noise.kind" => {
                self.noise_kind = value
                    .trim()
                    .parse()
                    .map_err(|e| ExpError::Config(format!("{key}: {e}")))?
            }
            "noise.L" => self.noise_l = parse(key, value)?,
            "noise.epsilon" => self.noise_epsilon = parse(key, value)?,
            "noise.eta" => self.noise_eta = parse(key, value)?,
            "noise.b" => self.noise_b = parse(key, value)?,
            "noise.nu" => self.noise_nu = parse(key, value)?,
            "generic.mode" => {
                self.generic_mode = value
                    .trim()
                    .parse()
                    .map_err(|e| ExpError::Config(format!("{key}: {e}")))?
            }
            "generic.atoms" => self.generic_atoms = parse(key, value)?,
            "register.reference" => self.register_reference = path(value),
            "register.target" => self.register_target = path(value),
            "register.tx" => self.register_tx = optional(key, value)?,
            "register.ty" => self.register_ty = optional(key, value)?,
            "decompose.input" => self.decompose_input = path(value),
            "decompose.atoms" => self.decompose_atoms = parse(key, value)?,
            "decompose.extent" => self.decompose_extent = parse(key, value)?,
            "decompose.tau_stride" => self.decompose_tau_stride = parse(key, value)?,
            other => return Err(ExpError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies a config file: one `key = value` per line, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ExpError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExpError::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ExpError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExpError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    fn get(&self, key: &str) -> String {
        match key {
            "seed" => self.seed.to_string(),
            "out" => opt_path(&self.out),
            "threads" => self.threads.to_string(),
            "pattern.source" => match self.source {
                PatternSource::Random => "random",
                PatternSource::File(_) => "file",
                PatternSource::Face => "face",
                PatternSource::Digit => "digit",
            }
            .to_string(),
            "pattern.file" => match &self.source {
                PatternSource::File(p) => p.display().to_string(),
                _ => String::new(),
            },
            "pattern.K" => self.random.n_atoms.to_string(),
            "pattern.coeff_min" => self.random.coeff.0.to_string(),
            "pattern.coeff_max" => self.random.coeff.1.to_string(),
            "pattern.tau_min" => self.random.tau.0.to_string(),
            "pattern.tau_max" => self.random.tau.1.to_string(),
            "pattern.sigma_min" => self.random.sigma.0.to_string(),
            "pattern.sigma_max" => self.random.sigma.1.to_string(),
            "patterns" => self.patterns.to_string(),
            "trials" => self.trials.to_string(),
            "rho_list" => join(&self.rho_list),
            "eta_list" => join(&self.eta_list),
            "nu_list" => join(&self.nu_list),
            "t_range" => self.t_range.to_string(),
            "n_directions" => self.n_directions.to_string(),
            "s" => self.s.to_string(),
            "two_sided" => self.two_sided.to_string(),
            "noise.kind" => self.noise_kind.as_str().to_string(),
            "noise.L" => self.noise_l.to_string(),
            "noise.epsilon" => self.noise_epsilon.to_string(),
            "noise.eta" => self.noise_eta.to_string(),
            "noise.b" => self.noise_b.to_string(),
            "noise.nu" => self.noise_nu.to_string(),
            "generic.mode" => match self.generic_mode {
                GenericNoiseMode::CorrelatedSubset => "correlated-subset",
                GenericNoiseMode::RandomAtoms => "random-atoms",
            }
            .to_string(),
            "generic.atoms" => self.generic_atoms.to_string(),
            "register.reference" => opt_path(&self.register_reference),
            "register.target" => opt_path(&self.register_target),
            "register.tx" => opt_num(self.register_tx),
            "register.ty" => opt_num(self.register_ty),
            "decompose.input" => opt_path(&self.decompose_input),
            "decompose.atoms" => self.decompose_atoms.to_string(),
            "decompose.extent" => self.decompose_extent.to_string(),
            "decompose.tau_stride" => self.decompose_tau_stride.to_string(),
            _ => unreachable!("every listed key is handled"),
        }
    }

    /// Every key with its current value, in a form [`Self::apply_text`] reads back.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        let bad = |m: String| Err(ExpError::Config(m));
        if self.patterns == 0 || self.trials == 0 {
            return bad("patterns and trials must be >= 1".into());
        }
        if self.rho_list.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return bad("rho_list entries must be >= 0".into());
        }
        if self
            .eta_list
            .iter()
            .chain(&self.nu_list)
            .any(|r| !(*r >= 0.0) || !r.is_finite())
        {
            return bad("eta_list and nu_list entries must be >= 0".into());
        }
        if !(self.t_range >= 0.0) || !self.t_range.is_finite() {
            return bad("t_range must be >= 0".into());
        }
        if !(self.s > 2f64.sqrt()) {
            return bad(format!("s must exceed sqrt(2), got {}", self.s));
        }
        if self.n_directions < 4 || !self.n_directions.is_multiple_of(2) {
            return bad("n_directions must be even and >= 4".into());
        }
        if let PatternSource::File(p) = &self.source {
            if p.as_os_str().is_empty() {
                return bad("pattern.source = file needs pattern.file".into());
            }
        }
        self.random
            .validated()
            .map_err(|e| ExpError::Config(e.to_string()))?;
        self.noise_spec(0.0, 0.0).map(|_| ())
    }

    fn default_range(&self) -> f64 {
        match self.source {
            PatternSource::Random => self
                .random
                .tau
                .0
                .abs()
                .max(self.random.tau.1.abs())
                .max(1.0),
            _ => 1.0,
        }
    }

    pub fn translation_range(&self) -> f64 {
        if self.t_range > 0.0 {
            self.t_range
        } else {
            self.default_range()
        }
    }

    pub fn noise_support(&self) -> f64 {
        if self.noise_b > 0.0 {
            self.noise_b
        } else {
            self.default_range()
        }
    }

    /// Noise spec of the configured kind with level `eta` (or `nu`).
    pub fn noise_spec(&self, eta: f64, nu: f64) -> Result<NoiseSpec, ExpError> {
        NoiseSpec {
            kind: self.noise_kind,
            l: self.noise_l,
            epsilon: self.noise_epsilon,
            eta,
            b: self.noise_support(),
            nu,
        }
        .validated()
        .map_err(|e| ExpError::Config(e.to_string()))
    }

    /// Number of reference patterns the source provides.
    pub fn pattern_count(&self) -> usize {
        match self.source {
            PatternSource::Random => self.patterns,
            _ => 1,
        }
    }

    /// Reference pattern `index`.
    pub fn pattern(&self, index: usize) -> Result<Pattern, ExpError> {
        Ok(match &self.source {
            PatternSource::Random => {
                random_pattern(&self.random, &mut trial_rng(self.seed, stream(0, index, 0)))?
            }
            PatternSource::File(p) => load_pattern(p)?,
            PatternSource::Face => face_pattern()?,
            PatternSource::Digit => digit_pattern()?,
        })
    }
}

/// Generator stream for `(purpose, pattern, trial)`.
pub fn stream(purpose: u64, pattern: usize, trial: usize) -> u64 {
    (purpose << 48) | ((pattern as u64) << 24) | trial as u64
}

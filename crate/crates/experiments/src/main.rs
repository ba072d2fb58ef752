use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaussreg_experiments::{
    run_bounds_report, run_decompose, run_error_sweep, run_grid_count, run_register,
    run_siden_sweep, ExpError, SweepConfig,
};

/// Seeded Gaussian-atom registration experiments.
///
/// Every config key can be given after the subcommand as `--key value` or
/// `--key=value` (for example `--noise.eta 0.02 --rho_list 0,1,2`).
#[derive(Parser, Debug)]
#[command(name = "gaussreg", version)]
struct Cli {
    /// key = value config file, applied before any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimated vs. true SIDEN radius as a function of the filter size.
    SidenSweep(Overrides),
    /// Alignment error and bound vs. filter size and noise level.
    ErrorSweep(Overrides),
    /// Covering-grid size vs. filter size.
    GridCount(Overrides),
    /// Every bound constant for one pattern and noise spec.
    Bounds(Overrides),
    /// Register one target against a reference.
    Register(Overrides),
    /// Matching-pursuit decomposition of a raster (`--input img.pgm --atoms 20`).
    Decompose(Overrides),
}

#[derive(clap::Args, Debug)]
struct Overrides {
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, num_args = 0..)]
    keys: Vec<String>,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SidenSweep(_) => "siden-sweep",
            Command::ErrorSweep(_) => "error-sweep",
            Command::GridCount(_) => "grid-count",
            Command::Bounds(_) => "bounds",
            Command::Register(_) => "register",
            Command::Decompose(_) => "decompose",
        }
    }

    fn overrides(&self) -> &[String] {
        match self {
            Command::SidenSweep(o)
            | Command::ErrorSweep(o)
            | Command::GridCount(o)
            | Command::Bounds(o)
            | Command::Register(o)
            | Command::Decompose(o) => &o.keys,
        }
    }

    /// Short flag names accepted for this subcommand.
    fn alias(&self, key: &str) -> String {
        let mapped = match (self, key) {
            (Command::Decompose(_), "input" | "atoms" | "extent" | "tau_stride") => {
                format!("decompose.{key}")
            }
            (Command::Register(_), "reference" | "target" | "tx" | "ty") => {
                format!("register.{key}")
            }
            _ => key.to_string(),
        };
        mapped
    }
}

/// Splits `--key value` / `--key=value` pairs.
fn parse_pairs(args: &[String]) -> Result<Vec<(String, String)>, ExpError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let flag = arg
            .strip_prefix("--")
            .ok_or_else(|| ExpError::Config(format!("expected --key, got '{arg}'")))?;
        if let Some((k, v)) = flag.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else if flag == "show-config" {
            out.push((flag.to_string(), String::new()));
        } else {
            let v = it
                .next()
                .ok_or_else(|| ExpError::Config(format!("--{flag} needs a value")))?;
            out.push((flag.to_string(), v.clone()));
        }
    }
    Ok(out)
}

fn build_config(cli: &Cli) -> Result<(SweepConfig, bool), ExpError> {
    let pairs = parse_pairs(cli.command.overrides())?;
    let mut cfg = SweepConfig::for_command(cli.command.name());
    let mut show = cli.show_config;
    let late_config = pairs
        .iter()
        .find(|(k, _)| k == "config")
        .map(|(_, v)| PathBuf::from(v));
    if let Some(path) = cli.config.as_ref().or(late_config.as_ref()) {
        cfg.apply_file(path)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(threads) = cli.threads {
        cfg.threads = threads;
    }
    for (k, v) in &pairs {
        match k.as_str() {
            "config" => {}
            "show-config" => show = true,
            _ => cfg.set(&cli.command.alias(k), v)?,
        }
    }
    Ok((cfg, show))
}

fn emit(cfg: &SweepConfig, text: &str) -> Result<(), ExpError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), ExpError> {
    let (cfg, show) = build_config(cli)?;
    if show {
        print!("{}", cfg.to_text());
        return Ok(());
    }
    match cli.command {
        Command::SidenSweep(_) => emit(&cfg, &run_siden_sweep(&cfg)?),
        Command::ErrorSweep(_) => emit(&cfg, &run_error_sweep(&cfg)?),
        Command::GridCount(_) => emit(&cfg, &run_grid_count(&cfg)?),
        Command::Bounds(_) => {
            let (text, csv) = run_bounds_report(&cfg)?;
            print!("{text}");
            match &cfg.out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
        Command::Register(_) => emit(&cfg, &run_register(&cfg)?),
        Command::Decompose(_) => {
            let (csv, captured) = run_decompose(&cfg)?;
            eprintln!("captured energy fraction: {captured:.6}");
            emit(&cfg, &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gaussreg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

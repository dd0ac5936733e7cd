//! `boundary-lab` command-line front end.
//!
//! Every subcommand loads a measure (except `ballcount`), runs one experiment
//! and writes `<command>.json`, `<command>.csv` and `<command>.manifest.json`
//! into `--out`. Exit codes: 0 on success, 1 when an enumeration budget is
//! exceeded, 2 on configuration or validation errors.

use std::ffi::OsString;
use std::path::PathBuf;

use boundary_lab::Place;
use clap::{Parser, Subcommand};
use serde::Serialize;

mod commands;
pub mod output;

pub use commands::execute;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "BOUNDARY_LAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        source: boundary_lab::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn core(context: impl Into<String>) -> impl FnOnce(boundary_lab::Error) -> Self {
        let context = context.into();
        move |source| CliError::Core { context, source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_budget() => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "boundary-lab",
    version,
    about = "Random walks on GL_d(Q): spectra, boundaries and diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// Measure file (JSON: name, dim, atoms with weight and matrix).
    #[arg(long, global = true, value_name = "PATH")]
    pub measure: Option<PathBuf>,
    /// Restrict to this place (`inf` or a prime); repeat for several.
    #[arg(long = "place", global = true, value_name = "inf|PRIME")]
    pub places: Vec<Place>,
    /// Path length (largest horizon of a sweep).
    #[arg(long, global = true, default_value_t = 200)]
    pub n: usize,
    /// Independent paths per Lyapunov estimate.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Sample paths for lln / stationarity, auxiliary flags for contraction.
    #[arg(long, global = true, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    /// Block-merge threshold for exponents, nats per step.
    #[arg(long, global = true, default_value_t = boundary_lab::walk_engine::DEFAULT_GAP)]
    pub gap: f64,
    /// Stationarity bucket depth.
    #[arg(long, global = true, default_value_t = 6)]
    pub depth: u32,
    /// Largest height-ball radius for ballcount, nats.
    #[arg(long, global = true, default_value_t = 4.0)]
    pub rmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Relevant places of the measure.
    Places,
    /// Lyapunov spectrum at every relevant place.
    Lyapunov,
    /// One sampled boundary point with per-place residuals.
    Flag,
    /// LLN residual sweep over n/4, n/2, n with a wrong-flag control.
    Lln,
    /// Stationarity defect sweep.
    Stationarity,
    /// Contraction diameter sweep.
    Contraction,
    /// Per-place triviality verdicts.
    Triviality,
    /// Exact convolution entropy for n = 1, 2, ...
    Entropy,
    /// Height-ball counts up to --rmax.
    Ballcount,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Places => "places",
            Command::Lyapunov => "lyapunov",
            Command::Flag => "flag",
            Command::Lln => "lln",
            Command::Stationarity => "stationarity",
            Command::Contraction => "contraction",
            Command::Triviality => "triviality",
            Command::Entropy => "entropy",
            Command::Ballcount => "ballcount",
        }
    }

    fn uses_measure(self) -> bool {
        self != Command::Ballcount
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureRef {
    pub path: String,
    pub sha256: String,
}

/// Everything that determines a run's results. Hashed into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub measure: Option<MeasureRef>,
    /// Place override; empty means every relevant place.
    pub places: Vec<Place>,
    pub n: usize,
    pub trials: usize,
    pub samples: usize,
    pub seed: u64,
    pub gap: f64,
    pub depth: u32,
    pub rmax: f64,
}

fn validate(opts: &Options) -> Result<(), CliError> {
    if !(opts.gap.is_finite() && opts.gap >= 0.0) {
        return Err(CliError::Config(format!(
            "--gap must be finite and >= 0, got {}",
            opts.gap
        )));
    }
    if opts.n == 0 {
        return Err(CliError::Config("--n must be at least 1".into()));
    }
    if !(1..=64).contains(&opts.depth) {
        return Err(CliError::Config(format!(
            "--depth must be in 1..=64, got {}",
            opts.depth
        )));
    }
    if !opts.rmax.is_finite() {
        return Err(CliError::Config(format!(
            "--rmax must be finite, got {}",
            opts.rmax
        )));
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os(THREADS_ENV) else {
        return Ok(());
    };
    let threads = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got {:?}",
                raw.to_string_lossy()
            ))
        })?;
    // A pool built earlier in this process (tests calling `run` repeatedly) stays as is.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Parse `argv` (program name first), run the command and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_cli(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_cli(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    configure_threads()?;
    let opts = &cli.opts;
    validate(opts)?;
    let command = cli.command;

    let mut measure_ref = None;
    let mut measure = None;
    if command.uses_measure() {
        let path = opts.measure.as_ref().ok_or_else(|| {
            CliError::Config(format!("--measure is required for {}", command.name()))
        })?;
        let bytes = std::fs::read(path).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e,
        })?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| CliError::Config(format!("--measure {}: not UTF-8", path.display())))?;
        let mu = boundary_lab::walk_engine::load_measure(&text)
            .map_err(CliError::core(format!("--measure {}", path.display())))?;
        measure_ref = Some(MeasureRef {
            path: path.display().to_string(),
            sha256: output::sha256_hex(&bytes),
        });
        measure = Some(mu);
    }

    let config = RunConfig {
        command,
        measure: measure_ref,
        places: opts.places.clone(),
        n: opts.n,
        trials: opts.trials,
        samples: opts.samples,
        seed: opts.seed,
        gap: opts.gap,
        depth: opts.depth,
        rmax: opts.rmax,
    };
    let (report, budget) = execute(&config, measure.as_ref())?;
    let paths = output::write_artifacts(&opts.out, command.name(), opts.seed, &config, &report)?;
    match budget {
        // Partial sweeps are still written before reporting the overflow.
        Some(err) => Err(err),
        None => Ok(paths),
    }
}

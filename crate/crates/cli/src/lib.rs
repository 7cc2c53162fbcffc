//! Experiment runner for the `sdneuro` simulator: configuration, sweeps
//! and CSV/SVG artifacts.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

use config::Config;
use experiments::ExperimentOutput;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    DcSweep,
    SineSweep,
    SlewDemo,
    EsnDemo,
    Codec,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::DcSweep,
        Experiment::SineSweep,
        Experiment::SlewDemo,
        Experiment::EsnDemo,
        Experiment::Codec,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::DcSweep => "dc-sweep",
            Experiment::SineSweep => "sine-sweep",
            Experiment::SlewDemo => "slew-demo",
            Experiment::EsnDemo => "esn-demo",
            Experiment::Codec => "codec",
        }
    }
}

/// Worker count from `SDNEURO_THREADS`; `None` leaves the choice to rayon.
pub fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("SDNEURO_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "SDNEURO_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

/// Runs one experiment in a pool of `threads` workers (rayon's default
/// when `None`). Results do not depend on the worker count.
pub fn run(exp: Experiment, cfg: &Config, threads: Option<usize>) -> Result<ExperimentOutput, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Simulation(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match exp {
        Experiment::DcSweep => experiments::dc_sweep(cfg),
        Experiment::SineSweep => experiments::sine_sweep(cfg),
        Experiment::SlewDemo => experiments::slew_demo(cfg),
        Experiment::EsnDemo => experiments::esn_demo(cfg),
        Experiment::Codec => experiments::codec(cfg),
    })
}

pub fn default_out_dir(exp: Experiment) -> PathBuf {
    Path::new("out").join(exp.id())
}

/// Runs the experiment and writes its artifacts and manifest to `out`.
pub fn run_to_dir(
    exp: Experiment,
    cfg: &Config,
    out: &Path,
    threads: Option<usize>,
) -> Result<output::Manifest, CliError> {
    let result = run(exp, cfg, threads)?;
    Ok(output::write_all(out, exp.id(), &result.artifacts, &result.warnings, cfg)?)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sdneuro_cli::config::Config;
use sdneuro_cli::{default_out_dir, run_to_dir, thread_cap, Experiment};

#[derive(Parser)]
#[command(name = "sdneuro", version, about = "Sigma-delta spiking neuron experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Firing rate against DC input current
    DcSweep(Common),
    /// SDR over an input frequency and feedback gain grid
    SineSweep(Common),
    /// Narrow against extended feedback pulses on one sinusoid
    SlewDemo(Common),
    /// Floating-point against spiking echo-state network
    EsnDemo(Common),
    /// Encode a signal CSV, decode a spike CSV, or both
    Codec(Common),
}

#[derive(Args)]
struct Common {
    /// TOML config file; built-in defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config value, `section.key=value` (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (default `out/<experiment>`)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, common) = match cli.command {
        Command::DcSweep(c) => (Experiment::DcSweep, c),
        Command::SineSweep(c) => (Experiment::SineSweep, c),
        Command::SlewDemo(c) => (Experiment::SlewDemo, c),
        Command::EsnDemo(c) => (Experiment::EsnDemo, c),
        Command::Codec(c) => (Experiment::Codec, c),
    };
    let result = thread_cap().and_then(|threads| {
        let cfg = Config::load(common.config.as_deref(), &common.set)?;
        let out = common.out.unwrap_or_else(|| default_out_dir(exp));
        let manifest = run_to_dir(exp, &cfg, &out, threads)?;
        Ok((out, manifest))
    });
    match result {
        Ok((out, manifest)) => {
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}: {} files in {}", exp.id(), manifest.files.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sdneuro {}: {e}", exp.id());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

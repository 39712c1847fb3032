use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "hhqec",
    version,
    about = "Heavy-hex rotated surface code: layouts, threshold sweeps, injection and decoding"
)]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lattice layout as JSON and/or SVG, plus qubit counts.
    Layout(commands::LayoutArgs),
    /// Memory-experiment sweep over distances and physical error rates.
    Threshold(commands::ThresholdArgs),
    /// Sample a noisy memory circuit and write shots, DEM and circuit files.
    Sample(commands::SampleArgs),
    /// Inject one state (or a magic state) and run tomography.
    Inject(commands::InjectArgs),
    /// Inject every point of a (theta, phi) grid.
    InjectGrid(commands::GridArgs),
    /// Decode a shot file against a DEM.
    Decode(commands::DecodeArgs),
}

#[derive(Args, Clone, Debug)]
pub struct NoiseArgs {
    /// Noise model JSON file (fields p1, p2, p_spam, p_idle).
    #[arg(long)]
    noise: Option<PathBuf>,
    /// Named model: uniform (needs --p), calibrated, noiseless.
    #[arg(long, value_parser = ["uniform", "calibrated", "noiseless"])]
    noise_preset: Option<String>,
    /// Uniform physical error rate for every channel.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    p_spam: Option<f64>,
    #[arg(long)]
    p_idle: Option<f64>,
    /// Multiplies every rate after the overrides.
    #[arg(long)]
    noise_scale: Option<f64>,
}

#[derive(Args, Clone, Debug)]
pub struct OutArgs {
    /// Output directory (default: $HHQEC_OUT_DIR or the current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl OutArgs {
    pub fn dir(&self) -> Result<PathBuf> {
        let dir = self
            .out_dir
            .clone()
            .or_else(|| std::env::var_os("HHQEC_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

pub fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// 2 for bad input, 3 for anything that failed while checking or running.
fn exit_code(err: &anyhow::Error) -> u8 {
    use hhqec::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<hhqec::Error>() {
            return match e {
                E::InvalidDistance(_)
                | E::UnsupportedDistance { .. }
                | E::InvalidArgument(_)
                | E::Parse { .. }
                | E::Json(_) => 2,
                _ => 3,
            };
        }
        if cause.downcast_ref::<commands::UsageError>().is_some() {
            return 2;
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Layout(a) => commands::layout(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Sample(a) => commands::sample(a),
        Command::Inject(a) => commands::inject(a),
        Command::InjectGrid(a) => commands::inject_grid(a),
        Command::Decode(a) => commands::decode(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

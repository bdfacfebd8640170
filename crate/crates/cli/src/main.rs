//! `oltae`: generate TRN scenarios, run the double / fixed-point / core
//! model estimators, and compare them.
//!
//! Exit codes: 0 success, 2 config/validation/I/O error, 3 numerical
//! failure, 4 deviation threshold exceeded.

mod commands;
mod config;
mod results;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Layers, RunConfig, OUT_ENV};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] oltae::Error),
    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: oltae::Error,
    },
    #[error("fixed-point and core model disagree on frame {frame}")]
    BitMismatch { frame: usize },
    #[error("maximum relative deviation {max:.4}% exceeds limit {limit}%")]
    Threshold { max: f64, limit: f64 },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) | CliError::Frame { source: e, .. } => {
                if e.is_numerical() {
                    3
                } else {
                    2
                }
            }
            CliError::BitMismatch { .. } => 3,
            CliError::Threshold { .. } => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "oltae", version, about = "Linear 3D point-correspondence pose estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic scenario (frames.corr, truth.txt)
    Generate,
    /// Estimate every frame with the selected path(s)
    Estimate,
    /// Compare two estimate files; exit 4 above --max-dev-percent
    Compare,
    /// Dump the register transaction log of the core model for one frame
    HwsimTrace,
    /// Re-emit a report.csv as csv or plot data
    Report,
}

#[derive(Debug, Args)]
struct Opts {
    /// Flat `key = value` file; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    frames: Option<String>,
    #[arg(long, global = true)]
    points: Option<String>,
    /// Per-axis noise std (m)
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// constant | range
    #[arg(long, global = true)]
    sigma_model: Option<String>,
    #[arg(long, global = true)]
    fov_deg: Option<String>,
    /// double | fixed | hwsim | all
    #[arg(long, global = true)]
    path: Option<String>,
    /// auto_pow2 | manual
    #[arg(long, global = true)]
    scale_mode: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    #[arg(long, global = true)]
    max_dev_percent: Option<String>,
    #[arg(long, global = true)]
    baseline: Option<String>,
    #[arg(long, global = true)]
    candidate: Option<String>,
    /// Frame index for hwsim-trace
    #[arg(long, global = true)]
    frame: Option<String>,
    /// csv | plotdata
    #[arg(long, global = true)]
    format: Option<String>,
    /// Directory holding inputs (defaults to --out)
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output directory (default $OLTAE_OUT, then ./oltae-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Opts {
    fn flags(&self) -> BTreeMap<String, String> {
        let text = [
            ("seed", &self.seed),
            ("frames", &self.frames),
            ("points", &self.points),
            ("sigma", &self.sigma),
            ("sigma_model", &self.sigma_model),
            ("fov_deg", &self.fov_deg),
            ("path", &self.path),
            ("scale_mode", &self.scale_mode),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("max_dev_percent", &self.max_dev_percent),
            ("baseline", &self.baseline),
            ("candidate", &self.candidate),
            ("frame", &self.frame),
            ("format", &self.format),
        ];
        let mut out: BTreeMap<String, String> = text
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect();
        for (k, v) in [("input", &self.input), ("out", &self.out)] {
            if let Some(p) = v {
                out.insert(k.to_string(), p.display().to_string());
            }
        }
        out
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.opts.config {
        Some(p) => config::load_config_file(p)?,
        None => BTreeMap::new(),
    };
    let layers = Layers {
        file,
        flags: cli.opts.flags(),
    };
    let cfg = RunConfig::resolve(&layers, std::env::var(OUT_ENV).ok())?;
    let name = match cli.command {
        Command::Generate => "generate",
        Command::Estimate => "estimate",
        Command::Compare => "compare",
        Command::HwsimTrace => "hwsim-trace",
        Command::Report => "report",
    };
    commands::echo_config(&cfg, name)?;
    match cli.command {
        Command::Generate => commands::generate(&cfg),
        Command::Estimate => commands::estimate(&cfg),
        Command::Compare => commands::compare(&cfg),
        Command::HwsimTrace => commands::hwsim_trace(&cfg),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

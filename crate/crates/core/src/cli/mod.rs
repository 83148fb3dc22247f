//! The `karnet` command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 I/O or input
//! format error, 4 numeric-domain failure (inverse activation out of range,
//! non-finite intermediates, singular systems).
//!
//! Every command writes a manifest next to its primary output. `karnet replay
//! --manifest FILE` re-runs the recorded command and reproduces its data files
//! byte for byte.

mod commands;
mod manifest;

pub use commands::{run_bench, run_surface, run_synth, run_train, surface_csv};
pub use manifest::{write_atomic, Manifest, MANIFEST_MAGIC};

use crate::data::DataError;
use crate::eval::EvalError;
use crate::network::ModelFileError;
use crate::network::NetworkError;
use crate::trainer::TrainError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Domain(_) => 4,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Plan { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match &e {
            TrainError::InvalidConfig(_) | TrainError::TargetShape { .. } => {
                CliError::Usage(e.to_string())
            }
            TrainError::Network(NetworkError::InvalidSpec(_) | NetworkError::InputShape { .. }) => {
                CliError::Usage(e.to_string())
            }
            TrainError::Linalg(crate::linalg::LinalgError::InvalidConfig(_)) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Domain(e.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        TrainError::Network(e).into()
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Train(t) => t.into(),
            EvalError::ClassTooSmall { ref class, .. } => CliError::Usage(format!(
                "{e}\nhint: merge `{class}` into a neighbouring class with a \
                 `label_merge = {class} -> <other>` plan line (the shipped nursery \
                 plan does this unless --no-merge is given)"
            )),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<ModelFileError> for CliError {
    fn from(e: ModelFileError) -> Self {
        CliError::Io(e.to_string())
    }
}

pub(crate) fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Parser)]
#[command(name = "karnet", version, about = "Single-pass pseudo-inverse training of feedforward networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset (sinc, xor or spiral) as CSV.
    Synth(SynthArgs),
    /// Train a network on a CSV dataset and save the model.
    Train(TrainArgs),
    /// Evaluate a two-input model over a grid and export the outputs as CSV.
    Surface(SurfaceArgs),
    /// Cross-validate on a benchmark dataset and compare with published accuracies.
    Bench(BenchArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Sinc,
    Xor,
    Spiral,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// sinc: relative noise half-width.
    #[arg(long, default_value_t = 0.2)]
    pub noise_fraction: f64,
    /// sinc: noisy copies of the 8 clean points.
    #[arg(long, default_value_t = 10)]
    pub replicas: usize,
    /// spiral: points per arm.
    #[arg(long, default_value_t = 500)]
    pub per_arm: usize,
    #[arg(long, default_value_t = 3)]
    pub arms: usize,
    #[arg(long, default_value_t = 0.02)]
    pub noise_std: f64,
    #[arg(long, default_value_t = 1.5)]
    pub turns: f64,
    #[arg(long, default_value_t = 1.0)]
    pub max_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Classify,
    Regress,
}

/// Training options shared by `train` and `bench`.
#[derive(Debug, Clone, Args)]
pub struct TrainOpts {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// normal_scaled or uniform_pm1.
    #[arg(long, default_value = "normal_scaled")]
    pub init: String,
    /// Overrides the scheme's default scale.
    #[arg(long)]
    pub init_scale: Option<f64>,
    /// svd or ridge.
    #[arg(long, default_value = "svd")]
    pub pinv: String,
    /// Relative singular-value cutoff (svd mode).
    #[arg(long)]
    pub rcond: Option<f64>,
    /// Regularizer (ridge mode).
    #[arg(long, default_value_t = 1e-8)]
    pub lambda: f64,
    /// Fail on out-of-range inverse-activation inputs instead of clipping.
    #[arg(long)]
    pub no_clip: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// CSV with x* columns and a `label` or y* columns (or any CSV given --plan).
    #[arg(long)]
    pub data: PathBuf,
    /// Encoding plan for raw benchmark files.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Full structure including the input, e.g. 1,1,1,8,1.
    #[arg(long, value_delimiter = ',', conflicts_with = "widths", required_unless_present = "widths")]
    pub layers: Option<Vec<usize>>,
    /// Layer widths excluding the input, e.g. 2,1.
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    #[command(flatten)]
    pub opts: TrainOpts,
    /// Model output path; the report goes to `<model>.report`.
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `lo,hi`
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub x_range: AxisRange,
    #[arg(long, default_value = "0,1", allow_hyphen_values = true)]
    pub y_range: AxisRange,
    /// Grid points per axis.
    #[arg(long, default_value_t = 101)]
    pub resolution: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Closed interval given on the command line as `lo,hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
}

impl std::str::FromStr for AxisRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(format!("need finite lo <= hi, got {lo},{hi}"));
        }
        Ok(AxisRange { lo, hi })
    }
}

impl std::fmt::Display for AxisRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{},{}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// nursery, letter or optdigit.
    #[arg(long)]
    pub dataset: String,
    /// Raw data file; defaults to `data/<dataset>.csv`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Encoding plan; defaults to the shipped plan for the dataset.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Structure rule: 2 = [h,q], 3 = [2h,h,q], 4 = [4h,2h,h,q].
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Skip model selection and use this hidden size.
    #[arg(long)]
    pub fixed_h: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub inner_folds: usize,
    /// Hidden-size grid for model selection.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<usize>>,
    #[arg(long)]
    pub reselect_per_fold: bool,
    /// Drop the plan's label merges.
    #[arg(long)]
    pub no_merge: bool,
    #[command(flatten)]
    pub opts: TrainOpts,
    #[arg(long, default_value = "bench-out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write outputs here (same file names) instead of the recorded paths.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => run_synth(a),
        Command::Train(a) => run_train(a),
        Command::Surface(a) => run_surface(a),
        Command::Bench(a) => run_bench(a),
        Command::Replay(a) => replay(&a),
    }
}

/// Re-runs a recorded command, optionally redirecting its outputs into `out_dir`.
pub fn replay(args: &ReplayArgs) -> Result<(), CliError> {
    let manifest = Manifest::read(&args.manifest)?;
    let argv = std::iter::once("karnet".to_string()).chain(manifest.args.iter().cloned());
    let mut cli = Cli::try_parse_from(argv)
        .map_err(|e| CliError::Usage(format!("manifest arguments do not parse: {e}")))?;
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        redirect(&mut cli.command, dir)?;
    }
    run(cli.command)
}

fn rebase(path: &Path, dir: &Path) -> Result<PathBuf, CliError> {
    path.file_name()
        .map(|n| dir.join(n))
        .ok_or_else(|| CliError::Usage(format!("output path {} has no file name", path.display())))
}

fn redirect(command: &mut Command, dir: &Path) -> Result<(), CliError> {
    match command {
        Command::Synth(a) => a.out = rebase(&a.out, dir)?,
        Command::Train(a) => a.model = rebase(&a.model, dir)?,
        Command::Surface(a) => a.out = rebase(&a.out, dir)?,
        Command::Bench(a) => a.out_dir = dir.to_path_buf(),
        Command::Replay(_) => return Err(CliError::Usage("a manifest cannot record a replay".into())),
    }
    Ok(())
}

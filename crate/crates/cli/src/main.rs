use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;

/// Quantization robustness analyses and desk-scale KURE experiments.
#[derive(Debug, Parser)]
#[command(name = "qrobust", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form and Monte-Carlo quantization MSE over a grid of step sizes.
    MseCurve(MseCurveArgs),
    /// Curvature of the MSE at the optimal step and the resulting sensitivity.
    Sensitivity(SensitivityArgs),
    /// Check that a uniform source is less step-sensitive than a normal one.
    TheoremCheck(TheoremCheckArgs),
    /// Train the spiral MLP and save a checkpoint.
    Train(TrainArgs),
    /// Post-training quantization sweep over step-size ratios or bit-widths.
    Sweep(SweepArgs),
    /// Per-layer weight kurtosis of a checkpoint.
    Kurtosis(KurtosisArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum DistKind {
    Uniform,
    Normal,
    Laplace,
}

#[derive(Debug, Args, Serialize)]
struct DistArgs {
    /// Source distribution.
    #[arg(long, value_enum, default_value = "uniform")]
    dist: DistKind,
    /// Half-width of the uniform source.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Standard deviation of the normal source.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Scale of the Laplace source.
    #[arg(long, default_value_t = 1.0)]
    b: f64,
}

#[derive(Debug, Args, Serialize)]
struct MseCurveArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 4)]
    bits: u32,
    /// Exclusive lower end of the grid [default: 0.2 × optimal step].
    #[arg(long)]
    delta_min: Option<f64>,
    /// Inclusive upper end of the grid [default: a/2^(bits-1) for uniform,
    /// 2 × optimal step otherwise].
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    delta_steps: usize,
    /// Monte-Carlo sample count; 0 skips the simulation column.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct SensitivityArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, default_value_t = 4)]
    bits: u32,
    /// Absolute step-size perturbation; repeat for several values.
    #[arg(long, required = true)]
    epsilon: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct TheoremCheckArgs {
    /// Bit-widths as `M` or an inclusive range `LO..HI`.
    #[arg(long, default_value = "2..8", value_parser = parse_bits_range)]
    bits: BitsRange,
    /// Absolute step perturbations [default: 0.01, 0.02, ..., 0.20 × the
    /// optimal uniform step at each bit-width].
    #[arg(long)]
    epsilon: Vec<f64>,
    /// Optional CSV copy of the comparison table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct BitsRange {
    lo: u32,
    hi: u32,
}

fn parse_bits_range(s: &str) -> Result<BitsRange, String> {
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (parse(lo)?, parse(hi)?),
        None => {
            let m = parse(s)?;
            (m, m)
        }
    };
    if lo < 1 || lo > hi {
        return Err(format!("`{s}` is not a range LO..HI with 1 <= LO <= HI"));
    }
    Ok(BitsRange { lo, hi })
}

#[derive(Debug, Args, Serialize)]
struct TrainArgs {
    /// JSON training config; hyperparameter flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated layer widths, input first.
    #[arg(long, value_delimiter = ',', default_values_t = qrobust::trainer::REFERENCE_LAYER_SIZES)]
    layer_sizes: Vec<usize>,
    #[arg(long, default_value_t = qrobust::trainer::REFERENCE_EPOCHS)]
    epochs: usize,
    #[arg(long, default_value_t = qrobust::trainer::REFERENCE_BATCH_SIZE)]
    batch_size: usize,
    #[arg(long, default_value_t = qrobust::trainer::REFERENCE_LEARNING_RATE)]
    learning_rate: f64,
    /// Seeds the dataset, initialization and batch order; overrides the
    /// config file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Target kurtosis of the regularizer.
    #[arg(long, default_value_t = qrobust::kure::UNIFORM_KURTOSIS)]
    kure_target: f64,
    /// Regularizer weight; 0 trains the unregularized baseline.
    #[arg(long, default_value_t = 1.0)]
    kure_lambda: f64,
    /// Train with straight-through weight quantization at this bit-width.
    #[arg(long)]
    qat_bits: Option<u32>,
    #[arg(long, default_value_t = qrobust::trainer::REFERENCE_DATASET.n_train)]
    n_train: usize,
    #[arg(long, default_value_t = qrobust::trainer::REFERENCE_DATASET.n_test)]
    n_test: usize,
    /// Checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-epoch history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KnobArg {
    StepRatio,
    Bits,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long, value_enum, default_value = "step-ratio")]
    knob: KnobArg,
    /// Bit-width for the step-ratio sweep.
    #[arg(long, default_value_t = 4)]
    bits: u32,
    #[arg(long, default_value_t = 0.8)]
    step_ratio_min: f64,
    #[arg(long, default_value_t = 1.2)]
    step_ratio_max: f64,
    /// Number of evenly spaced ratios, both ends included.
    #[arg(long, default_value_t = 9)]
    step_ratio_steps: usize,
    /// Bit-widths for the bits sweep.
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 4, 8, 16])]
    bits_list: Vec<u32>,
    /// Round every layer's step to the nearest power of two.
    #[arg(long)]
    pow2_steps: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct KurtosisArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Optional CSV copy of the report.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Bad flag values detected after parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

/// The theorem check found a grid point where it does not hold.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct AssertionFailed(String);

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_ASSERTION: u8 = 4;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return EXIT_USAGE;
    }
    if err.downcast_ref::<AssertionFailed>().is_some() {
        return EXIT_ASSERTION;
    }
    match err.downcast_ref::<qrobust::Error>() {
        Some(qrobust::Error::Io(_)) | Some(qrobust::Error::Json(_)) | None => EXIT_RUNTIME,
        Some(_) => EXIT_DOMAIN,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::MseCurve(args) => commands::mse_curve(args),
        Command::Sensitivity(args) => commands::sensitivity(args),
        Command::TheoremCheck(args) => commands::theorem_check(args),
        Command::Train(args) => commands::train(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Kurtosis(args) => commands::kurtosis(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

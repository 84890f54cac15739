use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use qrobust::distortion::{self, uniform_max_step};
use qrobust::kure;
use qrobust::trainer::{self, Checkpoint, DatasetSpec, TrainConfig, REFERENCE_DATASET};
use qrobust::{KureConfig, SourceDistribution};
use serde::{Deserialize, Serialize};

use crate::output::{write_csv, write_manifest};
use crate::{
    AssertionFailed, DistArgs, DistKind, KnobArg, KurtosisArgs, MseCurveArgs, SensitivityArgs, SweepArgs,
    TheoremCheckArgs, TrainArgs, UsageError,
};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn source(args: &DistArgs) -> Result<SourceDistribution> {
    Ok(match args.dist {
        DistKind::Uniform => SourceDistribution::uniform(args.a)?,
        DistKind::Normal => SourceDistribution::normal(args.sigma)?,
        DistKind::Laplace => SourceDistribution::laplace(args.b)?,
    })
}

/// `steps` points evenly spaced over `(lo, hi]`.
fn half_open_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|i| if i == steps { hi } else { lo + (hi - lo) * i as f64 / steps as f64 })
        .collect()
}

/// `steps` points evenly spaced over `[lo, hi]`.
fn closed_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
        .collect()
}

#[derive(Serialize)]
struct MseCsvRow {
    delta: f64,
    mse_closed: Option<f64>,
    mse_mc: Option<f64>,
}

pub fn mse_curve(args: &MseCurveArgs) -> Result<()> {
    let start = Instant::now();
    let dist = source(&args.dist)?;
    if args.delta_steps == 0 {
        return Err(usage("--delta-steps must be at least 1"));
    }
    let opt = distortion::optimal_step(&dist, args.bits)?;
    let lo = args.delta_min.unwrap_or(0.2 * opt);
    let hi = match (args.delta_max, dist) {
        (Some(hi), _) => hi,
        (None, SourceDistribution::Uniform { a }) => uniform_max_step(a, args.bits),
        (None, _) => 2.0 * opt,
    };
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(usage(format!("step grid ({lo}, {hi}] is empty or not finite")));
    }
    let mc = (args.mc_samples > 0).then_some((args.mc_samples, args.seed));
    let curve = distortion::mse_curve(&dist, args.bits, &half_open_grid(lo, hi, args.delta_steps), mc)?;
    write_csv(
        &args.out,
        curve.rows.iter().map(|r| MseCsvRow {
            delta: r.delta,
            mse_closed: r.mse_closed,
            mse_mc: r.mse_mc,
        }),
    )?;
    write_manifest("mse-curve", args, Some(args.seed), &[&args.out], start.elapsed())?;
    Ok(())
}

#[derive(Serialize)]
struct SensitivityCsvRow<'a> {
    dist: &'a str,
    scale: f64,
    bits: u32,
    delta_opt: f64,
    mse_opt: f64,
    curvature_step: f64,
    second_derivative: f64,
    exact_second_derivative: f64,
    method: &'a str,
    epsilon: f64,
    gamma: f64,
}

pub fn sensitivity(args: &SensitivityArgs) -> Result<()> {
    let start = Instant::now();
    let dist = source(&args.dist)?;
    let report = distortion::sensitivity(&dist, args.bits, &args.epsilon)?;
    let method = match report.method {
        distortion::Method::Analytic => "analytic",
        distortion::Method::Empirical => "empirical",
    };
    write_csv(
        &args.out,
        report.gamma.iter().map(|&(epsilon, gamma)| SensitivityCsvRow {
            dist: dist.name(),
            scale: dist.scale(),
            bits: report.bits,
            delta_opt: report.delta_opt,
            mse_opt: report.mse_opt,
            curvature_step: report.curvature_step,
            second_derivative: report.second_derivative_at_opt,
            exact_second_derivative: report.exact_second_derivative_at_opt,
            method,
            epsilon,
            gamma,
        }),
    )?;
    let seed = matches!(dist, SourceDistribution::Laplace { .. }).then_some(distortion::LAPLACE_MC_SEED);
    write_manifest("sensitivity", args, seed, &[&args.out], start.elapsed())?;
    Ok(())
}

#[derive(Serialize)]
struct TheoremRow {
    bits: u32,
    epsilon: f64,
    gamma_uniform: f64,
    gamma_normal: f64,
    holds: bool,
}

pub fn theorem_check(args: &TheoremCheckArgs) -> Result<()> {
    let start = Instant::now();
    let uniform = SourceDistribution::uniform(1.0)?.unit_variance();
    let normal = SourceDistribution::normal(1.0)?;
    let mut rows = Vec::new();
    for bits in args.bits.lo..=args.bits.hi {
        let eps = if args.epsilon.is_empty() {
            let opt = distortion::optimal_step(&uniform, bits)?;
            (1..=20).map(|k| 0.01 * k as f64 * opt).collect()
        } else {
            args.epsilon.clone()
        };
        let gu = distortion::sensitivity(&uniform, bits, &eps)?;
        let gn = distortion::sensitivity(&normal, bits, &eps)?;
        for (&(epsilon, gamma_uniform), &(_, gamma_normal)) in gu.gamma.iter().zip(&gn.gamma) {
            rows.push(TheoremRow {
                bits,
                epsilon,
                gamma_uniform,
                gamma_normal,
                holds: gamma_uniform < gamma_normal,
            });
        }
    }
    println!("{:>4} {:>14} {:>14} {:>14} {:>5}", "bits", "epsilon", "gamma_uniform", "gamma_normal", "holds");
    for r in &rows {
        println!(
            "{:>4} {:>14.6e} {:>14.6e} {:>14.6e} {:>5}",
            r.bits, r.epsilon, r.gamma_uniform, r.gamma_normal, r.holds
        );
    }
    if let Some(out) = &args.out {
        write_csv(out, &rows)?;
        write_manifest("theorem-check", args, None, &[out], start.elapsed())?;
    }
    let failures = rows.iter().filter(|r| !r.holds).count();
    if failures > 0 {
        return Err(AssertionFailed(format!(
            "uniform source not less sensitive at {failures} of {} grid points",
            rows.len()
        ))
        .into());
    }
    println!("all {} grid points: gamma_uniform < gamma_normal", rows.len());
    Ok(())
}

/// Contents of a `--config` file.
#[derive(Debug, Deserialize)]
struct TrainFile {
    #[serde(flatten)]
    config: TrainConfig,
    #[serde(default)]
    dataset: Option<DatasetSpec>,
}

#[derive(Serialize)]
struct HistoryRow {
    epoch: usize,
    task_loss: f64,
    kure_loss: f64,
    accuracy: f64,
    mean_kurtosis: f64,
    layer_kurtosis: String,
}

fn train_setup(args: &TrainArgs) -> Result<(TrainConfig, DatasetSpec)> {
    let (mut cfg, data) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let file: TrainFile =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            (file.config, file.dataset.unwrap_or(REFERENCE_DATASET))
        }
        None => {
            let kure = if args.kure_lambda == 0.0 {
                None
            } else {
                Some(KureConfig::new(args.kure_target, args.kure_lambda)?)
            };
            let cfg = TrainConfig {
                layer_sizes: args.layer_sizes.clone(),
                epochs: args.epochs,
                batch_size: args.batch_size,
                learning_rate: args.learning_rate,
                seed: trainer::REFERENCE_SEED,
                kure,
                qat_bits: args.qat_bits,
                init: Default::default(),
            };
            let data = DatasetSpec {
                n_train: args.n_train,
                n_test: args.n_test,
            };
            (cfg, data)
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.layer_sizes.first() != Some(&trainer::FEATURES) || cfg.layer_sizes.last() != Some(&trainer::CLASSES) {
        return Err(usage(format!(
            "layer sizes must start at {} inputs and end at {} classes, got {:?}",
            trainer::FEATURES,
            trainer::CLASSES,
            cfg.layer_sizes
        )));
    }
    Ok((cfg, data))
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let start = Instant::now();
    let (cfg, spec) = train_setup(args)?;
    let (train_set, test) = spec.generate(cfg.seed)?;
    let (model, history) = trainer::train(&cfg, &train_set)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Checkpoint::new(&model, &cfg).with_dataset(spec).save(&args.out)?;
    let mut artifacts: Vec<&Path> = vec![&args.out];
    if let Some(path) = &args.history {
        write_csv(
            path,
            history.epochs.iter().map(|e| HistoryRow {
                epoch: e.epoch,
                task_loss: e.task_loss,
                kure_loss: e.kure_loss,
                accuracy: e.accuracy,
                mean_kurtosis: e.mean_kurtosis,
                layer_kurtosis: e
                    .layer_kurtosis
                    .iter()
                    .map(|k| k.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            }),
        )?;
        artifacts.push(path);
    }
    let last = history.epochs.last().context("training ran no epochs")?;
    println!("train accuracy {:.4}, test accuracy {:.4}", last.accuracy, model.accuracy(&test));
    println!("layer kurtosis {:?}", last.layer_kurtosis);
    write_manifest("train", args, Some(cfg.seed), &artifacts, start.elapsed())?;
    Ok(())
}

fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    if !path.exists() {
        anyhow::bail!("checkpoint file not found: {}", path.display());
    }
    Checkpoint::load(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

#[derive(Serialize)]
struct SweepCsvRow {
    knob: &'static str,
    value: f64,
    accuracy: f64,
    weight_kurtosis_mean: f64,
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    let start = Instant::now();
    let ck = load_checkpoint(&args.checkpoint)?;
    let model = ck.model()?;
    let (_, test) = ck.dataset.unwrap_or(REFERENCE_DATASET).generate(ck.seed)?;
    let result = match args.knob {
        KnobArg::StepRatio => {
            if args.step_ratio_steps == 0 || !(args.step_ratio_min <= args.step_ratio_max) {
                return Err(usage("step-ratio grid needs min <= max and at least one step"));
            }
            let ratios = closed_grid(args.step_ratio_min, args.step_ratio_max, args.step_ratio_steps);
            trainer::sweep_step_size(&model, args.bits, &ratios, args.pow2_steps, &test)?
        }
        KnobArg::Bits => trainer::sweep_bits(&model, &args.bits_list, args.pow2_steps, &test)?,
    };
    write_csv(
        &args.out,
        result.rows.iter().map(|r| SweepCsvRow {
            knob: r.knob.as_str(),
            value: r.value,
            accuracy: r.accuracy,
            weight_kurtosis_mean: r.weight_kurtosis_mean,
        }),
    )?;
    write_manifest("sweep", args, Some(ck.seed), &[&args.out], start.elapsed())?;
    Ok(())
}

#[derive(Serialize)]
struct KurtosisRow {
    layer: usize,
    rows: usize,
    cols: usize,
    kurtosis: f64,
}

pub fn kurtosis(args: &KurtosisArgs) -> Result<()> {
    let start = Instant::now();
    let ck = load_checkpoint(&args.checkpoint)?;
    let model = ck.model()?;
    let rows = model
        .layers()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            Ok(KurtosisRow {
                layer: i,
                rows: l.outputs(),
                cols: l.inputs(),
                kurtosis: kure::kurtosis(&l.weight).with_context(|| format!("layer {i}"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    println!("layer  shape      kurtosis");
    for r in &rows {
        println!("{:>5}  {:<9}  {:.6}", r.layer, format!("{}x{}", r.rows, r.cols), r.kurtosis);
    }
    if let Some(out) = &args.out {
        write_csv(out, &rows)?;
        write_manifest("kurtosis", args, Some(ck.seed), &[out], start.elapsed())?;
    }
    Ok(())
}

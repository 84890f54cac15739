use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantizer::{quantize_tensor, step_from_range, QuantizerConfig};

use super::data::Dataset;
use super::model::MlpModel;
use super::train::{layer_kurtosis, mean};

/// Which quantizer parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knob {
    StepRatio,
    Bits,
}

impl Knob {
    pub fn as_str(&self) -> &'static str {
        match self {
            Knob::StepRatio => "step_ratio",
            Knob::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub knob: Knob,
    pub value: f64,
    pub accuracy: f64,
    pub weight_kurtosis_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Post-training weight quantization settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtqSpec {
    pub bits: u32,
    /// Multiplier on each layer's max-abs step.
    pub step_scale: f64,
    /// Round each layer's step to the nearest power of two.
    pub pow2_steps: bool,
}

impl PtqSpec {
    pub fn new(bits: u32, step_scale: f64) -> Self {
        Self {
            bits,
            step_scale,
            pow2_steps: false,
        }
    }
}

/// Nearest power of two in log space; ties round up.
pub fn power_of_two_round(delta: f64) -> Result<f64> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("step must be positive and finite, got {delta}")));
    }
    // Split delta = m · 2^e with m in [1, 2); round up when m ≥ √2.
    let (m, e) = frexp(delta);
    let e = if m >= std::f64::consts::SQRT_2 { e + 1 } else { e };
    Ok(2f64.powi(e))
}

fn frexp(x: f64) -> (f64, i32) {
    const SUBNORMAL_SCALE: i32 = 64;
    let (x, shift) = if x < f64::MIN_POSITIVE {
        (x * 2f64.powi(SUBNORMAL_SCALE), SUBNORMAL_SCALE)
    } else {
        (x, 0)
    };
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32 - 1023;
    let mantissa = f64::from_bits((bits & 0x000f_ffff_ffff_ffff) | (1023u64 << 52));
    (mantissa, exp - shift)
}

/// Per-layer quantizer configs used by [`ptq_evaluate`].
pub fn ptq_configs(model: &MlpModel, spec: &PtqSpec) -> Result<Vec<QuantizerConfig>> {
    if spec.bits < 2 {
        return Err(Error::Config(format!("PTQ needs at least 2 bits, got {}", spec.bits)));
    }
    if !(spec.step_scale.is_finite() && spec.step_scale > 0.0) {
        return Err(Error::Config(format!(
            "step_scale must be positive, got {}",
            spec.step_scale
        )));
    }
    model
        .layers()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let base = step_from_range(&l.weight, spec.bits).map_err(|e| e.in_layer(i))?;
            let mut step = base.step() * spec.step_scale;
            if spec.pow2_steps {
                step = power_of_two_round(step)?;
            }
            QuantizerConfig::new(spec.bits, step).map_err(|e| e.in_layer(i))
        })
        .collect()
}

/// Test accuracy with weights quantized per `spec`; biases stay full
/// precision and `model` is not modified.
pub fn ptq_evaluate(model: &MlpModel, spec: &PtqSpec, test: &Dataset) -> Result<f64> {
    let configs = ptq_configs(model, spec)?;
    let quantized = model.map_weights(|i, w| quantize_tensor(w, &configs[i]))?;
    Ok(quantized.accuracy(test))
}

fn sweep(
    model: &MlpModel,
    knob: Knob,
    points: Vec<(f64, PtqSpec)>,
    test: &Dataset,
) -> Result<SweepResult> {
    let kurt_mean = mean(&layer_kurtosis(model)?);
    let mut rows = points
        .into_par_iter()
        .map(|(value, spec)| {
            Ok(SweepRow {
                knob,
                value,
                accuracy: ptq_evaluate(model, &spec, test)?,
                weight_kurtosis_mean: kurt_mean,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(SweepResult { rows })
}

/// PTQ accuracy for each step-scale ratio at a fixed bit-width.
pub fn sweep_step_size(
    model: &MlpModel,
    bits: u32,
    ratios: &[f64],
    pow2_steps: bool,
    test: &Dataset,
) -> Result<SweepResult> {
    if ratios.is_empty() {
        return Err(Error::EmptyRequest("ratio list is empty"));
    }
    let points = ratios
        .iter()
        .map(|&r| {
            (
                r,
                PtqSpec {
                    bits,
                    step_scale: r,
                    pow2_steps,
                },
            )
        })
        .collect();
    sweep(model, Knob::StepRatio, points, test)
}

/// PTQ accuracy at the max-abs step for each bit-width.
pub fn sweep_bits(model: &MlpModel, bits_list: &[u32], pow2_steps: bool, test: &Dataset) -> Result<SweepResult> {
    if bits_list.is_empty() {
        return Err(Error::EmptyRequest("bit-width list is empty"));
    }
    let points = bits_list
        .iter()
        .map(|&bits| {
            (
                bits as f64,
                PtqSpec {
                    bits,
                    step_scale: 1.0,
                    pow2_steps,
                },
            )
        })
        .collect();
    sweep(model, Knob::Bits, points, test)
}

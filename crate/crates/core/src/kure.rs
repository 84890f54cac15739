//! Kurtosis regularization (KURE) of weight tensors.
//!
//! For a tensor `W` with population mean `μ` and standard deviation `σ`,
//! `Kurt[W] = mean(((w - μ)/σ)^4)`. The penalty over `L` tensors is
//! `L_K = (1/L) Σ |Kurt[W_i] - K_T|²`, added to the task loss as
//! `L = L_task + λ·L_K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Variances below this are treated as a constant tensor.
pub const MIN_VARIANCE: f64 = 1e-24;

/// Kurtosis of a uniform distribution.
pub const UNIFORM_KURTOSIS: f64 = 1.8;

/// Target kurtosis `K_T` and coefficient `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KureConfig {
    target: f64,
    coefficient: f64,
}

impl Default for KureConfig {
    fn default() -> Self {
        Self {
            target: UNIFORM_KURTOSIS,
            coefficient: 1.0,
        }
    }
}

impl KureConfig {
    pub fn new(target: f64, coefficient: f64) -> Result<Self> {
        // Any non-degenerate distribution has kurtosis > 1.
        if !(target.is_finite() && target > 1.0) {
            return Err(Error::Config(format!("kurtosis target must exceed 1, got {target}")));
        }
        if !(coefficient.is_finite() && coefficient >= 0.0) {
            return Err(Error::Config(format!(
                "KURE coefficient must be non-negative, got {coefficient}"
            )));
        }
        Ok(Self { target, coefficient })
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }
}

/// Central moments used by both the statistic and its gradient.
struct Moments {
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

fn moments(x: &[f64]) -> Result<Moments> {
    if x.len() < 4 {
        return Err(Error::TooFewElements(x.len()));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    if m2 < MIN_VARIANCE {
        return Err(Error::DegenerateVariance);
    }
    Ok(Moments { mean, m2, m3, m4 })
}

/// Fourth standardized moment with population statistics.
pub fn kurtosis(t: &Tensor) -> Result<f64> {
    kurtosis_of(t.data())
}

pub fn kurtosis_of(x: &[f64]) -> Result<f64> {
    let m = moments(x)?;
    Ok(m.m4 / (m.m2 * m.m2))
}

/// `(1/L) Σ |Kurt[W_i] - K_T|²` over the given tensors.
pub fn kure_loss(weights: &[&Tensor], cfg: &KureConfig) -> Result<f64> {
    let kurt = weights
        .iter()
        .enumerate()
        .map(|(i, w)| kurtosis(w).map_err(|e| e.in_layer(i)))
        .collect::<Result<Vec<_>>>()?;
    kure_loss_from_kurtosis(&kurt, cfg)
}

/// Same penalty from precomputed per-layer kurtosis values.
pub fn kure_loss_from_kurtosis(kurt: &[f64], cfg: &KureConfig) -> Result<f64> {
    if kurt.is_empty() {
        return Err(Error::EmptyRequest("no weight tensors to regularize"));
    }
    Ok(kurt.iter().map(|k| (k - cfg.target).powi(2)).sum::<f64>() / kurt.len() as f64)
}

/// `task_loss + λ·kure_term`.
pub fn total_loss(task_loss: f64, kure_term: f64, cfg: &KureConfig) -> f64 {
    task_loss + cfg.coefficient * kure_term
}

/// Gradient of `|Kurt[t] - K_T|²` with respect to every element of `t`.
///
/// With `d_i = t_i - μ` and central moments `m_k`:
/// `∂Kurt/∂t_i = 4/(N m2²)·(d_i³ - m3) - 4 m4/(N m2³)·d_i`.
pub fn kure_grad(t: &Tensor, cfg: &KureConfig) -> Result<Tensor> {
    let x = t.data();
    let m = moments(x)?;
    let n = x.len() as f64;
    let k = m.m4 / (m.m2 * m.m2);
    let outer = 2.0 * (k - cfg.target);
    let a = 4.0 / (n * m.m2 * m.m2);
    let b = 4.0 * m.m4 / (n * m.m2 * m.m2 * m.m2);
    let data = x
        .iter()
        .map(|&v| {
            let d = v - m.mean;
            outer * (a * (d * d * d - m.m3) - b * d)
        })
        .collect();
    Ok(Tensor::from_parts_unchecked(t.shape().to_vec(), data))
}

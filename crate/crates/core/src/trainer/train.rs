use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kure::{kure_grad, kure_loss_from_kurtosis, kurtosis, KureConfig};
use crate::quantizer::{quantize_tensor, step_from_range};
use crate::tensor::Tensor;

use super::data::Dataset;
use super::model::{cross_entropy, forward, validate_sizes, Dense, InitScheme, MlpModel};

// Generator stream for minibatch order (initialization uses its own).
const SHUFFLE_STREAM: u64 = 0x5f1e;

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub layer_sizes: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Kurtosis regularization; `None` trains the plain task loss.
    pub kure: Option<KureConfig>,
    /// Bit-width of straight-through weight quantization during training.
    pub qat_bits: Option<u32>,
    #[serde(default)]
    pub init: InitScheme,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        validate_sizes(&self.layer_sizes)?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if let Some(bits) = self.qat_bits {
            if !(2..=crate::quantizer::MAX_BITS).contains(&bits) {
                return Err(Error::Config(format!("qat bits must be in 2..=32, got {bits}")));
            }
        }
        Ok(())
    }
}

/// Statistics recorded after each epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's minibatches.
    pub task_loss: f64,
    /// KURE penalty of the weights at the end of the epoch.
    pub kure_loss: f64,
    /// Training accuracy of the predictions made during the epoch.
    pub accuracy: f64,
    pub layer_kurtosis: Vec<f64>,
    pub mean_kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub initial_loss: f64,
    pub initial_kurtosis: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
}

/// Per-layer kurtosis of the weight matrices.
pub fn layer_kurtosis(model: &MlpModel) -> Result<Vec<f64>> {
    model
        .layers()
        .iter()
        .enumerate()
        .map(|(i, l)| kurtosis(&l.weight).map_err(|e| e.in_layer(i)))
        .collect()
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Summed cross-entropy and parameter gradients over `batch`, using
/// `weights` (possibly quantized) in place of the layer weights.
pub(crate) fn batch_gradient(
    layers: &[Dense],
    weights: &[&[f64]],
    data: &Dataset,
    batch: &[usize],
) -> (f64, usize, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut gw: Vec<Vec<f64>> = layers.iter().map(|l| vec![0.0; l.weight.len()]).collect();
    let mut gb: Vec<Vec<f64>> = layers.iter().map(|l| vec![0.0; l.bias.len()]).collect();
    let mut loss = 0.0;
    let mut correct = 0;
    for &i in batch {
        let acts = forward(layers, weights, data.row(i));
        let logits = acts.last().expect("non-empty");
        if super::model::argmax(logits) == data.labels[i] {
            correct += 1;
        }
        let (l, mut delta) = cross_entropy(logits, data.labels[i]);
        loss += l;
        for k in (0..layers.len()).rev() {
            let input = &acts[k];
            let n_in = layers[k].inputs();
            for (o, &d) in delta.iter().enumerate() {
                gb[k][o] += d;
                let row = &mut gw[k][o * n_in..(o + 1) * n_in];
                for (g, a) in row.iter_mut().zip(input) {
                    *g += d * a;
                }
            }
            if k > 0 {
                let w = weights[k];
                let mut prev = vec![0.0; n_in];
                for (o, &d) in delta.iter().enumerate() {
                    for (p, wv) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *p += wv * d;
                    }
                }
                // ReLU: pass gradient only where the activation was positive.
                for (p, a) in prev.iter_mut().zip(input) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
                delta = prev;
            }
        }
    }
    (loss, correct, gw, gb)
}

/// Quantized copies of the weights and the straight-through masks
/// (1 inside the clamp range, 0 outside).
fn quantized_weights(model: &MlpModel, bits: u32) -> Result<(Vec<Tensor>, Vec<Vec<f64>>)> {
    let mut q = Vec::with_capacity(model.layers().len());
    let mut masks = Vec::with_capacity(model.layers().len());
    for (i, l) in model.layers().iter().enumerate() {
        let cfg = step_from_range(&l.weight, bits).map_err(|e| e.in_layer(i))?;
        let tau = cfg.threshold();
        q.push(quantize_tensor(&l.weight, &cfg)?);
        masks.push(
            l.weight
                .data()
                .iter()
                .map(|w| if w.abs() <= tau { 1.0 } else { 0.0 })
                .collect(),
        );
    }
    Ok((q, masks))
}

/// Minibatch SGD on cross-entropy, plus `λ·(1/L)Σ|Kurt[W_i] - K_T|²` over
/// every weight matrix when KURE is enabled. With QAT the forward and
/// backward passes use max-abs quantized weights and the gradient reaches
/// the latent weights through a clipped straight-through estimator.
///
/// Deterministic for a fixed config and dataset.
pub fn train(cfg: &TrainConfig, data: &Dataset) -> Result<(MlpModel, History)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyRequest("training set is empty"));
    }
    if cfg.layer_sizes[0] != data.dims || *cfg.layer_sizes.last().expect("validated") != data.classes {
        return Err(Error::Config(format!(
            "layer_sizes {:?} do not match data ({} features, {} classes)",
            cfg.layer_sizes, data.dims, data.classes
        )));
    }

    let mut model = MlpModel::init_with(&cfg.layer_sizes, cfg.init, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(SHUFFLE_STREAM);
    let mut history = History {
        initial_loss: model.loss(data),
        initial_kurtosis: layer_kurtosis(&model)?,
        epochs: Vec::with_capacity(cfg.epochs),
    };
    let n_layers = model.layers().len() as f64;
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_correct = 0;
        for (batch_index, batch) in order.chunks(cfg.batch_size).enumerate() {
            let (qweights, masks) = match cfg.qat_bits {
                Some(bits) => {
                    let (q, m) = quantized_weights(&model, bits)?;
                    (Some(q), Some(m))
                }
                None => (None, None),
            };
            let views: Vec<&[f64]> = match &qweights {
                Some(q) => q.iter().map(Tensor::data).collect(),
                None => model.layers().iter().map(|l| l.weight.data()).collect(),
            };
            let (loss, correct, mut gw, gb) = batch_gradient(model.layers(), &views, data, batch);
            if !loss.is_finite() {
                return Err(Error::Divergence {
                    epoch,
                    batch: batch_index,
                    loss,
                });
            }
            epoch_loss += loss;
            epoch_correct += correct;

            let scale = 1.0 / batch.len() as f64;
            if let Some(masks) = &masks {
                for (g, m) in gw.iter_mut().zip(masks) {
                    for (gv, mv) in g.iter_mut().zip(m) {
                        *gv *= mv;
                    }
                }
            }
            let kure_grads = match &cfg.kure {
                Some(k) if k.coefficient() > 0.0 => Some(
                    model
                        .layers()
                        .iter()
                        .enumerate()
                        .map(|(i, l)| kure_grad(&l.weight, k).map_err(|e| e.in_layer(i)))
                        .collect::<Result<Vec<_>>>()?,
                ),
                _ => None,
            };
            let kure_scale = cfg.kure.map_or(0.0, |k| k.coefficient() / n_layers);
            let lr = cfg.learning_rate;
            for (k, layer) in model.layers_mut().iter_mut().enumerate() {
                let kg = kure_grads.as_ref().map(|g| g[k].data());
                for (j, w) in layer.weight.data_mut().iter_mut().enumerate() {
                    let mut g = gw[k][j] * scale;
                    if let Some(kg) = kg {
                        g += kure_scale * kg[j];
                    }
                    *w -= lr * g;
                }
                for (b, g) in layer.bias.data_mut().iter_mut().zip(&gb[k]) {
                    *b -= lr * g * scale;
                }
            }
            if model.layers().iter().any(|l| l.weight.data().iter().any(|w| !w.is_finite())) {
                return Err(Error::Divergence {
                    epoch,
                    batch: batch_index,
                    loss: f64::NAN,
                });
            }
        }
        let kurt = layer_kurtosis(&model)?;
        let kure_loss = kure_loss_from_kurtosis(&kurt, &cfg.kure.unwrap_or_default())?;
        history.epochs.push(EpochRecord {
            epoch,
            task_loss: epoch_loss / data.len() as f64,
            kure_loss,
            accuracy: epoch_correct as f64 / data.len() as f64,
            mean_kurtosis: mean(&kurt),
            layer_kurtosis: kurt,
        });
    }
    Ok((model, history))
}

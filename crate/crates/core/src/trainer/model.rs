use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::data::Dataset;

/// Fully connected layer: `weight` is `[out, in]`, `bias` is `[out]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }
}

/// Weight initialization, both scaled by fan-in. Biases start at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitScheme {
    /// `N(0, 2/fan_in)`.
    #[default]
    Normal,
    /// `U(-sqrt(6/fan_in), sqrt(6/fan_in))`.
    Uniform,
}

/// Multilayer perceptron with ReLU between layers and linear logits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    layers: Vec<Dense>,
}

impl MlpModel {
    /// Seeded initialization with the default scheme.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        Self::init_with(layer_sizes, InitScheme::default(), seed)
    }

    pub fn init_with(layer_sizes: &[usize], scheme: InitScheme, seed: u64) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x1417);
        let layers = layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let data = match scheme {
                    InitScheme::Normal => {
                        let sd = (2.0 / fan_in as f64).sqrt();
                        (0..fan_in * fan_out)
                            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                            .collect()
                    }
                    InitScheme::Uniform => {
                        let limit = (6.0 / fan_in as f64).sqrt();
                        (0..fan_in * fan_out)
                            .map(|_| rng.random_range(-limit..limit))
                            .collect()
                    }
                };
                Dense {
                    weight: Tensor::from_parts_unchecked(vec![fan_out, fan_in], data),
                    bias: Tensor::zeros(vec![fan_out]),
                }
            })
            .collect();
        Ok(Self { layers })
    }

    /// Assembles a model from layers, checking that dimensions compose.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("model needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.weight.shape().len() != 2 || l.bias.shape() != [l.outputs()] {
                return Err(Error::Shape(format!("layer {i}: weight/bias shapes disagree")));
            }
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].outputs() != w[1].inputs() {
                return Err(Error::Shape(format!(
                    "layer {i} emits {} values, layer {} expects {}",
                    w[0].outputs(),
                    i + 1,
                    w[1].inputs()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.layers[0].inputs()];
        sizes.extend(self.layers.iter().map(Dense::outputs));
        sizes
    }

    pub fn weights(&self) -> Vec<&Tensor> {
        self.layers.iter().map(|l| &l.weight).collect()
    }

    /// Copy with every weight matrix replaced through `f`; biases untouched.
    pub fn map_weights(&self, mut f: impl FnMut(usize, &Tensor) -> Result<Tensor>) -> Result<Self> {
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                Ok(Dense {
                    weight: f(i, &l.weight).map_err(|e| e.in_layer(i))?,
                    bias: l.bias.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { layers })
    }

    /// Logits for one input row.
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let views: Vec<&[f64]> = self.layers.iter().map(|l| l.weight.data()).collect();
        forward(&self.layers, &views, x).pop().expect("non-empty")
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Fraction of correctly classified rows.
    pub fn accuracy(&self, data: &Dataset) -> f64 {
        let correct = (0..data.len())
            .filter(|&i| self.predict(data.row(i)) == data.labels[i])
            .count();
        correct as f64 / data.len() as f64
    }

    /// Mean cross-entropy over `data`.
    pub fn loss(&self, data: &Dataset) -> f64 {
        let sum: f64 = (0..data.len())
            .map(|i| cross_entropy(&self.logits(data.row(i)), data.labels[i]).0)
            .sum();
        sum / data.len() as f64
    }
}

pub(crate) fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(Error::Config("layer_sizes needs an input and an output size".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::Config("layer sizes must be positive".into()));
    }
    Ok(())
}

/// Activations of every layer for one input: element 0 is the input,
/// the last element the logits. Hidden activations are post-ReLU.
pub(crate) fn forward(layers: &[Dense], weights: &[&[f64]], x: &[f64]) -> Vec<Vec<f64>> {
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x.to_vec());
    for (k, layer) in layers.iter().enumerate() {
        let input = &acts[k];
        let (n_in, n_out) = (layer.inputs(), layer.outputs());
        let w = weights[k];
        let b = layer.bias.data();
        let last = k + 1 == layers.len();
        let out: Vec<f64> = (0..n_out)
            .map(|o| {
                let row = &w[o * n_in..(o + 1) * n_in];
                let z = b[o] + row.iter().zip(input).map(|(w, a)| w * a).sum::<f64>();
                if last {
                    z
                } else {
                    z.max(0.0)
                }
            })
            .collect();
        acts.push(out);
    }
    acts
}

/// Cross-entropy of `logits` against `label` and the logit gradient
/// `softmax - onehot`.
pub(crate) fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let loss = total.ln() + max - logits[label];
    let mut grad: Vec<f64> = exps.iter().map(|e| e / total).collect();
    grad[label] -= 1.0;
    (loss, grad)
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_shapes_and_bounds() {
        let m = MlpModel::init_with(&[2, 8, 3], InitScheme::Uniform, 1).unwrap();
        assert_eq!(m.layer_sizes(), vec![2, 8, 3]);
        assert_eq!(m.layers()[0].weight.shape(), &[8, 2]);
        let limit = 3f64.sqrt();
        assert!(m.layers()[0].weight.data().iter().all(|w| w.abs() < limit));
        assert_eq!(MlpModel::init_with(&[2, 8, 3], InitScheme::Uniform, 1).unwrap(), m);
        assert_ne!(MlpModel::init(&[2, 8, 3], 1).unwrap(), m);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(MlpModel::init(&[2], 1).is_err());
        assert!(MlpModel::init(&[2, 0, 3], 1).is_err());
    }

    #[test]
    fn from_layers_checks_composition() {
        let a = MlpModel::init(&[2, 4], 1).unwrap().layers()[0].clone();
        let b = MlpModel::init(&[5, 3], 1).unwrap().layers()[0].clone();
        assert!(MlpModel::from_layers(vec![a, b]).is_err());
    }

    #[test]
    fn cross_entropy_gradient_sums_to_zero() {
        let (loss, g) = cross_entropy(&[1.0, 2.0, -0.5], 1);
        assert!(loss > 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-15);
        assert!(g[1] < 0.0);
    }
}

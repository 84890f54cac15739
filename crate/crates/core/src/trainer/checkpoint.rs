//! JSON model checkpoints.
//!
//! Arrays are written row-major as decimal numbers with 17 significant
//! digits, which round-trips every `f64` bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

use super::data::DatasetSpec;
use super::model::{Dense, MlpModel};
use super::train::TrainConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    #[serde(serialize_with = "full_precision")]
    pub weight: Vec<f64>,
    #[serde(serialize_with = "full_precision")]
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub layer_sizes: Vec<usize>,
    pub seed: u64,
    pub config: TrainConfig,
    /// Split sizes of the dataset the model was trained on, if known.
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    pub layers: Vec<LayerRecord>,
}

fn full_precision<S: Serializer>(values: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::{Error as _, SerializeSeq};
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for v in values {
        let raw = RawValue::from_string(format!("{v:.16e}")).map_err(S::Error::custom)?;
        seq.serialize_element(&raw)?;
    }
    seq.end()
}

impl Checkpoint {
    pub fn new(model: &MlpModel, config: &TrainConfig) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            layer_sizes: model.layer_sizes(),
            seed: config.seed,
            config: config.clone(),
            dataset: None,
            layers: model
                .layers()
                .iter()
                .map(|l| LayerRecord {
                    weight: l.weight.data().to_vec(),
                    bias: l.bias.data().to_vec(),
                })
                .collect(),
        }
    }

    pub fn with_dataset(mut self, spec: DatasetSpec) -> Self {
        self.dataset = Some(spec);
        self
    }

    /// Rebuilds the model, checking sizes against `layer_sizes`.
    pub fn model(&self) -> Result<MlpModel> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        if self.layer_sizes.len() != self.layers.len() + 1 {
            return Err(Error::Checkpoint(format!(
                "{} layer sizes for {} layers",
                self.layer_sizes.len(),
                self.layers.len()
            )));
        }
        let layers = self
            .layers
            .iter()
            .zip(self.layer_sizes.windows(2))
            .map(|(rec, w)| {
                Ok(Dense {
                    weight: Tensor::new(vec![w[1], w[0]], rec.weight.clone())?,
                    bias: Tensor::new(vec![w[1]], rec.bias.clone())?,
                })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        MlpModel::from_layers(layers)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

//! The pinned desk-scale experiment used by the robustness comparisons and
//! as the CLI's training defaults.

use crate::kure::KureConfig;

use super::data::DatasetSpec;
use super::model::InitScheme;
use super::train::TrainConfig;

pub const REFERENCE_SEED: u64 = 14;
pub const REFERENCE_LAYER_SIZES: [usize; 4] = [2, 128, 128, 3];
pub const REFERENCE_EPOCHS: usize = 100;
pub const REFERENCE_BATCH_SIZE: usize = 32;
pub const REFERENCE_LEARNING_RATE: f64 = 0.05;
pub const REFERENCE_DATASET: DatasetSpec = DatasetSpec {
    n_train: 2000,
    n_test: 2000,
};

/// Reference training run; `kure: None` gives the baseline.
pub fn reference_config(kure: Option<KureConfig>) -> TrainConfig {
    TrainConfig {
        layer_sizes: REFERENCE_LAYER_SIZES.to_vec(),
        epochs: REFERENCE_EPOCHS,
        batch_size: REFERENCE_BATCH_SIZE,
        learning_rate: REFERENCE_LEARNING_RATE,
        seed: REFERENCE_SEED,
        kure,
        qat_bits: None,
        init: InitScheme::Normal,
    }
}

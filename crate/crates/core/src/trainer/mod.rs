//! Small-MLP experiments: train with optional KURE and QAT, then measure
//! how post-training quantization accuracy reacts to step-size and
//! bit-width changes.

mod checkpoint;
mod data;
mod model;
mod ptq;
mod reference;
mod train;

pub use checkpoint::{Checkpoint, LayerRecord, FORMAT_VERSION};
pub use data::{make_dataset, Dataset, DatasetSpec, CLASSES, FEATURES};
pub use model::{Dense, InitScheme, MlpModel};
pub use ptq::{
    power_of_two_round, ptq_configs, ptq_evaluate, sweep_bits, sweep_step_size, Knob, PtqSpec, SweepResult,
    SweepRow,
};
pub use reference::{
    reference_config, REFERENCE_BATCH_SIZE, REFERENCE_DATASET, REFERENCE_EPOCHS, REFERENCE_LAYER_SIZES,
    REFERENCE_LEARNING_RATE, REFERENCE_SEED,
};
pub use train::{layer_kurtosis, train, EpochRecord, History, TrainConfig};

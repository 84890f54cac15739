//! Quantization robustness toolkit.
//!
//! - [`quantizer`]: symmetric uniform M-bit quantizer with max-abs calibration
//! - [`distributions`]: uniform, normal and Laplace sources with seeded sampling
//! - [`distortion`]: closed-form and Monte-Carlo MSE, optimal steps, sensitivity
//! - [`kure`]: kurtosis statistic, kurtosis regularization loss and its gradient
//! - [`trainer`]: small MLP trained with optional KURE / QAT, PTQ robustness sweeps

pub mod distortion;
pub mod distributions;
pub mod error;
pub mod kure;
pub mod minimize;
pub mod quantizer;
pub mod tensor;
pub mod trainer;

pub use distributions::SourceDistribution;
pub use error::{Error, Result};
pub use kure::KureConfig;
pub use quantizer::QuantizerConfig;
pub use tensor::Tensor;

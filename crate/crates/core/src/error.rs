use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value was NaN or infinite.
    #[error("non-finite input at index {index}: {value}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid quantizer config: {0}")]
    InvalidQuantizer(String),

    #[error("invalid distribution parameter: {0}")]
    InvalidDistribution(String),

    /// A tensor with only zeros has no usable quantization range.
    #[error("degenerate range: tensor max-abs is zero")]
    DegenerateRange,

    #[error("empty request: {0}")]
    EmptyRequest(&'static str),

    /// A step size lies outside the interval on which a closed form is valid.
    #[error("step size {delta} outside valid interval (0, {max}]")]
    Domain { delta: f64, max: f64 },

    #[error("degenerate variance: tensor elements are (numerically) constant")]
    DegenerateVariance,

    #[error("kurtosis needs at least 4 elements, got {0}")]
    TooFewElements(usize),

    #[error("layer {index}: {source}")]
    Layer {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, batch {batch}: loss = {loss}")]
    Divergence { epoch: usize, batch: usize, loss: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn in_layer(self, index: usize) -> Error {
        Error::Layer {
            index,
            source: Box::new(self),
        }
    }
}

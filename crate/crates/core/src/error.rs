use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph6 parse error at byte {offset}: {reason}")]
    Graph6 { offset: usize, reason: String },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("no cubic graph exists on {0} vertices (vertex count must be even)")]
    NoCubicGraph(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-Hermitian evaluation: imaginary residual {residual:e} exceeds {tolerance:e}")]
    NonHermitian { residual: f64, tolerance: f64 },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("non-finite objective value {value} at {point:?}")]
    NonFinite { value: f64, point: Vec<f64> },

    #[error("layer {layer}: {source}")]
    Layer {
        layer: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("falqon trace has {available} layers, {required} required")]
    InsufficientTrace { available: usize, required: usize },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

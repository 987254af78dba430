use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArtError {
    /// A raw feature lies outside `[0, 1]`; the data was not normalised.
    #[error("feature {index} = {value} lies outside [0, 1]; normalise the input first")]
    InputDomain { index: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("subsethood is undefined for a zero-norm reference vector")]
    DegenerateWeight,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("class id {class} is outside the label alphabet of size {classes}")]
    UnknownClass { class: usize, classes: usize },

    #[error("model has no labeled prototype to predict from")]
    Untrained,

    /// A hyperbox with `u_i > v_i`; weights of a committed node cannot do this.
    #[error("feature {feature} has lower bound {lower} above upper bound {upper}")]
    CorruptedWeight { feature: usize, lower: f64, upper: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("model document error: {0}")]
    Document(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = ArtError> = std::result::Result<T, E>;

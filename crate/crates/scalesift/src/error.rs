//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A spec or argument violated a documented invariant. `field` names the
    /// offending field.
    #[error("invalid {field}: {message}")]
    Invalid { field: &'static str, message: String },

    #[error("unknown location id `{0}`")]
    UnknownLocation(String),

    #[error("unknown concept id `{0}`")]
    UnknownConcept(String),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("missing score cell for concept `{concept}` at location `{location}`")]
    MissingCell { concept: String, location: String },

    /// Parse failure in a line-oriented file; `line` is 1-based.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite loss at epoch {epoch}; try a smaller learning rate")]
    NonFiniteLoss { epoch: usize },

    #[error(
        "no training improvement after {epochs} epochs (initial loss {initial}, final {last}); \
         try a different learning rate"
    )]
    NoImprovement {
        epochs: usize,
        initial: f64,
        last: f64,
    },

    /// A metric whose value is not defined for the given input, e.g. average
    /// precision with zero positives. Signaled, never silently mapped to 0.
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    /// The LLM answered, but not with a recognizable `lr`/`hr` token.
    #[error("llm protocol error: unexpected response `{raw}`")]
    Protocol { raw: String },

    #[error("llm transport error after {retries} retries: {message}")]
    Transport { retries: u32, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

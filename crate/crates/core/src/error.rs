use thiserror::Error;

/// Errors raised by the engine.
///
/// Every variant maps onto one failure class the CLI reports with a distinct
/// `kind` tag, so scripts can react without parsing prose.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("truncation overflow: degree {requested} exceeds the carried maximum {max}")]
    Truncation { requested: usize, max: usize },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("extrapolation failed: {reason} (condition estimate {condition:.3e})")]
    Extrapolation { reason: String, condition: f64 },

    #[error("convergence failure: {reason}")]
    Convergence {
        reason: String,
        /// Per-degree final Cauchy deltas of the offending family.
        deltas: Vec<f64>,
    },

    #[error("unsupported dimension {0}: grid quadrature handles at most 3 axes")]
    UnsupportedDimension(usize),

    #[error("integration box too small: boundary/peak ratio {ratio:.3e}")]
    BoxTooSmall { ratio: f64 },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Stable machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::Resource(_) => "resource",
            Error::Truncation { .. } => "truncation",
            Error::NumericalDegeneracy(_) => "numerical_degeneracy",
            Error::Singular(_) => "singular",
            Error::InsufficientData(_) => "insufficient_data",
            Error::Extrapolation { .. } => "extrapolation",
            Error::Convergence { .. } => "convergence",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::BoxTooSmall { .. } => "box_too_small",
            Error::Parse { .. } => "parse",
            Error::Invalid(_) => "invalid",
        }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

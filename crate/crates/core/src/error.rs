use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An integral or supremum is infinite for the given data.
    #[error("divergent: {0}")]
    Divergent(String),

    /// Finite in exact arithmetic but not representable as an `f64`.
    #[error("floating-point overflow: {0}")]
    Overflow(String),

    #[error("invalid space specification: {0}")]
    Spec(String),

    #[error("inclusion {source_space} -> {target_space} is not in the embedding registry")]
    UnsupportedEmbedding {
        source_space: String,
        target_space: String,
    },

    #[error("no identification available: {0}")]
    UnsupportedIdentification(String),

    #[error("inadmissible interpolation parameters: {0}")]
    Parameter(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn is_divergent(&self) -> bool {
        matches!(self, Error::Divergent(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

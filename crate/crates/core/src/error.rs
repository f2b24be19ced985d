use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A cost, gradient or rollout produced a NaN or infinity.
    #[error("non-finite {what}{}", .index.map(|i| format!(" at index {i}")).unwrap_or_default())]
    NumericDomain {
        what: &'static str,
        index: Option<usize>,
    },

    /// Numeric failure inside a training run, tagged with where it happened.
    #[error("training failed at epoch {epoch}, demo {demo}: {source}")]
    Training {
        epoch: usize,
        demo: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid task definition: {0}")]
    TaskDefinition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn non_finite(what: &'static str, index: Option<usize>) -> Self {
        Error::NumericDomain { what, index }
    }

    /// True for errors caused by numerics (NaN/inf, divergence) rather than bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NumericDomain { .. } => true,
            Error::Training { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}

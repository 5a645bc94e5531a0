use thiserror::Error;

/// Errors raised by model evaluation, integration and report assembly.
#[derive(Debug, Error)]
pub enum CuspError {
    #[error("dimension mismatch: model has {expected} electrons, configuration has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration failed for {term}: {reason}")]
    IntegrationFailure { term: String, reason: String },

    #[error("non-finite integrand value at node {node} ({context})")]
    NonFinite { node: usize, context: String },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CuspError {
    pub(crate) fn integration(term: impl Into<String>, reason: impl Into<String>) -> Self {
        CuspError::IntegrationFailure {
            term: term.into(),
            reason: reason.into(),
        }
    }

    /// Renames the term of an integration failure, leaving other errors untouched.
    pub fn with_term(self, term: &str) -> Self {
        match self {
            CuspError::IntegrationFailure { reason, .. } => CuspError::IntegrationFailure {
                term: term.to_string(),
                reason,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, CuspError>;

use thiserror::Error;

/// Errors produced by the integrators, the benchmark systems and the analysis harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis index {index} out of range for a basis of {size} functions")]
    BasisIndex { index: usize, size: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("system does not provide {0}")]
    Unsupported(&'static str),

    #[error("stage solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("stage values became non-finite")]
    Divergence,

    #[error("Legendre transform not invertible: {0}")]
    Transform(String),

    #[error("tableau symplecticity defect {0:.3e} exceeds 1e-12")]
    Consistency(f64),

    #[error("step {step}: {source}")]
    AtStep { step: usize, source: Box<Error> },

    #[error("perturbed step along component {component}: {source}")]
    Perturbation { component: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep { step, source: Box::new(self) }
    }

    /// Strips step/perturbation annotations and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } | Error::Perturbation { source, .. } => source.root(),
            other => other,
        }
    }
}

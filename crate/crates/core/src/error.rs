use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error("ill-conditioned basis (condition number {condition:.3e})")]
    IllConditionedBasis { condition: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("active-set solver did not converge after {iterations} updates (last residuals: {residuals})")]
    SolverDivergence { iterations: usize, residuals: String },

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parameter {mu}: {source}")]
    Parameter {
        mu: String,
        #[source]
        source: Box<Error>,
    },

    #[error("primal basis saturated after {achieved} vectors")]
    BasisSaturation { achieved: usize },

    #[error("dual cone saturated after {achieved} generators")]
    ConeSaturation { achieved: usize },

    #[error("reduced coupling matrix is rank deficient (sigma_min/sigma_max = {ratio:.3e})")]
    InfSupFailure { ratio: f64 },

    #[error("model corrupted: {0}")]
    ModelCorruption(String),

    #[error("model schema version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },

    #[error("cannot load {path}: {reason}")]
    Load { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping step/parameter annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } | Error::Parameter { source, .. } => source.root(),
            other => other,
        }
    }
}

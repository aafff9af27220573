//! Error taxonomy shared by all modules.
//!
//! `AssumptionViolation` marks runs where a mathematical hypothesis of the
//! experiment failed (sign conditions, monotonicity, bound checks); the CLI
//! maps these to exit code 2. Everything else is an ordinary error (exit 1).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("evaluation failure: {0}")]
    EvaluationFailure(String),

    #[error("trajectory escaped the phase-space box at t = {escape_time:.6} (coordinate {coordinate})")]
    TrajectoryEscaped { escape_time: f64, coordinate: usize },

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("derivative order exceeds j_max = {j_max}; probes {probes:?} all below tolerance {tol:.3e}")]
    OrderExceedsJmax {
        j_max: usize,
        probes: Vec<f64>,
        tol: f64,
    },

    #[error("no rotation angle exists: residual {residual:.3e} exceeds {tol:.3e} of gradient scale")]
    NoRotation { residual: f64, tol: f64 },

    #[error("gradient vanishes at the requested point")]
    GradientVanishes,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerically singular: resolvent norm exceeds lower bound {lower_bound:.3e}")]
    NumericallySingular { lower_bound: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("resolution error: {0}")]
    ResolutionError(String),

    #[error("construction error: {0}")]
    ConstructionError(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("linear algebra backend: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CoreError {
    /// True for errors that report a violated mathematical assumption
    /// rather than a usage or numerical failure.
    pub fn is_assumption_violation(&self) -> bool {
        matches!(self, CoreError::AssumptionViolation(_))
    }
}

pub type CoreResult<T> = Result<T, CoreError>;

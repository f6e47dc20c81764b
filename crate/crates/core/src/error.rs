use thiserror::Error;

/// Errors raised by fitting and inference routines.
///
/// Variants fall into two groups: input problems (`DimensionMismatch`,
/// `InvalidInput`) and numerical degeneracies (everything else). See
/// [`Error::is_numerical`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A linear predictor left the range where the cumulant can be evaluated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank deficient problem: {0}")]
    RankDeficient(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    /// The sup-norm constraint of a Dantzig program cannot be met.
    #[error("infeasible program: smallest achievable residual {achievable:.6e} exceeds bound {bound:.6e}")]
    Infeasible { achievable: f64, bound: f64 },

    #[error("non-positive partial information ({0:.6e})")]
    NonPositiveInformation(f64),

    #[error("degenerate residual variance: sigma^2 = {sigma2:.6e} below floor {floor:.6e}")]
    DegenerateResidualVariance { sigma2: f64, floor: f64 },

    #[error("{failed} of {reps} replications failed")]
    TooManyFailures { failed: usize, reps: usize },
}

impl Error {
    /// Stable variant name, used when surfacing errors from the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Domain(_) => "DomainError",
            Error::RankDeficient(_) => "RankDeficient",
            Error::Degenerate(_) => "Degenerate",
            Error::Infeasible { .. } => "Infeasible",
            Error::NonPositiveInformation(_) => "NonPositiveInformation",
            Error::DegenerateResidualVariance { .. } => "DegenerateResidualVariance",
            Error::TooManyFailures { .. } => "TooManyFailures",
        }
    }

    /// True for numerical degeneracies, false for malformed inputs.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::DimensionMismatch(_) | Error::InvalidInput(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

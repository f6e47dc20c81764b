//! Score tests, one-step estimates and confidence intervals.
//!
//! `ℓ` is a negative log-likelihood, so under an alternative `θ > θ₀` the
//! score at the null tends to be negative. One-sided tests follow that sign:
//! [`Alternative::Greater`] rejects for large negative statistics.

mod generalized;
mod normal;
mod power;
mod sandwich;
mod score;
mod truncated;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generalized::{generalized_score_test, DirectionSource, GeneralizedInputs, SigmaPoint};
pub use normal::{norm_cdf, norm_quantile, norm_sf};
pub use power::local_power;
pub use sandwich::{sandwich_pieces, sandwich_test, SandwichPieces};
pub use score::{
    one_step, one_step_linear_closed_form, plugin_sigma2, score_test, score_test_unknown_sigma, OneStepEstimate,
    SIGMA2_FLOOR_REL,
};
pub use truncated::{truncated_score_test, TruncatedDirection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Alternative {
    #[default]
    TwoSided,
    /// `θ > θ₀`.
    Greater,
    /// `θ < θ₀`.
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarianceKind {
    /// Standardized by the model-based partial information.
    ModelInfo,
    /// Gaussian model with `σ²` replaced by the residual mean square.
    PluginSigma,
    /// Standardized by the outer-product (sandwich) variance.
    Sandwich,
    /// Sandwich variance of a user-supplied loss.
    GeneralizedSandwich,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub alternative: Alternative,
    pub variance_kind: VarianceKind,
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// p-value of an asymptotically standard normal statistic.
pub fn p_value(statistic: f64, alternative: Alternative) -> f64 {
    match alternative {
        Alternative::TwoSided => (2.0 * norm_sf(statistic.abs())).min(1.0),
        Alternative::Greater => norm_cdf(statistic),
        Alternative::Less => norm_sf(statistic),
    }
}

/// Decision at level `alpha`. Rejection is defined as `p < alpha`, which is
/// the critical-value rule `|U| > Φ⁻¹(1 − α/2)` (two-sided), `U < −Φ⁻¹(1 − α)`
/// (greater) or `U > Φ⁻¹(1 − α)` (less), without rounding disagreements.
pub fn decide(statistic: f64, alpha: f64, alternative: Alternative, variance_kind: VarianceKind) -> Result<TestResult> {
    check_alpha(alpha)?;
    if !statistic.is_finite() {
        return Err(Error::Degenerate(format!("test statistic is {statistic}")));
    }
    let p = p_value(statistic, alternative);
    Ok(TestResult { statistic, p_value: p, reject: p < alpha, alpha, alternative, variance_kind })
}

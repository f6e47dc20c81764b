use nalgebra::DVector;
#[cfg(test)]
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{decide, Alternative, TestResult, VarianceKind};
use crate::decorrelate::INFO_FLOOR;
use crate::error::{Error, Result};
use crate::model::{Dataset, ParameterVector};
use crate::solvers::fit_dantzig;

/// Projection of `Z` onto the selected nuisance columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TruncatedDirection {
    /// `min ‖v‖₁` subject to `‖(1/n) Σ X_{i,S}(Z_i − vᵀX_{i,S})‖_∞ ≤ λ′`.
    Dantzig(f64),
    /// Least squares of `Z` on `X_S`; needs a nonsingular restricted Gram.
    Empirical,
}

/// Gaussian score test that decorrelates `Z` only against the nuisance
/// columns selected by `beta_hat`:
///
/// `Ŝ_TC = −(1/(σ²n)) Σ (Y_i − θ₀Z_i − γ̂ᵀX_i)(Z_i − v̂ᵀX_{i,S})`,
/// `Î = (1/σ²)((1/n)ΣZ_i² − v̂ᵀ(1/n)ΣX_{i,S}Z_i)`.
///
/// With an empty support `v̂` is empty and `Ŝ_TC` is the raw `θ`-score.
pub fn truncated_score_test(
    data: &Dataset,
    beta_hat: &ParameterVector,
    sigma2: f64,
    theta_null: f64,
    direction: TruncatedDirection,
    alpha: f64,
    alternative: Alternative,
) -> Result<TestResult> {
    if data.d0() != 1 {
        return Err(Error::InvalidInput(format!("test needs a single parameter of interest, got {}", data.d0())));
    }
    if beta_hat.len() != data.d() {
        return Err(Error::DimensionMismatch(format!("beta has length {} for d = {}", beta_hat.len(), data.d())));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::InvalidInput(format!("sigma2 must be positive, got {sigma2}")));
    }
    let n = data.n() as f64;
    let zc = data.interest()[0];
    let support: Vec<usize> = data.nuisance().iter().copied().filter(|&j| beta_hat[j] != 0.0).collect();
    let z = data.q().column(zc).into_owned();
    let xs = data.q().select_columns(&support);
    let gram = xs.tr_mul(&xs) / n;
    let xz = xs.tr_mul(&z) / n;
    let v = if support.is_empty() {
        DVector::zeros(0)
    } else {
        match direction {
            TruncatedDirection::Dantzig(lp) => fit_dantzig(&gram, &xz, lp)?.w,
            TruncatedDirection::Empirical => gram
                .clone()
                .cholesky()
                .ok_or_else(|| Error::RankDeficient("restricted Gram of the selected columns is singular".into()))?
                .solve(&xz),
        }
    };
    let resid = data.y() - &z * theta_null - data.q() * &**beta_hat + &z * beta_hat[zc];
    let zt = &z - &xs * &v;
    let s_tc = -resid.dot(&zt) / (sigma2 * n);
    let info = (z.norm_squared() / n - v.dot(&xz)) / sigma2;
    if !(info > INFO_FLOOR) {
        return Err(Error::NonPositiveInformation(info));
    }
    decide(n.sqrt() * s_tc / info.sqrt(), alpha, alternative, VarianceKind::ModelInfo)
}

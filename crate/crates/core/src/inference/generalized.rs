use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{decide, Alternative, TestResult, VarianceKind};
use crate::error::{Error, Result};
use crate::loss::{finite_difference_hessian, ObservationLoss};
use crate::solvers::fit_dantzig;

/// How the direction `ŵ` is obtained for a generic loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DirectionSource {
    /// A precomputed `d1 × 1` direction.
    Supplied(DMatrix<f64>),
    /// `min ‖w‖₁` subject to `‖H_γθ − H_γγw‖_∞ ≤ λ′`.
    Dantzig(f64),
    /// `min ½wᵀH_γγw − wᵀH_γθ + λ′‖w‖₁`.
    LassoQuadratic(f64),
}

/// Where the outer-product variance is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SigmaPoint {
    /// At `(θ₀, γ̂)`.
    #[default]
    Null,
    /// At the penalized estimate `β̂`.
    Fit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedInputs {
    /// Penalized estimate of the loss, supplied by the caller.
    pub beta_hat: DVector<f64>,
    pub interest: usize,
    pub theta_null: f64,
    pub direction: DirectionSource,
    pub sigma_point: SigmaPoint,
}

fn lasso_on_gram(a: &DMatrix<f64>, b: &DVector<f64>, lambda: f64) -> DVector<f64> {
    let m = b.len();
    let mut w: DVector<f64> = DVector::zeros(m);
    // Aw maintained incrementally.
    let mut aw: DVector<f64> = DVector::zeros(m);
    for _ in 0..100_000 {
        let mut delta: f64 = 0.0;
        for k in 0..m {
            let akk = a[(k, k)];
            if akk <= 0.0 {
                continue;
            }
            let z = b[k] - (aw[k] - akk * w[k]);
            let new = z.signum() * (z.abs() - lambda).max(0.0) / akk;
            let step = new - w[k];
            if step != 0.0 {
                aw.axpy(step, &a.column(k), 1.0);
                w[k] = new;
                delta = delta.max(step.abs());
            }
        }
        if delta < 1e-12 {
            break;
        }
    }
    w
}

/// Score test for an arbitrary smooth loss:
/// `√n · Ŝ(θ₀, γ̂) / √(v̂ᵀΣ̂v̂)` with `Ŝ` the decorrelated mean gradient at
/// the null and `Σ̂ = (1/n) Σ ∇ℓ_i ∇ℓ_iᵀ`.
pub fn generalized_score_test(
    loss: &dyn ObservationLoss,
    inputs: &GeneralizedInputs,
    alpha: f64,
    alternative: Alternative,
) -> Result<TestResult> {
    let d = loss.d();
    let n = loss.n();
    if inputs.beta_hat.len() != d || inputs.interest >= d {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat has length {} and interest index {} for d = {d}",
            inputs.beta_hat.len(),
            inputs.interest
        )));
    }
    let t = inputs.interest;
    let nuisance: Vec<usize> = (0..d).filter(|&j| j != t).collect();
    let w = match &inputs.direction {
        DirectionSource::Supplied(w) => {
            if w.nrows() != nuisance.len() || w.ncols() != 1 {
                return Err(Error::DimensionMismatch(format!(
                    "direction is {}x{}, expected {}x1",
                    w.nrows(),
                    w.ncols(),
                    nuisance.len()
                )));
            }
            w.column(0).into_owned()
        }
        DirectionSource::Dantzig(lp) | DirectionSource::LassoQuadratic(lp) => {
            if !(*lp >= 0.0 && lp.is_finite()) {
                return Err(Error::InvalidInput(format!("lambda' must be finite and >= 0, got {lp}")));
            }
            let h = match loss.hessian(&inputs.beta_hat)? {
                Some(h) => h,
                None => finite_difference_hessian(loss, &inputs.beta_hat)?,
            };
            let a = h.select_rows(&nuisance).select_columns(&nuisance);
            let b = h.select_rows(&nuisance).column(t).into_owned();
            if matches!(inputs.direction, DirectionSource::Dantzig(_)) {
                fit_dantzig(&a, &b, *lp)?.w
            } else {
                lasso_on_gram(&a, &b, *lp)
            }
        }
    };
    let mut v = DVector::zeros(d);
    v[t] = 1.0;
    for (k, &j) in nuisance.iter().enumerate() {
        v[j] = -w[k];
    }
    let mut null_point = inputs.beta_hat.clone();
    null_point[t] = inputs.theta_null;
    let g_null = loss.gradients(&null_point)?;
    if g_null.iter().all(|&x| x == 0.0) {
        return Err(Error::Degenerate("all loss gradients are zero".into()));
    }
    let proj_null = &g_null * &v;
    let s_hat = proj_null.mean();
    let proj_sigma = match inputs.sigma_point {
        SigmaPoint::Null => proj_null,
        SigmaPoint::Fit => loss.gradients(&inputs.beta_hat)? * &v,
    };
    let quad = proj_sigma.norm_squared() / n as f64;
    if !(quad > 0.0) || !quad.is_finite() {
        return Err(Error::Degenerate(format!("sandwich variance is {quad}")));
    }
    decide((n as f64).sqrt() * s_hat / quad.sqrt(), alpha, alternative, VarianceKind::GeneralizedSandwich)
}

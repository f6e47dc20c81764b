//! Decorrelated score `Ŝ(θ, γ̂) = ∇θℓ(θ, γ̂) − Ŵᵀ∇γℓ(θ, γ̂)`, the direction
//! estimate `Ŵ`, and the partial information `Î_{θ|γ}`.
//!
//! Direction programs are posed on the curvature weights `b''(η_i)` without
//! the Gaussian `1/σ²` factor, so `λ′` means the same thing for every family
//! and for known or unknown noise variance. `Ŵ` itself does not depend on
//! that factor; only the scale of `λ′` would.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, gather, Dataset, ModelFamily, ParameterVector};
use crate::penalty::PenaltyConfig;
use crate::solvers::{fit_dantzig, fit_lasso, fit_null_constrained, fit_weighted_lasso, PenalizedFit, SolverConfig};

/// Partial information entries at or below this are treated as degenerate.
pub const INFO_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectionMethod {
    /// `min ‖w‖₁ s.t. ‖H_θγ − wᵀH_γγ‖_∞ ≤ λ′`.
    Dantzig,
    /// `min (1/(2n)) Σ b''(η_i)(Z_i − wᵀX_i)² + λ′‖w‖₁`.
    LassoQuadratic,
    /// `min (1/(2n)) Σ (Y_i − b'(η_i))²(Z_i − wᵀX_i)² + λ′‖w‖₁`.
    LassoResidual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NuisanceSource {
    /// Nuisance estimate taken from the unconstrained penalized fit.
    FullFit,
    /// Nuisance refit with θ held at its null value.
    NullConstrainedFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecorrelateConfig {
    /// Penalty for the nuisance fit, λ already chosen.
    pub penalty: PenaltyConfig,
    pub method: DirectionMethod,
    pub lambda_prime: f64,
    pub nuisance_source: NuisanceSource,
    /// Null value of θ; zeros when `None`.
    pub theta_null: Option<DVector<f64>>,
    pub solver: SolverConfig,
}

impl DecorrelateConfig {
    pub fn new(penalty: PenaltyConfig, lambda_prime: f64) -> Self {
        Self {
            penalty,
            method: DirectionMethod::LassoQuadratic,
            lambda_prime,
            nuisance_source: NuisanceSource::FullFit,
            theta_null: None,
            solver: SolverConfig::default(),
        }
    }
}

/// `c·√(log d / n)`.
pub fn default_lambda_prime(n: usize, d: usize, c: f64) -> f64 {
    c * ((d.max(2) as f64).ln() / n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecorrelatedFit {
    /// `(d − d0) × d0`; column `j` decorrelates interest coordinate `j`.
    pub w: DMatrix<f64>,
    /// `Ŝ(θ_null, γ̂)`.
    pub s_hat: DVector<f64>,
    /// Symmetrized `Î_{θ|γ}` at `beta_eval`.
    pub info_hat: DMatrix<f64>,
    /// False if any diagonal entry of `info_hat` is at or below [`INFO_FLOOR`].
    pub info_ok: bool,
    pub theta_null: DVector<f64>,
    pub method: DirectionMethod,
    pub nuisance_source: NuisanceSource,
    pub family: ModelFamily,
    pub lambda_prime: f64,
    /// The penalized fit. For `NullConstrainedFit` its θ block is `theta_null`.
    pub fit: PenalizedFit,
    /// Row `i` is the per-observation decorrelated score at `(θ_null, γ̂)`;
    /// the column means equal `s_hat`.
    pub score_rows: DMatrix<f64>,
}

impl DecorrelatedFit {
    pub fn d0(&self) -> usize {
        self.s_hat.len()
    }

    /// The point where `Ŵ` and `Î` were evaluated.
    pub fn beta_eval(&self) -> &ParameterVector {
        &self.fit.beta
    }

    /// `(θ_null, γ̂)`.
    pub fn null_point(&self, data: &Dataset) -> Result<ParameterVector> {
        ParameterVector::from_parts(data, &self.theta_null, &self.fit.beta.gamma(data))
    }
}

/// Direction estimate at `beta_hat`, one column per interest coordinate.
pub fn estimate_direction(
    data: &Dataset,
    family: &ModelFamily,
    beta_hat: &ParameterVector,
    method: DirectionMethod,
    lambda_prime: f64,
    cfg: &SolverConfig,
) -> Result<DMatrix<f64>> {
    let d1 = data.nuisance().len();
    let d0 = data.d0();
    let mut w = DMatrix::zeros(d1, d0);
    if d1 == 0 {
        return Ok(w);
    }
    if !(lambda_prime >= 0.0 && lambda_prime.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda' must be finite and >= 0, got {lambda_prime}")));
    }
    let eta = model::linear_predictor(data, family, beta_hat)?;
    let curv = eta.map(|t| family.variance(t));
    match method {
        DirectionMethod::Dantzig => {
            let a = model::weighted_gram(data.q(), &curv, Some(data.nuisance()), Some(data.nuisance()));
            let a = (&a + a.transpose()) * 0.5;
            let b_all = model::weighted_gram(data.q(), &curv, Some(data.nuisance()), Some(data.interest()));
            for j in 0..d0 {
                let fit = fit_dantzig(&a, &b_all.column(j).into_owned(), lambda_prime)?;
                w.set_column(j, &fit.w);
            }
        }
        DirectionMethod::LassoQuadratic | DirectionMethod::LassoResidual => {
            let weights = if method == DirectionMethod::LassoQuadratic {
                curv * 0.5
            } else {
                let r = data.y().iter().zip(eta.iter()).map(|(&y, &e)| y - family.mean(e));
                let weights = DVector::from_iterator(data.n(), r.map(|r| 0.5 * r * r));
                if weights.iter().all(|&v| v == 0.0) {
                    return Err(Error::Degenerate("all residuals are zero".into()));
                }
                weights
            };
            for (j, &col) in data.interest().iter().enumerate() {
                let target = data.q().column(col).into_owned();
                let fit = fit_weighted_lasso(data, &target, &weights, data.nuisance(), lambda_prime, cfg)?;
                w.set_column(j, &fit.beta);
            }
        }
    }
    Ok(w)
}

fn check_w(data: &Dataset, w: &DMatrix<f64>) -> Result<()> {
    if w.nrows() != data.nuisance().len() || w.ncols() != data.d0() {
        return Err(Error::DimensionMismatch(format!(
            "direction is {}x{}, expected {}x{}",
            w.nrows(),
            w.ncols(),
            data.nuisance().len(),
            data.d0()
        )));
    }
    Ok(())
}

/// `∇θℓ(θ, γ̂) − wᵀ∇γℓ(θ, γ̂)`.
pub fn decorrelated_score(
    data: &Dataset,
    family: &ModelFamily,
    theta_null: &DVector<f64>,
    gamma_hat: &DVector<f64>,
    w: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    check_w(data, w)?;
    let beta = ParameterVector::from_parts(data, theta_null, gamma_hat)?;
    let g = model::score(data, family, &beta)?;
    Ok(gather(&g, data.interest()) - w.tr_mul(&gather(&g, data.nuisance())))
}

/// Per-observation decorrelated scores at `beta`: row `i` is
/// `∇θℓ_i − wᵀ∇γℓ_i`.
pub fn decorrelated_score_rows(
    data: &Dataset,
    family: &ModelFamily,
    beta: &ParameterVector,
    w: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_w(data, w)?;
    let g = model::observation_gradients(data, family, beta)?;
    let gt = g.select_columns(data.interest());
    let gg = g.select_columns(data.nuisance());
    Ok(gt - gg * w)
}

/// `H_θθ − wᵀH_γθ` at `beta_eval`, symmetrized.
pub fn partial_information(
    data: &Dataset,
    family: &ModelFamily,
    beta_eval: &ParameterVector,
    w: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_w(data, w)?;
    let eta = model::linear_predictor(data, family, beta_eval)?;
    let v = model::curvature_weights(family, &eta);
    let h_tt = model::weighted_gram(data.q(), &v, Some(data.interest()), Some(data.interest()));
    let h_gt = model::weighted_gram(data.q(), &v, Some(data.nuisance()), Some(data.interest()));
    let m = h_tt - w.tr_mul(&h_gt);
    Ok((&m + m.transpose()) * 0.5)
}

/// Penalized fit, direction, score at the null and partial information.
pub fn build_decorrelated_fit(data: &Dataset, family: &ModelFamily, cfg: &DecorrelateConfig) -> Result<DecorrelatedFit> {
    let theta_null = match &cfg.theta_null {
        Some(t) if t.len() != data.d0() => {
            return Err(Error::DimensionMismatch(format!("theta_null has length {} for d0 = {}", t.len(), data.d0())))
        }
        Some(t) => t.clone(),
        None => DVector::zeros(data.d0()),
    };
    let fit = match cfg.nuisance_source {
        NuisanceSource::FullFit => fit_lasso(data, family, &cfg.penalty, &cfg.solver)?,
        NuisanceSource::NullConstrainedFit => fit_null_constrained(data, family, &cfg.penalty, &theta_null, &cfg.solver)?,
    };
    let w = estimate_direction(data, family, &fit.beta, cfg.method, cfg.lambda_prime, &cfg.solver)?;
    let null_point = ParameterVector::from_parts(data, &theta_null, &fit.beta.gamma(data))?;
    let score_rows = decorrelated_score_rows(data, family, &null_point, &w)?;
    let s_hat = score_rows.row_mean().transpose();
    let info_hat = partial_information(data, family, &fit.beta, &w)?;
    let info_ok = info_hat.diagonal().iter().all(|&x| x > INFO_FLOOR);
    Ok(DecorrelatedFit {
        w,
        s_hat,
        info_hat,
        info_ok,
        theta_null,
        method: cfg.method,
        nuisance_source: cfg.nuisance_source,
        family: *family,
        lambda_prime: cfg.lambda_prime,
        fit,
        score_rows,
    })
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{decide, Alternative, TestResult, VarianceKind};
use crate::decorrelate::{decorrelated_score_rows, DecorrelatedFit};
use crate::error::{Error, Result};
use crate::model::{observation_gradients, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichPieces {
    /// `Σ̂ = (1/n) Σ ∇ℓ_i ∇ℓ_iᵀ` at the penalized fit. For the Gaussian model
    /// with unit variance this is `(1/n) Σ Q_iQ_iᵀ (Y_i − β̂ᵀQ_i)²`.
    pub sigma_mat: DMatrix<f64>,
    /// `1` on the interest coordinate, `−ŵ` on the nuisance coordinates.
    pub v_hat: DVector<f64>,
    pub quad_form: f64,
}

fn check_scalar(fit: &DecorrelatedFit) -> Result<()> {
    if fit.d0() != 1 {
        return Err(Error::InvalidInput(format!("test needs a single parameter of interest, got {}", fit.d0())));
    }
    Ok(())
}

fn mean_square<'a>(x: impl ExactSizeIterator<Item = &'a f64>) -> Result<f64> {
    let n = x.len() as f64;
    let quad = x.map(|v| v * v).sum::<f64>() / n;
    if !(quad > 0.0) || !quad.is_finite() {
        return Err(Error::Degenerate(format!("sandwich variance is {quad}")));
    }
    Ok(quad)
}

pub fn sandwich_pieces(data: &Dataset, fit: &DecorrelatedFit) -> Result<SandwichPieces> {
    check_scalar(fit)?;
    let g = observation_gradients(data, &fit.family, &fit.fit.beta)?;
    let sigma_mat = g.tr_mul(&g) / data.n() as f64;
    let mut v_hat = DVector::zeros(data.d());
    v_hat[data.interest()[0]] = 1.0;
    for (k, &j) in data.nuisance().iter().enumerate() {
        v_hat[j] = -fit.w[(k, 0)];
    }
    // Evaluated from the per-observation projections, which is exact in
    // floating point where the matrix form may lose a small positive value.
    let quad = mean_square((&g * &v_hat).iter())?;
    Ok(SandwichPieces { sigma_mat, v_hat, quad_form: quad })
}

/// `Û_n^o = √n · Ŝ(θ₀, γ̂) / √(v̂ᵀΣ̂v̂)`.
pub fn sandwich_test(data: &Dataset, fit: &DecorrelatedFit, alpha: f64, alternative: Alternative) -> Result<TestResult> {
    check_scalar(fit)?;
    let rows = decorrelated_score_rows(data, &fit.family, &fit.fit.beta, &fit.w)?;
    let quad = mean_square(rows.column(0).iter())?;
    let n = data.n() as f64;
    decide(n.sqrt() * fit.s_hat[0] / quad.sqrt(), alpha, alternative, VarianceKind::Sandwich)
}

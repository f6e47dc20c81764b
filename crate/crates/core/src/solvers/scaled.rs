use log::warn;

use super::lasso::penalized_fit;
use super::{PenalizedFit, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{Dataset, ModelFamily, ParameterVector};
use crate::penalty::PenaltyConfig;

/// Scaled lasso: jointly minimizes
/// `(1/(2σn)) Σ (Y_i − βᵀQ_i)² + σ/2 + λ‖β‖₁`
/// by alternating a lasso step at penalty `σλ` with `σ = √(RSS/n)`.
///
/// The returned `σ̂` is recomputed from the returned `β̂`, so
/// `σ̂² = RSS(β̂)/n` holds exactly.
pub fn fit_scaled_lasso(data: &Dataset, lambda: f64, cfg: &SolverConfig) -> Result<(PenalizedFit, f64)> {
    cfg.validate()?;
    let n = data.n();
    if n < 3 {
        return Err(Error::InvalidInput(format!("scaled lasso needs n >= 3, got {n}")));
    }
    PenaltyConfig::l1(lambda).validate()?;
    let family = ModelFamily::GaussianUnknownVar;
    let cols: Vec<usize> = (0..data.d()).collect();
    let y = data.y();
    let mean_sq = y.norm_squared() / n as f64;
    let floor = 1e-12 * mean_sq.max(f64::MIN_POSITIVE);
    let rss_sigma = |beta: &[f64]| -> f64 {
        let mut r = y.clone();
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                r.axpy(-b, &data.q().column(j), 1.0);
            }
        }
        (r.norm_squared() / n as f64).sqrt()
    };

    let mut sigma = mean_sq.sqrt();
    let mut beta = vec![0.0; data.d()];
    let mut last = None;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        if sigma * sigma <= floor {
            return Err(Error::Degenerate("scaled lasso noise level collapsed to zero".into()));
        }
        let pen = PenaltyConfig::l1(sigma * lambda);
        let out = penalized_fit(y, data.q(), &cols, None, &family, &pen, cfg, beta)?;
        beta = out.beta;
        let new_sigma = rss_sigma(&beta);
        let done = (new_sigma - sigma).abs() < cfg.tol;
        sigma = new_sigma;
        last = Some(out.trace);
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!("scaled lasso stopped after {iterations} alternations without converging");
    }
    if sigma * sigma <= floor {
        return Err(Error::Degenerate("scaled lasso noise level collapsed to zero".into()));
    }
    let l1: f64 = beta.iter().map(|b| b.abs()).sum();
    // RSS/(2σn) = σ/2 once σ² = RSS/n.
    let objective = sigma + lambda * l1;
    let fit = PenalizedFit {
        beta: ParameterVector::new(nalgebra::DVector::from_vec(beta))?,
        lambda,
        penalty: PenaltyConfig::l1(lambda),
        iterations,
        converged,
        objective,
        objective_trace: last.unwrap_or_default(),
    };
    Ok((fit, sigma))
}

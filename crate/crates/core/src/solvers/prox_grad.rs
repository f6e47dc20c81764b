use log::warn;
use nalgebra::DVector;

use super::{PenalizedFit, SolverConfig};
use crate::error::{Error, Result};
use crate::loss::ObservationLoss;
use crate::model::ParameterVector;
use crate::penalty::{penalty_value, univariate_prox, PenaltyConfig};

/// Penalized fit of an arbitrary smooth loss by proximal gradient with
/// backtracking on the step size.
///
/// Slower than the likelihood solvers; intended for losses that only expose
/// gradients (the Huber loss, user callbacks).
pub fn fit_penalized_loss(loss: &dyn ObservationLoss, penalty: &PenaltyConfig, cfg: &SolverConfig) -> Result<PenalizedFit> {
    penalty.validate()?;
    cfg.validate()?;
    let d = loss.d();
    let pen_sum = |b: &DVector<f64>| b.iter().map(|&x| penalty_value(penalty, x)).sum::<f64>();
    let mut beta = DVector::zeros(d);
    let mut f = loss.value(&beta)?;
    let mut trace = vec![f + pen_sum(&beta)];
    let mut step_inv: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let g = loss.gradient(&beta)?;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = DVector::from_fn(d, |j, _| univariate_prox(penalty, step_inv * beta[j] - g[j], step_inv));
            let diff = &cand - &beta;
            let f_new = loss.value(&cand)?;
            // Sufficient decrease for the quadratic upper model.
            if f_new <= f + g.dot(&diff) + 0.5 * step_inv * diff.norm_squared() + 1e-15 * f.abs() {
                accepted = Some((cand, f_new, diff.amax()));
                break;
            }
            step_inv *= 2.0;
        }
        let Some((cand, f_new, change)) = accepted else {
            return Err(Error::Degenerate("proximal gradient line search failed".into()));
        };
        beta = cand;
        f = f_new;
        trace.push(f + pen_sum(&beta));
        if change < cfg.tol {
            converged = true;
            break;
        }
        step_inv = (step_inv * 0.9).max(1e-12);
    }
    if !converged {
        warn!("proximal gradient stopped after {iterations} steps without converging");
    }
    let objective = f + pen_sum(&beta);
    Ok(PenalizedFit {
        beta: ParameterVector::new(beta)?,
        lambda: penalty.lambda,
        penalty: *penalty,
        iterations,
        converged,
        objective,
        objective_trace: trace,
    })
}

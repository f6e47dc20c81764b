//! Sparse estimation engines.

pub(crate) mod cd;
mod cv;
mod dantzig;
mod lasso;
mod prox_grad;
mod scaled;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParameterVector;
use crate::penalty::PenaltyConfig;

pub use cv::{cross_validate_lambda, cv_curve, default_lambda_grid, lambda_max, select_from_curve, CV_DEFAULT_FOLDS};
pub use dantzig::{chebyshev_residual, fit_dantzig, DantzigFit, DANTZIG_FEAS_TOL};
pub use lasso::{fit_lasso, fit_lasso_from, fit_null_constrained, fit_weighted_lasso, glm_kkt_violation};
pub use prox_grad::fit_penalized_loss;
pub use scaled::fit_scaled_lasso;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Cap on coordinate sweeps (Gaussian) or Newton steps (GLM).
    pub max_iter: usize,
    /// Stop when the largest coefficient change in a sweep is below this.
    pub tol: f64,
    pub active_set: bool,
    /// Fit on unit-variance columns and map the coefficients back.
    pub standardize: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iter: 10_000, tol: 1e-8, active_set: true, standardize: false }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidInput("solver needs max_iter >= 1 and tol > 0".into()));
        }
        Ok(())
    }

    pub(crate) fn controls(&self) -> cd::Controls {
        cd::Controls { tol: self.tol, max_sweeps: self.max_iter, active_set: self.active_set }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenalizedFit {
    pub beta: ParameterVector,
    pub lambda: f64,
    pub penalty: PenaltyConfig,
    pub iterations: usize,
    pub converged: bool,
    /// Penalized objective at `beta`.
    pub objective: f64,
    /// Objective after each coordinate sweep (Gaussian and weighted fits) or
    /// each accepted Newton step (GLM fits).
    pub objective_trace: Vec<f64>,
}

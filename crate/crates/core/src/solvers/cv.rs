use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::lasso::fit_lasso_from;
use super::SolverConfig;
use crate::error::{Error, Result};
use crate::model::{self, Dataset, ModelFamily, ParameterVector};
use crate::penalty::PenaltyConfig;

pub const CV_DEFAULT_FOLDS: usize = 10;

/// Smallest L1 penalty with an all-zero solution: `‖∇ℓ(0)‖_∞`.
pub fn lambda_max(data: &Dataset, family: &ModelFamily) -> Result<f64> {
    Ok(model::score(data, family, &ParameterVector::zeros(data.d()))?.amax())
}

/// `count` log-spaced values from `lambda_max` down to `ratio · lambda_max`, descending.
pub fn default_lambda_grid(lambda_max: f64, count: usize, ratio: f64) -> Vec<f64> {
    if count <= 1 {
        return vec![lambda_max];
    }
    let lo = ratio.ln();
    (0..count).map(|k| lambda_max * (lo * k as f64 / (count - 1) as f64).exp()).collect()
}

/// Fold label of every row: rows are shuffled by a ChaCha8 stream seeded with
/// `seed`, and the row at shuffled position `p` goes to fold `p mod folds`.
pub(crate) fn fold_labels(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut labels = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        labels[i] = pos % folds;
    }
    labels
}

/// Held-out mean negative log-likelihood for each grid value (same order as
/// `grid`), pooled over all rows. Fits along the grid are warm started from
/// the next larger λ.
pub fn cv_curve(
    data: &Dataset,
    family: &ModelFamily,
    penalty: &PenaltyConfig,
    grid: &[f64],
    folds: usize,
    seed: u64,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let n = data.n();
    if folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::InvalidInput(format!("{n} observations cannot fill {folds} folds")));
    }
    if grid.is_empty() || grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::InvalidInput("lambda grid must be nonempty, finite and nonnegative".into()));
    }
    let labels = fold_labels(n, folds, seed);
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let mut total = vec![0.0; grid.len()];
    for k in 0..folds {
        let train_rows: Vec<usize> = (0..n).filter(|&i| labels[i] != k).collect();
        let test_rows: Vec<usize> = (0..n).filter(|&i| labels[i] == k).collect();
        let train = data.select_rows(&train_rows)?;
        let test = data.select_rows(&test_rows)?;
        let mut warm: Option<DVector<f64>> = None;
        for &g in &order {
            let pen = penalty.with_lambda(grid[g]);
            let loss = match fit_lasso_from(&train, family, &pen, cfg, warm.as_ref()) {
                Ok(fit) => {
                    let l = model::neg_log_likelihood(&test, family, &fit.beta).unwrap_or(f64::INFINITY);
                    warm = Some(fit.beta.into_inner());
                    l
                }
                Err(e) if e.is_numerical() => f64::INFINITY,
                Err(e) => return Err(e),
            };
            total[g] += loss * test_rows.len() as f64;
        }
    }
    Ok(total.into_iter().map(|t| t / n as f64).collect())
}

/// Grid value minimizing the held-out deviance. Ties (within a relative
/// 1e-12) go to the larger λ.
pub fn select_from_curve(grid: &[f64], curve: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]));
    let mut best = order[0];
    for &g in &order[1..] {
        if curve[g] < curve[best] - 1e-12 * curve[best].abs() {
            best = g;
        }
    }
    grid[best]
}

/// L1 cross-validation with default solver settings.
pub fn cross_validate_lambda(data: &Dataset, family: &ModelFamily, grid: &[f64], folds: usize, seed: u64) -> Result<f64> {
    let curve = cv_curve(data, family, &PenaltyConfig::l1(0.0), grid, folds, seed, &SolverConfig::default())?;
    Ok(select_from_curve(grid, &curve))
}

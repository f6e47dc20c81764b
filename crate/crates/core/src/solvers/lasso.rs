use log::warn;
use nalgebra::{DMatrix, DVector};

use super::cd::{self, Quadratic};
use super::{PenalizedFit, SolverConfig};
use crate::error::{Error, Result};
use crate::model::{self, Dataset, ModelFamily, ParameterVector};
use crate::penalty::{penalty_value, PenaltyConfig};

/// Penalized M-estimator `argmin ℓ(β) + Σ_j p_λ(β_j)` over all coordinates.
///
/// Gaussian families are a single coordinate-descent solve. Logistic and
/// Poisson use proximal Newton: a weighted quadratic expansion at the current
/// iterate, solved by coordinate descent to `tol/10`, then a backtracking line
/// search on the penalized objective.
pub fn fit_lasso(data: &Dataset, family: &ModelFamily, penalty: &PenaltyConfig, cfg: &SolverConfig) -> Result<PenalizedFit> {
    fit_lasso_from(data, family, penalty, cfg, None)
}

/// [`fit_lasso`] started from `init` instead of zero.
pub fn fit_lasso_from(
    data: &Dataset,
    family: &ModelFamily,
    penalty: &PenaltyConfig,
    cfg: &SolverConfig,
    init: Option<&DVector<f64>>,
) -> Result<PenalizedFit> {
    let cols: Vec<usize> = (0..data.d()).collect();
    let init = match init {
        Some(b) if b.len() != data.d() => {
            return Err(Error::DimensionMismatch(format!("warm start has length {} for d = {}", b.len(), data.d())))
        }
        Some(b) => b.iter().copied().collect(),
        None => vec![0.0; data.d()],
    };
    if cfg.standardize {
        let scales: Vec<f64> = data
            .q()
            .column_iter()
            .map(|c| {
                let s = (c.norm_squared() / data.n() as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let mut qs = data.q().clone();
        for (j, mut c) in qs.column_iter_mut().enumerate() {
            c /= scales[j];
        }
        let scaled_init: Vec<f64> = init.iter().zip(&scales).map(|(b, s)| b * s).collect();
        let mut out = penalized_fit(data.y(), &qs, &cols, None, family, penalty, cfg, scaled_init)?;
        for (b, s) in out.beta.iter_mut().zip(&scales) {
            *b /= s;
        }
        return out.into_fit(penalty);
    }
    penalized_fit(data.y(), data.q(), &cols, None, family, penalty, cfg, init)?.into_fit(penalty)
}

/// Nuisance fit with the interest block held at `theta0`:
/// `γ̂₀ = argmin_γ ℓ(θ₀, γ) + Σ p_λ(γ_j)`. The returned β has `θ = θ₀`.
pub fn fit_null_constrained(
    data: &Dataset,
    family: &ModelFamily,
    penalty: &PenaltyConfig,
    theta0: &DVector<f64>,
    cfg: &SolverConfig,
) -> Result<PenalizedFit> {
    if theta0.len() != data.d0() {
        return Err(Error::DimensionMismatch(format!("theta0 has length {} for d0 = {}", theta0.len(), data.d0())));
    }
    let offset = data.q().select_columns(data.interest()) * theta0;
    let cols = data.nuisance().to_vec();
    let out = penalized_fit(data.y(), data.q(), &cols, Some(offset.as_slice()), family, penalty, cfg, vec![0.0; cols.len()])?;
    let gamma = DVector::from_vec(out.beta.clone());
    let beta = ParameterVector::from_parts(data, theta0, &gamma)?;
    let fit = out.into_fit(penalty)?;
    Ok(PenalizedFit { beta, ..fit })
}

/// `argmin_w (1/n) Σ_i weights_i (target_i − wᵀQ_{i,regressors})² + λ‖w‖₁`.
///
/// Note the loss carries no ½; with unit weights this is [`fit_lasso`] at
/// `σ² = 1/2`.
pub fn fit_weighted_lasso(
    data: &Dataset,
    target: &DVector<f64>,
    weights: &DVector<f64>,
    regressors: &[usize],
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<PenalizedFit> {
    let n = data.n();
    if target.len() != n || weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "target/weights lengths {}/{} for n = {n}",
            target.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || target.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative, target finite".into()));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::Degenerate("all weights are zero".into()));
    }
    if let Some(&j) = regressors.iter().find(|&&j| j >= data.d()) {
        return Err(Error::InvalidInput(format!("regressor index {j} out of range")));
    }
    let penalty = PenaltyConfig::l1(lambda);
    penalty.validate()?;
    cfg.validate()?;
    let v: Vec<f64> = weights.iter().map(|w| 2.0 * w).collect();
    let prob = Quadratic { x: data.q(), cols: regressors, v: &v, target: target.as_slice() };
    let out = cd::solve(&prob, &penalty, vec![0.0; regressors.len()], cfg.controls());
    if !out.converged {
        warn!("weighted lasso stopped after {} sweeps without converging", out.sweeps);
    }
    Ok(PenalizedFit {
        beta: ParameterVector::new(DVector::from_vec(out.beta))?,
        lambda,
        penalty,
        iterations: out.sweeps,
        converged: out.converged,
        objective: out.objective,
        objective_trace: out.trace,
    })
}

/// Largest violation of the L1 KKT conditions for `ℓ + λ‖β‖₁` at `beta`.
pub fn glm_kkt_violation(data: &Dataset, family: &ModelFamily, beta: &ParameterVector, lambda: f64) -> Result<f64> {
    let g = model::score(data, family, beta)?;
    Ok(g.iter()
        .zip(beta.iter())
        .map(|(&gj, &bj)| if bj != 0.0 { (gj + lambda * bj.signum()).abs() } else { (gj.abs() - lambda).max(0.0) })
        .fold(0.0, f64::max))
}

pub(crate) struct RawFit {
    pub beta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
    pub trace: Vec<f64>,
}

impl RawFit {
    fn into_fit(self, penalty: &PenaltyConfig) -> Result<PenalizedFit> {
        Ok(PenalizedFit {
            beta: ParameterVector::new(DVector::from_vec(self.beta))?,
            lambda: penalty.lambda,
            penalty: *penalty,
            iterations: self.iterations,
            converged: self.converged,
            objective: self.objective,
            objective_trace: self.trace,
        })
    }
}

/// Penalized likelihood fit over columns `cols` of `x` with a fixed offset in
/// the linear predictor.
#[allow(clippy::too_many_arguments)]
pub(crate) fn penalized_fit(
    y: &DVector<f64>,
    x: &DMatrix<f64>,
    cols: &[usize],
    offset: Option<&[f64]>,
    family: &ModelFamily,
    penalty: &PenaltyConfig,
    cfg: &SolverConfig,
    init: Vec<f64>,
) -> Result<RawFit> {
    family.validate()?;
    penalty.validate()?;
    cfg.validate()?;
    let n = y.len();
    if penalty.lambda == 0.0 && cols.len() > n {
        return Err(Error::RankDeficient(format!(
            "unpenalized fit with {} coefficients and only {n} observations",
            cols.len()
        )));
    }
    if family.is_gaussian() {
        let target: Vec<f64> = match offset {
            Some(o) => y.iter().zip(o).map(|(a, b)| a - b).collect(),
            None => y.iter().copied().collect(),
        };
        let v = vec![family.scale(); n];
        let prob = Quadratic { x, cols, v: &v, target: &target };
        let out = cd::solve(&prob, penalty, init, cfg.controls());
        if !out.converged {
            warn!("coordinate descent stopped after {} sweeps without converging", out.sweeps);
        }
        return Ok(RawFit {
            beta: out.beta,
            iterations: out.sweeps,
            converged: out.converged,
            objective: out.objective,
            trace: out.trace,
        });
    }

    let eta_of = |beta: &[f64]| -> Vec<f64> {
        let mut eta = match offset {
            Some(o) => o.to_vec(),
            None => vec![0.0; n],
        };
        for (k, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (e, xi) in eta.iter_mut().zip(x.column(cols[k]).iter()) {
                    *e += b * xi;
                }
            }
        }
        eta
    };
    // Penalized objective, +∞ outside the family's domain.
    let objective = |beta: &[f64]| -> f64 {
        let eta = DVector::from_vec(eta_of(beta));
        if family.check_eta(&eta).is_err() {
            return f64::INFINITY;
        }
        model::mean_loss(family, y, &eta) + beta.iter().map(|&b| penalty_value(penalty, b)).sum::<f64>()
    };

    let mut beta = init;
    let mut f_cur = objective(&beta);
    if !f_cur.is_finite() {
        return Err(Error::Domain("objective is not finite at the starting point".into()));
    }
    let mut trace = vec![f_cur];
    // The inner tolerance tracks the size of the last Newton step, so early
    // steps are solved loosely; it never drops below `tol / 10`.
    let mut inner_tol: f64 = 1e-4;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let eta = eta_of(&beta);
        let off = offset.unwrap_or(&[]);
        let mut v = Vec::with_capacity(n);
        let mut target = Vec::with_capacity(n);
        let mut grad_r = Vec::with_capacity(n);
        for i in 0..n {
            let w = family.variance(eta[i]).max(1e-10);
            let resid = y[i] - family.mean(eta[i]);
            let base = eta[i] - off.get(i).copied().unwrap_or(0.0);
            v.push(w);
            target.push(base + resid / w);
            grad_r.push(resid);
        }
        let prob = Quadratic { x, cols, v: &v, target: &target };
        let inner = cd::Controls { tol: inner_tol.max(cfg.tol / 10.0), ..cfg.controls() };
        let sub = cd::solve(&prob, penalty, beta.clone(), inner);
        let delta: Vec<f64> = sub.beta.iter().zip(&beta).map(|(a, b)| a - b).collect();
        let max_delta = delta.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if max_delta < cfg.tol && inner.tol <= cfg.tol / 10.0 {
            converged = true;
            break;
        }
        // Predicted decrease: ∇ℓᵀΔ + P(β̃) − P(β).
        let grad_dot: f64 = delta
            .iter()
            .enumerate()
            .map(|(k, dk)| -dk * x.column(cols[k]).iter().zip(&grad_r).map(|(xi, ri)| xi * ri).sum::<f64>() / n as f64)
            .sum();
        let pen_diff: f64 = sub.beta.iter().map(|&b| penalty_value(penalty, b)).sum::<f64>()
            - beta.iter().map(|&b| penalty_value(penalty, b)).sum::<f64>();
        let decrease = (grad_dot + pen_diff).min(0.0);
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            let f_new = objective(&cand);
            if f_new <= f_cur + 1e-4 * step * decrease {
                accepted = Some((cand, f_new));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((cand, f_new)) => {
                beta = cand;
                f_cur = f_new;
                trace.push(f_cur);
                if step * max_delta < cfg.tol && inner.tol <= cfg.tol / 10.0 {
                    converged = true;
                    break;
                }
                inner_tol = inner_tol.min(1e-2 * step * max_delta);
            }
            None if inner.tol > cfg.tol / 10.0 => inner_tol = cfg.tol / 10.0,
            None => {
                // No descent along the Newton direction: we are at a
                // stationary point up to rounding, or stuck.
                converged = max_delta < 1e3 * cfg.tol;
                break;
            }
        }
    }
    if !converged {
        warn!("proximal Newton stopped after {iterations} steps without converging");
    }
    Ok(RawFit { beta, iterations, converged, objective: f_cur, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    fn gauss1() -> ModelFamily {
        ModelFamily::GaussianKnownVar { sigma2: 1.0 }
    }

    fn tight() -> SolverConfig {
        SolverConfig { tol: 1e-13, max_iter: 100_000, ..Default::default() }
    }

    /// Proximal gradient on the unweighted lasso, used as an independent oracle.
    fn ista(x: &DMatrix<f64>, y: &DVector<f64>, v: f64, lambda: f64, iters: usize) -> DVector<f64> {
        let n = x.nrows() as f64;
        let h = x.tr_mul(x) * (v / n);
        let lip = h.symmetric_eigenvalues().max();
        let xty = x.tr_mul(y) * (v / n);
        let mut b = DVector::zeros(x.ncols());
        for _ in 0..iters {
            let g = &h * &b - &xty;
            b = (&b - g / lip).map(|z| z.signum() * (z.abs() - lambda / lip).max(0.0));
        }
        b
    }

    #[test]
    fn large_lambda_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = normal_matrix(&mut rng, 30, 5);
        let y = DVector::from_fn(30, |_, _| rng.sample(StandardNormal));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        let lmax = (data.q().tr_mul(data.y()) / 30.0).amax();
        // The sums are accumulated in a different order here, hence the ulp of slack.
        for lam in [lmax * (1.0 + 1e-12), 2.0 * lmax] {
            let fit = fit_lasso(&data, &gauss1(), &PenaltyConfig::l1(lam), &SolverConfig::default()).unwrap();
            assert!(fit.beta.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn one_covariate_hand_value() {
        let data = Dataset::new(DVector::from_vec(vec![2.0, 0.0]), DMatrix::from_vec(2, 1, vec![1.0, 1.0]), vec![0]).unwrap();
        let fit = fit_lasso(&data, &gauss1(), &PenaltyConfig::l1(0.5), &tight()).unwrap();
        assert_relative_eq!(fit.beta[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn orthonormal_design_is_soft_threshold() {
        // Columns of a scaled Hadamard matrix: QᵀQ/n = I.
        let h = [[1.0, 1.0, 1.0, 1.0], [1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];
        let q = DMatrix::from_fn(4, 3, |i, j| h[i][j]);
        let y = DVector::from_vec(vec![3.0, -1.0, 0.5, 2.0]);
        let data = Dataset::new(y.clone(), q.clone(), vec![0]).unwrap();
        let lam = 0.4;
        let fit = fit_lasso(&data, &gauss1(), &PenaltyConfig::l1(lam), &tight()).unwrap();
        let z = q.tr_mul(&y) / 4.0;
        for j in 0..3 {
            assert_relative_eq!(fit.beta[j], z[j].signum() * (z[j].abs() - lam).max(0.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn matches_ista_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = normal_matrix(&mut rng, 20, 8);
        let y = DVector::from_fn(20, |_, _| rng.sample(StandardNormal));
        let data = Dataset::new(y.clone(), q.clone(), vec![0]).unwrap();
        let fit = fit_lasso(&data, &ModelFamily::GaussianKnownVar { sigma2: 2.0 }, &PenaltyConfig::l1(0.1), &tight()).unwrap();
        let oracle = ista(&q, &y, 0.5, 0.1, 200_000);
        assert_relative_eq!(*fit.beta, oracle, epsilon = 1e-9);
    }

    #[test]
    fn kkt_certified_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tol = 1e-6;
        for rep in 0..100 {
            let (n, d) = (rng.gen_range(10..40), rng.gen_range(2..60));
            let fam = match rep % 3 {
                0 => ModelFamily::GaussianKnownVar { sigma2: rng.gen_range(0.5..2.0) },
                1 => ModelFamily::Logistic,
                _ => ModelFamily::Poisson,
            };
            let q = normal_matrix(&mut rng, n, d) * 0.5;
            let y = DVector::from_fn(n, |_, _| match fam {
                ModelFamily::Logistic => f64::from(rng.gen_bool(0.5)),
                ModelFamily::Poisson => rng.gen_range(0..4) as f64,
                _ => rng.sample(StandardNormal),
            });
            let data = Dataset::new(y, q, vec![0]).unwrap();
            let lam = rng.gen_range(0.05..0.5);
            let fit = fit_lasso(&data, &fam, &PenaltyConfig::l1(lam), &SolverConfig::default()).unwrap();
            assert!(fit.converged);
            let viol = glm_kkt_violation(&data, &fam, &fit.beta, lam).unwrap();
            assert!(viol < tol, "rep {rep} {fam:?}: KKT violation {viol}");
        }
    }

    #[test]
    fn gaussian_objective_nonincreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = normal_matrix(&mut rng, 30, 50);
        let y = DVector::from_fn(30, |_, _| rng.sample(StandardNormal));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        let fit = fit_lasso(&data, &gauss1(), &PenaltyConfig::l1(0.05), &SolverConfig::default()).unwrap();
        for w in fit.objective_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12 * w[0].abs());
        }
    }

    #[test]
    fn zero_lambda_high_dim_is_rank_deficient() {
        let data = Dataset::new(DVector::zeros(3), DMatrix::zeros(3, 5), vec![0]).unwrap();
        let err = fit_lasso(&data, &gauss1(), &PenaltyConfig::l1(0.0), &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::RankDeficient(_)));
    }

    #[test]
    fn unpenalized_fit_zeroes_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for fam in [gauss1(), ModelFamily::Logistic, ModelFamily::Poisson] {
            let q = normal_matrix(&mut rng, 60, 3) * 0.5;
            let y = DVector::from_fn(60, |i, _| match fam {
                ModelFamily::Logistic => f64::from(q[(i, 0)] + rng.sample::<f64, _>(StandardNormal) > 0.0),
                ModelFamily::Poisson => rng.gen_range(0..4) as f64,
                _ => rng.sample(StandardNormal),
            });
            let data = Dataset::new(y, q, vec![0]).unwrap();
            let fit = fit_lasso(&data, &fam, &PenaltyConfig::l1(0.0), &tight()).unwrap();
            let g = model::score(&data, &fam, &fit.beta).unwrap();
            assert!(g.amax() < 1e-9, "{fam:?}: {}", g.amax());
        }
    }

    #[test]
    fn weighted_lasso_uniform_weights_reduce_to_lasso() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let q = normal_matrix(&mut rng, 25, 4);
        let y = DVector::from_fn(25, |_, _| rng.sample(StandardNormal));
        let data = Dataset::new(y.clone(), q, vec![0]).unwrap();
        let wl = fit_weighted_lasso(&data, &y, &DVector::from_element(25, 1.0), &[0, 1, 2, 3], 0.1, &tight()).unwrap();
        let l = fit_lasso(&data, &ModelFamily::GaussianKnownVar { sigma2: 0.5 }, &PenaltyConfig::l1(0.1), &tight()).unwrap();
        assert_relative_eq!(*wl.beta, *l.beta, epsilon = 1e-11);
    }

    #[test]
    fn weighted_lasso_matches_proximal_gradient_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = normal_matrix(&mut rng, 3, 2);
        let t = DVector::from_fn(3, |_, _| rng.sample(StandardNormal));
        let w = DVector::from_fn(3, |_, _| rng.gen_range(0.2..2.0));
        let data = Dataset::new(t.clone(), q.clone(), vec![0]).unwrap();
        let fit = fit_weighted_lasso(&data, &t, &w, &[0, 1], 0.05, &tight()).unwrap();
        // Oracle: ISTA on the √w-scaled problem, 10⁶ iterations.
        let sw = w.map(f64::sqrt);
        let xs = DMatrix::from_fn(3, 2, |i, j| q[(i, j)] * sw[i]);
        let ts = t.component_mul(&sw);
        let oracle = ista(&xs, &ts, 2.0, 0.05, 1_000_000);
        assert_relative_eq!(*fit.beta, oracle, epsilon = 1e-8);
    }

    #[test]
    fn weighted_lasso_rejects_zero_weights() {
        let data = Dataset::new(DVector::zeros(3), DMatrix::identity(3, 2), vec![0]).unwrap();
        let err = fit_weighted_lasso(&data, &DVector::zeros(3), &DVector::zeros(3), &[0, 1], 0.1, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn standardized_fit_is_scale_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let q = normal_matrix(&mut rng, 40, 5);
        let y = DVector::from_fn(40, |i, _| q[(i, 0)] + rng.sample::<f64, _>(StandardNormal));
        let mut q2 = q.clone();
        q2.column_mut(0).scale_mut(10.0);
        let cfg = SolverConfig { standardize: true, ..tight() };
        let a = fit_lasso(&Dataset::new(y.clone(), q, vec![0]).unwrap(), &gauss1(), &PenaltyConfig::l1(0.1), &cfg).unwrap();
        let b = fit_lasso(&Dataset::new(y, q2, vec![0]).unwrap(), &gauss1(), &PenaltyConfig::l1(0.1), &cfg).unwrap();
        assert_relative_eq!(a.beta[0], 10.0 * b.beta[0], epsilon = 1e-9);
    }

    #[test]
    fn null_constrained_keeps_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let q = normal_matrix(&mut rng, 30, 6);
        let y = DVector::from_fn(30, |_, _| rng.sample(StandardNormal));
        let data = Dataset::new(y, q, vec![1]).unwrap();
        let fit = fit_null_constrained(&data, &gauss1(), &PenaltyConfig::l1(0.05), &DVector::from_vec(vec![0.7]), &tight()).unwrap();
        assert_eq!(fit.beta[1], 0.7);
        // KKT on the nuisance block only.
        let g = model::score(&data, &gauss1(), &fit.beta).unwrap();
        for &j in data.nuisance() {
            let b = fit.beta[j];
            if b != 0.0 {
                assert!((g[j] + 0.05 * b.signum()).abs() < 1e-9);
            } else {
                assert!(g[j].abs() <= 0.05 + 1e-9);
            }
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let q = normal_matrix(&mut rng, 30, 20);
        let y = DVector::from_fn(30, |_, _| f64::from(rng.gen_bool(0.4)));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        let a = fit_lasso(&data, &ModelFamily::Logistic, &PenaltyConfig::l1(0.03), &SolverConfig::default()).unwrap();
        let b = fit_lasso(&data, &ModelFamily::Logistic, &PenaltyConfig::l1(0.03), &SolverConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonconvex_penalties_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = normal_matrix(&mut rng, 50, 10);
        let y = DVector::from_fn(50, |i, _| 2.0 * q[(i, 0)] + rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        for pen in [PenaltyConfig::scad(0.2), PenaltyConfig::mcp(0.2)] {
            let fit = fit_lasso(&data, &gauss1(), &pen, &SolverConfig::default()).unwrap();
            assert!(fit.converged);
            // Large signal escapes the penalty's flat region unbiased.
            let l1 = fit_lasso(&data, &gauss1(), &PenaltyConfig::l1(0.2), &SolverConfig::default()).unwrap();
            assert!(fit.beta[0] > l1.beta[0]);
        }
    }
}

//! Multiplier-bootstrap test of `θ = θ₀` for a block of `d0 ≥ 1` coordinates.
//!
//! The statistic is `‖T̂‖_∞` with `T̂ = √n·Ŝ(θ₀, γ̂)`, optionally rescaled
//! coordinatewise by the partial information diagonal. Its null distribution
//! is approximated by `N̂_e = n^{−1/2} Σ e_i Ŝ_i` with i.i.d. standard normal
//! multipliers `e_i` and the per-observation decorrelated scores `Ŝ_i`.
//!
//! Rejection is `‖T̂‖_∞ ≥ c`, where `c` is the smallest draw `t` with
//! `#{draws ≤ t} ≥ (1 − α)B`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decorrelate::{DecorrelatedFit, INFO_FLOOR};
use crate::error::{Error, Result};
use crate::inference::check_alpha;
use crate::seed::substream_seed;

pub const DEFAULT_BOOTSTRAP_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupTestResult {
    pub t_stat: f64,
    pub critical_value: f64,
    pub reject: bool,
    /// `(1 + #{draws ≥ t_stat}) / (B + 1)`.
    pub p_value_boot: f64,
    pub b: usize,
    pub rescaled: bool,
    /// `|T̂_j|`, rescaled when requested.
    pub per_coordinate: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupStatistic {
    pub t_stat: f64,
    pub per_coordinate: DVector<f64>,
    /// Row `i` is `Ŝ_i`, unscaled; the rows average to `Ŝ(θ₀, γ̂)`.
    pub score_rows: DMatrix<f64>,
    /// `√Î_jj` when rescaled.
    pub scale: Option<DVector<f64>>,
}

fn info_scale(fit: &DecorrelatedFit) -> Result<DVector<f64>> {
    let diag = fit.info_hat.diagonal();
    if let Some(j) = diag.iter().position(|&v| !(v > INFO_FLOOR)) {
        return Err(Error::NonPositiveInformation(diag[j]));
    }
    Ok(diag.map(f64::sqrt))
}

pub fn group_statistic(fit: &DecorrelatedFit, rescaled: bool) -> Result<GroupStatistic> {
    let n = fit.score_rows.nrows() as f64;
    let scale = if rescaled { Some(info_scale(fit)?) } else { None };
    let mean = fit.score_rows.row_mean().transpose();
    let mut t = mean * n.sqrt();
    if let Some(s) = &scale {
        t.component_div_assign(s);
    }
    let per_coordinate = t.abs();
    Ok(GroupStatistic {
        t_stat: per_coordinate.max(),
        per_coordinate,
        score_rows: fit.score_rows.clone(),
        scale,
    })
}

/// Draw `b` of `N̂_e`, before taking the sup norm.
pub(crate) fn multiplier_draw(rows: &DMatrix<f64>, seed: u64, b: usize) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, b as u64));
    let e = DVector::from_iterator(rows.nrows(), (0..rows.nrows()).map(|_| rng.sample::<f64, _>(StandardNormal)));
    rows.tr_mul(&e) / (rows.nrows() as f64).sqrt()
}

/// Sorted `‖N̂_e^{(b)}‖_∞`, `b = 1..B`. Draw `b` uses its own RNG substream,
/// so the result does not depend on how the draws are scheduled.
pub fn multiplier_bootstrap(rows: &DMatrix<f64>, b: usize, seed: u64, scale: Option<&DVector<f64>>) -> Result<Vec<f64>> {
    if b == 0 {
        return Err(Error::InvalidInput("need at least one bootstrap draw".into()));
    }
    if let Some(s) = scale {
        if s.len() != rows.ncols() {
            return Err(Error::DimensionMismatch(format!("scale has length {} for {} columns", s.len(), rows.ncols())));
        }
    }
    let mut draws: Vec<f64> = (0..b)
        .into_par_iter()
        .map(|k| {
            let mut v = multiplier_draw(rows, seed, k);
            if let Some(s) = scale {
                v.component_div_assign(s);
            }
            v.amax()
        })
        .collect();
    draws.sort_by(f64::total_cmp);
    Ok(draws)
}

/// Smallest sorted draw `t` with `#{draws ≤ t} ≥ level·B`.
pub fn bootstrap_quantile(sorted: &[f64], level: f64) -> f64 {
    let b = sorted.len();
    let k = ((level * b as f64).ceil() as usize).clamp(1, b);
    sorted[k - 1]
}

pub fn group_test(fit: &DecorrelatedFit, alpha: f64, b: usize, seed: u64, rescaled: bool) -> Result<GroupTestResult> {
    check_alpha(alpha)?;
    let stat = group_statistic(fit, rescaled)?;
    let draws = multiplier_bootstrap(&stat.score_rows, b, seed, stat.scale.as_ref())?;
    let critical_value = bootstrap_quantile(&draws, 1.0 - alpha);
    let exceed = draws.len() - draws.partition_point(|&x| x < stat.t_stat);
    Ok(GroupTestResult {
        t_stat: stat.t_stat,
        critical_value,
        reject: stat.t_stat >= critical_value,
        p_value_boot: (1 + exceed) as f64 / (b + 1) as f64,
        b,
        rescaled,
        per_coordinate: stat.per_coordinate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decorrelate::{build_decorrelated_fit, DecorrelateConfig};
    use crate::inference::{score_test, Alternative};
    use crate::model::{Dataset, ModelFamily};
    use crate::penalty::PenaltyConfig;
    use approx::assert_relative_eq;
    use proptest::prelude::{prop, Strategy};
    use proptest::{prop_assert, proptest};
    use rand_distr::Distribution;

    fn fit_for(seed: u64, n: usize, d: usize, interest: Vec<usize>, sigma2: f64) -> DecorrelatedFit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(n, |i, _| q[(i, d - 1)] + rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(y, q, interest).unwrap();
        let cfg = DecorrelateConfig::new(PenaltyConfig::l1(0.15), 0.2);
        build_decorrelated_fit(&data, &ModelFamily::GaussianKnownVar { sigma2 }, &cfg).unwrap()
    }

    #[test]
    fn zero_scores_give_zero_statistic_and_draws() {
        let mut fit = fit_for(1, 30, 6, vec![0, 1], 1.0);
        fit.score_rows.fill(0.0);
        let s = group_statistic(&fit, false).unwrap();
        assert_eq!(s.t_stat, 0.0);
        let draws = multiplier_bootstrap(&s.score_rows, 50, 3, None).unwrap();
        assert!(draws.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn statistic_is_consistent_with_fit() {
        let fit = fit_for(2, 80, 12, vec![0, 3, 5], 1.0);
        let s = group_statistic(&fit, false).unwrap();
        let mean = s.score_rows.row_mean().transpose();
        assert_relative_eq!(mean, fit.s_hat, epsilon = 1e-12);
        assert_relative_eq!(s.t_stat, (fit.s_hat.amax()) * 80f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn single_coordinate_rescaled_is_abs_score_statistic() {
        for seed in 0..5 {
            let fit = fit_for(10 + seed, 100, 20, vec![0], 1.0);
            let s = group_statistic(&fit, true).unwrap();
            let u = score_test(&fit, 0.05, Alternative::TwoSided).unwrap();
            assert_relative_eq!(s.t_stat, u.statistic.abs(), epsilon = 1e-10);
            let raw = group_statistic(&fit, false).unwrap();
            assert_relative_eq!(raw.t_stat, (100f64.sqrt() * fit.s_hat[0]).abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_information_makes_rescaling_a_no_op() {
        let mut fit = fit_for(3, 60, 10, vec![0, 1], 1.0);
        fit.info_hat = DMatrix::identity(2, 2);
        let a = group_test(&fit, 0.05, 200, 9, false).unwrap();
        let b = group_test(&fit, 0.05, 200, 9, true).unwrap();
        assert_relative_eq!(a.t_stat, b.t_stat, epsilon = 1e-12);
        assert_relative_eq!(a.critical_value, b.critical_value, epsilon = 1e-12);
    }

    #[test]
    fn rescaling_rejects_nonpositive_information() {
        let mut fit = fit_for(4, 40, 8, vec![0, 1], 1.0);
        fit.info_hat[(1, 1)] = 0.0;
        assert!(matches!(group_statistic(&fit, true), Err(Error::NonPositiveInformation(_))));
    }

    #[test]
    fn same_seed_same_draws() {
        let fit = fit_for(5, 50, 8, vec![0, 2], 1.0);
        let a = multiplier_bootstrap(&fit.score_rows, 300, 77, None).unwrap();
        let b = multiplier_bootstrap(&fit.score_rows, 300, 77, None).unwrap();
        let c = multiplier_bootstrap(&fit.score_rows, 300, 78, None).unwrap();
        assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_ne!(a, c);
    }

    #[test]
    fn single_draw_is_the_critical_value() {
        let fit = fit_for(6, 50, 8, vec![0], 1.0);
        let draws = multiplier_bootstrap(&fit.score_rows, 1, 4, None).unwrap();
        let r = group_test(&fit, 0.05, 1, 4, false).unwrap();
        assert_eq!(r.critical_value, draws[0]);
    }

    #[test]
    fn zero_statistic_accepts() {
        let mut fit = fit_for(7, 50, 8, vec![0, 1], 1.0);
        let rows = fit.score_rows.clone();
        let mean = rows.row_mean();
        for mut r in fit.score_rows.row_iter_mut() {
            r -= &mean;
        }
        let r = group_test(&fit, 0.05, 100, 1, false).unwrap();
        assert!(r.t_stat < 1e-12);
        assert!(!r.reject);
    }

    #[test]
    fn multiplier_draws_have_score_variance() {
        let (n, b) = (2000, 2000);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let t3 = rand_distr::StudentT::new(5.0).unwrap();
        let rows = DMatrix::from_fn(n, 1, |_, _| 0.3 + t3.sample(&mut rng));
        let draws: Vec<f64> = (0..b).map(|k| multiplier_draw(&rows, 21, k)[0]).collect();
        let m = draws.iter().sum::<f64>() / b as f64;
        let sd = (draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64).sqrt();
        let target = (rows.column(0).norm_squared() / n as f64).sqrt();
        assert!((sd / target - 1.0).abs() < 0.05, "sd {sd} vs {target}");
    }

    fn sorted_draws() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..10.0, 1..200).prop_map(|mut v| {
            v.sort_by(f64::total_cmp);
            v
        })
    }

    proptest! {
        #[test]
        fn quantile_is_monotone_in_level(draws in sorted_draws(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(bootstrap_quantile(&draws, lo) <= bootstrap_quantile(&draws, hi));
            let q = bootstrap_quantile(&draws, hi);
            let below = draws.iter().filter(|&&x| x <= q).count() as f64;
            prop_assert!(below >= hi * draws.len() as f64 - 1e-9);
        }

        #[test]
        fn p_value_and_decision_agree(seed in 0u64..1000, alpha in 0.01f64..0.3) {
            let fit = fit_for(seed % 7, 40, 6, vec![0, 1], 0.5 + (seed % 5) as f64);
            let b = 199;
            let r = group_test(&fit, alpha, b, seed, seed % 2 == 0).unwrap();
            let slack = 1.0 / (b + 1) as f64;
            if r.reject {
                prop_assert!(r.p_value_boot <= alpha + slack + 1e-12);
            } else {
                prop_assert!(r.p_value_boot >= alpha - 1e-12);
            }
        }
    }
}

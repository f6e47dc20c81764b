use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{check_alpha, decide, norm_quantile, Alternative, TestResult, VarianceKind};
use crate::decorrelate::{decorrelated_score, DecorrelatedFit, INFO_FLOOR};
use crate::error::{Error, Result};
use crate::model::{Dataset, ModelFamily, ParameterVector};

/// `σ̂²` below this multiple of the sample variance of `y` is degenerate.
pub const SIGMA2_FLOOR_REL: f64 = 1e-12;

fn require_scalar(fit: &DecorrelatedFit) -> Result<f64> {
    if fit.d0() != 1 {
        return Err(Error::InvalidInput(format!("test needs a single parameter of interest, got {}", fit.d0())));
    }
    let info = fit.info_hat[(0, 0)];
    if !(info > INFO_FLOOR) {
        return Err(Error::NonPositiveInformation(info));
    }
    Ok(info)
}

/// `Û_n = √n · Ŝ(θ₀, γ̂) · Î^{−1/2}`.
pub fn score_test(fit: &DecorrelatedFit, alpha: f64, alternative: Alternative) -> Result<TestResult> {
    let info = require_scalar(fit)?;
    let n = fit.score_rows.nrows() as f64;
    decide(n.sqrt() * fit.s_hat[0] / info.sqrt(), alpha, alternative, VarianceKind::ModelInfo)
}

/// `σ̂² = (1/n) Σ (Y_i − β̂ᵀQ_i)²` at `beta`.
pub fn plugin_sigma2(data: &Dataset, beta: &ParameterVector) -> Result<f64> {
    if beta.len() != data.d() {
        return Err(Error::DimensionMismatch(format!("beta has length {} for d = {}", beta.len(), data.d())));
    }
    let r = data.y() - data.q() * &**beta;
    let n = data.n() as f64;
    let s2 = r.norm_squared() / n;
    let ym = data.y().mean();
    let var_y = data.y().iter().map(|y| (y - ym).powi(2)).sum::<f64>() / n;
    let floor = SIGMA2_FLOOR_REL * var_y;
    if !(s2 >= floor) || s2 == 0.0 {
        return Err(Error::DegenerateResidualVariance { sigma2: s2, floor });
    }
    Ok(s2)
}

/// Gaussian score test with the noise variance replaced by the residual mean
/// square of the penalized fit:
///
/// `Ũ_n = −(1/(σ̂√n)) Σ (Y_i − θ₀Z_i − γ̂ᵀX_i)(Z_i − ŵᵀX_i) · (H_Z − ŵᵀH_XZ)^{−1/2}`
///
/// with `H_Z = (1/n)ΣZ_i²` and `H_XZ = (1/n)ΣX_iZ_i`. Returns the test and `σ̂²`.
pub fn score_test_unknown_sigma(
    data: &Dataset,
    fit: &DecorrelatedFit,
    alpha: f64,
    alternative: Alternative,
) -> Result<(TestResult, f64)> {
    check_alpha(alpha)?;
    if !fit.family.is_gaussian() {
        return Err(Error::InvalidInput("plug-in variance test needs a Gaussian model".into()));
    }
    if fit.d0() != 1 {
        return Err(Error::InvalidInput(format!("test needs a single parameter of interest, got {}", fit.d0())));
    }
    let sigma2 = plugin_sigma2(data, &fit.fit.beta)?;
    let n = data.n();
    let zc = data.interest()[0];
    let gamma = fit.fit.beta.gamma(data);
    let w = fit.w.column(0);
    let theta0 = fit.theta_null[0];
    let mut cross = 0.0;
    let mut h_z = 0.0;
    let mut w_hxz = 0.0;
    for i in 0..n {
        let z = data.q()[(i, zc)];
        let mut gx = 0.0;
        let mut wx = 0.0;
        for (k, &j) in data.nuisance().iter().enumerate() {
            let x = data.q()[(i, j)];
            gx += gamma[k] * x;
            wx += w[k] * x;
        }
        cross += (data.y()[i] - theta0 * z - gx) * (z - wx);
        h_z += z * z;
        w_hxz += z * wx;
    }
    let info = (h_z - w_hxz) / n as f64;
    if !(info > INFO_FLOOR) {
        return Err(Error::NonPositiveInformation(info));
    }
    let stat = -cross / (sigma2.sqrt() * (n as f64).sqrt()) / info.sqrt();
    Ok((decide(stat, alpha, alternative, VarianceKind::PluginSigma)?, sigma2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneStepEstimate {
    pub theta_hat: f64,
    pub theta_tilde: f64,
    /// Asymptotic standard deviation of `√n(θ̃ − θ)`, i.e. `Î^{−1/2}`
    /// (times `σ̂` for the unknown-variance Gaussian model).
    pub std_err: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub level: f64,
}

/// `θ̃ = θ̂ − Ŝ(θ̂, γ̂)/Î` with the interval `θ̃ ± Φ⁻¹(1 − α/2)·std_err/√n`.
pub fn one_step(data: &Dataset, fit: &DecorrelatedFit, level: f64) -> Result<OneStepEstimate> {
    check_alpha(1.0 - level)?;
    let info = require_scalar(fit)?;
    let beta = &fit.fit.beta;
    let theta_hat = beta.theta(data);
    let s = decorrelated_score(data, &fit.family, &theta_hat, &beta.gamma(data), &fit.w)?;
    let theta_tilde = theta_hat[0] - s[0] / info;
    let mut std_err = 1.0 / info.sqrt();
    if fit.family == ModelFamily::GaussianUnknownVar {
        std_err *= plugin_sigma2(data, beta)?.sqrt();
    }
    let half = norm_quantile(1.0 - (1.0 - level) / 2.0) * std_err / (data.n() as f64).sqrt();
    Ok(OneStepEstimate {
        theta_hat: theta_hat[0],
        theta_tilde,
        std_err,
        ci_lower: theta_tilde - half,
        ci_upper: theta_tilde + half,
        level,
    })
}

/// Linear-model one-step estimate in ratio form,
/// `Σ(Y_i − γ̂ᵀX_i)(Z_i − ŵᵀX_i) / ΣZ_i(Z_i − ŵᵀX_i)`.
pub fn one_step_linear_closed_form(data: &Dataset, gamma_hat: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    if data.d0() != 1 || gamma_hat.len() != data.nuisance().len() || w.len() != data.nuisance().len() {
        return Err(Error::DimensionMismatch("closed form needs d0 = 1 and nuisance-length vectors".into()));
    }
    let x = data.q().select_columns(data.nuisance());
    let z = data.q().column(data.interest()[0]).into_owned();
    let zr = &z - &x * w;
    let num = (data.y() - &x * gamma_hat).dot(&zr);
    let den = z.dot(&zr);
    if !(den > 0.0) {
        return Err(Error::NonPositiveInformation(den / data.n() as f64));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decorrelate::{build_decorrelated_fit, partial_information, DecorrelateConfig};
    use crate::penalty::PenaltyConfig;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn linear_data(rng: &mut ChaCha8Rng, n: usize, d: usize, theta: f64) -> Dataset {
        let base = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = DMatrix::from_fn(n, d, |i, j| base[(i, j)] + if j > 0 { 0.4 * base[(i, j - 1)] } else { 0.0 });
        let y = DVector::from_fn(n, |i, _| theta * q[(i, 0)] + q[(i, 1)] - q[(i, 2)] + rng.sample::<f64, _>(StandardNormal));
        Dataset::new(y, q, vec![0]).unwrap()
    }

    fn fake_fit(s: f64, info: f64, n: usize) -> DecorrelatedFit {
        let data = Dataset::new(DVector::zeros(n), DMatrix::from_element(n, 1, 1.0), vec![0]).unwrap();
        let cfg = DecorrelateConfig::new(PenaltyConfig::l1(1.0), 0.1);
        let mut fit = build_decorrelated_fit(&data, &ModelFamily::GaussianKnownVar { sigma2: 1.0 }, &cfg).unwrap();
        fit.s_hat[0] = s;
        fit.info_hat[(0, 0)] = info;
        fit
    }

    #[test]
    fn statistic_hand_values() {
        let r = score_test(&fake_fit(0.0, 1.0, 10), 0.05, Alternative::TwoSided).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        let r = score_test(&fake_fit(0.1, 4.0, 100), 0.05, Alternative::TwoSided).unwrap();
        assert_relative_eq!(r.statistic, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r.p_value, 0.617075077451974, epsilon = 1e-12);
        assert!(!r.reject);
    }

    #[test]
    fn nonpositive_information_is_an_error() {
        let err = score_test(&fake_fit(0.1, 0.0, 10), 0.05, Alternative::TwoSided).unwrap_err();
        assert!(matches!(err, Error::NonPositiveInformation(_)));
    }

    #[test]
    fn unknown_sigma_matches_known_sigma_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for _ in 0..20 {
            let data = linear_data(&mut rng, 60, 30, 0.0);
            let cfg = DecorrelateConfig::new(PenaltyConfig::l1(0.1), 0.1);
            let fit_u = build_decorrelated_fit(&data, &ModelFamily::GaussianUnknownVar, &cfg).unwrap();
            let (tu, s2) = score_test_unknown_sigma(&data, &fit_u, 0.05, Alternative::TwoSided).unwrap();
            // Same β̂ and ŵ, σ² fixed at σ̂².
            let known = ModelFamily::GaussianKnownVar { sigma2: s2 };
            let mut fit_k = fit_u.clone();
            fit_k.family = known;
            fit_k.s_hat = decorrelated_score(&data, &known, &fit_u.theta_null, &fit_u.fit.beta.gamma(&data), &fit_u.w).unwrap();
            fit_k.info_hat = partial_information(&data, &known, &fit_u.fit.beta, &fit_u.w).unwrap();
            let tk = score_test(&fit_k, 0.05, Alternative::TwoSided).unwrap();
            assert!((tu.statistic - tk.statistic).abs() < 1e-10, "{} vs {}", tu.statistic, tk.statistic);
        }
    }

    #[test]
    fn unit_residuals_give_unit_sigma() {
        // One covariate, β̂ fixed by hand so the residuals are (1, −1).
        let data = Dataset::new(DVector::from_vec(vec![2.0, 0.0]), DMatrix::from_vec(2, 1, vec![1.0, 1.0]), vec![0]).unwrap();
        let s2 = plugin_sigma2(&data, &ParameterVector::from_slice(&[1.0]).unwrap()).unwrap();
        assert_eq!(s2, 1.0);
    }

    #[test]
    fn degenerate_residual_variance() {
        let data = Dataset::new(DVector::from_vec(vec![2.0, 1.0]), DMatrix::from_vec(2, 1, vec![2.0, 1.0]), vec![0]).unwrap();
        let err = plugin_sigma2(&data, &ParameterVector::from_slice(&[1.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DegenerateResidualVariance { .. }));
    }

    #[test]
    fn one_step_generic_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        for _ in 0..10 {
            let data = linear_data(&mut rng, 100, 20, 0.5);
            for fam in [ModelFamily::GaussianKnownVar { sigma2: 1.3 }, ModelFamily::GaussianUnknownVar] {
                let cfg = DecorrelateConfig::new(PenaltyConfig::l1(0.1), 0.1);
                let fit = build_decorrelated_fit(&data, &fam, &cfg).unwrap();
                let os = one_step(&data, &fit, 0.95).unwrap();
                let closed = one_step_linear_closed_form(&data, &fit.fit.beta.gamma(&data), &fit.w.column(0).into_owned()).unwrap();
                assert!((os.theta_tilde - closed).abs() <= 1e-10 * closed.abs().max(1.0));
                let width = os.ci_upper - os.ci_lower;
                assert_relative_eq!(width, 2.0 * norm_quantile(0.975) * os.std_err / 10.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn one_step_fixed_point() {
        // With λ = 0 and no nuisance the fit zeroes the score, so θ̃ = θ̂.
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let q = DMatrix::from_fn(30, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(30, |i, _| q[(i, 0)] + rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        let mut cfg = DecorrelateConfig::new(PenaltyConfig::l1(0.0), 0.1);
        cfg.solver.tol = 1e-14;
        let fit = build_decorrelated_fit(&data, &ModelFamily::GaussianKnownVar { sigma2: 1.0 }, &cfg).unwrap();
        let os = one_step(&data, &fit, 0.9).unwrap();
        assert_relative_eq!(os.theta_tilde, os.theta_hat, epsilon = 1e-12);
    }
}

//! Synthetic data and Monte Carlo estimates of size, power and coverage.
//!
//! Covariates are `N_d(0, Σ)` with Toeplitz `Σ_jk = ρ^{|j−k|}`. The tested
//! coordinates come first (indices `0..d0`, all equal to `theta_true`); the
//! `s` nonzero nuisance coefficients start at `support_offset`.

use std::time::Instant;

use log::{info, warn};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::group_test;
use crate::decorrelate::{build_decorrelated_fit, default_lambda_prime, DecorrelateConfig, DirectionMethod};
use crate::error::{Error, Result};
use crate::inference::{
    local_power, one_step, sandwich_test, score_test, score_test_unknown_sigma, Alternative,
};
use crate::model::{Dataset, ModelFamily};
use crate::penalty::PenaltyConfig;
use crate::seed::substream_seed;
use crate::solvers::{cross_validate_lambda, default_lambda_grid, lambda_max, SolverConfig, CV_DEFAULT_FOLDS};

/// Replications may fail individually; more than this fraction is an error.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaPattern {
    /// Every support coefficient equals 1.
    Dirac,
    /// Support coefficients drawn i.i.d. uniform on `[lo, hi]`.
    UniformRange { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseModel {
    /// `ε ~ N(0, 1)`.
    Standard,
    /// `ε_i = (0.5 + |Q_{i,column}|) · N(0, 1)`.
    Heteroscedastic { column: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaPolicy {
    Fixed(f64),
    /// K-fold CV over the default 50-point grid.
    CrossValidated { folds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaPrimePolicy {
    Fixed(f64),
    /// `c·√(ln d / n)`.
    Rule { c: f64 },
    /// K-fold CV of the lasso regression of the tested column on the nuisance
    /// columns.
    CrossValidated { folds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestVariant {
    ModelInfo,
    PluginSigma,
    Sandwich,
    Bootstrap { b: usize, rescaled: bool },
}

impl TestVariant {
    pub fn label(&self) -> String {
        match self {
            TestVariant::ModelInfo => "model_info".into(),
            TestVariant::PluginSigma => "plugin_sigma".into(),
            TestVariant::Sandwich => "sandwich".into(),
            TestVariant::Bootstrap { rescaled: false, .. } => "bootstrap".into(),
            TestVariant::Bootstrap { rescaled: true, .. } => "bootstrap_rescaled".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub d: usize,
    pub rho: f64,
    pub s: usize,
    pub pattern: BetaPattern,
    pub family: ModelFamily,
    /// Value of every tested coordinate.
    pub theta_true: f64,
    /// Number of tested coordinates.
    pub d0: usize,
    /// First index of the nuisance support.
    pub support_offset: usize,
    pub noise: NoiseModel,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub method: DirectionMethod,
    pub lambda: LambdaPolicy,
    pub lambda_prime: LambdaPrimePolicy,
    pub variants: Vec<TestVariant>,
    /// Also record one-step interval coverage of `theta_true` (d0 = 1 only).
    pub confidence_interval: bool,
}

impl Default for SimConfig {
    /// Linear model, n = 200, d = 100, ρ = 0.25, two unit coefficients, 500
    /// replications of the model-based test at α = 0.05.
    fn default() -> Self {
        Self {
            n: 200,
            d: 100,
            rho: 0.25,
            s: 2,
            pattern: BetaPattern::Dirac,
            family: ModelFamily::GaussianKnownVar { sigma2: 1.0 },
            theta_true: 0.0,
            d0: 1,
            support_offset: 1,
            noise: NoiseModel::Standard,
            reps: 500,
            alpha: 0.05,
            seed: 1,
            method: DirectionMethod::LassoQuadratic,
            lambda: LambdaPolicy::CrossValidated { folds: CV_DEFAULT_FOLDS },
            lambda_prime: LambdaPrimePolicy::Rule { c: 0.5 },
            variants: vec![TestVariant::ModelInfo],
            confidence_interval: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n < 2 || self.d == 0 {
            return bad(format!("need n >= 2 and d >= 1, got n = {}, d = {}", self.n, self.d));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if self.d0 == 0 || self.d0 > self.d {
            return bad(format!("d0 = {} must lie in 1..={}", self.d0, self.d));
        }
        if self.support_offset < self.d0 || self.support_offset + self.s > self.d {
            return bad(format!(
                "support {}..{} must lie after the tested coordinates and inside 0..{}",
                self.support_offset,
                self.support_offset + self.s,
                self.d
            ));
        }
        if self.reps == 0 {
            return bad("reps must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if let BetaPattern::UniformRange { lo, hi } = self.pattern {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("invalid uniform range [{lo}, {hi}]"));
            }
        }
        if let NoiseModel::Heteroscedastic { column } = self.noise {
            if column >= self.d {
                return bad(format!("noise column {column} out of range"));
            }
        }
        if self.d0 > 1 && self.variants.iter().any(|v| !matches!(v, TestVariant::Bootstrap { .. })) {
            return bad("only bootstrap variants test more than one coordinate".into());
        }
        if self.confidence_interval && self.d0 != 1 {
            return bad("confidence intervals need d0 = 1".into());
        }
        self.family.validate()
    }

    fn true_beta(&self, rng: &mut ChaCha8Rng) -> DVector<f64> {
        let mut beta = DVector::zeros(self.d);
        for j in 0..self.d0 {
            beta[j] = self.theta_true;
        }
        for j in self.support_offset..self.support_offset + self.s {
            beta[j] = match self.pattern {
                BetaPattern::Dirac => 1.0,
                BetaPattern::UniformRange { lo, hi } => {
                    if lo == hi {
                        lo
                    } else {
                        rng.gen_range(lo..hi)
                    }
                }
            };
        }
        beta
    }
}

/// Lower Cholesky factor of the Toeplitz matrix `ρ^{|j−k|}`.
pub fn toeplitz_cholesky(d: usize, rho: f64) -> Result<DMatrix<f64>> {
    let sigma = DMatrix::from_fn(d, d, |j, k| rho.powi((j as i64 - k as i64).unsigned_abs() as i32));
    sigma
        .cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::RankDeficient(format!("Toeplitz covariance with rho = {rho} is not positive definite")))
}

struct Generator<'a> {
    cfg: &'a SimConfig,
    chol_t: DMatrix<f64>,
}

impl<'a> Generator<'a> {
    fn new(cfg: &'a SimConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg, chol_t: toeplitz_cholesky(cfg.d, cfg.rho)?.transpose() })
    }

    fn draw(&self, rep_seed: u64) -> Result<(Dataset, DVector<f64>)> {
        let cfg = self.cfg;
        let (n, d) = (cfg.n, cfg.d);
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        // Rows of Q are i.i.d. N(0, Σ): Q = E·Lᵀ.
        let e = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = e * &self.chol_t;
        let beta = cfg.true_beta(&mut rng);
        let eta = &q * &beta;
        let y = match cfg.family {
            ModelFamily::GaussianKnownVar { .. } | ModelFamily::GaussianUnknownVar => {
                DVector::from_fn(n, |i, _| {
                    let z: f64 = rng.sample(StandardNormal);
                    let scale = match cfg.noise {
                        NoiseModel::Standard => 1.0,
                        NoiseModel::Heteroscedastic { column } => 0.5 + q[(i, column)].abs(),
                    };
                    eta[i] + scale * z
                })
            }
            ModelFamily::Logistic => DVector::from_fn(n, |i, _| {
                let p = cfg.family.mean(eta[i]);
                Bernoulli::new(p).map(|b| b.sample(&mut rng) as u8 as f64).unwrap_or(0.0)
            }),
            ModelFamily::Poisson => {
                let mut out = DVector::zeros(n);
                for i in 0..n {
                    let mu = cfg.family.mean(eta[i]);
                    out[i] = if mu > 0.0 {
                        Poisson::new(mu).map_err(|e| Error::Domain(e.to_string()))?.sample(&mut rng)
                    } else {
                        0.0
                    };
                }
                out
            }
        };
        Ok((Dataset::new(y, q, (0..cfg.d0).collect())?, beta))
    }
}

/// One replication's data and true coefficients; `rep_seed` fully determines both.
pub fn generate_dataset(cfg: &SimConfig, rep_seed: u64) -> Result<(Dataset, DVector<f64>)> {
    Generator::new(cfg)?.draw(rep_seed)
}

/// Seed of replication `rep`.
pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    substream_seed(seed, rep as u64)
}

/// Runs `f(rep, rep_seed)` for every replication, in parallel. The output is
/// in replication order and does not depend on scheduling.
pub fn run_replications<T, F>(reps: usize, seed: u64, f: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync,
{
    (0..reps).into_par_iter().map(|r| f(r, rep_seed(seed, r))).collect()
}

/// Per-replication outcome of a size/power run.
#[derive(Debug, Clone, PartialEq)]
pub struct RepOutcome {
    /// One decision per configured variant, in order.
    pub rejects: Vec<bool>,
    pub interval: Option<(f64, f64)>,
    pub lambda: f64,
    pub lambda_prime: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRate {
    pub variant: TestVariant,
    pub rejections: usize,
    pub rate: f64,
    /// Binomial standard error `√(rate(1 − rate)/m)`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub rates: Vec<VariantRate>,
    /// Rate of the first variant.
    pub rejection_rate: f64,
    pub coverage_rate: Option<f64>,
    pub mean_ci_width: Option<f64>,
    pub completed: usize,
    pub failure_count: usize,
    /// `(replication, error name)` of failed replications.
    pub failures: Vec<(usize, String)>,
    pub rep_seeds: Vec<u64>,
    pub mean_lambda: f64,
    pub mean_lambda_prime: f64,
    pub wall_time_secs: f64,
}

/// Nuisance-fit λ under `policy`. CV folds are drawn from a substream of `seed`.
pub fn select_lambda(policy: LambdaPolicy, data: &Dataset, family: &ModelFamily, seed: u64) -> Result<f64> {
    match policy {
        LambdaPolicy::Fixed(l) => Ok(l),
        LambdaPolicy::CrossValidated { folds } => {
            let grid = default_lambda_grid(lambda_max(data, family)?, 50, 0.01);
            cross_validate_lambda(data, family, &grid, folds, substream_seed(seed, 1))
        }
    }
}

/// Direction λ′ under `policy`.
pub fn select_lambda_prime(policy: LambdaPrimePolicy, data: &Dataset, seed: u64) -> Result<f64> {
    match policy {
        LambdaPrimePolicy::Fixed(l) => Ok(l),
        LambdaPrimePolicy::Rule { c } => Ok(default_lambda_prime(data.n(), data.d(), c)),
        LambdaPrimePolicy::CrossValidated { folds } => {
            let x = data.q().select_columns(data.nuisance());
            let z = data.q().column(data.interest()[0]).into_owned();
            let aux = Dataset::new(z, x, vec![0])?;
            let family = ModelFamily::GaussianKnownVar { sigma2: 1.0 };
            let grid = default_lambda_grid(lambda_max(&aux, &family)?, 50, 0.01);
            cross_validate_lambda(&aux, &family, &grid, folds, substream_seed(seed, 2))
        }
    }
}

/// Default replication: fit, then every configured test on the same fit.
pub fn standard_replication(cfg: &SimConfig, data: &Dataset, seed: u64) -> Result<RepOutcome> {
    let lambda = select_lambda(cfg.lambda, data, &cfg.family, seed)?;
    let lambda_prime = select_lambda_prime(cfg.lambda_prime, data, seed)?;
    let mut dcfg = DecorrelateConfig::new(PenaltyConfig::l1(lambda), lambda_prime);
    dcfg.method = cfg.method;
    dcfg.solver = SolverConfig::default();
    let fit = build_decorrelated_fit(data, &cfg.family, &dcfg)?;
    let alt = Alternative::TwoSided;
    let mut rejects = Vec::with_capacity(cfg.variants.len());
    for v in &cfg.variants {
        let r = match *v {
            TestVariant::ModelInfo => score_test(&fit, cfg.alpha, alt)?.reject,
            TestVariant::PluginSigma => score_test_unknown_sigma(data, &fit, cfg.alpha, alt)?.0.reject,
            TestVariant::Sandwich => sandwich_test(data, &fit, cfg.alpha, alt)?.reject,
            TestVariant::Bootstrap { b, rescaled } => {
                group_test(&fit, cfg.alpha, b, substream_seed(seed, 3), rescaled)?.reject
            }
        };
        rejects.push(r);
    }
    let interval = if cfg.confidence_interval {
        let est = one_step(data, &fit, 1.0 - cfg.alpha)?;
        Some((est.ci_lower, est.ci_upper))
    } else {
        None
    };
    Ok(RepOutcome { rejects, interval, lambda, lambda_prime })
}

/// Size/power run with a caller-supplied replication body.
pub fn run_size_power_with<F>(cfg: &SimConfig, body: F) -> Result<SimulationReport>
where
    F: Fn(&Dataset, &DVector<f64>, u64) -> Result<RepOutcome> + Sync,
{
    let start = Instant::now();
    let gen = Generator::new(cfg)?;
    let outcomes = run_replications(cfg.reps, cfg.seed, |_, s| {
        let (data, beta) = gen.draw(s)?;
        body(&data, &beta, s)
    });
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (r, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(o) if o.rejects.len() == cfg.variants.len() => ok.push(o),
            Ok(_) => failures.push((r, "VariantCountMismatch".to_string())),
            Err(e) => {
                warn!("replication {r} failed: {e}");
                failures.push((r, e.name().to_string()));
            }
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * cfg.reps as f64 || ok.is_empty() {
        return Err(Error::TooManyFailures { failed: failures.len(), reps: cfg.reps });
    }
    let m = ok.len() as f64;
    let rates: Vec<VariantRate> = cfg
        .variants
        .iter()
        .enumerate()
        .map(|(k, &variant)| {
            let rejections = ok.iter().filter(|o| o.rejects[k]).count();
            let rate = rejections as f64 / m;
            VariantRate { variant, rejections, rate, mc_se: (rate * (1.0 - rate) / m).sqrt() }
        })
        .collect();
    let intervals: Vec<(f64, f64)> = ok.iter().filter_map(|o| o.interval).collect();
    let (coverage_rate, mean_ci_width) = if intervals.is_empty() {
        (None, None)
    } else {
        let k = intervals.len() as f64;
        let covered = intervals.iter().filter(|(lo, hi)| *lo <= cfg.theta_true && cfg.theta_true <= *hi).count();
        (Some(covered as f64 / k), Some(intervals.iter().map(|(lo, hi)| hi - lo).sum::<f64>() / k))
    };
    let report = SimulationReport {
        config: cfg.clone(),
        rejection_rate: rates.first().map_or(f64::NAN, |r| r.rate),
        rates,
        coverage_rate,
        mean_ci_width,
        completed: ok.len(),
        failure_count: failures.len(),
        failures,
        rep_seeds: (0..cfg.reps).map(|r| rep_seed(cfg.seed, r)).collect(),
        mean_lambda: ok.iter().map(|o| o.lambda).sum::<f64>() / m,
        mean_lambda_prime: ok.iter().map(|o| o.lambda_prime).sum::<f64>() / m,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    info!(
        "{} reps ({} failed) in {:.1}s, rejection rate {:.4}",
        cfg.reps, report.failure_count, report.wall_time_secs, report.rejection_rate
    );
    Ok(report)
}

pub fn run_size_power(cfg: &SimConfig) -> Result<SimulationReport> {
    run_size_power_with(cfg, |data, _, seed| standard_replication(cfg, data, seed))
}

/// `σ⁻²(Σ_00 − Σ_0X Σ_XX⁻¹ Σ_X0)` for the first coordinate of the Toeplitz
/// design, which is the population partial information of a linear model
/// with noise variance `sigma2`.
pub fn population_partial_information(d: usize, rho: f64, sigma2: f64) -> Result<f64> {
    if d == 1 {
        return Ok(1.0 / sigma2);
    }
    let sigma = DMatrix::from_fn(d, d, |j, k| rho.powi((j as i64 - k as i64).unsigned_abs() as i32));
    let sxx = sigma.view((1, 1), (d - 1, d - 1)).into_owned();
    let sxz = sigma.view((1, 0), (d - 1, 1)).into_owned();
    let sol = sxx
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("nuisance covariance is not positive definite".into()))?
        .solve(&sxz);
    Ok((1.0 - sxz.dot(&sol)) / sigma2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalPowerCheck {
    pub empirical_power: f64,
    pub prediction: f64,
    pub c_tilde: f64,
    pub info_star: f64,
    pub report: SimulationReport,
}

/// Monte Carlo power of the first variant at `theta_true = c̃/√n`, next to
/// the asymptotic prediction from [`local_power`] with the population
/// partial information.
pub fn run_local_power_check(cfg: &SimConfig) -> Result<LocalPowerCheck> {
    if !cfg.family.is_gaussian() || cfg.noise != NoiseModel::Standard || cfg.d0 != 1 {
        return Err(Error::InvalidInput("local power check needs the homoscedastic linear model with d0 = 1".into()));
    }
    let info_star = population_partial_information(cfg.d, cfg.rho, 1.0)?;
    let c_tilde = cfg.theta_true * (cfg.n as f64).sqrt();
    let prediction = local_power(cfg.alpha, c_tilde, info_star, Alternative::TwoSided)?;
    let report = run_size_power(cfg)?;
    Ok(LocalPowerCheck { empirical_power: report.rejection_rate, prediction, c_tilde, info_star, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small() -> SimConfig {
        SimConfig {
            n: 60,
            d: 20,
            reps: 24,
            lambda: LambdaPolicy::Fixed(0.15),
            lambda_prime: LambdaPrimePolicy::Fixed(0.2),
            ..Default::default()
        }
    }

    fn sample_cov(cfg: &SimConfig, draws: usize) -> DMatrix<f64> {
        let gen = Generator::new(cfg).unwrap();
        let mut acc = DMatrix::zeros(cfg.d, cfg.d);
        let mut total = 0;
        let mut k = 0;
        while total < draws {
            let (data, _) = gen.draw(k).unwrap();
            acc += data.q().tr_mul(data.q());
            total += data.n();
            k += 1;
        }
        acc / total as f64
    }

    #[test]
    fn independent_design_has_identity_covariance() {
        let cfg = SimConfig { n: 1000, d: 5, rho: 0.0, s: 1, ..Default::default() };
        let c = sample_cov(&cfg, 100_000);
        assert!((c - DMatrix::identity(5, 5)).amax() < 0.03);
    }

    #[test]
    fn toeplitz_design_has_lag_one_correlation() {
        let cfg = SimConfig { n: 1000, d: 5, rho: 0.25, s: 1, ..Default::default() };
        let c = sample_cov(&cfg, 100_000);
        let r = c[(1, 2)] / (c[(1, 1)] * c[(2, 2)]).sqrt();
        assert!((r - 0.25).abs() < 0.02, "{r}");
    }

    #[test]
    fn true_coefficients_follow_the_layout() {
        let cfg = SimConfig { d: 10, s: 3, theta_true: 0.0, ..small() };
        let (_, beta) = generate_dataset(&cfg, 5).unwrap();
        assert_eq!(beta.as_slice(), &[0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let cfg = SimConfig {
            d: 10,
            s: 2,
            d0: 2,
            support_offset: 4,
            theta_true: 0.3,
            pattern: BetaPattern::UniformRange { lo: 0.0, hi: 2.0 },
            variants: vec![TestVariant::Bootstrap { b: 10, rescaled: false }],
            ..small()
        };
        let (data, beta) = generate_dataset(&cfg, 5).unwrap();
        assert_eq!(data.interest(), &[0, 1]);
        assert_eq!(&beta.as_slice()[..4], &[0.3, 0.3, 0.0, 0.0]);
        assert!(beta[4] > 0.0 && beta[4] < 2.0 && beta[5] > 0.0 && beta[5] < 2.0);
        assert!(beta.as_slice()[6..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn binary_and_count_responses() {
        let cfg = SimConfig { family: ModelFamily::Logistic, ..small() };
        let (data, _) = generate_dataset(&cfg, 1).unwrap();
        assert!(data.y().iter().all(|&y| y == 0.0 || y == 1.0));
        let cfg = SimConfig { family: ModelFamily::Poisson, rho: 0.0, ..small() };
        let (data, _) = generate_dataset(&cfg, 1).unwrap();
        assert!(data.y().iter().all(|&y| y >= 0.0 && y.fract() == 0.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(SimConfig { rho: 1.0, ..small() }.validate().is_err());
        assert!(SimConfig { s: 20, ..small() }.validate().is_err());
        assert!(SimConfig { reps: 0, ..small() }.validate().is_err());
        assert!(SimConfig { d0: 2, ..small() }.validate().is_err());
    }

    #[test]
    fn always_rejecting_stub_gives_rate_one() {
        let cfg = SimConfig { variants: vec![TestVariant::ModelInfo, TestVariant::Sandwich], ..small() };
        let report = run_size_power_with(&cfg, |_, _, _| {
            Ok(RepOutcome { rejects: vec![true, false], interval: None, lambda: 0.0, lambda_prime: 0.0 })
        })
        .unwrap();
        assert_eq!(report.rejection_rate, 1.0);
        assert_eq!(report.rates[1].rate, 0.0);
        assert_eq!(report.completed, cfg.reps);
    }

    #[test]
    fn failures_are_counted_and_capped() {
        let cfg = small();
        let report = run_size_power_with(&cfg, |_, _, seed| {
            if seed == rep_seed(cfg.seed, 3) {
                return Err(Error::Degenerate("stub".into()));
            }
            Ok(RepOutcome { rejects: vec![false], interval: None, lambda: 0.0, lambda_prime: 0.0 })
        })
        .unwrap();
        assert_eq!(report.failure_count, 1);
        assert_eq!(report.failures, vec![(3, "Degenerate".to_string())]);
        let err = run_size_power_with(&cfg, |_, _, _| Err(Error::Degenerate("stub".into()))).unwrap_err();
        assert!(matches!(err, Error::TooManyFailures { failed: 24, reps: 24 }));
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = SimConfig {
            variants: vec![
                TestVariant::ModelInfo,
                TestVariant::PluginSigma,
                TestVariant::Sandwich,
                TestVariant::Bootstrap { b: 99, rescaled: true },
            ],
            confidence_interval: true,
            lambda: LambdaPolicy::CrossValidated { folds: 5 },
            ..small()
        };
        let a = run_size_power(&cfg).unwrap();
        let b = run_size_power(&cfg).unwrap();
        assert_eq!(a.rates, b.rates);
        assert_eq!(a.coverage_rate.unwrap().to_bits(), b.coverage_rate.unwrap().to_bits());
        assert_eq!(a.mean_lambda.to_bits(), b.mean_lambda.to_bits());
        assert_eq!(a.rep_seeds, b.rep_seeds);
    }

    #[test]
    fn population_information_of_ar1_design() {
        assert_relative_eq!(population_partial_information(10, 0.0, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        // The first coordinate of an AR(1) design has partial variance 1 − ρ².
        assert_relative_eq!(population_partial_information(10, 0.5, 2.0).unwrap(), 0.75 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_signal_prediction_is_alpha() {
        let cfg = SimConfig { reps: 4, rho: 0.0, ..small() };
        let check = run_local_power_check(&cfg).unwrap();
        assert_relative_eq!(check.prediction, 0.05, epsilon = 1e-15);
        assert_eq!(check.info_star, 1.0);
    }

    #[test]
    fn lambda_prime_by_cross_validation() {
        let cfg = SimConfig { lambda_prime: LambdaPrimePolicy::CrossValidated { folds: 5 }, reps: 3, ..small() };
        let report = run_size_power(&cfg).unwrap();
        assert!(report.mean_lambda_prime > 0.0);
    }
}

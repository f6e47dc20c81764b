//! Model families and the empirical negative log-likelihood `ℓ(β) = (1/n) Σ ℓ_i(β)`.
//!
//! Every family is written in canonical exponential-family form with unit
//! dispersion: `ℓ_i(β) = -(y_i η_i - b(η_i))` where `η_i = βᵀQ_i`. Gaussian
//! families use the residual form `(y_i - η_i)² / (2σ²)`, which differs from
//! the canonical form only by the constant `y_i²/2` and drops the
//! `½ log(2πσ²)` normalizer. Scores and Hessians are unaffected by either.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest linear predictor accepted for Poisson models (`exp(700)` is still finite).
pub const POISSON_ETA_MAX: f64 = 700.0;

/// Response vector, design matrix and the split of coordinates into the
/// parameters of interest (θ) and the nuisance block (γ).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: DVector<f64>,
    q: DMatrix<f64>,
    interest: Vec<usize>,
    nuisance: Vec<usize>,
}

impl Dataset {
    pub fn new(y: DVector<f64>, q: DMatrix<f64>, interest: Vec<usize>) -> Result<Self> {
        let n = y.len();
        let d = q.ncols();
        if q.nrows() != n {
            return Err(Error::DimensionMismatch(format!(
                "response has {n} rows but design has {}",
                q.nrows()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 observations, got {n}")));
        }
        if d == 0 {
            return Err(Error::InvalidInput("design matrix has no columns".into()));
        }
        if interest.is_empty() {
            return Err(Error::InvalidInput("interest set is empty".into()));
        }
        if interest.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("interest indices must be strictly increasing".into()));
        }
        if let Some(&bad) = interest.iter().find(|&&j| j >= d) {
            return Err(Error::InvalidInput(format!("interest index {bad} out of range for d = {d}")));
        }
        if y.iter().chain(q.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("data contain non-finite values".into()));
        }
        let nuisance = (0..d).filter(|j| interest.binary_search(j).is_err()).collect();
        Ok(Self { y, q, interest, nuisance })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.q.ncols()
    }

    /// Number of parameters of interest.
    pub fn d0(&self) -> usize {
        self.interest.len()
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn interest(&self) -> &[usize] {
        &self.interest
    }

    pub fn nuisance(&self) -> &[usize] {
        &self.nuisance
    }

    /// Same data with a different interest set.
    pub fn with_interest(&self, interest: Vec<usize>) -> Result<Self> {
        Self::new(self.y.clone(), self.q.clone(), interest)
    }

    /// Rows `rows` of this dataset. The interest set is kept.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        let q = self.q.select_rows(rows);
        Self::new(y, q, self.interest.clone())
    }

    /// Copy with the response and every design column centered at zero mean.
    ///
    /// The models here carry no intercept; centering is the usual way to
    /// absorb one for Gaussian responses.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        let ym = out.y.mean();
        out.y.add_scalar_mut(-ym);
        for mut col in out.q.column_iter_mut() {
            let m = col.mean();
            col.add_scalar_mut(-m);
        }
        out
    }
}

/// Likelihood family. `a(φ) = 1` throughout.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum ModelFamily {
    /// Linear model with known noise variance.
    GaussianKnownVar { sigma2: f64 },
    /// Linear model with the scale profiled out: everything is computed at
    /// `σ² = 1` and inference rescales by a plug-in estimate.
    GaussianUnknownVar,
    Logistic,
    Poisson,
}

impl ModelFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelFamily::GaussianKnownVar { sigma2 } if !(sigma2 > 0.0 && sigma2.is_finite()) => {
                Err(Error::InvalidInput(format!("sigma2 must be positive, got {sigma2}")))
            }
            _ => Ok(()),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, ModelFamily::GaussianKnownVar { .. } | ModelFamily::GaussianUnknownVar)
    }

    /// Multiplier `1/σ²` applied to Gaussian scores and Hessians; 1 otherwise.
    pub fn scale(&self) -> f64 {
        match *self {
            ModelFamily::GaussianKnownVar { sigma2 } => 1.0 / sigma2,
            _ => 1.0,
        }
    }

    /// Cumulant function `b(t)`.
    pub fn cumulant(&self, t: f64) -> f64 {
        match self {
            ModelFamily::GaussianKnownVar { .. } | ModelFamily::GaussianUnknownVar => 0.5 * t * t,
            ModelFamily::Logistic => softplus(t),
            ModelFamily::Poisson => t.exp(),
        }
    }

    /// Mean function `b'(t)`.
    pub fn mean(&self, t: f64) -> f64 {
        match self {
            ModelFamily::GaussianKnownVar { .. } | ModelFamily::GaussianUnknownVar => t,
            ModelFamily::Logistic => sigmoid(t),
            ModelFamily::Poisson => t.exp(),
        }
    }

    /// Variance function `b''(t)`.
    pub fn variance(&self, t: f64) -> f64 {
        match self {
            ModelFamily::GaussianKnownVar { .. } | ModelFamily::GaussianUnknownVar => 1.0,
            ModelFamily::Logistic => {
                let e = (-t.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            ModelFamily::Poisson => t.exp(),
        }
    }

    /// Per-observation loss `ℓ_i` at linear predictor `eta`.
    pub fn observation_loss(&self, y: f64, eta: f64) -> f64 {
        match self {
            ModelFamily::GaussianKnownVar { .. } | ModelFamily::GaussianUnknownVar => {
                0.5 * self.scale() * (y - eta) * (y - eta)
            }
            _ => self.cumulant(eta) - y * eta,
        }
    }

    pub(crate) fn check_eta(&self, eta: &DVector<f64>) -> Result<()> {
        if let ModelFamily::Poisson = self {
            if let Some(bad) = eta.iter().find(|&&t| t > POISSON_ETA_MAX) {
                return Err(Error::Domain(format!(
                    "Poisson linear predictor {bad:.3} exceeds {POISSON_ETA_MAX}"
                )));
            }
        }
        if eta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Domain("non-finite linear predictor".into()));
        }
        Ok(())
    }
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Coefficient vector `β = (θ, γ)` with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector(DVector<f64>);

impl ParameterVector {
    pub fn new(beta: DVector<f64>) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("parameter vector has non-finite entries".into()));
        }
        Ok(Self(beta))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DVector::zeros(d))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    /// Coordinates of interest, in the order of `data.interest()`.
    pub fn theta(&self, data: &Dataset) -> DVector<f64> {
        gather(&self.0, data.interest())
    }

    /// Nuisance coordinates, in the order of `data.nuisance()`.
    pub fn gamma(&self, data: &Dataset) -> DVector<f64> {
        gather(&self.0, data.nuisance())
    }

    /// Reassemble a full vector from its θ and γ parts.
    pub fn from_parts(data: &Dataset, theta: &DVector<f64>, gamma: &DVector<f64>) -> Result<Self> {
        if theta.len() != data.d0() || gamma.len() != data.nuisance().len() {
            return Err(Error::DimensionMismatch(format!(
                "theta/gamma lengths {}/{} do not match d0/d1 {}/{}",
                theta.len(),
                gamma.len(),
                data.d0(),
                data.nuisance().len()
            )));
        }
        let mut beta = DVector::zeros(data.d());
        for (k, &j) in data.interest().iter().enumerate() {
            beta[j] = theta[k];
        }
        for (k, &j) in data.nuisance().iter().enumerate() {
            beta[j] = gamma[k];
        }
        Self::new(beta)
    }
}

impl Deref for ParameterVector {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

pub(crate) fn gather(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&j| v[j]))
}

/// `η = Qβ`, with dimension and domain checks.
pub fn linear_predictor(data: &Dataset, family: &ModelFamily, beta: &DVector<f64>) -> Result<DVector<f64>> {
    if beta.len() != data.d() {
        return Err(Error::DimensionMismatch(format!(
            "beta has length {} but design has {} columns",
            beta.len(),
            data.d()
        )));
    }
    family.validate()?;
    let eta = data.q() * beta;
    family.check_eta(&eta)?;
    Ok(eta)
}

/// `ℓ(β)`; Gaussian constants are dropped (see module docs).
pub fn neg_log_likelihood(data: &Dataset, family: &ModelFamily, beta: &ParameterVector) -> Result<f64> {
    let eta = linear_predictor(data, family, beta)?;
    Ok(mean_loss(family, data.y(), &eta))
}

pub(crate) fn mean_loss(family: &ModelFamily, y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    y.iter().zip(eta.iter()).map(|(&yi, &ei)| family.observation_loss(yi, ei)).sum::<f64>() / n
}

/// Scaled working residuals `r_i = scale · (y_i - b'(η_i))`, so that
/// `∇ℓ_i = -r_i Q_i`.
pub(crate) fn residuals(family: &ModelFamily, y: &DVector<f64>, eta: &DVector<f64>) -> DVector<f64> {
    let s = family.scale();
    DVector::from_iterator(y.len(), y.iter().zip(eta.iter()).map(|(&yi, &ei)| s * (yi - family.mean(ei))))
}

/// Scaled curvature weights `scale · b''(η_i)`, so that `∇²ℓ = (1/n) Σ v_i Q_i Q_iᵀ`.
pub(crate) fn curvature_weights(family: &ModelFamily, eta: &DVector<f64>) -> DVector<f64> {
    let s = family.scale();
    eta.map(|t| s * family.variance(t))
}

/// Gradient `∇ℓ(β) = -(1/n) Σ r_i Q_i`.
pub fn score(data: &Dataset, family: &ModelFamily, beta: &ParameterVector) -> Result<DVector<f64>> {
    let eta = linear_predictor(data, family, beta)?;
    let r = residuals(family, data.y(), &eta);
    Ok(-(data.q().tr_mul(&r)) / data.n() as f64)
}

/// Hessian `∇²ℓ(β) = (1/n) Σ scale·b''(η_i) Q_i Q_iᵀ`.
pub fn hessian(data: &Dataset, family: &ModelFamily, beta: &ParameterVector) -> Result<DMatrix<f64>> {
    let eta = linear_predictor(data, family, beta)?;
    let v = curvature_weights(family, &eta);
    let h = weighted_gram(data.q(), &v, None, None);
    Ok((&h + h.transpose()) * 0.5)
}

/// `(1/n) Σ v_i Q_{i,rows} Q_{i,cols}ᵀ` for column subsets (all columns when `None`).
pub(crate) fn weighted_gram(
    q: &DMatrix<f64>,
    v: &DVector<f64>,
    rows: Option<&[usize]>,
    cols: Option<&[usize]>,
) -> DMatrix<f64> {
    let n = q.nrows() as f64;
    let left = match rows {
        Some(r) => q.select_columns(r),
        None => q.clone(),
    };
    let right = match cols {
        Some(c) => q.select_columns(c),
        None => q.clone(),
    };
    let mut weighted = right;
    for (i, mut row) in weighted.row_iter_mut().enumerate() {
        row *= v[i];
    }
    left.tr_mul(&weighted) / n
}

/// Row `i` holds the per-observation gradient `∇ℓ_i(β)`.
pub fn observation_gradients(data: &Dataset, family: &ModelFamily, beta: &ParameterVector) -> Result<DMatrix<f64>> {
    let eta = linear_predictor(data, family, beta)?;
    let r = residuals(family, data.y(), &eta);
    let mut g = data.q().clone();
    for (i, mut row) in g.row_iter_mut().enumerate() {
        row *= -r[i];
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn families() -> Vec<ModelFamily> {
        vec![
            ModelFamily::GaussianKnownVar { sigma2: 1.7 },
            ModelFamily::GaussianUnknownVar,
            ModelFamily::Logistic,
            ModelFamily::Poisson,
        ]
    }

    fn random_instance(rng: &mut ChaCha8Rng, family: &ModelFamily, n: usize, d: usize) -> (Dataset, ParameterVector) {
        let q = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let beta = DVector::from_fn(d, |_, _| 0.3 * rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(n, |_, _| match family {
            ModelFamily::Logistic => f64::from(rng.gen_bool(0.5)),
            ModelFamily::Poisson => rng.gen_range(0..4) as f64,
            _ => rng.sample(StandardNormal),
        });
        (Dataset::new(y, q, vec![0]).unwrap(), ParameterVector::new(beta).unwrap())
    }

    #[test]
    fn gaussian_zero_residuals() {
        let data = Dataset::new(DVector::from_vec(vec![0.0, 0.0]), DMatrix::from_vec(2, 1, vec![1.0, 1.0]), vec![0]).unwrap();
        let fam = ModelFamily::GaussianKnownVar { sigma2: 1.0 };
        assert_eq!(neg_log_likelihood(&data, &fam, &ParameterVector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn logistic_at_zero_predictor_is_log2() {
        let data = Dataset::new(DVector::from_vec(vec![1.0, 1.0]), DMatrix::zeros(2, 3), vec![0]).unwrap();
        let beta = ParameterVector::from_slice(&[1.0, -2.0, 0.5]).unwrap();
        let v = neg_log_likelihood(&data, &ModelFamily::Logistic, &beta).unwrap();
        assert_relative_eq!(v, std::f64::consts::LN_2, epsilon = 1e-15);
    }

    #[test]
    fn poisson_hand_value() {
        let data = Dataset::new(DVector::from_vec(vec![2.0, 2.0]), DMatrix::from_vec(2, 1, vec![1.0, 1.0]), vec![0]).unwrap();
        let v = neg_log_likelihood(&data, &ModelFamily::Poisson, &ParameterVector::from_slice(&[1.0]).unwrap()).unwrap();
        // -(2·1 - e)
        assert_relative_eq!(v, std::f64::consts::E - 2.0, epsilon = 1e-14);
    }

    #[test]
    fn poisson_overflow_is_domain_error() {
        let data = Dataset::new(DVector::from_vec(vec![1.0, 1.0]), DMatrix::from_vec(2, 1, vec![1.0, 1.0]), vec![0]).unwrap();
        let err = score(&data, &ModelFamily::Poisson, &ParameterVector::from_slice(&[701.0]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn gaussian_score_hand_value() {
        let data = Dataset::new(DVector::from_vec(vec![1.0, 1.0]), DMatrix::from_vec(2, 1, vec![1.0, 1.0]), vec![0]).unwrap();
        let g = score(&data, &ModelFamily::GaussianKnownVar { sigma2: 1.0 }, &ParameterVector::zeros(1)).unwrap();
        assert_relative_eq!(g[0], -1.0);
    }

    #[test]
    fn gaussian_hessian_identity_design() {
        let data = Dataset::new(DVector::from_vec(vec![3.0, -1.0]), DMatrix::identity(2, 2), vec![0]).unwrap();
        let h = hessian(&data, &ModelFamily::GaussianKnownVar { sigma2: 1.0 }, &ParameterVector::from_slice(&[4.0, 2.0]).unwrap()).unwrap();
        assert_relative_eq!(h, DMatrix::identity(2, 2) * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn logistic_hessian_at_zero_is_quarter_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (data, _) = random_instance(&mut rng, &ModelFamily::Logistic, 9, 4);
        let h = hessian(&data, &ModelFamily::Logistic, &ParameterVector::zeros(4)).unwrap();
        let expected = data.q().tr_mul(data.q()) / (4.0 * 9.0);
        assert_relative_eq!(h, expected, epsilon = 1e-14);
    }

    #[test]
    fn score_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for fam in families() {
            for _ in 0..20 {
                let (data, beta) = random_instance(&mut rng, &fam, 15, 4);
                let g = score(&data, &fam, &beta).unwrap();
                let h = 1e-6;
                for j in 0..4 {
                    let mut bp = beta.clone().into_inner();
                    let mut bm = bp.clone();
                    bp[j] += h;
                    bm[j] -= h;
                    let fd = (neg_log_likelihood(&data, &fam, &ParameterVector::new(bp).unwrap()).unwrap()
                        - neg_log_likelihood(&data, &fam, &ParameterVector::new(bm).unwrap()).unwrap())
                        / (2.0 * h);
                    let rel = (fd - g[j]).abs() / g[j].abs().max(1e-3);
                    assert!(rel < 1e-5, "{fam:?} coord {j}: fd {fd} vs {}", g[j]);
                }
            }
        }
    }

    #[test]
    fn hessian_matches_score_differences_and_is_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for fam in families() {
            for _ in 0..20 {
                let (data, beta) = random_instance(&mut rng, &fam, 15, 4);
                let hmat = hessian(&data, &fam, &beta).unwrap();
                assert_eq!(hmat, hmat.transpose());
                let h = 1e-6;
                for j in 0..4 {
                    let mut bp = beta.clone().into_inner();
                    let mut bm = bp.clone();
                    bp[j] += h;
                    bm[j] -= h;
                    let fd = (score(&data, &fam, &ParameterVector::new(bp).unwrap()).unwrap()
                        - score(&data, &fam, &ParameterVector::new(bm).unwrap()).unwrap())
                        / (2.0 * h);
                    for k in 0..4 {
                        let rel = (fd[k] - hmat[(k, j)]).abs() / hmat[(k, j)].abs().max(1e-3);
                        assert!(rel < 1e-4, "{fam:?} ({k},{j})");
                    }
                }
                for _ in 0..10 {
                    let x = DVector::from_fn(4, |_, _| rng.sample::<f64, _>(StandardNormal));
                    assert!(x.dot(&(&hmat * &x)) >= -1e-10 * x.norm_squared());
                }
            }
        }
    }

    #[test]
    fn logistic_functions_stay_finite_at_extremes() {
        let fam = ModelFamily::Logistic;
        for t in [-700.0, -300.0, -40.0, 0.0, 40.0, 300.0, 700.0] {
            assert!(fam.cumulant(t).is_finite());
            assert!(fam.mean(t).is_finite());
            assert!(fam.variance(t).is_finite() && fam.variance(t) >= 0.0);
        }
        assert_relative_eq!(fam.cumulant(700.0), 700.0, epsilon = 1e-12);
        assert!(fam.cumulant(-700.0) > 0.0);
        assert_relative_eq!(fam.variance(0.0), 0.25);
    }

    /// Bartlett identity: E[∇ℓ_i ∇ℓ_iᵀ] = E[∇²ℓ_i] at the true parameter.
    #[test]
    fn information_equality_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let d = 3;
        let beta_true = DVector::from_vec(vec![0.5, -0.4, 0.3]);
        for fam in [ModelFamily::GaussianKnownVar { sigma2: 2.0 }, ModelFamily::Logistic, ModelFamily::Poisson] {
            let q = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
            let eta = &q * &beta_true;
            let y = DVector::from_fn(n, |i, _| match fam {
                ModelFamily::Logistic => f64::from(rng.gen_bool(fam.mean(eta[i]))),
                ModelFamily::Poisson => {
                    rand_distr::Distribution::sample(&rand_distr::Poisson::new(fam.mean(eta[i])).unwrap(), &mut rng)
                }
                _ => eta[i] + 2f64.sqrt() * rng.sample::<f64, _>(StandardNormal),
            });
            let data = Dataset::new(y, q, vec![0]).unwrap();
            let beta = ParameterVector::new(beta_true.clone()).unwrap();
            let grads = observation_gradients(&data, &fam, &beta).unwrap();
            let v = curvature_weights(&fam, &linear_predictor(&data, &fam, &beta).unwrap());
            for a in 0..d {
                for b in 0..d {
                    let outer: Vec<f64> = (0..n).map(|i| grads[(i, a)] * grads[(i, b)]).collect();
                    let hess: Vec<f64> = (0..n).map(|i| v[i] * data.q()[(i, a)] * data.q()[(i, b)]).collect();
                    let diff: Vec<f64> = outer.iter().zip(&hess).map(|(x, y)| x - y).collect();
                    let m = diff.iter().sum::<f64>() / n as f64;
                    let var = diff.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
                    let se = (var / n as f64).sqrt();
                    assert!(m.abs() <= 3.0 * se, "{fam:?} ({a},{b}): mean diff {m} se {se}");
                }
            }
        }
    }

    #[test]
    fn dataset_rejects_bad_inputs() {
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        let q = DMatrix::from_vec(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(Dataset::new(y.clone(), q.clone(), vec![]).is_err());
        assert!(Dataset::new(y.clone(), q.clone(), vec![1, 0]).is_err());
        assert!(Dataset::new(y.clone(), q.clone(), vec![2]).is_err());
        assert!(Dataset::new(DVector::from_vec(vec![1.0]), DMatrix::zeros(1, 2), vec![0]).is_err());
        let mut qn = q.clone();
        qn[(0, 0)] = f64::NAN;
        assert!(Dataset::new(y.clone(), qn, vec![0]).is_err());
        let ok = Dataset::new(y, q, vec![1]).unwrap();
        assert_eq!(ok.nuisance(), &[0]);
    }
}

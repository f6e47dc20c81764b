//! Per-observation losses `ℓ(β) = (1/n) Σ ℓ_i(β)` beyond the likelihood
//! families, for the loss-agnostic score test.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{self, Dataset, ModelFamily, ParameterVector};

pub trait ObservationLoss: Sync {
    fn n(&self) -> usize;

    fn d(&self) -> usize;

    /// Mean loss.
    fn value(&self, beta: &DVector<f64>) -> Result<f64>;

    /// Row `i` is `∇ℓ_i(β)`.
    fn gradients(&self, beta: &DVector<f64>) -> Result<DMatrix<f64>>;

    /// `∇²ℓ(β)` when available in closed form. `None` makes callers fall
    /// back to differencing [`ObservationLoss::gradient`].
    fn hessian(&self, _beta: &DVector<f64>) -> Result<Option<DMatrix<f64>>> {
        Ok(None)
    }

    fn gradient(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        let g = self.gradients(beta)?;
        Ok(g.row_mean().transpose())
    }
}

/// Central differences of the mean gradient, symmetrized.
pub fn finite_difference_hessian(loss: &dyn ObservationLoss, beta: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = loss.d();
    let mut h = DMatrix::zeros(d, d);
    for j in 0..d {
        let step = 1e-5 * beta[j].abs().max(1.0);
        let mut bp = beta.clone();
        let mut bm = beta.clone();
        bp[j] += step;
        bm[j] -= step;
        let col = (loss.gradient(&bp)? - loss.gradient(&bm)?) / (2.0 * step);
        h.set_column(j, &col);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// A likelihood family viewed as a generic loss.
pub struct LikelihoodLoss<'a> {
    pub data: &'a Dataset,
    pub family: ModelFamily,
}

impl ObservationLoss for LikelihoodLoss<'_> {
    fn n(&self) -> usize {
        self.data.n()
    }

    fn d(&self) -> usize {
        self.data.d()
    }

    fn value(&self, beta: &DVector<f64>) -> Result<f64> {
        model::neg_log_likelihood(self.data, &self.family, &ParameterVector::new(beta.clone())?)
    }

    fn gradients(&self, beta: &DVector<f64>) -> Result<DMatrix<f64>> {
        model::observation_gradients(self.data, &self.family, &ParameterVector::new(beta.clone())?)
    }

    fn hessian(&self, beta: &DVector<f64>) -> Result<Option<DMatrix<f64>>> {
        model::hessian(self.data, &self.family, &ParameterVector::new(beta.clone())?).map(Some)
    }
}

/// Huber regression loss `ρ_δ(Y_i − βᵀQ_i)` with
/// `ρ_δ(r) = r²/2` for `|r| ≤ δ` and `δ|r| − δ²/2` beyond.
pub struct HuberLoss<'a> {
    pub data: &'a Dataset,
    pub delta: f64,
}

impl<'a> HuberLoss<'a> {
    pub fn new(data: &'a Dataset, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidInput(format!("Huber threshold must be positive, got {delta}")));
        }
        Ok(Self { data, delta })
    }

    fn residuals(&self, beta: &DVector<f64>) -> Result<DVector<f64>> {
        if beta.len() != self.data.d() {
            return Err(Error::DimensionMismatch(format!("beta has length {} for d = {}", beta.len(), self.data.d())));
        }
        Ok(self.data.y() - self.data.q() * beta)
    }
}

impl ObservationLoss for HuberLoss<'_> {
    fn n(&self) -> usize {
        self.data.n()
    }

    fn d(&self) -> usize {
        self.data.d()
    }

    fn value(&self, beta: &DVector<f64>) -> Result<f64> {
        let r = self.residuals(beta)?;
        let dl = self.delta;
        Ok(r.iter().map(|&ri| if ri.abs() <= dl { 0.5 * ri * ri } else { dl * ri.abs() - 0.5 * dl * dl }).sum::<f64>()
            / self.n() as f64)
    }

    fn gradients(&self, beta: &DVector<f64>) -> Result<DMatrix<f64>> {
        let r = self.residuals(beta)?;
        let mut g = self.data.q().clone();
        for (i, mut row) in g.row_iter_mut().enumerate() {
            row *= -r[i].clamp(-self.delta, self.delta);
        }
        Ok(g)
    }

    fn hessian(&self, beta: &DVector<f64>) -> Result<Option<DMatrix<f64>>> {
        let r = self.residuals(beta)?;
        let v = r.map(|ri| if ri.abs() <= self.delta { 1.0 } else { 0.0 });
        let h = model::weighted_gram(self.data.q(), &v, None, None);
        Ok(Some((&h + h.transpose()) * 0.5))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn huber_gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let q = DMatrix::from_fn(30, 4, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(30, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        let loss = HuberLoss::new(&data, 1.0).unwrap();
        let beta = DVector::from_vec(vec![0.3, -0.2, 0.1, 0.0]);
        let g = loss.gradient(&beta).unwrap();
        for j in 0..4 {
            let mut bp = beta.clone();
            let mut bm = beta.clone();
            bp[j] += 1e-6;
            bm[j] -= 1e-6;
            let fd = (loss.value(&bp).unwrap() - loss.value(&bm).unwrap()) / 2e-6;
            assert_relative_eq!(fd, g[j], epsilon = 1e-6);
        }
    }

    #[test]
    fn likelihood_hessian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let q = DMatrix::from_fn(30, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(30, |_, _| f64::from(rng.gen_bool(0.5)));
        let data = Dataset::new(y, q, vec![0]).unwrap();
        let loss = LikelihoodLoss { data: &data, family: ModelFamily::Logistic };
        let beta = DVector::from_vec(vec![0.2, -0.1, 0.4]);
        let exact = loss.hessian(&beta).unwrap().unwrap();
        let fd = finite_difference_hessian(&loss, &beta).unwrap();
        assert_relative_eq!(exact, fd, epsilon = 1e-8);
    }
}

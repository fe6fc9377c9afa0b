// SPDX-License-Identifier: Apache-2.0

//! Marginal likelihoods under Zellner's g-prior and its hyper-g mixtures.
//!
//! All values are log Bayes factors against the null (intercept-only)
//! model, which is the model-constant that cancels in posterior model
//! probabilities.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use super::prior::{GFamily, HyperG, PriorConfig};
use super::ModelId;
use crate::data::Dataset;
use crate::error::{DssError, Result};
use crate::linalg::{checked_cholesky, principal_submatrix, subvector};
use crate::quadrature;

const HYPER_G_REL_TOL: f64 = 1e-10;

/// Closed-form log Bayes factor of a size-`k` model with coefficient of
/// determination `r2` against the null model under a fixed `g`:
/// `((n-1-k)/2) ln(1+g) - ((n-1)/2) ln(1 + g(1-R²))`.
pub fn log_bf_fixed_g(r2: f64, k: usize, n: usize, g: f64) -> f64 {
    let n1 = n as f64 - 1.0;
    0.5 * (n1 - k as f64) * g.ln_1p() - 0.5 * n1 * (g * (1.0 - r2)).ln_1p()
}

/// Least-squares summary of one submodel on the centered data.
#[derive(Debug, Clone)]
pub struct SubsetFit {
    pub support: Vec<usize>,
    pub r2: f64,
    pub beta_hat: DVector<f64>,
    pub(crate) chol: Option<Cholesky<f64, Dyn>>,
}

impl SubsetFit {
    pub fn k(&self) -> usize {
        self.support.len()
    }
}

/// Log of `BF(g) p(g) g` as a function of `t = ln g` (unnormalized).
struct HyperIntegrand {
    r2: f64,
    k: usize,
    n: usize,
    h: HyperG,
    d: f64,
}

impl HyperIntegrand {
    fn log_t(&self, t: f64) -> f64 {
        let g = t.exp();
        let e = self.h.a + self.h.c + self.d + 1.0;
        log_bf_fixed_g(self.r2, self.k, self.n, g) + (self.d + 1.0) * t - e * (g + self.h.b).ln()
    }

    fn mode(&self) -> (f64, f64) {
        let mut best_t = -40.0;
        let mut best = f64::NEG_INFINITY;
        let mut t = -40.0;
        while t <= 60.0 {
            let v = self.log_t(t);
            if v > best {
                best = v;
                best_t = t;
            }
            t += 0.25;
        }
        // golden-section refinement inside the bracketing grid cells
        let (mut lo, mut hi) = (best_t - 0.25, best_t + 0.25);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - phi * (hi - lo);
        let mut x2 = lo + phi * (hi - lo);
        let (mut f1, mut f2) = (self.log_t(x1), self.log_t(x2));
        for _ in 0..60 {
            if f1 > f2 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - phi * (hi - lo);
                f1 = self.log_t(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (hi - lo);
                f2 = self.log_t(x2);
            }
        }
        let tm = 0.5 * (lo + hi);
        let fm = self.log_t(tm);
        if fm > best {
            (tm, fm)
        } else {
            (best_t, best)
        }
    }

    /// `∫ weight(g) exp(log_t(t) - shift) dt`, evaluated on the bounded
    /// variable `u = g/(1+g)` below the mode and `1 - u` above it.
    fn integrate<W: Fn(f64) -> f64>(&self, t_star: f64, shift: f64, weight: W) -> Result<f64> {
        let logistic = |t: f64| 1.0 / (1.0 + (-t).exp());
        let offsets = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
        let lower_cuts: Vec<f64> = offsets.iter().map(|m| logistic(t_star - m)).collect();
        let upper_cuts: Vec<f64> = offsets.iter().map(|m| logistic(-(t_star + m))).collect();
        let lower = |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let t = u.ln() - (-u).ln_1p();
            weight(t.exp()) * (self.log_t(t) - shift - u.ln() - (-u).ln_1p()).exp()
        };
        let upper = |v: f64| {
            if v <= 0.0 {
                return 0.0;
            }
            let t = (-v).ln_1p() - v.ln();
            weight(t.exp()) * (self.log_t(t) - shift - v.ln() - (-v).ln_1p()).exp()
        };
        let a = quadrature::integrate(lower, 0.0, logistic(t_star), &lower_cuts, HYPER_G_REL_TOL, 0.0, 4000)?;
        let b = quadrature::integrate(upper, 0.0, logistic(-t_star), &upper_cuts, HYPER_G_REL_TOL, 0.0, 4000)?;
        Ok(a.value + b.value)
    }
}

/// Log Bayes factor against the null model, integrated over the hyper-g
/// density on `g`.
pub fn log_bf_hyper_g(r2: f64, k: usize, n: usize, h: &HyperG) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    h.validate_for(n, k)?;
    let d = h.d_for(n, k);
    let integrand = HyperIntegrand { r2, k, n, h: *h, d };
    let (t_star, shift) = integrand.mode();
    let value = integrand.integrate(t_star, shift, |_| 1.0)?;
    Ok(shift + value.ln() - h.log_normalizer(d))
}

/// Discretized posterior of `g` for one model under a hyper-g prior,
/// used to draw `g` by inverse CDF.
#[derive(Debug, Clone)]
pub(crate) struct GPosteriorGrid {
    log_g: Vec<f64>,
    cdf: Vec<f64>,
}

impl GPosteriorGrid {
    fn build(r2: f64, k: usize, n: usize, h: &HyperG) -> Self {
        let d = h.d_for(n, k);
        let integrand = HyperIntegrand { r2, k, n, h: *h, d };
        let (t_star, shift) = integrand.mode();
        let points = 4001;
        let (lo, hi) = (t_star - 40.0, t_star + 40.0);
        let step = (hi - lo) / (points - 1) as f64;
        let log_g: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
        let dens: Vec<f64> = log_g.iter().map(|&t| (integrand.log_t(t) - shift).exp()).collect();
        let mut cdf = vec![0.0; points];
        for i in 1..points {
            cdf[i] = cdf[i - 1] + 0.5 * step * (dens[i] + dens[i - 1]);
        }
        let total = cdf[points - 1];
        for c in &mut cdf {
            *c /= total;
        }
        GPosteriorGrid { log_g, cdf }
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let w = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        (self.log_g[i - 1] + w * (self.log_g[i] - self.log_g[i - 1])).exp()
    }
}

/// Precomputed cross-products of the centered data, shared by every
/// submodel evaluation.
#[derive(Debug, Clone)]
pub struct MarginalContext {
    gram: DMatrix<f64>,
    xty: DVector<f64>,
    tss: f64,
    n: usize,
    p: usize,
}

impl MarginalContext {
    pub fn new(data: &Dataset) -> Self {
        let mut x = data.x().clone();
        for j in 0..x.ncols() {
            let m = x.column(j).mean();
            x.column_mut(j).add_scalar_mut(-m);
        }
        let ym = data.y().mean();
        let y = data.y().map(|v| v - ym);
        MarginalContext {
            gram: x.transpose() * &x,
            xty: x.transpose() * &y,
            tss: y.norm_squared(),
            n: data.n(),
            p: data.p(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Centered total sum of squares of the response.
    pub fn tss(&self) -> f64 {
        self.tss
    }

    pub fn fit(&self, model: &ModelId) -> Result<SubsetFit> {
        let support = model.support();
        let k = support.len();
        if k > self.n.saturating_sub(1) {
            return Err(DssError::UnsupportedModel(format!(
                "model with {k} predictors exceeds n - 1 = {}",
                self.n - 1
            )));
        }
        if k == 0 {
            return Ok(SubsetFit {
                support,
                r2: 0.0,
                beta_hat: DVector::zeros(0),
                chol: None,
            });
        }
        let g = principal_submatrix(&self.gram, &support);
        let b = subvector(&self.xty, &support);
        let chol = checked_cholesky(&g).ok_or_else(|| {
            DssError::SingularDesign(format!("submodel {model} has a rank-deficient design"))
        })?;
        let beta_hat = chol.solve(&b);
        let r2 = (b.dot(&beta_hat) / self.tss).clamp(0.0, 1.0);
        Ok(SubsetFit {
            support,
            r2,
            beta_hat,
            chol: Some(chol),
        })
    }

    /// Log marginal likelihood of `model` relative to the null model.
    pub fn log_marginal(&self, model: &ModelId, prior: &PriorConfig) -> Result<f64> {
        let fit = self.fit(model)?;
        self.log_marginal_of_fit(&fit, prior)
    }

    pub fn log_marginal_of_fit(&self, fit: &SubsetFit, prior: &PriorConfig) -> Result<f64> {
        match prior.family {
            GFamily::Fixed { g } => Ok(log_bf_fixed_g(fit.r2, fit.k(), self.n, g)),
            GFamily::Hyper(h) => log_bf_hyper_g(fit.r2, fit.k(), self.n, &h),
        }
    }

    pub(crate) fn g_grid(&self, fit: &SubsetFit, h: &HyperG) -> GPosteriorGrid {
        GPosteriorGrid::build(fit.r2, fit.k(), self.n, h)
    }

    /// Posterior mean of the shrinkage factor `g/(1+g)` for one model.
    pub fn mean_shrinkage(&self, fit: &SubsetFit, prior: &PriorConfig) -> Result<f64> {
        match prior.family {
            GFamily::Fixed { g } => Ok(g / (1.0 + g)),
            GFamily::Hyper(h) => {
                if fit.k() == 0 {
                    return Ok(0.0);
                }
                let d = h.d_for(self.n, fit.k());
                let integrand = HyperIntegrand {
                    r2: fit.r2,
                    k: fit.k(),
                    n: self.n,
                    h,
                    d,
                };
                let (t_star, shift) = integrand.mode();
                let num = integrand.integrate(t_star, shift, |g| g / (1.0 + g))?;
                let den = integrand.integrate(t_star, shift, |_| 1.0)?;
                Ok(num / den)
            }
        }
    }
}

/// Log marginal likelihood of one model (relative to the null model).
pub fn log_marginal_likelihood(data: &Dataset, model: &ModelId, prior: &PriorConfig) -> Result<f64> {
    MarginalContext::new(data).log_marginal(model, prior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::prior::{HyperGPreset, ModelPrior};

    #[test]
    fn null_model_has_zero_log_bf() {
        assert_eq!(log_bf_fixed_g(0.0, 0, 30, 30.0), 0.0);
        let h = HyperGPreset::LiangN.build(30);
        assert_eq!(log_bf_hyper_g(0.0, 0, 30, &h).unwrap(), 0.0);
    }

    #[test]
    fn zero_r2_model_is_penalized() {
        let (n, k, g) = (40usize, 3usize, 40.0f64);
        let expected = ((1.0 + g).powf((n - k - 1) as f64 / 2.0) / (1.0 + g).powf((n - 1) as f64 / 2.0)).ln();
        let got = log_bf_fixed_g(0.0, k, n, g);
        assert!((got - expected).abs() < 1e-10);
        assert!(got < 0.0);
    }

    #[test]
    fn hyper_g_matches_large_fixed_g_limit_ordering() {
        // the mixture BF must lie between the smallest and largest fixed-g BFs
        let h = HyperGPreset::Cui.build(50);
        let v = log_bf_hyper_g(0.4, 2, 50, &h).unwrap();
        let fixed: Vec<f64> = (-10..30).map(|e| log_bf_fixed_g(0.4, 2, 50, (e as f64 * 0.5).exp())).collect();
        let max = fixed.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(v < max);
        assert!(v > -5.0);
    }

    #[test]
    fn fixed_g_shrinkage_is_closed_form() {
        let x = DMatrix::from_row_slice(4, 1, &[1.0, 2.0, 3.0, 5.0]);
        let y = DVector::from_vec(vec![1.0, 1.5, 3.2, 4.0]);
        let d = Dataset::standardize(x, y, vec!["a".into()], "y").unwrap();
        let ctx = MarginalContext::new(&d);
        let fit = ctx.fit(&ModelId::from_support(1, &[0])).unwrap();
        let prior = PriorConfig::fixed_g(4.0, ModelPrior::Uniform);
        assert!((ctx.mean_shrinkage(&fit, &prior).unwrap() - 0.8).abs() < 1e-15);
    }
}

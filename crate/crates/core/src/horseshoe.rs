// SPDX-License-Identifier: Apache-2.0

//! Gibbs sampler for the normal linear model under the horseshoe prior.
//!
//! Each half-Cauchy scale is written as a pair of inverse-gamma variables
//! (`λ² | ν ~ IG(1/2, 1/ν)`, `ν ~ IG(1/2, 1)`), which makes every full
//! conditional available in closed form.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::data::{Dataset, RngConfig};
use crate::error::{DssError, Result};
use crate::linalg::checked_cholesky;
use crate::posterior::{PosteriorDraws, PriorTag};

const SCALE_FLOOR: f64 = 1e-12;
const SCALE_CEIL: f64 = 1e12;

/// Prior scale of the coefficients relative to the noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlobalScale {
    /// `β_j ~ N(0, λ² λ_j²)` with `λ ~ C⁺(0, 1)`.
    #[default]
    Unit,
    /// `β_j ~ N(0, σ² λ² λ_j²)`: the global scale is measured in units of
    /// the noise standard deviation.
    NoiseScaled,
}

/// Holds every scale at a fixed value instead of sampling it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrozenScales {
    pub local: f64,
    pub global: f64,
}

#[derive(Debug, Clone)]
pub struct HorseshoeConfig {
    pub draws: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub global: GlobalScale,
    pub frozen: Option<FrozenScales>,
}

impl Default for HorseshoeConfig {
    fn default() -> Self {
        HorseshoeConfig {
            draws: 5000,
            burn_in: 1000,
            thin: 1,
            global: GlobalScale::Unit,
            frozen: None,
        }
    }
}

/// Full state of one chain. `local` holds `λ_j`, `global` holds `λ`.
#[derive(Debug, Clone)]
pub struct HorseshoeState {
    pub beta: DVector<f64>,
    pub sigma2: f64,
    pub local: Vec<f64>,
    pub global: f64,
    local_aux: Vec<f64>,
    global_aux: f64,
}

impl HorseshoeState {
    fn initial(p: usize, frozen: Option<FrozenScales>) -> Self {
        let (l, g) = frozen.map(|f| (f.local, f.global)).unwrap_or((1.0, 1.0));
        HorseshoeState {
            beta: DVector::zeros(p),
            sigma2: 1.0,
            local: vec![l; p],
            global: g,
            local_aux: vec![1.0; p],
            global_aux: 1.0,
        }
    }

    /// Shrinkage weights `κ_j = 1 / (1 + λ_j²)`.
    pub fn kappa(&self) -> Vec<f64> {
        self.local.iter().map(|l| 1.0 / (1.0 + l * l)).collect()
    }
}

fn inv_gamma(rng: &mut ChaCha8Rng, shape: f64, rate: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / rate).expect("valid gamma parameters");
    1.0 / g.sample(rng)
}

struct Sufficient {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    x: DMatrix<f64>,
    y: DVector<f64>,
}

fn clamp_scale(v: f64, clamped: &mut usize) -> f64 {
    if v < SCALE_FLOOR {
        *clamped += 1;
        SCALE_FLOOR
    } else if v > SCALE_CEIL {
        *clamped += 1;
        SCALE_CEIL
    } else {
        v
    }
}

fn sweep(
    st: &mut HorseshoeState,
    suf: &Sufficient,
    cfg: &HorseshoeConfig,
    rng: &mut ChaCha8Rng,
    iteration: usize,
    clamped: &mut usize,
) -> Result<()> {
    let n = suf.y.len() as f64;
    let p = st.beta.len();
    let noise_scaled = cfg.global == GlobalScale::NoiseScaled;
    let fail = |msg: &str| DssError::SamplerFailure {
        iteration,
        message: msg.to_string(),
    };

    // β | rest ~ N(A⁻¹X'y, σ²A⁻¹) with A = X'X + c·diag(1/(λ²λ_j²)),
    // c = 1 for the noise-scaled prior and σ² otherwise.
    let c = if noise_scaled { 1.0 } else { st.sigma2 };
    let g2 = st.global * st.global;
    let mut a = suf.xtx.clone();
    for j in 0..p {
        a[(j, j)] += c / (g2 * st.local[j] * st.local[j]);
    }
    let chol = checked_cholesky(&a).ok_or_else(|| fail("coefficient precision is not positive definite"))?;
    let mean = chol.solve(&suf.xty);
    let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let lt = chol.l().transpose();
    let dev = lt
        .solve_upper_triangular(&z)
        .ok_or_else(|| fail("triangular solve failed"))?;
    st.beta = mean + dev * st.sigma2.sqrt();

    // σ² | rest, improper 1/σ² prior; one degree of freedom is spent on the
    // centered intercept.
    let resid = &suf.y - &suf.x * &st.beta;
    let rss = resid.norm_squared();
    let (shape, rate) = if noise_scaled {
        let pen: f64 = (0..p)
            .map(|j| st.beta[j] * st.beta[j] / (g2 * st.local[j] * st.local[j]))
            .sum();
        ((n - 1.0 + p as f64) / 2.0, (rss + pen) / 2.0)
    } else {
        ((n - 1.0) / 2.0, rss / 2.0)
    };
    st.sigma2 = inv_gamma(rng, shape, rate.max(f64::MIN_POSITIVE));

    if cfg.frozen.is_none() {
        let s = if noise_scaled { st.sigma2 } else { 1.0 };
        for j in 0..p {
            let l2 = inv_gamma(
                rng,
                1.0,
                1.0 / st.local_aux[j] + st.beta[j] * st.beta[j] / (2.0 * g2 * s),
            );
            st.local[j] = clamp_scale(l2.sqrt(), clamped);
            st.local_aux[j] = inv_gamma(rng, 1.0, 1.0 + 1.0 / (st.local[j] * st.local[j]));
        }
        let ss: f64 = (0..p)
            .map(|j| st.beta[j] * st.beta[j] / (st.local[j] * st.local[j]))
            .sum();
        let g2_new = inv_gamma(rng, (p as f64 + 1.0) / 2.0, 1.0 / st.global_aux + ss / (2.0 * s));
        st.global = clamp_scale(g2_new.sqrt(), clamped);
        st.global_aux = inv_gamma(rng, 1.0, 1.0 + 1.0 / (st.global * st.global));
    }

    let finite = st.sigma2.is_finite()
        && st.sigma2 > 0.0
        && st.beta.iter().all(|v| v.is_finite())
        && st.local.iter().all(|v| v.is_finite() && *v > 0.0)
        && st.global.is_finite();
    if !finite {
        return Err(fail("non-finite sampler state"));
    }
    Ok(())
}

/// Runs one chain and returns `cfg.draws` post-burn-in draws with local
/// scales retained.
pub fn sample_horseshoe(data: &Dataset, cfg: &HorseshoeConfig, rng: &RngConfig) -> Result<PosteriorDraws> {
    if cfg.draws == 0 {
        return Err(DssError::Argument("draw count must be positive".into()));
    }
    if cfg.draws < 100 {
        warn!("only {} horseshoe draws requested; summaries need at least 100", cfg.draws);
    }
    if let Some(f) = cfg.frozen {
        if !(f.local > 0.0 && f.global > 0.0) {
            return Err(DssError::Argument("frozen scales must be positive".into()));
        }
    }
    let thin = cfg.thin.max(1);
    let x = data.x().clone();
    let y = data.y().clone();
    let suf = Sufficient {
        xtx: x.transpose() * &x,
        xty: x.transpose() * &y,
        x,
        y,
    };
    let p = data.p();
    let mut rng = rng.rng();
    let mut state = HorseshoeState::initial(p, cfg.frozen);
    let mut beta = DMatrix::zeros(cfg.draws, p);
    let mut sigma2 = DVector::zeros(cfg.draws);
    let mut scales = DMatrix::zeros(cfg.draws, p);
    let mut global = DVector::zeros(cfg.draws);
    let mut clamped = 0usize;
    let total = cfg.burn_in + cfg.draws * thin;
    let mut kept = 0;
    for it in 0..total {
        sweep(&mut state, &suf, cfg, &mut rng, it, &mut clamped)?;
        if it >= cfg.burn_in && (it - cfg.burn_in) % thin == thin - 1 {
            beta.set_row(kept, &state.beta.transpose());
            sigma2[kept] = state.sigma2;
            for j in 0..p {
                scales[(kept, j)] = state.local[j];
            }
            global[kept] = state.global;
            kept += 1;
        }
    }
    if clamped > 0 {
        warn!("horseshoe scales clamped to [{SCALE_FLOOR:e}, {SCALE_CEIL:e}] {clamped} times");
    }
    PosteriorDraws::new(beta, sigma2, PriorTag::Horseshoe)?
        .with_local_scales(scales)?
        .with_global_scales(global)
        .map(|d| d.with_sampling_metadata(cfg.burn_in, thin))
}

/// Runs `chains` independent chains on streams `rng.stream + k` in parallel
/// and concatenates their draws in stream order.
pub fn sample_horseshoe_chains(
    data: &Dataset,
    cfg: &HorseshoeConfig,
    rng: &RngConfig,
    chains: usize,
) -> Result<PosteriorDraws> {
    let runs: Vec<Result<PosteriorDraws>> = (0..chains.max(1) as u64)
        .into_par_iter()
        .map(|k| sample_horseshoe(data, cfg, &rng.with_stream(rng.stream + k)))
        .collect();
    let runs: Vec<PosteriorDraws> = runs.into_iter().collect::<Result<_>>()?;
    PosteriorDraws::concat(&runs)
}

/// Keep/zero decision from posterior mean shrinkage weights: keep `j` iff
/// `1 - E(κ_j) >= 1/2`.
pub fn shrinkage_keep(mean_kappa: &[f64]) -> Vec<bool> {
    mean_kappa.iter().map(|k| 1.0 - k >= 0.5).collect()
}

/// Hard-thresholding rule on horseshoe draws with retained local scales.
pub fn horseshoe_threshold(draws: &PosteriorDraws) -> Result<Vec<bool>> {
    let scales = draws.local_scales().ok_or_else(|| {
        DssError::UnsupportedPrior(format!("draws from '{}' carry no local scales", draws.prior))
    })?;
    let s = scales.nrows() as f64;
    let mean_kappa: Vec<f64> = (0..scales.ncols())
        .map(|j| scales.column(j).iter().map(|l| 1.0 / (1.0 + l * l)).sum::<f64>() / s)
        .collect();
    Ok(shrinkage_keep(&mean_kappa))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_rule_boundaries() {
        assert_eq!(shrinkage_keep(&[0.3, 0.7, 0.5]), vec![true, false, true]);
    }

    #[test]
    fn threshold_requires_local_scales() {
        let d = PosteriorDraws::new(DMatrix::zeros(2, 1), DVector::from_element(2, 1.0), PriorTag::GPrior).unwrap();
        assert!(matches!(horseshoe_threshold(&d), Err(DssError::UnsupportedPrior(_))));
    }

    #[test]
    fn kappa_lies_in_unit_interval() {
        let st = HorseshoeState::initial(3, None);
        assert!(st.kappa().iter().all(|k| *k > 0.0 && *k < 1.0));
    }
}

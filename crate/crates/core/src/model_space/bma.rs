// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use super::marginal::{GPosteriorGrid, MarginalContext, SubsetFit};
use super::prior::{GFamily, PriorConfig};
use super::ModelSpacePosterior;
use crate::data::{Dataset, RngConfig};
use crate::error::{DssError, Result};
use crate::posterior::{PosteriorDraws, PriorTag};

fn check_space(data: &Dataset, space: &ModelSpacePosterior) -> Result<Vec<f64>> {
    if space.p() != data.p() {
        return Err(DssError::Argument(format!(
            "model space has p = {} but the data have p = {}",
            space.p(),
            data.p()
        )));
    }
    let total: f64 = space.records().iter().map(|r| r.weight).sum();
    if space.records().is_empty() || !(total > 0.0) {
        return Err(DssError::EmptySpace("model space carries no posterior weight".into()));
    }
    Ok(space.probabilities())
}

/// Exact model-averaged posterior mean `Σ_φ E(β | M_φ, Y) p(M_φ | Y)`.
/// Sampled spaces use visit frequencies as model weights.
pub fn model_averaged_mean(data: &Dataset, space: &ModelSpacePosterior, prior: &PriorConfig) -> Result<Vec<f64>> {
    let probs = check_space(data, space)?;
    let ctx = MarginalContext::new(data);
    let parts: Vec<Result<Vec<(usize, f64)>>> = space
        .records()
        .par_iter()
        .zip(probs.par_iter())
        .map(|(r, &w)| {
            if w == 0.0 || r.model.cardinality() == 0 {
                return Ok(Vec::new());
            }
            let fit = ctx.fit(&r.model)?;
            let sh = ctx.mean_shrinkage(&fit, prior)?;
            Ok(fit.support.iter().zip(fit.beta_hat.iter()).map(|(&j, b)| (j, w * sh * b)).collect())
        })
        .collect();
    let mut mean = vec![0.0; data.p()];
    for part in parts {
        for (j, v) in part? {
            mean[j] += v;
        }
    }
    Ok(mean)
}

struct Conditional {
    fit: SubsetFit,
    grid: Option<GPosteriorGrid>,
}

/// Draws `(β, σ²)` from the model-averaged posterior: a model is drawn in
/// proportion to its probability, then `(β_φ, σ²)` from that model's
/// conjugate posterior. Excluded coefficients are exactly zero.
pub fn bma_draws(
    data: &Dataset,
    space: &ModelSpacePosterior,
    prior: &PriorConfig,
    draws: usize,
    rng: &RngConfig,
) -> Result<PosteriorDraws> {
    let probs = check_space(data, space)?;
    if draws == 0 {
        return Err(DssError::Argument("draw count must be positive".into()));
    }
    if draws < 100 {
        warn!("only {draws} model-averaged draws requested; summaries need at least 100");
    }
    let ctx = MarginalContext::new(data);
    let n = data.n() as f64;
    let p = data.p();
    let mut rng = rng.rng();
    let index = WeightedIndex::new(&probs).map_err(|e| DssError::EmptySpace(e.to_string()))?;
    let chosen: Vec<usize> = (0..draws).map(|_| index.sample(&mut rng)).collect();

    let mut unique: BTreeMap<usize, ()> = BTreeMap::new();
    for &i in &chosen {
        unique.insert(i, ());
    }
    let keys: Vec<usize> = unique.into_keys().collect();
    let built: Vec<Result<(usize, Conditional)>> = keys
        .par_iter()
        .map(|&i| {
            let fit = ctx.fit(&space.records()[i].model)?;
            let grid = match prior.family {
                GFamily::Hyper(h) if fit.k() > 0 => Some(ctx.g_grid(&fit, &h)),
                _ => None,
            };
            Ok((i, Conditional { fit, grid }))
        })
        .collect();
    let mut cond = BTreeMap::new();
    for b in built {
        let (i, c) = b?;
        cond.insert(i, c);
    }

    let mut beta = DMatrix::zeros(draws, p);
    let mut sigma2 = DVector::zeros(draws);
    for (s, i) in chosen.iter().enumerate() {
        let c = &cond[i];
        let k = c.fit.k();
        let g = match (prior.family, &c.grid) {
            (GFamily::Fixed { g }, _) => g,
            (_, Some(grid)) => grid.sample(&mut rng),
            _ => 0.0,
        };
        let sh = g / (1.0 + g);
        let rate = 0.5 * ctx.tss() * (1.0 - sh * c.fit.r2);
        let gamma = Gamma::new(0.5 * (n - 1.0), 1.0 / rate.max(f64::MIN_POSITIVE))
            .map_err(|e| DssError::SamplerFailure {
                iteration: s,
                message: e.to_string(),
            })?;
        let s2 = 1.0 / gamma.sample(&mut rng);
        sigma2[s] = s2;
        if k == 0 {
            continue;
        }
        let z = DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal));
        let chol = c.fit.chol.as_ref().expect("non-empty model has a factor");
        let dev = chol
            .l()
            .transpose()
            .solve_upper_triangular(&z)
            .ok_or_else(|| DssError::SamplerFailure {
                iteration: s,
                message: "triangular solve failed".into(),
            })?;
        let scale = (sh * s2).sqrt();
        for (t, &j) in c.fit.support.iter().enumerate() {
            beta[(s, j)] = sh * c.fit.beta_hat[t] + scale * dev[t];
        }
    }
    let tag = match prior.family {
        GFamily::Fixed { .. } => PriorTag::GPrior,
        GFamily::Hyper(_) => PriorTag::HyperG,
    };
    PosteriorDraws::new(beta, sigma2, tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_space::prior::ModelPrior;
    use crate::model_space::{ModelId, ModelRecord, SpaceMode};

    fn toy() -> Dataset {
        let mut rng = RngConfig::new(3).rng();
        let x = DMatrix::from_fn(40, 3, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(40, |i, _| x[(i, 1)] + rng.sample::<f64, _>(StandardNormal));
        Dataset::standardize(x, y, vec!["a".into(), "b".into(), "c".into()], "y").unwrap()
    }

    fn single(model: ModelId) -> ModelSpacePosterior {
        let rec = ModelRecord {
            model,
            log_marginal: 0.0,
            log_prior: 0.0,
            weight: 1.0,
        };
        ModelSpacePosterior::new(SpaceMode::Exact, 3, vec![rec], vec![0.0, 1.0, 0.0])
    }

    #[test]
    fn single_model_space_gives_fixed_support_with_exact_zeros() {
        let d = toy();
        let space = single(ModelId::from_support(3, &[1]));
        let prior = PriorConfig::fixed_g(40.0, ModelPrior::Uniform);
        let dr = bma_draws(&d, &space, &prior, 200, &RngConfig::new(1)).unwrap();
        for s in 0..dr.len() {
            assert_eq!(dr.beta()[(s, 0)], 0.0);
            assert_eq!(dr.beta()[(s, 2)], 0.0);
            assert_ne!(dr.beta()[(s, 1)], 0.0);
        }
    }

    #[test]
    fn empty_sampled_space_is_rejected() {
        let d = toy();
        let space = ModelSpacePosterior::new(SpaceMode::Sampled { sweeps: 0 }, 3, vec![], vec![0.0; 3]);
        let prior = PriorConfig::fixed_g(40.0, ModelPrior::Uniform);
        let err = bma_draws(&d, &space, &prior, 10, &RngConfig::new(1)).unwrap_err();
        assert!(matches!(err, DssError::EmptySpace(_)));
    }
}

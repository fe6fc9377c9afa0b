// SPDX-License-Identifier: Apache-2.0

use log::warn;
use rayon::prelude::*;

use super::marginal::MarginalContext;
use super::prior::PriorConfig;
use super::{ModelId, ModelRecord, ModelSpacePosterior, SpaceMode};
use crate::data::Dataset;
use crate::error::{DssError, Result};
use crate::linalg::{log_sum_exp, neumaier_sum};

/// Largest `p` accepted for exhaustive enumeration.
pub const MAX_ENUMERATION_P: usize = 25;

/// Exact posterior over every admissible model. Models above the size cap
/// `min(p, n-1, M)` get zero prior mass; models whose design is singular
/// are dropped with a warning.
pub fn enumerate_models(data: &Dataset, prior: &PriorConfig) -> Result<ModelSpacePosterior> {
    let p = data.p();
    if p > MAX_ENUMERATION_P {
        return Err(DssError::Budget(format!(
            "p = {p} exceeds the enumeration limit of {MAX_ENUMERATION_P}; use gibbs_search instead"
        )));
    }
    prior.validate(p)?;
    let ctx = MarginalContext::new(data);
    let cap = prior.max_size(data.n(), p);

    let evaluated: Vec<Result<Option<ModelRecord>>> = (0u64..1u64 << p)
        .into_par_iter()
        .filter(|mask| mask.count_ones() as usize <= cap)
        .map(|mask| {
            let model = ModelId::from_mask(p, mask);
            match ctx.log_marginal(&model, prior) {
                Ok(lm) => Ok(Some(ModelRecord {
                    log_prior: prior.model_prior.log_mass(model.cardinality(), p),
                    model,
                    log_marginal: lm,
                    weight: 0.0,
                })),
                Err(DssError::SingularDesign(_)) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();

    let mut records = Vec::with_capacity(evaluated.len());
    let mut dropped = 0usize;
    for r in evaluated {
        match r? {
            Some(rec) => records.push(rec),
            None => dropped += 1,
        }
    }
    if dropped > 0 {
        warn!("{dropped} models with singular designs were excluded from enumeration");
    }
    let log_post: Vec<f64> = records.iter().map(|r| r.log_marginal + r.log_prior).collect();
    let lse = log_sum_exp(&log_post);
    for (r, lp) in records.iter_mut().zip(&log_post) {
        r.weight = (lp - lse).exp();
    }
    let inclusion = (0..p)
        .map(|j| {
            neumaier_sum(records.iter().filter(|r| r.model.contains(j)).map(|r| r.weight)).clamp(0.0, 1.0)
        })
        .collect();
    Ok(ModelSpacePosterior::new(SpaceMode::Exact, p, records, inclusion))
}

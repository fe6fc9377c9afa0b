// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::marginal::MarginalContext;
use super::prior::PriorConfig;
use super::{ModelId, ModelRecord, ModelSpacePosterior, SpaceMode};
use crate::data::{Dataset, RngConfig};
use crate::error::{DssError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsConfig {
    /// Total sweeps, each updating every `φ_j` once.
    pub sweeps: usize,
    /// Discarded leading sweeps; defaults to `min(1000, sweeps / 10)`.
    pub burn_in: Option<usize>,
}

impl GibbsConfig {
    pub fn new(sweeps: usize) -> Self {
        GibbsConfig { sweeps, burn_in: None }
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in.unwrap_or((self.sweeps / 10).min(1000))
    }
}

struct Scorer<'a> {
    ctx: MarginalContext,
    prior: &'a PriorConfig,
    cap: usize,
    cache: HashMap<ModelId, (f64, f64)>,
}

impl Scorer<'_> {
    /// `(log marginal, log prior)`; inadmissible models score `-inf`.
    fn score(&mut self, m: &ModelId) -> Result<(f64, f64)> {
        if m.cardinality() > self.cap {
            return Ok((f64::NEG_INFINITY, f64::NEG_INFINITY));
        }
        if let Some(v) = self.cache.get(m) {
            return Ok(*v);
        }
        let lm = match self.ctx.log_marginal(m, self.prior) {
            Ok(v) => v,
            Err(DssError::SingularDesign(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        let v = (lm, self.prior.model_prior.log_mass(m.cardinality(), m.p()));
        self.cache.insert(m.clone(), v);
        Ok(v)
    }
}

/// Systematic-scan Gibbs sampler over inclusion indicators, started from
/// the null model. Visit counts are recorded once per post-burn-in sweep.
pub fn gibbs_search(
    data: &Dataset,
    prior: &PriorConfig,
    cfg: &GibbsConfig,
    rng: &RngConfig,
) -> Result<ModelSpacePosterior> {
    if cfg.sweeps < 1000 {
        return Err(DssError::Argument(format!(
            "gibbs_search needs at least 1000 sweeps, got {}",
            cfg.sweeps
        )));
    }
    let burn_in = cfg.burn_in();
    if burn_in >= cfg.sweeps {
        return Err(DssError::Argument("burn-in must be shorter than the run".into()));
    }
    let p = data.p();
    prior.validate(p)?;
    let mut scorer = Scorer {
        ctx: MarginalContext::new(data),
        prior,
        cap: prior.max_size(data.n(), p),
        cache: HashMap::new(),
    };
    let mut rng = rng.rng();
    let mut current = ModelId::empty(p);
    let mut visits: BTreeMap<ModelId, u64> = BTreeMap::new();
    let mut hits = vec![0u64; p];

    for sweep in 0..cfg.sweeps {
        for j in 0..p {
            let on = current.with(j, true);
            let off = current.with(j, false);
            let (lm1, lp1) = scorer.score(&on)?;
            let (lm0, lp0) = scorer.score(&off)?;
            let (a, b) = (lm1 + lp1, lm0 + lp0);
            let prob_on = if a == f64::NEG_INFINITY {
                0.0
            } else if b == f64::NEG_INFINITY {
                1.0
            } else {
                1.0 / (1.0 + (b - a).exp())
            };
            let u: f64 = rng.random();
            current = if u < prob_on { on } else { off };
        }
        if sweep >= burn_in {
            *visits.entry(current.clone()).or_insert(0) += 1;
            for j in current.support() {
                hits[j] += 1;
            }
        }
    }

    let kept = (cfg.sweeps - burn_in) as f64;
    let mut records: Vec<ModelRecord> = visits
        .into_iter()
        .map(|(model, count)| {
            let (lm, lp) = scorer.cache.get(&model).copied().unwrap_or((0.0, 0.0));
            ModelRecord {
                model,
                log_marginal: lm,
                log_prior: lp,
                weight: count as f64,
            }
        })
        .collect();
    records.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.model.cmp(&b.model)));
    let inclusion = hits.iter().map(|&h| h as f64 / kept).collect();
    Ok(ModelSpacePosterior::new(
        SpaceMode::Sampled {
            sweeps: cfg.sweeps - burn_in,
        },
        p,
        records,
        inclusion,
    ))
}

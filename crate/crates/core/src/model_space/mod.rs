// SPDX-License-Identifier: Apache-2.0

//! Posterior over the space of `2^p` linear models under g-type priors.

mod bma;
mod enumerate;
mod gibbs;
mod marginal;
mod prior;

use std::fmt;
use std::io::Write;

pub use bma::{bma_draws, model_averaged_mean};
pub use enumerate::{enumerate_models, MAX_ENUMERATION_P};
pub use gibbs::{gibbs_search, GibbsConfig};
pub use marginal::{log_bf_fixed_g, log_bf_hyper_g, log_marginal_likelihood, MarginalContext, SubsetFit};
pub use prior::{GFamily, HyperG, HyperGPreset, ModelPrior, PriorConfig};

use crate::error::{DssError, Result};

/// Inclusion vector `φ ∈ {0,1}^p`, packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelId {
    words: Vec<u64>,
    p: usize,
}

impl ModelId {
    pub fn empty(p: usize) -> Self {
        ModelId {
            words: vec![0; p.div_ceil(64).max(1)],
            p,
        }
    }

    pub fn from_support(p: usize, support: &[usize]) -> Self {
        let mut m = Self::empty(p);
        for &j in support {
            m.set(j, true);
        }
        m
    }

    /// Bit `j` of `mask` includes predictor `j` (only for `p <= 64`).
    pub fn from_mask(p: usize, mask: u64) -> Self {
        let mut m = Self::empty(p);
        m.words[0] = mask;
        m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn contains(&self, j: usize) -> bool {
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, j: usize, on: bool) {
        assert!(j < self.p, "index {j} out of range for p = {}", self.p);
        if on {
            self.words[j / 64] |= 1 << (j % 64);
        } else {
            self.words[j / 64] &= !(1 << (j % 64));
        }
    }

    pub fn with(&self, j: usize, on: bool) -> Self {
        let mut m = self.clone();
        m.set(j, on);
        m
    }

    /// Number of included predictors `p_φ`.
    pub fn cardinality(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.p).filter(|&j| self.contains(j)).collect()
    }

    /// `p` characters, predictor 1 first.
    pub fn bitstring(&self) -> String {
        (0..self.p).map(|j| if self.contains(j) { '1' } else { '0' }).collect()
    }

    pub fn parse_bitstring(s: &str) -> Result<Self> {
        let mut m = Self::empty(s.len());
        for (j, ch) in s.chars().enumerate() {
            match ch {
                '1' => m.set(j, true),
                '0' => {}
                _ => return Err(DssError::Parse {
                    row: 0,
                    column: "model".into(),
                    message: format!("invalid model bitstring '{s}'"),
                }),
            }
        }
        Ok(m)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceMode {
    Exact,
    Sampled { sweeps: usize },
}

/// One model's entry. `weight` is the posterior probability in exact mode
/// and the visit count in sampled mode.
#[derive(Debug, Clone)]
pub struct ModelRecord {
    pub model: ModelId,
    pub log_marginal: f64,
    pub log_prior: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct ModelSpacePosterior {
    mode: SpaceMode,
    p: usize,
    records: Vec<ModelRecord>,
    inclusion: Vec<f64>,
}

impl ModelSpacePosterior {
    pub(crate) fn new(mode: SpaceMode, p: usize, records: Vec<ModelRecord>, inclusion: Vec<f64>) -> Self {
        ModelSpacePosterior {
            mode,
            p,
            records,
            inclusion,
        }
    }

    pub fn mode(&self) -> SpaceMode {
        self.mode
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn records(&self) -> &[ModelRecord] {
        &self.records
    }

    /// Marginal inclusion probabilities.
    pub fn inclusion(&self) -> &[f64] {
        &self.inclusion
    }

    fn total_weight(&self) -> f64 {
        crate::linalg::neumaier_sum(self.records.iter().map(|r| r.weight))
    }

    /// Posterior probability (exact) or visit frequency (sampled) of each
    /// record, in record order.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total_weight();
        self.records.iter().map(|r| r.weight / total).collect()
    }

    /// Highest posterior probability model (largest weight; ties go to the
    /// first record).
    pub fn hpm(&self) -> Result<ModelId> {
        let mut best: Option<&ModelRecord> = None;
        for r in &self.records {
            if best.is_none_or(|b| r.weight > b.weight) {
                best = Some(r);
            }
        }
        best.map(|r| r.model.clone())
            .ok_or_else(|| DssError::EmptySpace("no models recorded".into()))
    }

    /// Median probability model: predictors with inclusion strictly above 1/2.
    pub fn mpm(&self) -> ModelId {
        median_probability_model(&self.inclusion)
    }

    /// One row per model: `model,cardinality,log_marginal,log_prior,probability`
    /// (exact) or `...,count` (sampled).
    pub fn write_models_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let last = match self.mode {
            SpaceMode::Exact => "probability",
            SpaceMode::Sampled { .. } => "count",
        };
        w.write_record(["model", "cardinality", "log_marginal", "log_prior", last])?;
        for r in &self.records {
            w.write_record([
                r.model.bitstring(),
                r.model.cardinality().to_string(),
                format!("{}", r.log_marginal),
                format!("{}", r.log_prior),
                format!("{}", r.weight),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_inclusion_csv<W: Write>(&self, writer: W, names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["name", "inclusion"])?;
        for (name, v) in names.iter().zip(&self.inclusion) {
            w.write_record([name.clone(), format!("{v}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a models CSV written by [`write_models_csv`](Self::write_models_csv).
    pub fn read_models_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let sampled = match header.get(4).map(String::as_str) {
            Some("probability") => false,
            Some("count") => true,
            _ => return Err(DssError::Schema("unrecognised models CSV header".into())),
        };
        let mut records = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |c: usize| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| DssError::Parse {
                        row: r + 1,
                        column: header[c].clone(),
                        message: "not numeric".into(),
                    })
            };
            records.push(ModelRecord {
                model: ModelId::parse_bitstring(rec.get(0).unwrap_or(""))?,
                log_marginal: num(2)?,
                log_prior: num(3)?,
                weight: num(4)?,
            });
        }
        let p = records
            .first()
            .map(|r| r.model.p())
            .ok_or_else(|| DssError::EmptySpace("models CSV has no rows".into()))?;
        let total: f64 = records.iter().map(|r| r.weight).sum();
        let inclusion = (0..p)
            .map(|j| {
                records
                    .iter()
                    .filter(|r| r.model.contains(j))
                    .map(|r| r.weight)
                    .sum::<f64>()
                    / total
            })
            .collect();
        let mode = if sampled {
            SpaceMode::Sampled {
                sweeps: total as usize,
            }
        } else {
            SpaceMode::Exact
        };
        Ok(ModelSpacePosterior::new(mode, p, records, inclusion))
    }
}

pub fn extract_hpm(space: &ModelSpacePosterior) -> Result<ModelId> {
    space.hpm()
}

pub fn extract_mpm(space: &ModelSpacePosterior) -> ModelId {
    space.mpm()
}

/// `{j : inclusion_j > 1/2}`; exactly 1/2 is excluded.
pub fn median_probability_model(inclusion: &[f64]) -> ModelId {
    let support: Vec<usize> = inclusion
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.5)
        .map(|(j, _)| j)
        .collect();
    ModelId::from_support(inclusion.len(), &support)
}

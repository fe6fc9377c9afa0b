// SPDX-License-Identifier: Apache-2.0

//! Posterior variation explained `ρ²_λ` and excess error `ψ_λ` of each
//! sparsified predictor, drawwise.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::path::{PathEntry, SolutionPath};
use crate::data::PredictionDesign;
use crate::error::{DssError, Result};
use crate::linalg::{equal_tailed_interval, mean};
use crate::posterior::PosteriorDraws;

/// Fewest draws for which interval summaries are computed.
pub const MIN_DRAWS: usize = 100;

fn check(draws: &PosteriorDraws, design: &PredictionDesign, gamma: &[f64]) -> Result<()> {
    if draws.p() != design.cols() || gamma.len() != design.cols() {
        return Err(DssError::Argument(format!(
            "draws have p = {}, design has {} columns, action has {}",
            draws.p(),
            design.cols(),
            gamma.len()
        )));
    }
    Ok(())
}

/// `Xβ(s)` for every draw, one row per draw.
fn fitted(draws: &PosteriorDraws, design: &PredictionDesign) -> DMatrix<f64> {
    draws.beta() * design.x().transpose()
}

/// Per draw `(A, G, σ²)` with `A = ñ⁻¹‖Xβ(s)‖²` and `G = ñ⁻¹‖Xβ(s) − Xγ‖²`.
fn energies(fit: &DMatrix<f64>, sigma2: &DVector<f64>, design: &PredictionDesign, gamma: &[f64]) -> Vec<(f64, f64, f64)> {
    let n = design.rows() as f64;
    let xg = design.x() * DVector::from_column_slice(gamma);
    (0..fit.nrows())
        .into_par_iter()
        .map(|s| {
            let row = fit.row(s);
            let mut a = 0.0;
            let mut g = 0.0;
            for i in 0..row.len() {
                a += row[i] * row[i];
                let d = row[i] - xg[i];
                g += d * d;
            }
            (a / n, g / n, sigma2[s])
        })
        .collect()
}

fn rho(a: f64, g: f64, s2: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a / (a + s2 + g)
    }
}

/// `sqrt(G + σ²) − σ`, evaluated as `G / (sqrt(G + σ²) + σ)`.
fn psi(g: f64, s2: f64) -> f64 {
    g / ((g + s2).sqrt() + s2.sqrt())
}

pub fn rho_draws(entry: &PathEntry, draws: &PosteriorDraws, design: &PredictionDesign) -> Result<Vec<f64>> {
    check(draws, design, &entry.gamma)?;
    let e = energies(&fitted(draws, design), draws.sigma2(), design, &entry.gamma);
    Ok(e.iter().map(|&(a, g, s2)| rho(a, g, s2)).collect())
}

pub fn psi_draws(entry: &PathEntry, draws: &PosteriorDraws, design: &PredictionDesign) -> Result<Vec<f64>> {
    check(draws, design, &entry.gamma)?;
    let e = energies(&fitted(draws, design), draws.sigma2(), design, &entry.gamma);
    Ok(e.iter().map(|&(_, g, s2)| psi(g, s2)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub cardinality: usize,
    pub lambda: f64,
    pub support: Vec<usize>,
    pub gamma: Vec<f64>,
    pub rho_mean: f64,
    pub rho_lo: f64,
    pub rho_hi: f64,
    pub psi_mean: f64,
    pub psi_lo: f64,
    pub psi_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsitySummary {
    pub rows: Vec<SummaryRow>,
    /// `E(ρ²_0)`, the unsparsified variation explained.
    pub benchmark: f64,
    pub benchmark_interval: (f64, f64),
    pub level: f64,
}

/// Summaries for the first path entry at each cardinality.
pub fn summarize(path: &SolutionPath, draws: &PosteriorDraws, design: &PredictionDesign, level: f64) -> Result<SparsitySummary> {
    if draws.len() < MIN_DRAWS {
        return Err(DssError::InsufficientDraws {
            have: draws.len(),
            need: MIN_DRAWS,
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(DssError::Argument(format!("interval level must lie in (0, 1), got {level}")));
    }
    if path.entries.is_empty() {
        return Err(DssError::Argument("solution path is empty".into()));
    }
    let fit = fitted(draws, design);
    let zero = vec![0.0; design.cols()];
    check(draws, design, &zero)?;
    let base: Vec<f64> = (0..draws.len())
        .map(|s| {
            let a = fit.row(s).norm_squared() / design.rows() as f64;
            rho(a, 0.0, draws.sigma2()[s])
        })
        .collect();
    let benchmark = mean(&base);
    let benchmark_interval = equal_tailed_interval(&base, level);

    let mut rows = Vec::new();
    for e in path.first_per_cardinality() {
        check(draws, design, &e.gamma)?;
        let en = energies(&fit, draws.sigma2(), design, &e.gamma);
        let r: Vec<f64> = en.iter().map(|&(a, g, s2)| rho(a, g, s2)).collect();
        let s: Vec<f64> = en.iter().map(|&(_, g, s2)| psi(g, s2)).collect();
        let (rho_lo, rho_hi) = equal_tailed_interval(&r, level);
        let (psi_lo, psi_hi) = equal_tailed_interval(&s, level);
        rows.push(SummaryRow {
            cardinality: e.cardinality(),
            lambda: e.lambda,
            support: e.support.clone(),
            gamma: e.gamma.clone(),
            rho_mean: mean(&r),
            rho_lo,
            rho_hi,
            psi_mean: mean(&s),
            psi_lo,
            psi_hi,
        });
    }
    Ok(SparsitySummary {
        rows,
        benchmark,
        benchmark_interval,
        level,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub cardinality: usize,
    pub lambda: f64,
    pub support: Vec<usize>,
    pub gamma: Vec<f64>,
}

/// Smallest model whose `ρ²_λ` interval contains `E(ρ²_0)`; the largest
/// model in the summary when none does.
pub fn select_heuristic(summary: &SparsitySummary) -> Result<Selection> {
    let pick = |r: &SummaryRow| Selection {
        cardinality: r.cardinality,
        lambda: r.lambda,
        support: r.support.clone(),
        gamma: r.gamma.clone(),
    };
    let mut by_size: Vec<&SummaryRow> = summary.rows.iter().collect();
    by_size.sort_by_key(|r| r.cardinality);
    let full = by_size
        .last()
        .ok_or_else(|| DssError::Argument("summary has no rows".into()))?;
    Ok(by_size
        .iter()
        .find(|r| r.rho_lo <= summary.benchmark && summary.benchmark <= r.rho_hi)
        .map(|r| pick(r))
        .unwrap_or_else(|| pick(full)))
}

const SUMMARY_HEADER: [&str; 9] = [
    "cardinality",
    "rho_mean",
    "rho_lo",
    "rho_hi",
    "psi_mean",
    "psi_lo",
    "psi_hi",
    "benchmark",
    "lambda",
];

impl SparsitySummary {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(SUMMARY_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.cardinality.to_string(),
                format!("{}", r.rho_mean),
                format!("{}", r.rho_lo),
                format!("{}", r.rho_hi),
                format!("{}", r.psi_mean),
                format!("{}", r.psi_lo),
                format!("{}", r.psi_hi),
                format!("{}", self.benchmark),
                format!("{}", r.lambda),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a summary CSV. Supports and actions are not stored there; they
    /// are restored from `path` (matched on `λ`) when one is given.
    pub fn read_csv<R: Read>(reader: R, path: Option<&SolutionPath>) -> Result<SparsitySummary> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.iter().map(String::as_str).ne(SUMMARY_HEADER) {
            return Err(DssError::Schema(format!("summary CSV header must be {}", SUMMARY_HEADER.join(","))));
        }
        let mut rows = Vec::new();
        let mut benchmark = f64::NAN;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    s.trim().parse().map_err(|_| DssError::Parse {
                        row: i + 1,
                        column: header.get(c).cloned().unwrap_or_default(),
                        message: format!("'{s}' is not numeric"),
                    })
                })
                .collect::<Result<_>>()?;
            if v.len() != SUMMARY_HEADER.len() {
                return Err(DssError::Schema(format!("summary row {} has wrong width", i + 1)));
            }
            benchmark = v[7];
            let lambda = v[8];
            let (support, gamma) = match path.and_then(|p| p.entries.iter().find(|e| e.lambda == lambda)) {
                Some(e) => (e.support.clone(), e.gamma.clone()),
                None => (Vec::new(), Vec::new()),
            };
            rows.push(SummaryRow {
                cardinality: v[0] as usize,
                lambda,
                support,
                gamma,
                rho_mean: v[1],
                rho_lo: v[2],
                rho_hi: v[3],
                psi_mean: v[4],
                psi_lo: v[5],
                psi_hi: v[6],
            });
        }
        if rows.is_empty() {
            return Err(DssError::Schema("summary CSV has no rows".into()));
        }
        Ok(SparsitySummary {
            rows,
            benchmark,
            benchmark_interval: (f64::NAN, f64::NAN),
            level: f64::NAN,
        })
    }
}

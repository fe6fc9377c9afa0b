// SPDX-License-Identifier: Apache-2.0

//! Exact homotopy for `λ Σ_j |γ_j| / |w_j| + ñ⁻¹‖Xβ̄ − Xγ‖²`.
//!
//! With `Q = X'X/ñ` and `b = Qβ̄` the fit term is `(β̄ − γ)'Q(β̄ − γ)`, so on
//! a fixed active set `A` with signs `s` the solution is linear in `λ`:
//! `γ_A = Q_AA⁻¹ (b_A − (λ/2) π_A ∘ s_A)` with `π_j = 1/|w_j|`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};

use crate::data::PredictionDesign;
use crate::error::{DssError, Result};
use crate::linalg::{checked_cholesky, principal_submatrix, subvector};

const ZERO_WEIGHT: f64 = 1e-10;
const EVENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PathEntry {
    pub lambda: f64,
    pub gamma: Vec<f64>,
    pub support: Vec<usize>,
    pub intercept: f64,
}

impl PathEntry {
    pub fn new(lambda: f64, gamma: Vec<f64>, intercept: f64) -> Self {
        let support = gamma
            .iter()
            .enumerate()
            .filter(|(_, g)| **g != 0.0)
            .map(|(j, _)| j)
            .collect();
        PathEntry {
            lambda,
            gamma,
            support,
            intercept,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.support.len()
    }
}

/// Entries in strictly decreasing `λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPath {
    pub entries: Vec<PathEntry>,
    /// Whether entries carry a fitted intercept (logistic paths).
    pub has_intercept: bool,
}

impl SolutionPath {
    pub fn p(&self) -> usize {
        self.entries.first().map(|e| e.gamma.len()).unwrap_or(0)
    }

    /// First (largest-`λ`) entry of each cardinality, in path order.
    pub fn first_per_cardinality(&self) -> Vec<&PathEntry> {
        let mut seen = std::collections::BTreeSet::new();
        self.entries.iter().filter(|e| seen.insert(e.cardinality())).collect()
    }

    /// Solution at any `λ ≥ 0`, by linear interpolation between breakpoints
    /// (exact for a homotopy path).
    pub fn at(&self, lambda: f64) -> Option<Vec<f64>> {
        let first = self.entries.first()?;
        if lambda >= first.lambda {
            return Some(first.gamma.clone());
        }
        for w in self.entries.windows(2) {
            let (hi, lo) = (&w[0], &w[1]);
            if lambda >= lo.lambda {
                let t = (hi.lambda - lambda) / (hi.lambda - lo.lambda);
                return Some(hi.gamma.iter().zip(&lo.gamma).map(|(a, b)| a + t * (b - a)).collect());
            }
        }
        self.entries.last().map(|e| e.gamma.clone())
    }

    /// `lambda,cardinality[,intercept],<names...>`.
    pub fn write_csv<W: Write>(&self, writer: W, names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["lambda".to_string(), "cardinality".to_string()];
        if self.has_intercept {
            header.push("intercept".into());
        }
        header.extend(names.iter().cloned());
        w.write_record(&header)?;
        for e in &self.entries {
            let mut row = vec![format!("{}", e.lambda), e.cardinality().to_string()];
            if self.has_intercept {
                row.push(format!("{}", e.intercept));
            }
            row.extend(e.gamma.iter().map(|g| format!("{g}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<(SolutionPath, Vec<String>)> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.len() < 3 || header[0] != "lambda" || header[1] != "cardinality" {
            return Err(DssError::Schema("path CSV must start with 'lambda,cardinality'".into()));
        }
        let has_intercept = header[2] == "intercept";
        let offset = if has_intercept { 3 } else { 2 };
        let names = header[offset..].to_vec();
        let mut entries = Vec::new();
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != header.len() {
                return Err(DssError::Schema(format!("path row {} has wrong width", r + 1)));
            }
            let vals: Vec<f64> = rec
                .iter()
                .enumerate()
                .map(|(c, s)| {
                    s.trim().parse().map_err(|_| DssError::Parse {
                        row: r + 1,
                        column: header[c].clone(),
                        message: format!("'{s}' is not numeric"),
                    })
                })
                .collect::<Result<_>>()?;
            let intercept = if has_intercept { vals[2] } else { 0.0 };
            entries.push(PathEntry::new(vals[0], vals[offset..].to_vec(), intercept));
        }
        if entries.is_empty() {
            return Err(DssError::Schema("path CSV has no rows".into()));
        }
        Ok((SolutionPath { entries, has_intercept }, names))
    }
}

struct Problem {
    q: DMatrix<f64>,
    b: DVector<f64>,
    pi: Vec<f64>,
    eligible: Vec<bool>,
}

fn setup(beta_bar: &[f64], design: &PredictionDesign, weights: &[f64]) -> Result<Problem> {
    let p = design.cols();
    if beta_bar.len() != p || weights.len() != p {
        return Err(DssError::Argument(format!(
            "beta_bar ({}) and weights ({}) must match design width {p}",
            beta_bar.len(),
            weights.len()
        )));
    }
    if beta_bar.iter().chain(weights).any(|v| !v.is_finite()) {
        return Err(DssError::Argument("non-finite posterior mean or weight".into()));
    }
    let x = design.x();
    let q = x.transpose() * x / design.rows() as f64;
    let b = &q * DVector::from_column_slice(beta_bar);
    let eligible: Vec<bool> = weights.iter().map(|w| w.abs() >= ZERO_WEIGHT).collect();
    let pi = weights
        .iter()
        .map(|w| if w.abs() >= ZERO_WEIGHT { 1.0 / w.abs() } else { f64::INFINITY })
        .collect();
    Ok(Problem { q, b, pi, eligible })
}

/// Largest KKT violation of an entry: `|c_j − λπ_j s_j|` on the support and
/// `max(0, |c_j| − λπ_j)` elsewhere, with `c = 2(b − Qγ)`. Variables with
/// zero weight are ignored.
pub fn kkt_residual(entry: &PathEntry, beta_bar: &[f64], design: &PredictionDesign, weights: &[f64]) -> Result<f64> {
    let pr = setup(beta_bar, design, weights)?;
    let g = DVector::from_column_slice(&entry.gamma);
    let c = (&pr.b - &pr.q * g) * 2.0;
    let mut worst = 0.0f64;
    for j in 0..c.len() {
        if !pr.eligible[j] {
            if entry.gamma[j] != 0.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        let bound = entry.lambda * pr.pi[j];
        let v = if entry.gamma[j] != 0.0 {
            (c[j] - bound * entry.gamma[j].signum()).abs()
        } else {
            (c[j].abs() - bound).max(0.0)
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

/// Full piecewise-linear path of the adaptively weighted ℓ1 problem, from
/// `λ_max = max_j 2|b_j||w_j|` (where `γ = 0`) down to `λ = 0`. Every
/// breakpoint where the active set changes is an entry.
pub fn solve_path(beta_bar: &[f64], design: &PredictionDesign, weights: &[f64]) -> Result<SolutionPath> {
    let p = design.cols();
    if design.rows() < p {
        return Err(DssError::Argument(format!(
            "prediction design has {} rows for {p} predictors; augment the design with more points \
             (at least {p}) before computing the path",
            design.rows()
        )));
    }
    let pr = setup(beta_bar, design, weights)?;
    let done = |entries| SolutionPath {
        entries,
        has_intercept: false,
    };

    let mut lam = 0.0f64;
    for j in 0..p {
        if pr.eligible[j] {
            lam = lam.max(2.0 * pr.b[j].abs() / pr.pi[j]);
        }
    }
    let mut entries = vec![PathEntry::new(lam, vec![0.0; p], 0.0)];
    if lam <= 0.0 {
        return Ok(done(entries));
    }

    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut gamma = vec![0.0; p];
    // variables entering at λ_max
    for j in 0..p {
        if pr.eligible[j] && (2.0 * pr.b[j].abs() / pr.pi[j]) >= lam * (1.0 - EVENT_TOL) {
            active.push(j);
            signs.push(pr.b[j].signum());
        }
    }

    let max_steps = 20 * p + 100;
    for _ in 0..max_steps {
        let qa = principal_submatrix(&pr.q, &active);
        let chol = checked_cholesky(&qa).ok_or_else(|| {
            DssError::Solver(format!("active set {active:?} has a singular Gram matrix at λ = {lam}"))
        })?;
        let u = chol.solve(&subvector(&pr.b, &active));
        let ps = DVector::from_iterator(active.len(), active.iter().zip(&signs).map(|(&j, s)| 0.5 * pr.pi[j] * s));
        let v = chol.solve(&ps);

        // next event below the current λ
        let mut next = 0.0f64;
        let upper = lam * (1.0 - EVENT_TOL);
        let mut consider = |cand: f64| {
            if cand.is_finite() && cand > next && cand < upper {
                next = cand;
            }
        };
        for (t, _) in active.iter().enumerate() {
            if v[t] != 0.0 {
                consider(u[t] / v[t]);
            }
        }
        let mut alpha = vec![0.0; p];
        let mut slope = vec![0.0; p];
        for j in 0..p {
            if !pr.eligible[j] || active.contains(&j) {
                continue;
            }
            let mut qu = 0.0;
            let mut qv = 0.0;
            for (t, &k) in active.iter().enumerate() {
                qu += pr.q[(j, k)] * u[t];
                qv += pr.q[(j, k)] * v[t];
            }
            alpha[j] = 2.0 * (pr.b[j] - qu);
            slope[j] = 2.0 * qv;
            consider(alpha[j] / (pr.pi[j] - slope[j]));
            consider(-alpha[j] / (pr.pi[j] + slope[j]));
        }

        for (t, &j) in active.iter().enumerate() {
            gamma[j] = u[t] - next * v[t];
        }
        if next <= 0.0 {
            let g: Vec<f64> = (0..p).map(|j| if active.contains(&j) { gamma[j] } else { 0.0 }).collect();
            entries.push(PathEntry::new(0.0, g, 0.0));
            return Ok(done(entries));
        }

        // apply every event within tolerance of `next`
        let tie = next * (1.0 + 1e-9);
        let mut keep_active = Vec::with_capacity(active.len());
        let mut keep_signs = Vec::with_capacity(active.len());
        for (t, &j) in active.iter().enumerate() {
            let hit = v[t] != 0.0 && {
                let c = u[t] / v[t];
                c >= next && c <= tie
            };
            if hit {
                gamma[j] = 0.0;
            } else {
                keep_active.push(j);
                keep_signs.push(signs[t]);
            }
        }
        for j in 0..p {
            if !pr.eligible[j] || active.contains(&j) {
                continue;
            }
            let up = alpha[j] / (pr.pi[j] - slope[j]);
            let down = -alpha[j] / (pr.pi[j] + slope[j]);
            if up.is_finite() && up >= next && up <= tie && up < upper {
                keep_active.push(j);
                keep_signs.push(1.0);
            } else if down.is_finite() && down >= next && down <= tie && down < upper {
                keep_active.push(j);
                keep_signs.push(-1.0);
            }
        }
        let g: Vec<f64> = (0..p).map(|j| if active.contains(&j) { gamma[j] } else { 0.0 }).collect();
        entries.push(PathEntry::new(next, g, 0.0));
        let mut order: Vec<usize> = (0..keep_active.len()).collect();
        order.sort_by_key(|&i| keep_active[i]);
        active = order.iter().map(|&i| keep_active[i]).collect();
        signs = order.iter().map(|&i| keep_signs[i]).collect();
        lam = next;
        if active.is_empty() {
            return Err(DssError::Solver(format!("active set emptied at λ = {lam}")));
        }
    }
    Err(DssError::Solver(format!("homotopy did not terminate within {max_steps} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DesignProvenance;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_design(n: usize, p: usize, seed: u64) -> PredictionDesign {
        let mut rng = crate::data::RngConfig::new(seed).rng();
        let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap()
    }

    #[test]
    fn endpoints_are_zero_and_beta_bar() {
        let d = random_design(30, 5, 1);
        let bb = [1.0, -0.5, 0.2, 0.05, -1.5];
        let path = solve_path(&bb, &d, &bb).unwrap();
        assert!(path.entries[0].gamma.iter().all(|g| *g == 0.0));
        let last = path.entries.last().unwrap();
        assert_eq!(last.lambda, 0.0);
        for (g, b) in last.gamma.iter().zip(&bb) {
            assert!((g - b).abs() < 1e-8);
        }
        assert_eq!(path.at(path.entries[0].lambda * 2.0).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn lambdas_strictly_decrease_and_kkt_holds() {
        for seed in 0..20 {
            let d = random_design(40, 8, seed);
            let mut rng = crate::data::RngConfig::new(100 + seed).rng();
            let bb: Vec<f64> = (0..8).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let path = solve_path(&bb, &d, &bb).unwrap();
            for w in path.entries.windows(2) {
                assert!(w[0].lambda > w[1].lambda);
            }
            for e in &path.entries {
                assert!(kkt_residual(e, &bb, &d, &bb).unwrap() <= 1e-8);
            }
        }
    }

    #[test]
    fn orthonormal_design_is_weighted_soft_threshold() {
        // columns orthogonal with X'X/n = I
        let x = DMatrix::from_row_slice(4, 2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let d = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        let bb = [2.0, -0.5];
        let path = solve_path(&bb, &d, &bb).unwrap();
        for lam in [0.0, 0.1, 0.3, 1.0, 5.0, 9.0] {
            let got = path.at(lam).unwrap();
            for j in 0..2 {
                let b: f64 = bb[j];
                let want = b.signum() * (b.abs() - lam / (2.0 * b.abs())).max(0.0);
                assert!((got[j] - want).abs() < 1e-12, "λ={lam} j={j} {} vs {want}", got[j]);
            }
        }
        // larger |β̄| enters first
        assert_eq!(path.entries[1].support, vec![0]);
    }

    #[test]
    fn zero_mean_and_zero_weights() {
        let d = random_design(10, 3, 2);
        let path = solve_path(&[0.0; 3], &d, &[0.0; 3]).unwrap();
        assert_eq!(path.entries.len(), 1);
        let path = solve_path(&[1.0, 0.0, -1.0], &d, &[1.0, 0.0, -1.0]).unwrap();
        assert!(path.entries.iter().all(|e| e.gamma[1] == 0.0));
    }

    #[test]
    fn too_few_design_rows_is_refused() {
        let d = random_design(3, 5, 3);
        let err = solve_path(&[1.0; 5], &d, &[1.0; 5]).unwrap_err();
        assert!(err.to_string().contains("augment"));
    }

    #[test]
    fn csv_round_trip() {
        let d = random_design(20, 3, 4);
        let bb = [0.3, -0.7, 1.1];
        let path = solve_path(&bb, &d, &bb).unwrap();
        let mut buf = Vec::new();
        let names: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        path.write_csv(&mut buf, &names).unwrap();
        let (back, nm) = SolutionPath::read_csv(buf.as_slice()).unwrap();
        assert_eq!(nm, names);
        assert_eq!(back, path);
    }
}

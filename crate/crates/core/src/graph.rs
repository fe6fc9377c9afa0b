// SPDX-License-Identifier: Apache-2.0

//! Decoupled shrinkage and selection for Gaussian graphical models: a
//! sparse precision matrix summarizing a posterior mean covariance `Σ̄`.
//!
//! Each path point minimizes
//! `λ Σ_{i≠j} |Γ_ij| − log det Γ + tr(Σ̄ Γ)` by block coordinate descent
//! on the covariance `W = Γ⁻¹` (the graphical lasso), with the diagonal of
//! `W` held at `Σ̄_ii` because the diagonal is unpenalized.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::data::RngConfig;
use crate::error::{DssError, Result};
use crate::linalg::checked_cholesky;

pub const DUALITY_GAP_TOL: f64 = 1e-6;
const MAX_SWEEPS: usize = 1000;

/// Symmetric positive-definite posterior mean covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovSummary {
    sigma_bar: DMatrix<f64>,
}

impl CovSummary {
    pub fn new(sigma_bar: DMatrix<f64>) -> Result<Self> {
        let p = sigma_bar.nrows();
        if p == 0 || sigma_bar.ncols() != p {
            return Err(DssError::Argument("covariance summary must be square and non-empty".into()));
        }
        if sigma_bar.iter().any(|v| !v.is_finite()) {
            return Err(DssError::Argument("covariance summary has non-finite entries".into()));
        }
        let scale = sigma_bar.amax().max(1.0);
        for i in 0..p {
            for j in 0..i {
                if (sigma_bar[(i, j)] - sigma_bar[(j, i)]).abs() > 1e-10 * scale {
                    return Err(DssError::Domain(format!("covariance summary is not symmetric at ({i}, {j})")));
                }
            }
        }
        let sym = (&sigma_bar + sigma_bar.transpose()) * 0.5;
        if checked_cholesky(&sym).is_none() {
            return Err(DssError::Domain("covariance summary is not positive definite".into()));
        }
        Ok(CovSummary { sigma_bar: sym })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.sigma_bar
    }

    pub fn p(&self) -> usize {
        self.sigma_bar.nrows()
    }
}

fn log_det_pd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = checked_cholesky(m).ok_or_else(|| DssError::Domain("matrix is not positive definite".into()))?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>())
}

fn offdiag_l1(m: &DMatrix<f64>) -> f64 {
    let p = m.nrows();
    let mut s = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                s += m[(i, j)].abs();
            }
        }
    }
    s
}

/// `λ Σ_{i≠j} |Γ_ij| − log det Γ + tr(Σ̄ Γ)`.
pub fn graph_dss_objective(gamma: &DMatrix<f64>, sigma_bar: &CovSummary, lambda: f64) -> Result<f64> {
    if gamma.shape() != sigma_bar.matrix().shape() {
        return Err(DssError::Argument("Γ and Σ̄ differ in shape".into()));
    }
    let ld = log_det_pd(gamma)?;
    let tr = (sigma_bar.matrix() * gamma).trace();
    Ok(lambda * offdiag_l1(gamma) - ld + tr)
}

/// Gradient of the smooth part, `Σ̄ − Γ⁻¹`.
pub fn graph_smooth_gradient(gamma: &DMatrix<f64>, sigma_bar: &CovSummary) -> Result<DMatrix<f64>> {
    let chol = checked_cholesky(gamma).ok_or_else(|| DssError::Domain("Γ is not positive definite".into()))?;
    Ok(sigma_bar.matrix() - chol.inverse())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionPathEntry {
    pub lambda: f64,
    pub gamma: DMatrix<f64>,
    /// Nonzero off-diagonal pairs `(i, j)` with `i < j`.
    pub edges: Vec<(usize, usize)>,
    pub duality_gap: f64,
}

/// `count` log-spaced values from `max_{i≠j} |Σ̄_ij|` down to a hundredth of it.
pub fn default_graph_grid(sigma_bar: &CovSummary, count: usize) -> Vec<f64> {
    let m = sigma_bar.matrix();
    let p = m.nrows();
    let mut lmax = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                lmax = lmax.max(m[(i, j)].abs());
            }
        }
    }
    if count < 2 || lmax == 0.0 {
        return vec![lmax];
    }
    (0..count)
        .map(|k| lmax * 0.01f64.powf(k as f64 / (count - 1) as f64))
        .collect()
}

fn soft(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// Lasso `min ½ β'Vβ − s'β + λ‖β‖₁` by coordinate descent, warm-started.
fn lasso_cd(v: &DMatrix<f64>, s: &DVector<f64>, lambda: f64, beta: &mut DVector<f64>) {
    let m = s.len();
    for _ in 0..10_000 {
        let mut change = 0.0f64;
        for k in 0..m {
            let mut r = s[k];
            for l in 0..m {
                if l != k {
                    r -= v[(k, l)] * beta[l];
                }
            }
            let new = soft(r, lambda) / v[(k, k)];
            change = change.max((new - beta[k]).abs());
            beta[k] = new;
        }
        if change < 1e-13 {
            break;
        }
    }
}

fn without(m: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    m.clone().remove_row(j).remove_column(j)
}

fn column_without(m: &DMatrix<f64>, j: usize) -> DVector<f64> {
    let col: DVector<f64> = m.column(j).into_owned();
    col.remove_row(j)
}

struct Glasso {
    w: DMatrix<f64>,
    betas: Vec<DVector<f64>>,
}

impl Glasso {
    fn precision(&self) -> DMatrix<f64> {
        let p = self.w.nrows();
        let mut g = DMatrix::zeros(p, p);
        for j in 0..p {
            let b = &self.betas[j];
            let w12 = column_without(&self.w, j);
            let gjj = 1.0 / (self.w[(j, j)] - w12.dot(b));
            g[(j, j)] = gjj;
            let mut t = 0;
            for i in 0..p {
                if i != j {
                    g[(i, j)] = -b[t] * gjj;
                    t += 1;
                }
            }
        }
        // symmetrize; an entry is zero if either of its two estimates is
        let mut out = g.clone();
        for i in 0..p {
            for j in 0..i {
                let (a, b) = (g[(i, j)], g[(j, i)]);
                let v = if a == 0.0 || b == 0.0 { 0.0 } else { 0.5 * (a + b) };
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

fn duality_gap(gamma: &DMatrix<f64>, w: &DMatrix<f64>, s: &DMatrix<f64>, lambda: f64) -> f64 {
    let p = s.nrows() as f64;
    match (log_det_pd(gamma), log_det_pd(w)) {
        (Ok(lg), Ok(lw)) => -lg + (s * gamma).trace() + lambda * offdiag_l1(gamma) - lw - p,
        _ => f64::INFINITY,
    }
}

/// Graphical-lasso path over a strictly decreasing grid, warm-started from
/// the previous point. Each point stops once the duality gap is at most
/// `1e-6`.
pub fn graph_solve_path(sigma_bar: &CovSummary, grid: &[f64]) -> Result<Vec<PrecisionPathEntry>> {
    if grid.is_empty() {
        return Err(DssError::Argument("lambda grid is empty".into()));
    }
    for w in grid.windows(2) {
        if !(w[1] < w[0]) {
            return Err(DssError::Argument("lambda grid must be strictly decreasing".into()));
        }
    }
    if grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(DssError::Argument("lambda grid values must be finite and non-negative".into()));
    }
    let s = sigma_bar.matrix();
    let p = s.nrows();
    let mut state = Glasso {
        w: s.clone(),
        betas: (0..p).map(|_| DVector::zeros(p - 1)).collect(),
    };
    let mut out = Vec::with_capacity(grid.len());
    for (k, &lam) in grid.iter().enumerate() {
        if p == 1 {
            let gamma = DMatrix::from_element(1, 1, 1.0 / s[(0, 0)]);
            out.push(PrecisionPathEntry {
                lambda: lam,
                gamma,
                edges: vec![],
                duality_gap: 0.0,
            });
            continue;
        }
        let mut gap = f64::INFINITY;
        let mut gamma = DMatrix::zeros(p, p);
        for _sweep in 0..MAX_SWEEPS {
            for j in 0..p {
                let w11 = without(&state.w, j);
                let s12 = column_without(s, j);
                lasso_cd(&w11, &s12, lam, &mut state.betas[j]);
                let w12 = &w11 * &state.betas[j];
                let mut t = 0;
                for i in 0..p {
                    if i != j {
                        state.w[(i, j)] = w12[t];
                        state.w[(j, i)] = w12[t];
                        t += 1;
                    }
                }
            }
            gamma = state.precision();
            gap = duality_gap(&gamma, &state.w, s, lam);
            if gap.abs() <= DUALITY_GAP_TOL {
                break;
            }
        }
        if !(gap.abs() <= DUALITY_GAP_TOL) {
            return Err(DssError::Solver(format!(
                "graphical lasso at grid point {k} (λ = {lam}) stopped with duality gap {gap:e}"
            )));
        }
        if checked_cholesky(&gamma).is_none() {
            return Err(DssError::Solver(format!("precision at grid point {k} is not positive definite")));
        }
        let mut edges = Vec::new();
        for i in 0..p {
            for j in i + 1..p {
                if gamma[(i, j)] != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        out.push(PrecisionPathEntry {
            lambda: lam,
            gamma,
            edges,
            duality_gap: gap,
        });
    }
    let mut last = usize::MAX;
    for e in &out {
        if e.edges.len() < last && last != usize::MAX {
            log::warn!("edge count fell from {last} to {} as λ decreased to {}", e.edges.len(), e.lambda);
        }
        last = e.edges.len();
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CovarianceDraws {
    pub draws: Vec<DMatrix<f64>>,
    pub mean: DMatrix<f64>,
}

/// Conjugate inverse-Wishart posterior for the covariance of centered data:
/// prior `IW(p + 2, I)`, posterior `IW(p + 2 + n, I + X'X)`. Each draw
/// inverts a Bartlett-decomposition Wishart draw of the precision.
pub fn sample_covariance_posterior(x: &DMatrix<f64>, draws: usize, rng: &RngConfig) -> Result<CovarianceDraws> {
    let (n, p) = (x.nrows(), x.ncols());
    if n <= p {
        return Err(DssError::Argument(format!(
            "conjugate covariance posterior needs n > p (n = {n}, p = {p}); supply Σ̄ externally instead"
        )));
    }
    if draws == 0 {
        return Err(DssError::Argument("draw count must be positive".into()));
    }
    let mut xc = x.clone();
    for j in 0..p {
        let m = xc.column(j).mean();
        xc.column_mut(j).add_scalar_mut(-m);
    }
    let nu = (p + 2 + n) as f64;
    let psi = DMatrix::identity(p, p) + xc.transpose() * &xc;
    let psi_inv = checked_cholesky(&psi)
        .ok_or_else(|| DssError::Domain("posterior scale is not positive definite".into()))?
        .inverse();
    let l = checked_cholesky(&psi_inv)
        .ok_or_else(|| DssError::Domain("posterior scale is not positive definite".into()))?
        .l();
    let mut rng = rng.rng();
    let chis: Vec<ChiSquared<f64>> = (0..p)
        .map(|i| ChiSquared::new(nu - i as f64).expect("positive degrees of freedom"))
        .collect();
    let mut out = Vec::with_capacity(draws);
    let mut mean = DMatrix::zeros(p, p);
    for _ in 0..draws {
        let mut a = DMatrix::zeros(p, p);
        for i in 0..p {
            a[(i, i)] = chis[i].sample(&mut rng).sqrt();
            for j in 0..i {
                a[(i, j)] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        let la = &l * a;
        let prec = &la * la.transpose();
        let sigma = checked_cholesky(&prec)
            .ok_or_else(|| DssError::SamplerFailure {
                iteration: out.len(),
                message: "Wishart draw is singular".into(),
            })?
            .inverse();
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        mean += &sigma;
        out.push(sigma);
    }
    mean /= draws as f64;
    if draws == 1 {
        mean = out[0].clone();
    }
    Ok(CovarianceDraws { draws: out, mean })
}

/// Writes a labeled `p × p` matrix: header `name,<names...>`, one row per
/// variable.
pub fn write_matrix_csv<W: Write>(writer: W, names: &[String], m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["name".to_string()];
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (i, name) in names.iter().enumerate() {
        let mut row = vec![name.clone()];
        row.extend((0..m.ncols()).map(|j| format!("{}", m[(i, j)])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(reader: R) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header.first().map(String::as_str) != Some("name") || header.len() < 2 {
        return Err(DssError::Schema("matrix CSV must start with a 'name' column".into()));
    }
    let names = header[1..].to_vec();
    let p = names.len();
    let mut vals = Vec::with_capacity(p * p);
    let mut rows = 0;
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != p + 1 {
            return Err(DssError::Schema(format!("matrix row {} has wrong width", r + 1)));
        }
        for (c, cell) in rec.iter().enumerate().skip(1) {
            vals.push(cell.trim().parse::<f64>().map_err(|_| DssError::Parse {
                row: r + 1,
                column: header[c].clone(),
                message: format!("'{cell}' is not numeric"),
            })?);
        }
        rows += 1;
    }
    if rows != p {
        return Err(DssError::Schema(format!("matrix CSV has {rows} rows for {p} columns")));
    }
    Ok((names, DMatrix::from_row_slice(p, p, &vals)))
}

/// Edge list `lambda,i,j,gamma` over a path, with variable names.
pub fn write_edges_csv<W: Write>(writer: W, names: &[String], path: &[PrecisionPathEntry]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["lambda", "i", "j", "gamma"])?;
    for e in path {
        for &(i, j) in &e.edges {
            w.write_record([
                format!("{}", e.lambda),
                names[i].clone(),
                names[j].clone(),
                format!("{}", e.gamma[(i, j)]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

// SPDX-License-Identifier: Apache-2.0

//! Decoupled shrinkage and selection for logistic regression.
//!
//! The sparse action minimizes
//! `λ‖γ‖₁ + ñ⁻¹ Σ_i (log(1 + exp(η_i)) − π̄_i η_i)`, `η_i = γ_0 + X_i γ`,
//! where `π̄_i` is the posterior mean success probability at design row `i`
//! and the intercept `γ_0` is unpenalized.

use log::warn;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::{PredictionDesign, RngConfig};
use crate::dss::{PathEntry, SolutionPath, SparsitySummary, SummaryRow, MIN_DRAWS};
use crate::error::{DssError, Result};
use crate::linalg::{checked_cholesky, equal_tailed_interval, mean, neumaier_sum};
use crate::posterior::{PosteriorDraws, PriorTag};

const PI_FLOOR: f64 = 1e-8;
pub const KKT_TOL: f64 = 1e-7;

pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Posterior mean probabilities `π̄` at the design rows, clamped to
/// `[1e-8, 1 − 1e-8]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityField {
    pi_bar: Vec<f64>,
}

impl ProbabilityField {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(DssError::Argument("probability field is empty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
            return Err(DssError::Argument("probabilities must lie in [0, 1]".into()));
        }
        let pi_bar = values.iter().map(|v| v.clamp(PI_FLOOR, 1.0 - PI_FLOOR)).collect();
        Ok(ProbabilityField { pi_bar })
    }

    /// Averages `logistic(γ_0(s) + X β(s))` over draws.
    pub fn from_draws(draws: &PosteriorDraws, design: &PredictionDesign) -> Result<Self> {
        let probs = draw_probabilities(draws, design)?;
        let n = design.rows();
        let avg: Vec<f64> = (0..n)
            .map(|i| neumaier_sum(probs.iter().map(|row| row[i])) / probs.len() as f64)
            .collect();
        Self::new(&avg)
    }

    pub fn values(&self) -> &[f64] {
        &self.pi_bar
    }

    pub fn len(&self) -> usize {
        self.pi_bar.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi_bar.is_empty()
    }
}

fn linear_predictor(design: &PredictionDesign, gamma: &[f64], intercept: f64) -> DVector<f64> {
    (design.x() * DVector::from_column_slice(gamma)).add_scalar(intercept)
}

fn check_dims(design: &PredictionDesign, pi: &ProbabilityField, gamma: &[f64]) -> Result<()> {
    if pi.len() != design.rows() || gamma.len() != design.cols() {
        return Err(DssError::Argument(format!(
            "design is {}×{}, probabilities {}, action {}",
            design.rows(),
            design.cols(),
            pi.len(),
            gamma.len()
        )));
    }
    Ok(())
}

/// Smooth part `ñ⁻¹ Σ_i (softplus(η_i) − π̄_i η_i)`.
fn smooth(eta: &DVector<f64>, pi: &[f64]) -> f64 {
    neumaier_sum(eta.iter().zip(pi).map(|(e, p)| softplus(*e) - p * e)) / eta.len() as f64
}

/// `λ‖γ‖₁ + ñ⁻¹ Σ_i (log(1 + exp(η_i)) − π̄_i η_i)`.
pub fn logistic_dss_objective(
    gamma: &[f64],
    intercept: f64,
    design: &PredictionDesign,
    pi: &ProbabilityField,
    lambda: f64,
) -> Result<f64> {
    check_dims(design, pi, gamma)?;
    let eta = linear_predictor(design, gamma, intercept);
    Ok(lambda * gamma.iter().map(|g| g.abs()).sum::<f64>() + smooth(&eta, pi.values()))
}

/// The same objective written as a weighted logistic regression on `2ñ`
/// pseudo-observations: `Z_i = 1` with weight `π̄_i` and `Z_{i+ñ} = 0` with
/// weight `1 − π̄_i`, both at row `X_i`.
pub fn pseudo_data_objective(
    gamma: &[f64],
    intercept: f64,
    design: &PredictionDesign,
    pi: &ProbabilityField,
    lambda: f64,
) -> Result<f64> {
    check_dims(design, pi, gamma)?;
    let eta = linear_predictor(design, gamma, intercept);
    let n = eta.len();
    let terms = (0..2 * n).map(|r| {
        let i = r % n;
        let (z, w) = if r < n { (1.0, pi.values()[i]) } else { (0.0, 1.0 - pi.values()[i]) };
        w * (softplus(eta[i]) - z * eta[i])
    });
    Ok(lambda * gamma.iter().map(|g| g.abs()).sum::<f64>() + neumaier_sum(terms) / n as f64)
}

/// Gradient of the smooth part: `(ñ⁻¹ Σ(μ_i − π̄_i), ñ⁻¹ X'(μ − π̄))`
/// with `μ = logistic(η)`, intercept component first.
pub fn logistic_dss_gradient(
    gamma: &[f64],
    intercept: f64,
    design: &PredictionDesign,
    pi: &ProbabilityField,
) -> Result<(f64, Vec<f64>)> {
    check_dims(design, pi, gamma)?;
    let eta = linear_predictor(design, gamma, intercept);
    let n = eta.len() as f64;
    let r = DVector::from_iterator(eta.len(), eta.iter().zip(pi.values()).map(|(e, p)| logistic(*e) - p));
    let g = design.x().transpose() * &r / n;
    Ok((r.sum() / n, g.iter().copied().collect()))
}

fn kkt(grad0: f64, grad: &[f64], gamma: &[f64], lambda: f64) -> f64 {
    let mut worst = grad0.abs();
    for (g, b) in grad.iter().zip(gamma) {
        let v = if *b != 0.0 {
            (g + lambda * b.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

fn soft(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Proximal Newton: each outer step minimizes the penalized quadratic
/// model by coordinate descent, then backtracks on the true objective.
fn solve_one(
    design: &PredictionDesign,
    pi: &ProbabilityField,
    lambda: f64,
    gamma: &mut [f64],
    intercept: &mut f64,
) -> std::result::Result<(), String> {
    let x = design.x();
    let (n, p) = (x.nrows(), x.ncols());
    let nf = n as f64;
    let penalty = |g: &[f64]| lambda * g.iter().map(|v| v.abs()).sum::<f64>();
    let objective = |g: &[f64], b0: f64| smooth(&linear_predictor(design, g, b0), pi.values()) + penalty(g);
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared()).collect();

    for _outer in 0..200 {
        let (g0, g) = logistic_dss_gradient(gamma, *intercept, design, pi).map_err(|e| e.to_string())?;
        if kkt(g0, &g, gamma, lambda) <= KKT_TOL {
            return Ok(());
        }
        let eta = linear_predictor(design, gamma, *intercept);
        let mu: Vec<f64> = eta.iter().map(|e| logistic(*e)).collect();
        let w: Vec<f64> = mu.iter().map(|m| (m * (1.0 - m)).max(1e-10)).collect();
        let wsum: f64 = w.iter().sum();
        // quadratic model in the step (d0, d): ñ⁻¹[Σ r_i (d0 + X_i d) + ½ Σ w_i (d0 + X_i d)²] + λ‖γ + d‖₁
        let r: Vec<f64> = mu.iter().zip(pi.values()).map(|(m, p)| m - p).collect();
        let mut d0 = 0.0;
        let mut d = vec![0.0; p];
        let mut xd = vec![0.0; n];
        let wcol: Vec<f64> = (0..p)
            .map(|j| (0..n).map(|i| w[i] * x[(i, j)] * x[(i, j)]).sum::<f64>())
            .collect();
        for _sweep in 0..2000 {
            let mut max_change = 0.0f64;
            // intercept step
            let grad0: f64 = (0..n).map(|i| r[i] + w[i] * (d0 + xd[i])).sum();
            let step0 = -grad0 / wsum;
            d0 += step0;
            max_change = max_change.max(step0.abs());
            for j in 0..p {
                if wcol[j] <= 0.0 || col_sq[j] == 0.0 {
                    continue;
                }
                let gj: f64 = (0..n).map(|i| x[(i, j)] * (r[i] + w[i] * (d0 + xd[i]))).sum::<f64>();
                let hj = wcol[j];
                let cur = gamma[j] + d[j];
                let target = soft(hj * cur - gj, lambda * nf) / hj;
                let delta = target - cur;
                if delta != 0.0 {
                    d[j] += delta;
                    for i in 0..n {
                        xd[i] += delta * x[(i, j)];
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if max_change < 1e-13 {
                break;
            }
        }
        // backtracking line search
        let f0 = objective(gamma, *intercept);
        let new_g: Vec<f64> = gamma.iter().zip(&d).map(|(a, b)| a + b).collect();
        let decrease = g0 * d0 + g.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() + penalty(&new_g) - penalty(gamma);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = gamma.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            if objective(&cand, *intercept + t * d0) <= f0 + 0.25 * t * decrease.min(0.0) + 1e-16 * f0.abs() {
                gamma.copy_from_slice(&cand);
                *intercept += t * d0;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            let (g0, g) = logistic_dss_gradient(gamma, *intercept, design, pi).map_err(|e| e.to_string())?;
            let res = kkt(g0, &g, gamma, lambda);
            return if res <= KKT_TOL {
                Ok(())
            } else {
                Err(format!("line search stalled with KKT residual {res:e}"))
            };
        }
    }
    Err("no convergence within 200 Newton steps".into())
}

/// `count` log-spaced penalties from the smallest `λ` giving `γ = 0` down to
/// `λ_max · ratio`.
pub fn logistic_lambda_grid(design: &PredictionDesign, pi: &ProbabilityField, count: usize, ratio: f64) -> Result<Vec<f64>> {
    let p = design.cols();
    check_dims(design, pi, &vec![0.0; p])?;
    let mbar = mean(pi.values());
    let b0 = (mbar / (1.0 - mbar)).ln();
    let (_, g) = logistic_dss_gradient(&vec![0.0; p], b0, design, pi)?;
    let lmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if count < 2 || lmax == 0.0 {
        return Ok(vec![lmax]);
    }
    Ok((0..count)
        .map(|k| lmax * ratio.powf(k as f64 / (count - 1) as f64))
        .collect())
}

/// One solution per grid point, warm-started from the previous point.
pub fn logistic_solve_path(design: &PredictionDesign, pi: &ProbabilityField, grid: &[f64]) -> Result<SolutionPath> {
    let p = design.cols();
    check_dims(design, pi, &vec![0.0; p])?;
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
    let mbar = mean(pi.values());
    let mut intercept = (mbar / (1.0 - mbar)).ln();
    let mut gamma = vec![0.0; p];
    let mut entries = Vec::with_capacity(grid.len());
    for (k, &lam) in grid.iter().enumerate() {
        solve_one(design, pi, lam, &mut gamma, &mut intercept)
            .map_err(|m| DssError::Solver(format!("grid point {k} (λ = {lam}): {m}")))?;
        entries.push(PathEntry::new(lam, gamma.clone(), intercept));
    }
    Ok(SolutionPath {
        entries,
        has_intercept: true,
    })
}

/// Success probabilities `logistic(γ_0(s) + X β(s))`, one vector per draw.
pub fn draw_probabilities(draws: &PosteriorDraws, design: &PredictionDesign) -> Result<Vec<Vec<f64>>> {
    if draws.p() != design.cols() {
        return Err(DssError::Argument(format!(
            "draws have p = {} but the design has {} columns",
            draws.p(),
            design.cols()
        )));
    }
    let eta = draws.beta() * design.x().transpose();
    Ok((0..draws.len())
        .into_par_iter()
        .map(|s| {
            let b0 = draws.intercept().map(|v| v[s]).unwrap_or(0.0);
            eta.row(s).iter().map(|e| logistic(e + b0)).collect()
        })
        .collect())
}

/// `sqrt(ñ⁻¹ Σ(π_i − 2π_{λ,i}π_i + π²_{λ,i})) − sqrt(ñ⁻¹ Σ π_i(1 − π_i))` for
/// probability vectors `pi` and `pi_lambda`.
pub fn logistic_psi(pi: &[f64], pi_lambda: &[f64]) -> f64 {
    let n = pi.len() as f64;
    let base = neumaier_sum(pi.iter().map(|p| p * (1.0 - p))) / n;
    let gap = neumaier_sum(pi.iter().zip(pi_lambda).map(|(p, q)| (p - q) * (p - q))) / n;
    let total = base + gap;
    if gap == 0.0 {
        0.0
    } else {
        gap / (total.sqrt() + base.sqrt())
    }
}

pub fn logistic_psi_draws(entry: &PathEntry, draws: &PosteriorDraws, design: &PredictionDesign) -> Result<Vec<f64>> {
    let probs = draw_probabilities(draws, design)?;
    let eta = linear_predictor(design, &entry.gamma, entry.intercept);
    let pl: Vec<f64> = eta.iter().map(|e| logistic(*e)).collect();
    Ok(probs.par_iter().map(|pi| logistic_psi(pi, &pl)).collect())
}

/// `ψ_λ` summaries for the first path entry at each cardinality. Variation
/// explained has no logistic analogue, so the `ρ²` fields are `NaN`.
pub fn logistic_summarize(
    path: &SolutionPath,
    draws: &PosteriorDraws,
    design: &PredictionDesign,
    level: f64,
) -> Result<SparsitySummary> {
    if draws.len() < MIN_DRAWS {
        return Err(DssError::InsufficientDraws {
            have: draws.len(),
            need: MIN_DRAWS,
        });
    }
    let mut rows = Vec::new();
    for e in path.first_per_cardinality() {
        let s = logistic_psi_draws(e, draws, design)?;
        let (lo, hi) = equal_tailed_interval(&s, level);
        rows.push(SummaryRow {
            cardinality: e.cardinality(),
            lambda: e.lambda,
            support: e.support.clone(),
            gamma: e.gamma.clone(),
            rho_mean: f64::NAN,
            rho_lo: f64::NAN,
            rho_hi: f64::NAN,
            psi_mean: mean(&s),
            psi_lo: lo,
            psi_hi: hi,
        });
    }
    Ok(SparsitySummary {
        rows,
        benchmark: f64::NAN,
        benchmark_interval: (f64::NAN, f64::NAN),
        level,
    })
}

#[derive(Debug, Clone)]
pub struct LogisticSamplerConfig {
    pub draws: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Prior standard deviation of each slope, `β_j ~ N(0, s²)`.
    pub prior_sd: f64,
    /// Prior standard deviation of the intercept.
    pub intercept_sd: f64,
}

impl Default for LogisticSamplerConfig {
    fn default() -> Self {
        LogisticSamplerConfig {
            draws: 5000,
            burn_in: 1000,
            thin: 1,
            prior_sd: 2.5,
            intercept_sd: 10.0,
        }
    }
}

fn log_posterior(x: &DMatrix<f64>, y: &[f64], theta: &DVector<f64>, cfg: &LogisticSamplerConfig) -> f64 {
    let p = x.ncols();
    let beta = theta.rows(1, p);
    let eta = (x * beta).add_scalar(theta[0]);
    let ll: f64 = eta.iter().zip(y).map(|(e, yi)| yi * e - softplus(*e)).sum();
    let prior = -0.5 * (theta[0] / cfg.intercept_sd).powi(2) - 0.5 * beta.norm_squared() / (cfg.prior_sd * cfg.prior_sd);
    ll + prior
}

/// Random-walk Metropolis for logistic regression with independent normal
/// priors. The proposal covariance is the inverse Hessian at the posterior
/// mode scaled by `2.38² / (p + 1)`. Draws carry an intercept and unit
/// variances.
pub fn sample_logistic(
    x: &DMatrix<f64>,
    y: &[f64],
    cfg: &LogisticSamplerConfig,
    rng: &RngConfig,
) -> Result<PosteriorDraws> {
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(DssError::Argument("response length does not match the design".into()));
    }
    if y.iter().any(|v| *v != 0.0 && *v != 1.0) {
        return Err(DssError::Argument("logistic response must be coded 0/1".into()));
    }
    if cfg.draws == 0 || !(cfg.prior_sd > 0.0 && cfg.intercept_sd > 0.0) {
        return Err(DssError::Argument("draw count and prior scales must be positive".into()));
    }
    if cfg.draws < MIN_DRAWS {
        warn!("only {} logistic draws requested; summaries need at least {MIN_DRAWS}", cfg.draws);
    }
    let d = p + 1;
    let design1 = DMatrix::from_fn(n, d, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let mut prior_prec = DVector::from_element(d, 1.0 / (cfg.prior_sd * cfg.prior_sd));
    prior_prec[0] = 1.0 / (cfg.intercept_sd * cfg.intercept_sd);

    // posterior mode by damped Newton
    let mut theta = DVector::zeros(d);
    let mut hess = DMatrix::zeros(d, d);
    for it in 0..100 {
        let eta = &design1 * &theta;
        let mu = eta.map(logistic);
        let w = mu.map(|m| m * (1.0 - m));
        let grad = design1.transpose() * (DVector::from_column_slice(y) - &mu) - prior_prec.component_mul(&theta);
        hess = design1.transpose() * DMatrix::from_diagonal(&w) * &design1 + DMatrix::from_diagonal(&prior_prec);
        let chol = checked_cholesky(&hess).ok_or_else(|| DssError::SamplerFailure {
            iteration: it,
            message: "Hessian at the mode is not positive definite".into(),
        })?;
        let step = chol.solve(&grad);
        let f0 = log_posterior(x, y, &theta, cfg);
        let mut t = 1.0;
        while t > 1e-10 && log_posterior(x, y, &(&theta + &step * t), cfg) < f0 {
            t *= 0.5;
        }
        theta += &step * t;
        if step.norm() * t < 1e-10 {
            break;
        }
    }
    let chol = checked_cholesky(&hess).ok_or_else(|| DssError::SamplerFailure {
        iteration: 0,
        message: "Hessian at the mode is not positive definite".into(),
    })?;
    let prop_l = chol.l().transpose();
    let scale = 2.38 / (d as f64).sqrt();

    let mut rng = rng.rng();
    let thin = cfg.thin.max(1);
    let total = cfg.burn_in + cfg.draws * thin;
    let mut cur = theta.clone();
    let mut cur_lp = log_posterior(x, y, &cur, cfg);
    let mut beta = DMatrix::zeros(cfg.draws, p);
    let mut icpt = DVector::zeros(cfg.draws);
    let mut kept = 0;
    let mut accepted = 0usize;
    for it in 0..total {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dev = prop_l.solve_upper_triangular(&z).ok_or_else(|| DssError::SamplerFailure {
            iteration: it,
            message: "proposal solve failed".into(),
        })?;
        let cand = &cur + dev * scale;
        let lp = log_posterior(x, y, &cand, cfg);
        let u: f64 = rng.random();
        if lp.is_finite() && u.ln() < lp - cur_lp {
            cur = cand;
            cur_lp = lp;
            accepted += 1;
        }
        if !cur_lp.is_finite() {
            return Err(DssError::SamplerFailure {
                iteration: it,
                message: "non-finite log posterior".into(),
            });
        }
        if it >= cfg.burn_in && (it - cfg.burn_in) % thin == thin - 1 {
            icpt[kept] = cur[0];
            for j in 0..p {
                beta[(kept, j)] = cur[j + 1];
            }
            kept += 1;
        }
    }
    log::info!("logistic sampler acceptance rate {:.3}", accepted as f64 / total as f64);
    PosteriorDraws::new(beta, DVector::from_element(cfg.draws, 1.0), PriorTag::LogisticNormal)?
        .with_intercept(icpt)
        .map(|d| d.with_sampling_metadata(cfg.burn_in, thin))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DesignProvenance;

    fn setup(n: usize, p: usize, seed: u64) -> (PredictionDesign, ProbabilityField) {
        let mut rng = RngConfig::new(seed).rng();
        let mut x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        for j in 0..p {
            let m = x.column(j).mean();
            x.column_mut(j).add_scalar_mut(-m);
        }
        let pi: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        (
            PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap(),
            ProbabilityField::new(&pi).unwrap(),
        )
    }

    #[test]
    fn zero_action_costs_log_two_per_row() {
        let (d, pi) = setup(12, 3, 1);
        let v = logistic_dss_objective(&[0.0; 3], 0.0, &d, &pi, 0.7).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn pseudo_data_form_agrees() {
        let (d, pi) = setup(30, 4, 2);
        let g = [0.3, -1.2, 0.0, 2.0];
        let a = logistic_dss_objective(&g, 0.4, &d, &pi, 0.05).unwrap();
        let b = pseudo_data_objective(&g, 0.4, &d, &pi, 0.05).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn symmetric_probabilities_give_zero_action() {
        let (d, _) = setup(20, 3, 3);
        let half = ProbabilityField::new(&[0.5; 20]).unwrap();
        let path = logistic_solve_path(&d, &half, &[1.0, 0.0]).unwrap();
        for e in &path.entries {
            assert!(e.gamma.iter().all(|g| g.abs() < 1e-8));
            assert!(e.intercept.abs() < 1e-8);
        }
    }

    #[test]
    fn huge_penalty_gives_zero_action() {
        let (d, pi) = setup(25, 3, 4);
        let path = logistic_solve_path(&d, &pi, &[1e6]).unwrap();
        assert!(path.entries[0].gamma.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn grid_must_decrease() {
        let (d, pi) = setup(10, 2, 5);
        assert!(logistic_solve_path(&d, &pi, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn psi_vanishes_at_truth_and_reduces_for_degenerate_probabilities() {
        let pi = [0.2, 0.9, 0.5];
        assert_eq!(logistic_psi(&pi, &pi), 0.0);
        let pi = [0.0, 1.0, 1.0];
        let pl = [0.25, 0.5, 0.75];
        let want = ((0.0625 + 0.25 + 0.0625) / 3.0f64).sqrt();
        assert!((logistic_psi(&pi, &pl) - want).abs() < 1e-15);
    }

    #[test]
    fn clamping_keeps_objective_finite() {
        let f = ProbabilityField::new(&[0.0, 1.0]).unwrap();
        assert!(f.values()[0] > 0.0 && f.values()[1] < 1.0);
        assert!(ProbabilityField::new(&[1.5]).is_err());
    }
}

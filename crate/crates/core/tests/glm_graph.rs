// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{normal_matrix, rng};
use dss_core::data::{DesignProvenance, PredictionDesign, RngConfig};
use dss_core::glm::{
    logistic, logistic_dss_gradient, logistic_dss_objective, logistic_lambda_grid, logistic_psi, logistic_solve_path,
    logistic_summarize, sample_logistic, softplus, LogisticSamplerConfig, ProbabilityField,
};
use dss_core::graph::{
    default_graph_grid, graph_dss_objective, graph_smooth_gradient, graph_solve_path, sample_covariance_posterior,
    CovSummary,
};
use dss_core::linalg::checked_cholesky;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn logistic_problem(seed: u64, n: usize, p: usize) -> (PredictionDesign, ProbabilityField) {
    let mut r = rng(seed);
    let x = normal_matrix(&mut r, n, p);
    let truth = DVector::from_fn(p, |j, _| if j % 2 == 0 { 0.8 } else { -0.3 });
    let eta = &x * truth;
    let pi: Vec<f64> = eta.iter().map(|e| logistic(e + 0.2)).collect();
    (
        PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap(),
        ProbabilityField::new(&pi).unwrap(),
    )
}

/// Unpenalized minimizer by damped Newton on `(intercept, γ)`.
fn newton_oracle(design: &PredictionDesign, pi: &ProbabilityField) -> DVector<f64> {
    let x = design.x();
    let (n, p) = x.shape();
    let z = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
    let target = DVector::from_column_slice(pi.values());
    let f = |t: &DVector<f64>| -> f64 {
        let eta = &z * t;
        eta.iter().zip(target.iter()).map(|(e, q)| softplus(*e) - q * e).sum::<f64>() / n as f64
    };
    let mut theta = DVector::zeros(p + 1);
    for _ in 0..100 {
        let eta = &z * &theta;
        let mu = eta.map(logistic);
        let grad = z.transpose() * (&mu - &target) / n as f64;
        if grad.amax() < 1e-13 {
            break;
        }
        let w = mu.map(|m| m * (1.0 - m));
        let hess = z.transpose() * DMatrix::from_diagonal(&w) * &z / n as f64;
        let step = hess.cholesky().unwrap().solve(&grad);
        let mut t = 1.0;
        let f0 = f(&theta);
        while f(&(&theta - &step * t)) > f0 - 1e-4 * t * grad.dot(&step) && t > 1e-10 {
            t *= 0.5;
        }
        theta -= step * t;
    }
    theta
}

#[test]
fn unpenalized_logistic_action_matches_newton() {
    for seed in 0..5 {
        let (design, pi) = logistic_problem(seed, 150, 5);
        let path = logistic_solve_path(&design, &pi, &[0.0]).unwrap();
        let e = &path.entries[0];
        let oracle = newton_oracle(&design, &pi);
        assert!((e.intercept - oracle[0]).abs() < 1e-5);
        for j in 0..5 {
            assert!((e.gamma[j] - oracle[j + 1]).abs() < 1e-5, "seed {seed}, j = {j}");
        }
    }
}

#[test]
fn logistic_gradient_matches_central_differences() {
    let (design, pi) = logistic_problem(17, 80, 4);
    let gamma = vec![0.3, -0.2, 0.1, 0.05];
    let b0 = -0.4;
    let (g0, g) = logistic_dss_gradient(&gamma, b0, &design, &pi).unwrap();
    let h = 1e-5;
    let obj = |gm: &[f64], b: f64| logistic_dss_objective(gm, b, &design, &pi, 0.0).unwrap();
    let fd0 = (obj(&gamma, b0 + h) - obj(&gamma, b0 - h)) / (2.0 * h);
    assert!((fd0 - g0).abs() <= 1e-6 * g0.abs().max(1e-2));
    for j in 0..4 {
        let mut up = gamma.clone();
        let mut dn = gamma.clone();
        up[j] += h;
        dn[j] -= h;
        let fd = (obj(&up, b0) - obj(&dn, b0)) / (2.0 * h);
        assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1e-2), "j = {j}: {fd} vs {}", g[j]);
    }
}

#[test]
fn logistic_psi_matches_bernoulli_simulation() {
    let mut r: ChaCha8Rng = rng(5);
    let n = 20;
    let pi: Vec<f64> = (0..n).map(|_| r.random_range(0.05..0.95)).collect();
    let pl: Vec<f64> = pi.iter().map(|p| (p + r.random_range(-0.2..0.2f64)).clamp(0.01, 0.99)).collect();
    let sims = 1_000_000;
    let (mut s1, mut s1sq, mut s2) = (0.0, 0.0, 0.0);
    for _ in 0..sims {
        let mut a = 0.0;
        let mut b = 0.0;
        for i in 0..n {
            let y = if r.random::<f64>() < pi[i] { 1.0 } else { 0.0 };
            a += (y - pl[i]) * (y - pl[i]);
            b += (y - pi[i]) * (y - pi[i]);
        }
        a /= n as f64;
        b /= n as f64;
        s1 += a;
        s1sq += a * a;
        s2 += b;
    }
    let m1 = s1 / sims as f64;
    let se1 = ((s1sq / sims as f64 - m1 * m1) / sims as f64).sqrt();
    let exact1 = pi.iter().zip(&pl).map(|(p, q)| p - 2.0 * q * p + q * q).sum::<f64>() / n as f64;
    assert!((m1 - exact1).abs() <= 3.0 * se1, "{m1} vs {exact1} (se {se1})");
    let mc_psi = m1.sqrt() - (s2 / sims as f64).sqrt();
    assert!((mc_psi - logistic_psi(&pi, &pl)).abs() < 1e-3);
}

#[test]
fn credit_sized_stand_in_runs_end_to_end() {
    // Same shape as the German-credit problem: n = 1000, p = 48.
    let n = 1000;
    let p = 48;
    let mut r = rng(48);
    let x = normal_matrix(&mut r, n, p);
    let truth = DVector::from_fn(p, |j, _| if j < 6 { 0.8 - 0.1 * j as f64 } else { 0.0 });
    let eta = &x * truth;
    let y: Vec<f64> = eta
        .iter()
        .map(|e| if r.random::<f64>() < logistic(e - 0.5) { 1.0 } else { 0.0 })
        .collect();
    let cfg = LogisticSamplerConfig {
        draws: 1000,
        burn_in: 1000,
        ..LogisticSamplerConfig::default()
    };
    let draws = sample_logistic(&x, &y, &cfg, &RngConfig::new(3)).unwrap();
    let design = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
    let pi = ProbabilityField::from_draws(&draws, &design).unwrap();
    let grid = logistic_lambda_grid(&design, &pi, 25, 1e-3).unwrap();
    let path = logistic_solve_path(&design, &pi, &grid).unwrap();
    let summary = logistic_summarize(&path, &draws, &design, 0.9).unwrap();
    assert!(summary.rows.iter().all(|r| r.psi_lo >= 0.0 && r.rho_mean.is_nan()));
    let first = &summary.rows[0];
    let last = summary.rows.last().unwrap();
    assert!(last.psi_mean < first.psi_mean);
    let early = summary.rows.iter().find(|r| r.cardinality >= 3).unwrap();
    assert!(early.support.iter().filter(|&&j| j < 6).count() >= 2);
}

fn random_cov(seed: u64, p: usize) -> CovSummary {
    let mut r = rng(seed);
    let a = normal_matrix(&mut r, 3 * p, p);
    CovSummary::new(a.transpose() * &a / (3 * p) as f64 + DMatrix::identity(p, p) * 0.1).unwrap()
}

#[test]
fn unpenalized_precision_is_the_inverse_covariance() {
    for seed in 0..5 {
        let s = random_cov(seed, 6);
        let path = graph_solve_path(&s, &[0.0]).unwrap();
        let inv = s.matrix().clone().try_inverse().unwrap();
        assert!((&path[0].gamma - &inv).amax() <= 1e-6, "seed {seed}");
    }
}

#[test]
fn precision_stays_positive_definite_along_paths() {
    for seed in 0..10 {
        let s = random_cov(100 + seed, 7);
        let grid = default_graph_grid(&s, 20);
        for e in graph_solve_path(&s, &grid).unwrap() {
            assert!(checked_cholesky(&e.gamma).is_some(), "seed {seed}, λ = {}", e.lambda);
            assert!(e.duality_gap <= 1e-6);
            assert!((&e.gamma - e.gamma.transpose()).amax() == 0.0);
        }
    }
}

#[test]
fn graph_gradient_matches_central_differences() {
    let s = random_cov(9, 4);
    let gamma = s.matrix().clone().try_inverse().unwrap() * 0.7 + DMatrix::identity(4, 4) * 0.2;
    let grad = graph_smooth_gradient(&gamma, &s).unwrap();
    let h = 1e-5;
    for i in 0..4 {
        for j in i..4 {
            let mut e = DMatrix::zeros(4, 4);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            let f = |t: f64| graph_dss_objective(&(&gamma + &e * t), &s, 0.0).unwrap();
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let analytic = if i == j { grad[(i, i)] } else { 2.0 * grad[(i, j)] };
            assert!((fd - analytic).abs() <= 1e-6 * analytic.abs().max(1e-2), "({i},{j}): {fd} vs {analytic}");
        }
    }
}

#[test]
fn covariance_posterior_is_consistent() {
    let mut r = rng(4);
    let x = normal_matrix(&mut r, 5000, 4);
    let post = sample_covariance_posterior(&x, 200, &RngConfig::new(1)).unwrap();
    assert!((&post.mean - DMatrix::<f64>::identity(4, 4)).amax() < 0.05);
}

// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{mc_se, mean, simulate};
use dss_core::data::RngConfig;
use dss_core::horseshoe::{horseshoe_threshold, sample_horseshoe, sample_horseshoe_chains, FrozenScales, GlobalScale, HorseshoeConfig};
use dss_core::linalg::least_squares;
use nalgebra::DMatrix;

#[test]
fn frozen_scales_reproduce_conjugate_mean() {
    for seed in 0..20u64 {
        let data = simulate(100 + seed, 60, &[1.0, -0.5, 0.0, 0.25], 1.0);
        let cfg = HorseshoeConfig {
            draws: 10000,
            burn_in: 500,
            global: GlobalScale::NoiseScaled,
            frozen: Some(FrozenScales { local: 1.0, global: 1.0 }),
            ..HorseshoeConfig::default()
        };
        let draws = sample_horseshoe(&data, &cfg, &RngConfig::new(seed)).unwrap();
        let x = data.x();
        let a = x.transpose() * x + DMatrix::identity(4, 4);
        let oracle = a.cholesky().unwrap().solve(&(x.transpose() * data.y()));
        for j in 0..4 {
            let col: Vec<f64> = draws.beta().column(j).iter().copied().collect();
            let z = (mean(&col) - oracle[j]).abs() / mc_se(&col);
            assert!(z <= 3.0, "problem {seed}, coefficient {j}: {z:.2} standard errors off");
        }
    }
}

#[test]
fn scalar_posterior_mean_is_shrunk_least_squares() {
    let data = simulate(7, 30, &[0.6], 1.0);
    let cfg = HorseshoeConfig {
        draws: 20000,
        ..HorseshoeConfig::default()
    };
    let draws = sample_horseshoe(&data, &cfg, &RngConfig::new(3)).unwrap();
    let x = data.x().column(0);
    let xtx = x.norm_squared();
    let bhat = x.dot(data.y()) / xtx;
    let local = draws.local_scales().unwrap();
    let global = draws.global_scales().unwrap();
    // β | scales, σ² has mean (1 − κ̃) β̂ with κ̃ = σ² / (σ² + x'x λ² λ_1²).
    let diff: Vec<f64> = (0..draws.len())
        .map(|s| {
            let s2 = draws.sigma2()[s];
            let v = (global[s] * local[(s, 0)]).powi(2);
            let kappa = s2 / (s2 + xtx * v);
            draws.beta()[(s, 0)] - (1.0 - kappa) * bhat
        })
        .collect();
    let z = mean(&diff).abs() / mc_se(&diff);
    assert!(z <= 3.0, "{z:.2} standard errors");
}

#[test]
fn pure_noise_means_are_shrunk_below_least_squares() {
    let data = simulate(42, 100, &[0.0; 10], 1.0);
    let draws = sample_horseshoe(&data, &HorseshoeConfig::default(), &RngConfig::new(1)).unwrap();
    let ols = least_squares(data.x(), data.y()).unwrap();
    let post = draws.mean_beta();
    for j in 0..10 {
        assert!(post[j].abs() < ols[j].abs(), "coefficient {j}: {} vs {}", post[j], ols[j]);
    }
}

#[test]
fn chains_use_consecutive_streams() {
    let data = simulate(5, 40, &[1.0, 0.0, 0.5], 1.0);
    let cfg = HorseshoeConfig {
        draws: 200,
        burn_in: 100,
        ..HorseshoeConfig::default()
    };
    let rng = RngConfig::new(9);
    let both = sample_horseshoe_chains(&data, &cfg, &rng, 2).unwrap();
    let second = sample_horseshoe(&data, &cfg, &rng.with_stream(1)).unwrap();
    assert_eq!(both.len(), 400);
    assert_eq!(both.beta().rows(200, 200), second.beta().rows(0, 200));
    assert_eq!(both.global_scales().unwrap().len(), 400);
}

#[test]
fn strong_signals_survive_thresholding() {
    let data = simulate(11, 200, &[2.0, 0.0, 0.0, -1.5], 1.0);
    let draws = sample_horseshoe(&data, &HorseshoeConfig::default(), &RngConfig::new(2)).unwrap();
    let keep = horseshoe_threshold(&draws).unwrap();
    assert!(keep[0] && keep[3]);
}

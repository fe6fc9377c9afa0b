// SPDX-License-Identifier: Apache-2.0

mod common;

use common::{crime, mc_se, mean, names_of, simulate};
use dss_core::data::RngConfig;
use dss_core::model_space::{
    bma_draws, enumerate_models, gibbs_search, log_bf_hyper_g, model_averaged_mean, GibbsConfig, HyperGPreset,
    MarginalContext, ModelId, ModelPrior, PriorConfig,
};
use dss_core::DssError;

/// Bayes factor against the null by brute-force trapezoid integration over
/// `u = g / (1 + g)` on `10⁶` intervals.
fn trapezoid_bf(r2: f64, k: usize, n: usize, a: f64, b: f64) -> f64 {
    let m = 1_000_000usize;
    let nf = n as f64;
    let kf = k as f64;
    // p(g) = (g + b)^{-(a+1)} · a b^a on g > 0.
    let f = |u: f64| -> f64 {
        // The integrand can have a finite nonzero limit at u = 1.
        let u = u.min(1.0 - 1e-13);
        let g = u / (1.0 - u);
        let bf = (1.0 + g).powf((nf - 1.0 - kf) / 2.0) * (1.0 + g * (1.0 - r2)).powf(-(nf - 1.0) / 2.0);
        let dens = a * b.powf(a) * (g + b).powf(-(a + 1.0));
        bf * dens / ((1.0 - u) * (1.0 - u))
    };
    let h = 1.0 / m as f64;
    let mut s = 0.5 * (f(0.0) + f(1.0));
    for i in 1..m {
        s += f(i as f64 * h);
    }
    s * h
}

#[test]
fn hyper_g_quadrature_matches_dense_trapezoid() {
    let data = simulate(31, 5, &[1.0, 0.5], 0.8);
    let ctx = MarginalContext::new(&data);
    for support in [vec![0usize], vec![1], vec![0, 1]] {
        let fit = ctx.fit(&ModelId::from_support(2, &support)).unwrap();
        for preset in [HyperGPreset::Cui, HyperGPreset::Liang, HyperGPreset::LiangN] {
            let h = preset.build(5);
            let ours = log_bf_hyper_g(fit.r2, fit.k(), 5, &h).unwrap().exp();
            let brute = trapezoid_bf(fit.r2, fit.k(), 5, h.a, h.b);
            let rel = (ours - brute).abs() / brute;
            assert!(rel < 1e-6, "{preset:?} {support:?}: {ours} vs {brute} ({rel:e})");
        }
    }
}

#[test]
fn crime_inclusion_matches_published_g_prior_column() {
    let data = crime();
    let prior = PriorConfig::fixed_g(data.n() as f64, ModelPrior::BetaBinomial);
    let space = enumerate_models(&data, &prior).unwrap();
    let inc = space.inclusion();
    let at = |name: &str| inc[data.column_index(name).unwrap()];
    assert!((at("Ineq") - 0.99).abs() <= 0.02);
    assert!((at("Ed") - 0.96).abs() <= 0.02);
    assert!((at("So") - 0.27).abs() <= 0.03);
    assert_eq!(
        names_of(&data, &space.mpm().support()),
        ["M", "Ed", "Po1", "NW", "U2", "Ineq", "Prob"]
    );
}

#[test]
fn gibbs_recovers_enumerated_inclusion_on_small_problems() {
    let problems = [
        simulate(1, 80, &[1.0, 0.0, 0.5, 0.0, 0.0, -0.3, 0.0, 0.2], 1.0),
        simulate(2, 60, &[0.4, 0.4, 0.0, 0.0, 0.3, 0.0], 1.0),
        simulate(3, 120, &[0.0, 0.2, 0.0, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.15], 1.0),
    ];
    for (i, data) in problems.iter().enumerate() {
        let prior = PriorConfig::fixed_g(data.n() as f64, ModelPrior::BetaBinomial);
        let exact = enumerate_models(data, &prior).unwrap();
        let sampled = gibbs_search(data, &prior, &GibbsConfig::new(50_000), &RngConfig::new(i as u64)).unwrap();
        for (j, (e, s)) in exact.inclusion().iter().zip(sampled.inclusion()).enumerate() {
            assert!((e - s).abs() <= 0.03, "problem {i}, variable {j}: {e:.3} vs {s:.3}");
        }
    }
}

#[test]
fn crime_top_gibbs_model_is_the_hpm() {
    let data = crime();
    let prior = PriorConfig::fixed_g(data.n() as f64, ModelPrior::BetaBinomial);
    let hpm = enumerate_models(&data, &prior).unwrap().hpm().unwrap();
    let sampled = gibbs_search(&data, &prior, &GibbsConfig::new(20_000), &RngConfig::new(5)).unwrap();
    assert_eq!(sampled.records()[0].model, hpm);
}

#[test]
fn independent_response_favours_the_null_model() {
    let data = simulate(77, 2000, &[0.0; 6], 1.0);
    let prior = PriorConfig::fixed_g(data.n() as f64, ModelPrior::Uniform);
    let space = enumerate_models(&data, &prior).unwrap();
    assert_eq!(space.hpm().unwrap().cardinality(), 0);
}

#[test]
fn bma_draws_average_to_the_exact_mixture_mean() {
    let data = simulate(13, 50, &[0.8, 0.0, 0.3], 1.0);
    for prior in [
        PriorConfig::fixed_g(50.0, ModelPrior::Uniform),
        PriorConfig::hyper_g(HyperGPreset::LiangN.build(50), ModelPrior::BetaBinomial),
    ] {
        let space = enumerate_models(&data, &prior).unwrap();
        let exact = model_averaged_mean(&data, &space, &prior).unwrap();
        let draws = bma_draws(&data, &space, &prior, 20_000, &RngConfig::new(8)).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = draws.beta().column(j).iter().copied().collect();
            let z = (mean(&col) - exact[j]).abs() / mc_se(&col);
            assert!(z <= 3.0, "coefficient {j}: {z:.2} standard errors");
        }
    }
}

#[test]
fn excluded_coefficients_are_exact_zeros_in_bma_draws() {
    let data = simulate(21, 40, &[1.0, 0.0, 0.0, 0.4], 1.0);
    let prior = PriorConfig::fixed_g(40.0, ModelPrior::BetaBinomial);
    let space = enumerate_models(&data, &prior).unwrap();
    let draws = bma_draws(&data, &space, &prior, 2000, &RngConfig::new(2)).unwrap();
    let zeros = draws.beta().iter().filter(|v| **v == 0.0).count();
    assert!(zeros > 0);
    assert!(draws.beta().iter().all(|v| *v == 0.0 || v.abs() > 1e-300));
}

#[test]
fn protein_sized_stand_in_needs_a_budget_and_gibbs() {
    // Same shape as the protein-activation problem: p = 88, n = 96.
    let mut beta = vec![0.0; 88];
    for (j, b) in [(3usize, 1.0), (17, -0.8), (40, 0.6), (41, 0.5), (70, -0.4), (85, 0.7)] {
        beta[j] = b;
    }
    let data = simulate(2024, 96, &beta, 1.0);
    let prior = PriorConfig::hyper_g(HyperGPreset::LiangN.build(96), ModelPrior::BetaBinomial).with_budget(20);
    match enumerate_models(&data, &prior) {
        Err(DssError::Budget(m)) => assert!(m.contains("gibbs")),
        other => panic!("expected a budget error, got {other:?}"),
    }
    let space = gibbs_search(&data, &prior, &GibbsConfig::new(2000), &RngConfig::new(1)).unwrap();
    assert!(space.records().iter().all(|r| r.model.cardinality() <= 20));
    let inc = space.inclusion();
    assert!(inc.iter().all(|v| (0.0..=1.0).contains(v)));
    for j in [3usize, 17, 85] {
        assert!(inc[j] > 0.5, "variable {j} inclusion {}", inc[j]);
    }
    let draws = bma_draws(&data, &space, &prior, 500, &RngConfig::new(2)).unwrap();
    assert_eq!(draws.p(), 88);
}

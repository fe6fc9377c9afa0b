// SPDX-License-Identifier: Apache-2.0

use dss_core::data::{DesignProvenance, PredictionDesign};
use dss_core::dss::{kkt_residual, psi_draws, rho_draws, solve_path, PathEntry};
use dss_core::glm::{logistic_dss_objective, pseudo_data_objective, ProbabilityField};
use dss_core::graph::{graph_dss_objective, CovSummary};
use dss_core::linalg::log_sum_exp;
use dss_core::posterior::{PosteriorDraws, PriorTag};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn design_strategy(max_p: usize) -> impl Strategy<Value = (DMatrix<f64>, Vec<f64>)> {
    (1..=max_p).prop_flat_map(|p| {
        let n = p + 3;
        (
            proptest::collection::vec(-3.0..3.0f64, n * p).prop_map(move |v| DMatrix::from_vec(n, p, v)),
            proptest::collection::vec(-2.0..2.0f64, p),
        )
    })
}

fn draws_for(p: usize, seed_vals: &[f64]) -> PosteriorDraws {
    let s = seed_vals.len() / (p + 1);
    let beta = DMatrix::from_fn(s, p, |i, j| seed_vals[i * (p + 1) + j]);
    let sigma2 = DVector::from_fn(s, |i, _| seed_vals[i * (p + 1) + p].abs() + 0.01);
    PosteriorDraws::new(beta, sigma2, PriorTag::Imported).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rho_in_unit_interval_and_psi_nonnegative(
        (x, gamma) in design_strategy(5),
        vals in proptest::collection::vec(-2.0..2.0f64, 60),
    ) {
        let p = x.ncols();
        let vals: Vec<f64> = vals.into_iter().take((60 / (p + 1)) * (p + 1)).collect();
        let draws = draws_for(p, &vals);
        let design = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        let e = PathEntry::new(0.1, gamma, 0.0);
        for r in rho_draws(&e, &draws, &design).unwrap() {
            prop_assert!((0.0..=1.0).contains(&r));
        }
        for s in psi_draws(&e, &draws, &design).unwrap() {
            prop_assert!(s >= 0.0);
        }
    }

    #[test]
    fn larger_gap_lowers_rho_and_raises_psi(
        (x, beta) in design_strategy(4),
        s2 in 0.05..3.0f64,
        t1 in 0.0..1.0f64,
        dt in 0.0..1.0f64,
    ) {
        let p = x.ncols();
        let draws = PosteriorDraws::new(
            DMatrix::from_row_slice(1, p, &beta),
            DVector::from_element(1, s2),
            PriorTag::Imported,
        ).unwrap();
        let design = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        // γ = (1 − t)β moves away from β as t grows, so G grows monotonically.
        let at = |t: f64| PathEntry::new(0.0, beta.iter().map(|b| (1.0 - t) * b).collect(), 0.0);
        let (a, b) = (at(t1), at(t1 + dt));
        let (ra, rb) = (rho_draws(&a, &draws, &design).unwrap()[0], rho_draws(&b, &draws, &design).unwrap()[0]);
        let (pa, pb) = (psi_draws(&a, &draws, &design).unwrap()[0], psi_draws(&b, &draws, &design).unwrap()[0]);
        prop_assert!(rb <= ra + 1e-12);
        prop_assert!(pb >= pa - 1e-12);
    }

    #[test]
    fn log_sum_exp_is_shift_equivariant(
        v in proptest::collection::vec(-700.0..700.0f64, 1..30),
        c in -500.0..500.0f64,
    ) {
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let a = log_sum_exp(&v) + c;
        let b = log_sum_exp(&shifted);
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        // Normalized weights are unchanged by the shift.
        for (x, y) in v.iter().zip(&shifted) {
            prop_assert!(((x - log_sum_exp(&v)).exp() - (y - b).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn pseudo_data_identity(
        (x, gamma) in design_strategy(5),
        pis in proptest::collection::vec(0.0..1.0f64, 8),
        b0 in -2.0..2.0f64,
        lambda in 0.0..1.0f64,
    ) {
        let n = x.nrows();
        let pi: Vec<f64> = (0..n).map(|i| pis[i % pis.len()]).collect();
        let pi = ProbabilityField::new(&pi).unwrap();
        let design = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        let a = logistic_dss_objective(&gamma, b0, &design, &pi, lambda).unwrap();
        let b = pseudo_data_objective(&gamma, b0, &design, &pi, lambda).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
    }

    #[test]
    fn logistic_objective_is_convex(
        (x, g1) in design_strategy(4),
        shift in proptest::collection::vec(-1.0..1.0f64, 4),
        pis in proptest::collection::vec(0.01..0.99f64, 7),
        lambda in 0.0..0.5f64,
        w in 0.0..1.0f64,
    ) {
        let p = x.ncols();
        let n = x.nrows();
        let pi: Vec<f64> = (0..n).map(|i| pis[i % pis.len()]).collect();
        let pi = ProbabilityField::new(&pi).unwrap();
        let design = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        let g2: Vec<f64> = g1.iter().zip(&shift).map(|(a, b)| a + b).take(p).collect();
        let mid: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| w * a + (1.0 - w) * b).collect();
        let f = |g: &[f64]| logistic_dss_objective(g, 0.1, &design, &pi, lambda).unwrap();
        prop_assert!(f(&mid) <= w * f(&g1) + (1.0 - w) * f(&g2) + 1e-10);
    }

    #[test]
    fn graph_objective_is_convex(
        a in proptest::collection::vec(-1.0..1.0f64, 9),
        b in proptest::collection::vec(-1.0..1.0f64, 9),
        lambda in 0.0..1.0f64,
        w in 0.0..1.0f64,
    ) {
        let pd = |v: &[f64]| {
            let m = DMatrix::from_row_slice(3, 3, v);
            &m * m.transpose() + DMatrix::identity(3, 3) * 0.5
        };
        let s = CovSummary::new(DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.0])).unwrap();
        let (g1, g2) = (pd(&a), pd(&b));
        let mid = &g1 * w + &g2 * (1.0 - w);
        let f = |g: &DMatrix<f64>| graph_dss_objective(g, &s, lambda).unwrap();
        prop_assert!(f(&mid) <= w * f(&g1) + (1.0 - w) * f(&g2) + 1e-9);
    }

    #[test]
    fn path_satisfies_kkt_and_ends_at_the_mean(
        (x, beta) in design_strategy(6),
    ) {
        let design = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        prop_assume!(design.rank() == design.cols());
        prop_assume!(beta.iter().all(|b| b.abs() > 1e-3));
        let path = solve_path(&beta, &design, &beta).unwrap();
        for e in &path.entries {
            prop_assert!(kkt_residual(e, &beta, &design, &beta).unwrap() <= 1e-8);
        }
        prop_assert_eq!(path.entries[0].cardinality(), 0);
        let last = path.entries.last().unwrap();
        for (g, b) in last.gamma.iter().zip(&beta) {
            prop_assert!((g - b).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }
}

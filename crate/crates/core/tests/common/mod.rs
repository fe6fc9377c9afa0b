// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::collections::BTreeMap;

use dss_core::data::{load_csv, Dataset, LoadOptions};
use dss_core::posterior::effective_sample_size;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn bundled(name: &str) -> Dataset {
    let path = format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"));
    load_csv(path, &LoadOptions::default()).expect("bundled dataset loads")
}

pub fn crime() -> Dataset {
    bundled("uscrime.csv")
}

pub fn diabetes() -> Dataset {
    bundled("diabetes.csv")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

/// Standardized dataset with `y = Xβ + noise·ε` and mildly correlated columns.
pub fn simulate(seed: u64, n: usize, beta: &[f64], noise: f64) -> Dataset {
    let mut r = rng(seed);
    let p = beta.len();
    let mut x = normal_matrix(&mut r, n, p);
    for j in 1..p {
        let prev = x.column(j - 1).clone_owned();
        x.column_mut(j).axpy(0.3, &prev, 1.0);
    }
    let b = DVector::from_column_slice(beta);
    let e = DVector::from_fn(n, |_, _| r.sample::<f64, _>(StandardNormal));
    let y = &x * b + e * noise;
    let names = (0..p).map(|j| format!("x{j}")).collect();
    Dataset::standardize(x, y, names, "y").expect("simulated data is well posed")
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Monte Carlo standard error of the mean of a (possibly autocorrelated) series.
pub fn mc_se(v: &[f64]) -> f64 {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0);
    let ess = effective_sample_size(v).max(1.0);
    (var / ess).sqrt()
}

pub fn names_of(data: &Dataset, support: &[usize]) -> Vec<String> {
    support.iter().map(|&j| data.names()[j].clone()).collect()
}

/// Best fit at each size by walking subsets in reverse binary order and
/// solving the normal equations with LU.
pub fn brute_force_best(x: &DMatrix<f64>, target: &DVector<f64>) -> BTreeMap<usize, (f64, Vec<usize>)> {
    let (n, p) = x.shape();
    let mut best: BTreeMap<usize, (f64, Vec<usize>)> = BTreeMap::new();
    for mask in (0..(1u32 << p)).rev() {
        let support: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
        let fit = if support.is_empty() {
            target.norm_squared() / n as f64
        } else {
            let xs = x.select_columns(&support);
            let coef = (xs.transpose() * &xs).lu().solve(&(xs.transpose() * target)).unwrap();
            (target - xs * coef).norm_squared() / n as f64
        };
        let k = support.len();
        let better = match best.get(&k) {
            None => true,
            Some((f, _)) => fit < *f,
        };
        if better {
            best.insert(k, (fit, support));
        }
    }
    best
}

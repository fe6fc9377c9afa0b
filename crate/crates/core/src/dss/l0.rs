// SPDX-License-Identifier: Apache-2.0

use itertools::Itertools;
use nalgebra::DVector;

use crate::data::PredictionDesign;
use crate::error::{DssError, Result};
use crate::linalg::{checked_cholesky, principal_submatrix, subvector};

/// Largest `p` for exhaustive best-subset search.
pub const MAX_L0_P: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct L0Fit {
    pub support: Vec<usize>,
    pub gamma: Vec<f64>,
    pub fit: f64,
}

/// Best size-`k` subset for the pseudo-response `Xβ̄`, with a least-squares
/// refit on the subset. Ties keep the lexicographically first subset;
/// subsets with a singular Gram matrix are skipped.
pub fn exact_l0(beta_bar: &[f64], design: &PredictionDesign, k: usize) -> Result<L0Fit> {
    let p = design.cols();
    if p > MAX_L0_P {
        return Err(DssError::Budget(format!(
            "exhaustive subset search needs p <= {MAX_L0_P}, got {p}"
        )));
    }
    if beta_bar.len() != p || k > p {
        return Err(DssError::Argument(format!(
            "need beta_bar of length {p} and k <= {p} (got {} and {k})",
            beta_bar.len()
        )));
    }
    let x = design.x();
    let q = x.transpose() * x / design.rows() as f64;
    let bb = DVector::from_column_slice(beta_bar);
    let b = &q * &bb;
    let energy = bb.dot(&b);

    let mut best: Option<L0Fit> = None;
    for subset in (0..p).combinations(k) {
        let (gamma_s, explained) = if subset.is_empty() {
            (DVector::zeros(0), 0.0)
        } else {
            let Some(chol) = checked_cholesky(&principal_submatrix(&q, &subset)) else {
                continue;
            };
            let bs = subvector(&b, &subset);
            let g = chol.solve(&bs);
            let e = bs.dot(&g);
            (g, e)
        };
        let fit = (energy - explained).max(0.0);
        if best.as_ref().is_none_or(|cur| fit < cur.fit) {
            let mut gamma = vec![0.0; p];
            for (t, &j) in subset.iter().enumerate() {
                gamma[j] = gamma_s[t];
            }
            best = Some(L0Fit {
                support: subset,
                gamma,
                fit,
            });
        }
    }
    best.ok_or_else(|| DssError::SingularDesign(format!("every subset of size {k} is singular")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DesignProvenance;
    use nalgebra::DMatrix;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn design(seed: u64) -> PredictionDesign {
        let mut rng = crate::data::RngConfig::new(seed).rng();
        let x = DMatrix::from_fn(25, 6, |_, _| rng.sample::<f64, _>(StandardNormal));
        PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap()
    }

    #[test]
    fn full_and_empty_supports() {
        let d = design(1);
        let bb = [0.5, -1.0, 0.2, 0.0, 1.3, -0.4];
        let full = exact_l0(&bb, &d, 6).unwrap();
        assert!(full.fit < 1e-12);
        for (g, b) in full.gamma.iter().zip(&bb) {
            assert!((g - b).abs() < 1e-10);
        }
        let empty = exact_l0(&bb, &d, 0).unwrap();
        let xb = d.x() * DVector::from_column_slice(&bb);
        assert!((empty.fit - xb.norm_squared() / 25.0).abs() < 1e-10);
    }

    #[test]
    fn refuses_large_p() {
        let x = DMatrix::from_element(30, 21, 1.0);
        let d = PredictionDesign::new(x, DesignProvenance::UserSupplied).unwrap();
        assert!(matches!(exact_l0(&[0.0; 21], &d, 2), Err(DssError::Budget(_))));
    }
}

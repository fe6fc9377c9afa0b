// SPDX-License-Identifier: Apache-2.0

//! Small dense linear-algebra and reduction helpers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{DssError, Result};

/// Compensated (Neumaier) summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    neumaier_sum(values.iter().copied()) / values.len() as f64
}

/// Quantile of already-sorted data with linear interpolation between order
/// statistics (the usual "type 7" definition).
pub fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Equal-tailed interval `(lo, hi)` holding `level` of the mass.
pub fn equal_tailed_interval(values: &[f64], level: f64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (sorted_quantile(&sorted, tail), sorted_quantile(&sorted, 1.0 - tail))
}

pub fn principal_submatrix(a: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

pub fn subvector(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

/// Cholesky factor of a symmetric matrix, rejecting matrices whose pivots
/// collapse relative to the diagonal (numerically singular).
pub fn checked_cholesky(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let max_diag = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let chol = Cholesky::new(a.clone())?;
    let l = chol.l_dirty();
    let tol = 1e-10 * max_diag.max(f64::MIN_POSITIVE);
    for i in 0..a.nrows() {
        if l[(i, i)] * l[(i, i)] <= tol {
            return None;
        }
    }
    Some(chol)
}

/// Least-squares coefficients of `y` on the columns of `x`.
pub fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let gram = x.transpose() * x;
    let xty = x.transpose() * y;
    let chol = checked_cholesky(&gram)
        .ok_or_else(|| DssError::SingularDesign("design is rank deficient".into()))?;
    Ok(chol.solve(&xty))
}

pub fn numerical_rank(x: &DMatrix<f64>) -> usize {
    let svd = x.clone().svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, v| m.max(*v));
    let tol = smax * (x.nrows().max(x.ncols()) as f64) * f64::EPSILON;
    svd.singular_values.iter().filter(|&&s| s > tol).count()
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + neumaier_sum(values.iter().map(|v| (v - max).exp())).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(sorted_quantile(&v, 0.5), 3.0);
        assert_eq!(sorted_quantile(&v, 0.25), 2.0);
        assert!((sorted_quantile(&v, 0.1) - 1.4).abs() < 1e-12);
        let (lo, hi) = equal_tailed_interval(&[3.0, 3.0, 3.0], 0.9);
        assert_eq!((lo, hi), (3.0, 3.0));
    }

    #[test]
    fn compensated_sum_is_exact_on_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn singular_gram_is_rejected() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(least_squares(&x, &DVector::from_vec(vec![1.0, 2.0, 3.0])).is_err());
        assert_eq!(numerical_rank(&x), 1);
    }
}

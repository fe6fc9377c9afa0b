// SPDX-License-Identifier: Apache-2.0

use nalgebra::DVector;

use crate::data::PredictionDesign;
use crate::error::{DssError, Result};

/// The two parts of `λ‖γ‖₀ + ñ⁻¹‖Xβ̄ − Xγ‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub lambda: f64,
    pub card: usize,
    pub fit: f64,
}

impl LossParts {
    pub fn total(&self) -> f64 {
        self.lambda * self.card as f64 + self.fit
    }
}

pub fn dss_loss(gamma: &[f64], beta_bar: &[f64], design: &PredictionDesign, lambda: f64) -> Result<LossParts> {
    let p = design.cols();
    if gamma.len() != p || beta_bar.len() != p {
        return Err(DssError::Argument(format!(
            "coefficient lengths {} and {} do not match design width {p}",
            gamma.len(),
            beta_bar.len()
        )));
    }
    if lambda < 0.0 {
        return Err(DssError::Argument("lambda must be non-negative".into()));
    }
    let diff = DVector::from_iterator(p, beta_bar.iter().zip(gamma).map(|(b, g)| b - g));
    let fit = (design.x() * diff).norm_squared() / design.rows() as f64;
    Ok(LossParts {
        lambda,
        card: gamma.iter().filter(|g| **g != 0.0).count(),
        fit,
    })
}

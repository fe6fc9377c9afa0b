// SPDX-License-Identifier: Apache-2.0

//! Bayesian posteriors for linear, logistic and Gaussian graphical models,
//! and their sparse summaries by decoupled shrinkage and selection.

pub mod data;
pub mod dss;
pub mod error;
pub mod glm;
pub mod graph;
pub mod horseshoe;
pub mod linalg;
pub mod model_space;
pub mod plot;
pub mod posterior;
pub mod quadrature;

pub use error::{DssError, Result};

// SPDX-License-Identifier: Apache-2.0

//! Decoupled shrinkage and selection: sparse summaries of a posterior mean
//! predictor, and the predictive cost of each level of sparsity.

mod l0;
mod loss;
mod path;
mod summary;

pub use l0::{exact_l0, L0Fit, MAX_L0_P};
pub use loss::{dss_loss, LossParts};
pub use path::{kkt_residual, solve_path, PathEntry, SolutionPath};
pub use summary::{psi_draws, rho_draws, select_heuristic, summarize, Selection, SparsitySummary, SummaryRow, MIN_DRAWS};

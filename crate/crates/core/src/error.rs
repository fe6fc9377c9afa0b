// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = DssError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum DssError {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at row {row}, column '{column}': {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("unsupported prior: {0}")]
    UnsupportedPrior(String),

    #[error("sampler failure at iteration {iteration}: {message}")]
    SamplerFailure { iteration: usize, message: String },

    #[error("solver error: {0}")]
    Solver(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("empty model space: {0}")]
    EmptySpace(String),

    #[error("too few posterior draws: have {have}, need at least {need}")]
    InsufficientDraws { have: usize, need: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pipeline order: {0}")]
    PipelineOrder(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl DssError {
    /// Process exit code for this error class: 2 schema/parse, 3 numeric or
    /// solver, 4 pipeline order.
    pub fn exit_code(&self) -> u8 {
        match self {
            DssError::Schema(_)
            | DssError::Parse { .. }
            | DssError::Argument(_)
            | DssError::Io(_)
            | DssError::Csv(_) => 2,
            DssError::PipelineOrder(_) => 4,
            _ => 3,
        }
    }
}

use thiserror::Error;

/// Errors produced by the estimators, samplers and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite matrix")]
    NonFiniteMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("norms exceed 1 (largest column norm {max_norm})")]
    NormsExceedOne { max_norm: f64 },

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot compose budgets of different kinds")]
    MixedBudgetKinds,

    #[error("budget ledger does not sum to the requested budget: {spent} != {requested}")]
    LedgerMismatch { spent: f64, requested: f64 },

    #[error("csv: {0}")]
    Csv(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line runner: 3 for numerical
    /// failures, 2 for everything caused by bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteMatrix | Error::Numerical(_) | Error::LedgerMismatch { .. } => 3,
            _ => 2,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub type Result<T> = std::result::Result<T, Error>;

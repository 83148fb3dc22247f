//! Metrics, stratified cross-validation with inner model selection, and reporting.

mod cv;
mod metrics;
mod report;

pub use cv::{
    cross_validate, derive_seed, fit_and_score, fold_split, select_hidden, stratified_kfold,
    CVConfig, HiddenSelection, StructureRule, DEFAULT_HIDDEN_GRID,
};
pub use metrics::{accuracy, mse, predicted_classes};
pub use report::{
    reference_for, CVReport, FoldResult, ReferenceRow, SelectionRecord, REFERENCE_ACCURACY,
};

use crate::trainer::TrainError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("class `{class}` has {count} rows, fewer than the {k} folds requested")]
    ClassTooSmall {
        class: String,
        count: usize,
        k: usize,
    },
    #[error("dataset has no class labels")]
    NoLabels,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid cross-validation configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Train(#[from] TrainError),
}

impl From<crate::network::NetworkError> for EvalError {
    fn from(e: crate::network::NetworkError) -> Self {
        EvalError::Train(TrainError::Network(e))
    }
}

//! Evaluation: ROC-AUC, stratified splits, and the batch and streaming
//! experiment protocols.

mod auc;
mod experiment;
mod split;

pub use auc::auc;
pub use experiment::{
    config_hash, run_cv_experiment, run_stream_experiment, run_stream_experiment_with, FoldResult,
    ResultRow, StageResult, StreamConfig, StreamResult,
};
pub use split::{kfold_split, stream_stages, Fold, StagePlan};

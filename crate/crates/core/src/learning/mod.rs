//! Feature assembly, classifiers, cross-validation, metrics and the
//! questionnaire-side statistics.

mod cv;
mod features;
mod labels;
pub mod metrics;
pub mod models;
mod scaler;
pub mod stats;

pub use cv::{holdout, kfold_cv, CvConfig, CvResult, EvalReport, Grouping, Protocol, ReportEntry};
pub use features::{
    assemble_features, feature_names, FeatureVector, Provenance, StudyDataset, FEATURES_PER_DIM, N_FEATURES,
};
pub use labels::{label_from_forms, LabelRule};
pub use metrics::{metrics, Confusion, Metrics};
pub use models::{train_predict, FittedModel, ModelKind, ModelParams, Predictions};
pub use scaler::StandardScaler;
pub use stats::{forms_significance, paired_ttest, student_t_cdf, FormsComparison, TTest};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LearnError {
    #[error("training set contains a single class")]
    SingleClass,
    #[error("non-finite feature at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("kappa undefined: expected agreement is 1")]
    KappaUndefined,
    #[error("k = {k} folds but only {groups} groups")]
    TooFewGroups { k: usize, groups: usize },
    #[error("fold {fold} leaves a single class for training")]
    SingleClassFold { fold: usize },
    #[error("scale `{0}` has zero range across the cohort")]
    ZeroRange(&'static str),
    #[error("t-test needs at least 3 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("differences have zero variance")]
    ZeroVariance,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}

pub type Result<T> = std::result::Result<T, LearnError>;

/// Row-major design matrix validation shared by the models.
pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let p = x.first().ok_or(LearnError::Empty)?.len();
    for (row, r) in x.iter().enumerate() {
        if r.len() != p {
            return Err(LearnError::LengthMismatch(r.len(), p));
        }
        if let Some(column) = r.iter().position(|v| !v.is_finite()) {
            return Err(LearnError::NonFinite { row, column });
        }
    }
    Ok(p)
}

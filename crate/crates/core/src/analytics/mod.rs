//! Correlation screening, feature selection, logistic regression and ROC metrics.

mod cv;
mod logreg;
mod matrix;
mod roc;
mod selection;

use thiserror::Error;

pub use cv::{cross_validate, stratified_group_folds, CvResult, DEFAULT_REG_GRID};
pub use logreg::{sigmoid, train_logreg, LogRegOptions, ScreeningModel, Standardization};
pub use matrix::FeatureMatrix;
pub use roc::{roc_auc, sensitivity_at_specificity, RocCurve, RocPoint};
pub use selection::{pearson, select_consistent_features, Direction, FeatureSelection, SelectionReport, SiteCorrelation};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("correlation needs at least 3 values, got {len}")]
    TooShort { len: usize },
    #[error("correlation is undefined for a constant sequence")]
    UndefinedCorrelation,
    #[error("site {0} has only one class")]
    SingleClassSite(String),
    #[error("sign-consistency selection needs at least 2 sites, got {0}")]
    TooFewSites(usize),
    #[error("value at row {row}, column `{column}` is not finite")]
    NonFinite { row: usize, column: String },
    #[error("duplicate feature column `{0}`")]
    DuplicateColumn(String),
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("label at row {row} is {value}, expected 0 or 1")]
    InvalidLabel { row: usize, value: u8 },
    #[error("matrix has {rows} rows but {field} has {len} entries")]
    RowCountMismatch { rows: usize, field: &'static str, len: usize },
    #[error("class {class} has {count} rows, need at least {needed}")]
    TooFewPerClass { class: u8, count: usize, needed: usize },
    #[error("regularisation strength must be positive and finite, got {0}")]
    InvalidRegStrength(f64),
    #[error("training loss became non-finite")]
    NonFiniteLoss,
    #[error("class {class} has {groups} patients, fewer than {folds} folds")]
    ClassTooSmall { class: u8, groups: usize, folds: usize },
    #[error("regularisation grid is empty")]
    EmptyGrid,
    #[error("ROC analysis needs both classes present")]
    SingleClass,
}

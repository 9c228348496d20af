//! Regressions from feature vectors onto similarity-space coordinates, and
//! their grouped cross-validation.

mod cv;
mod lasso;
mod linear;
mod metrics;
mod report;

pub use cv::{
    beta_sweep, grouped_cross_validation, mark_best, zero_baseline_predict, EvaluationReport, GroupedFolds,
    RegressorKind, RegressorSpec, BEST_BETA_TOLERANCE, DEFAULT_BETA_GRID,
};
pub use lasso::{coordinate_descent, fit_lasso, CoordinateDescent, LASSO_MAX_SWEEPS, LASSO_TOLERANCE};
pub use linear::{fit_linear, LinearModel};
pub use metrics::{evaluate, overfitting_ratios, Metrics};
pub use report::{save_detailed_csv, save_report_csv, write_report_csv, ReportRow, REPORT_HEADER};

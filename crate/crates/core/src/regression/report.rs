use std::io::Write;
use std::path::Path;

use super::cv::{EvaluationReport, RegressorKind};
use super::metrics::Metrics;
use crate::{Error, Result, Scalar};

/// One line of a results table: test scores and overfitting ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    pub regressor: RegressorKind,
    pub feature_space: String,
    pub target_space: String,
    pub shuffled: bool,
    /// Empty for non-lasso rows; several tied values are joined with `;`.
    pub beta: String,
    pub test: Metrics<T>,
    pub overfitting: Metrics<T>,
}

impl<T: Scalar> ReportRow<T> {
    pub fn from_report(r: &EvaluationReport<T>) -> Self {
        ReportRow {
            regressor: r.regressor,
            feature_space: r.feature_space.clone(),
            target_space: r.target_space.clone(),
            shuffled: r.shuffled,
            beta: r.beta.map(|b| b.to_string()).unwrap_or_default(),
            test: r.test,
            overfitting: r.overfitting,
        }
    }

    /// The first best entry of a sweep, listing every tied β.
    pub fn from_sweep(reports: &[EvaluationReport<T>]) -> Option<Self> {
        let first = reports.iter().find(|r| r.best)?;
        let betas: Vec<String> = reports
            .iter()
            .filter(|r| r.best)
            .filter_map(|r| r.beta.map(|b| b.to_string()))
            .collect();
        Some(ReportRow {
            beta: betas.join(";"),
            ..Self::from_report(first)
        })
    }
}

pub const REPORT_HEADER: [&str; 11] = [
    "regressor",
    "feature_space",
    "target_space",
    "shuffled",
    "beta",
    "mse_test",
    "med_test",
    "r2_test",
    "overfit_mse",
    "overfit_med",
    "overfit_r2",
];

pub fn write_report_csv<T: Scalar, W: Write>(rows: &[ReportRow<T>], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in rows {
        w.write_record([
            r.regressor.to_string(),
            r.feature_space.clone(),
            r.target_space.clone(),
            r.shuffled.to_string(),
            r.beta.clone(),
            r.test.mse.to_string(),
            r.test.med.to_string(),
            r.test.r_squared.to_string(),
            r.overfitting.mse.to_string(),
            r.overfitting.med.to_string(),
            r.overfitting.r_squared.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_report_csv<T: Scalar>(rows: &[ReportRow<T>], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_report_csv(rows, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e.into()))
}

/// Every report with training and test scores side by side and the best flag.
pub fn save_detailed_csv<T: Scalar>(reports: &[EvaluationReport<T>], path: &Path) -> Result<()> {
    let wrap = |e: csv::Error| Error::io(path, e.into());
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record([
        "regressor",
        "feature_space",
        "target_space",
        "shuffled",
        "beta",
        "best",
        "mse_train",
        "med_train",
        "r2_train",
        "mse_test",
        "med_test",
        "r2_test",
        "overfit_mse",
        "overfit_med",
        "overfit_r2",
    ])
    .map_err(wrap)?;
    for r in reports {
        w.write_record([
            r.regressor.to_string(),
            r.feature_space.clone(),
            r.target_space.clone(),
            r.shuffled.to_string(),
            r.beta.map(|b| b.to_string()).unwrap_or_default(),
            r.best.to_string(),
            r.train.mse.to_string(),
            r.train.med.to_string(),
            r.train.r_squared.to_string(),
            r.test.mse.to_string(),
            r.test.med.to_string(),
            r.test.r_squared.to_string(),
            r.overfitting.mse.to_string(),
            r.overfitting.med.to_string(),
            r.overfitting.r_squared.to_string(),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

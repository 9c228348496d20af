use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rayon::prelude::*;

use super::lasso::lasso_from_moments;
use super::linear::{linear_from_moments, Moments};
use super::metrics::{evaluate, overfitting_ratios, Metrics};
use crate::data::{FeatureMatrix, TargetAssignment};
use crate::distance::seeded_folds;
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// Regularisation values tried by default in a lasso sweep.
pub const DEFAULT_BETA_GRID: [f64; 14] = [
    0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0,
];

/// Sweep entries whose test MSE is within this of the best are all flagged.
pub const BEST_BETA_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegressorKind {
    ZeroBaseline,
    Linear,
    Lasso,
}

impl fmt::Display for RegressorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegressorKind::ZeroBaseline => "baseline",
            RegressorKind::Linear => "linear",
            RegressorKind::Lasso => "lasso",
        })
    }
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" | "zero_baseline" => Ok(RegressorKind::ZeroBaseline),
            "linear" => Ok(RegressorKind::Linear),
            "lasso" => Ok(RegressorKind::Lasso),
            other => Err(Error::InvalidOption(format!("unknown regressor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressorSpec<T> {
    pub kind: RegressorKind,
    /// Lasso regularisation factor; ignored by the other kinds.
    pub beta: T,
}

impl<T: Scalar> RegressorSpec<T> {
    pub fn zero_baseline() -> Self {
        RegressorSpec {
            kind: RegressorKind::ZeroBaseline,
            beta: T::zero(),
        }
    }

    pub fn linear() -> Self {
        RegressorSpec {
            kind: RegressorKind::Linear,
            beta: T::zero(),
        }
    }

    pub fn lasso(beta: T) -> Result<Self> {
        if !(beta >= T::zero()) || !beta.is_finite() {
            return Err(Error::InvalidOption(format!(
                "beta must be finite and nonnegative, got {beta}"
            )));
        }
        Ok(RegressorSpec {
            kind: RegressorKind::Lasso,
            beta,
        })
    }
}

/// Predicts the origin of the target space for every row.
pub fn zero_baseline_predict<T: Scalar>(rows: usize, dims: usize) -> Matrix<T> {
    Matrix::zeros(rows, dims)
}

/// Grouped cross-validation result for one regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport<T> {
    pub regressor: RegressorKind,
    /// Set for lasso runs only.
    pub beta: Option<T>,
    pub feature_space: String,
    pub target_space: String,
    pub shuffled: bool,
    /// Mean over folds of the in-fold training scores.
    pub train: Metrics<T>,
    /// Scores of the pooled held-out predictions.
    pub test: Metrics<T>,
    pub overfitting: Metrics<T>,
    /// Set by [`mark_best`] on sweep entries tied for the lowest test MSE.
    pub best: bool,
    /// One held-out prediction per feature row, in feature row order.
    pub test_predictions: Matrix<T>,
    pub fold_of_row: Vec<usize>,
}

impl<T> EvaluationReport<T> {
    pub fn with_spaces(mut self, feature_space: &str, target_space: &str) -> Self {
        self.feature_space = feature_space.to_string();
        self.target_space = target_space.to_string();
        self
    }
}

/// Rows of a feature matrix split into folds by group, with the per-fold
/// sums needed to fit linear models computed once and shared across
/// regressors.
pub struct GroupedFolds<'a, T> {
    features: &'a FeatureMatrix<T>,
    targets: Matrix<T>,
    shuffled: bool,
    fold_of_row: Vec<usize>,
    rows_in_fold: Vec<Vec<usize>>,
    moments: OnceLock<Vec<Moments<T>>>,
}

fn select_rows<T: Scalar>(m: &Matrix<T>, rows: &[usize]) -> Matrix<T> {
    let mut out = Matrix::zeros(rows.len(), m.ncols());
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(i).copy_from_slice(m.row(r));
    }
    out
}

impl<'a, T: Scalar> GroupedFolds<'a, T> {
    /// Groups (sorted by id, then shuffled with `seed`) are dealt round-robin
    /// into `folds` folds of equal size.
    pub fn new(
        features: &'a FeatureMatrix<T>,
        assignment: &TargetAssignment<T>,
        folds: usize,
        seed: u64,
    ) -> Result<Self> {
        if folds < 2 {
            return Err(Error::InvalidOption("need at least two folds".into()));
        }
        let by_group = features.rows_by_group();
        if by_group.is_empty() {
            return Err(Error::EmptyInput);
        }
        if !by_group.len().is_multiple_of(folds) {
            return Err(Error::IndivisibleGroups {
                groups: by_group.len(),
                folds,
            });
        }
        let expected = by_group.values().next().map_or(0, Vec::len);
        for (group, rows) in &by_group {
            if rows.len() != expected {
                return Err(Error::UnequalReplicates {
                    group: group.to_string(),
                    expected,
                    found: rows.len(),
                });
            }
        }
        let targets = assignment.targets_for(features)?;
        let fold_of_group = seeded_folds(by_group.len(), folds, seed)?;
        let mut fold_of_row = vec![0; features.rows()];
        for (g, rows) in by_group.values().enumerate() {
            for &r in rows {
                fold_of_row[r] = fold_of_group[g];
            }
        }
        let mut rows_in_fold = vec![Vec::new(); folds];
        for (r, &f) in fold_of_row.iter().enumerate() {
            rows_in_fold[f].push(r);
        }
        Ok(GroupedFolds {
            features,
            targets,
            shuffled: assignment.is_shuffled(),
            fold_of_row,
            rows_in_fold,
            moments: OnceLock::new(),
        })
    }

    pub fn folds(&self) -> usize {
        self.rows_in_fold.len()
    }

    pub fn fold_of_row(&self) -> &[usize] {
        &self.fold_of_row
    }

    /// Target point of every feature row.
    pub fn targets(&self) -> &Matrix<T> {
        &self.targets
    }

    fn moments(&self) -> &[Moments<T>] {
        self.moments.get_or_init(|| {
            let x = self.features.values();
            self.rows_in_fold
                .par_iter()
                .map(|rows| Moments::from_rows(x, &self.targets, rows.iter().copied()))
                .collect()
        })
    }

    /// Trains on all folds but one, predicts the held-out fold, and scores
    /// the pooled held-out predictions once.
    pub fn evaluate(&self, spec: &RegressorSpec<T>) -> Result<EvaluationReport<T>> {
        let (n, t) = (self.targets.nrows(), self.targets.ncols());
        let (train, test, predictions) = match spec.kind {
            RegressorKind::ZeroBaseline => {
                // no fitted parameters: the training score is the score itself
                let predictions = zero_baseline_predict(n, t);
                let test = evaluate(&predictions, &self.targets)?;
                (test, test, predictions)
            }
            RegressorKind::Linear | RegressorKind::Lasso => {
                let x = self.features.values();
                let per_fold: Vec<(Matrix<T>, Metrics<T>)> = (0..self.folds())
                    .into_par_iter()
                    .map(|f| {
                        let mut stats: Option<Moments<T>> = None;
                        for (g, m) in self.moments().iter().enumerate() {
                            if g == f {
                                continue;
                            }
                            match stats.as_mut() {
                                None => stats = Some(m.clone()),
                                Some(s) => s.add(m),
                            }
                        }
                        let stats = stats.ok_or(Error::EmptyTrainingSet)?;
                        let model = match spec.kind {
                            RegressorKind::Lasso => lasso_from_moments(&stats, spec.beta)?,
                            _ => linear_from_moments(&stats)?,
                        };
                        let train_rows: Vec<usize> = (0..n).filter(|&r| self.fold_of_row[r] != f).collect();
                        let train_metrics = evaluate(
                            &model.predict_rows(x, &train_rows),
                            &select_rows(&self.targets, &train_rows),
                        )?;
                        Ok((model.predict_rows(x, &self.rows_in_fold[f]), train_metrics))
                    })
                    .collect::<Result<_>>()?;
                let mut predictions = Matrix::zeros(n, t);
                for (f, (fold_pred, _)) in per_fold.iter().enumerate() {
                    for (i, &r) in self.rows_in_fold[f].iter().enumerate() {
                        predictions.row_mut(r).copy_from_slice(fold_pred.row(i));
                    }
                }
                let train_scores: Vec<Metrics<T>> = per_fold.iter().map(|(_, m)| *m).collect();
                let test = evaluate(&predictions, &self.targets)?;
                (Metrics::mean(&train_scores), test, predictions)
            }
        };
        Ok(EvaluationReport {
            regressor: spec.kind,
            beta: (spec.kind == RegressorKind::Lasso).then_some(spec.beta),
            feature_space: String::new(),
            target_space: String::new(),
            shuffled: self.shuffled,
            overfitting: overfitting_ratios(&train, &test),
            train,
            test,
            best: false,
            test_predictions: predictions,
            fold_of_row: self.fold_of_row.clone(),
        })
    }

    /// One evaluation per β, in grid order, with the best entries flagged.
    pub fn beta_sweep(&self, grid: &[T]) -> Result<Vec<EvaluationReport<T>>> {
        if grid.is_empty() {
            return Err(Error::InvalidOption("beta grid is empty".into()));
        }
        let specs: Vec<RegressorSpec<T>> = grid.iter().map(|&b| RegressorSpec::lasso(b)).collect::<Result<_>>()?;
        let mut reports: Vec<EvaluationReport<T>> =
            specs.par_iter().map(|s| self.evaluate(s)).collect::<Result<_>>()?;
        mark_best(&mut reports);
        Ok(reports)
    }
}

/// Flags every report whose test MSE is within [`BEST_BETA_TOLERANCE`] of
/// the lowest one.
pub fn mark_best<T: Scalar>(reports: &mut [EvaluationReport<T>]) {
    let best = reports.iter().map(|r| r.test.mse).fold(T::infinity(), T::min);
    let tol = T::lit(BEST_BETA_TOLERANCE);
    for r in reports.iter_mut() {
        r.best = r.test.mse <= best + tol;
    }
}

/// Grouped k-fold cross-validation of one regressor.
pub fn grouped_cross_validation<T: Scalar>(
    features: &FeatureMatrix<T>,
    assignment: &TargetAssignment<T>,
    spec: &RegressorSpec<T>,
    folds: usize,
    seed: u64,
) -> Result<EvaluationReport<T>> {
    GroupedFolds::new(features, assignment, folds, seed)?.evaluate(spec)
}

/// Lasso cross-validation for every β in `grid`.
pub fn beta_sweep<T: Scalar>(
    features: &FeatureMatrix<T>,
    assignment: &TargetAssignment<T>,
    grid: &[T],
    folds: usize,
    seed: u64,
) -> Result<Vec<EvaluationReport<T>>> {
    GroupedFolds::new(features, assignment, folds, seed)?.beta_sweep(grid)
}

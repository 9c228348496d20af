use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// Mean squared error (summed over dimensions), mean Euclidean distance and
/// coefficient of determination (averaged over dimensions).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics<T> {
    pub mse: T,
    pub med: T,
    pub r_squared: T,
}

impl<T: Scalar> Metrics<T> {
    pub(crate) fn mean(items: &[Metrics<T>]) -> Metrics<T> {
        let n = T::from_usize(items.len()).unwrap();
        Metrics {
            mse: items.iter().map(|m| m.mse).sum::<T>() / n,
            med: items.iter().map(|m| m.med).sum::<T>() / n,
            r_squared: items.iter().map(|m| m.r_squared).sum::<T>() / n,
        }
    }
}

/// Scores `predictions` against `targets` (rows are samples). R² uses the
/// target mean of the evaluated rows themselves.
pub fn evaluate<T: Scalar>(predictions: &Matrix<T>, targets: &Matrix<T>) -> Result<Metrics<T>> {
    let (n, t) = (targets.nrows(), targets.ncols());
    if predictions.nrows() != n || predictions.ncols() != t {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} predictions for {n}x{t} targets",
            predictions.nrows(),
            predictions.ncols()
        )));
    }
    if n < 2 || t == 0 {
        return Err(Error::ShapeMismatch(format!(
            "cannot evaluate {n} samples of dimension {t}"
        )));
    }
    let nn = T::from_usize(n).unwrap();
    let mut mean = vec![T::zero(); t];
    for row in targets.rows_iter() {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m = *m + v;
        }
    }
    mean.iter_mut().for_each(|m| *m = *m / nn);

    let mut sq_total = T::zero();
    let mut dist_total = T::zero();
    let mut residual = vec![T::zero(); t];
    let mut total = vec![T::zero(); t];
    for (p, y) in predictions.rows_iter().zip(targets.rows_iter()) {
        let mut sq = T::zero();
        for d in 0..t {
            let e = y[d] - p[d];
            sq = sq + e * e;
            residual[d] = residual[d] + e * e;
            total[d] = total[d] + (y[d] - mean[d]) * (y[d] - mean[d]);
        }
        sq_total = sq_total + sq;
        dist_total = dist_total + sq.sqrt();
    }
    if total.iter().any(|&s| s == T::zero()) {
        return Err(Error::ConstantInput);
    }
    let r_squared = (0..t).map(|d| T::one() - residual[d] / total[d]).sum::<T>() / T::from_usize(t).unwrap();
    Ok(Metrics {
        mse: sq_total / nn,
        med: dist_total / nn,
        r_squared,
    })
}

fn ratio<T: Scalar>(num: T, den: T) -> T {
    if num == T::zero() && den == T::zero() {
        T::one()
    } else {
        num / den
    }
}

/// Overfitting degree per metric, oriented so that values above 1 mean
/// overfitting: test/train for the errors, train/test for R² (a plain
/// quotient, so a negative R² keeps its sign). 0/0 counts as 1.
pub fn overfitting_ratios<T: Scalar>(train: &Metrics<T>, test: &Metrics<T>) -> Metrics<T> {
    Metrics {
        mse: ratio(test.mse, train.mse),
        med: ratio(test.med, train.med),
        r_squared: ratio(train.r_squared, test.r_squared),
    }
}

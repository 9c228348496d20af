use log::warn;

use super::linear::{check_training, linear_from_moments, Moments};
use super::LinearModel;
use crate::linalg::Matrix;
use crate::{Error, Result, Scalar};

/// Sweep stops once no weight moves by more than this.
pub const LASSO_TOLERANCE: f64 = 1e-7;
pub const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateDescent<T> {
    pub weights: Vec<T>,
    pub sweeps: usize,
    pub converged: bool,
}

fn soft_threshold<T: Scalar>(v: T, threshold: T) -> T {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        T::zero()
    }
}

/// Cyclic coordinate descent for `min wᵀGw − 2cᵀw + 2·threshold·‖w‖₁`,
/// starting from zero. Coordinates with `G_kk = 0` stay at zero.
pub fn coordinate_descent<T: Scalar>(gram: &Matrix<T>, c: &[T], threshold: T) -> CoordinateDescent<T> {
    let k = c.len();
    let tol = T::lit(LASSO_TOLERANCE);
    let mut w = vec![T::zero(); k];
    // gradient part c − G w, kept current after every coordinate move
    let mut r = c.to_vec();
    for sweep in 1..=LASSO_MAX_SWEEPS {
        let mut max_step = T::zero();
        for j in 0..k {
            let gjj = gram[(j, j)];
            if gjj <= T::zero() {
                continue;
            }
            let rho = r[j] + gjj * w[j];
            let next = soft_threshold(rho, threshold) / gjj;
            let step = next - w[j];
            if step != T::zero() {
                for (ri, &g) in r.iter_mut().zip(gram.row(j)) {
                    *ri = *ri - g * step;
                }
                w[j] = next;
                max_step = max_step.max(step.abs());
            }
        }
        if max_step < tol {
            return CoordinateDescent {
                weights: w,
                sweeps: sweep,
                converged: true,
            };
        }
    }
    CoordinateDescent {
        weights: w,
        sweeps: LASSO_MAX_SWEEPS,
        converged: false,
    }
}

pub(crate) fn lasso_from_moments<T: Scalar>(m: &Moments<T>, beta: T) -> Result<LinearModel<T>> {
    if !(beta >= T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidOption(format!(
            "beta must be finite and nonnegative, got {beta}"
        )));
    }
    if beta == T::zero() {
        return linear_from_moments(m);
    }
    let c = m.centered()?;
    let k = m.k();
    // objective (1/N)Σ(y − f)² + (β/K)‖w‖₁ in centred form: wᵀGw − 2cᵀw + λ‖w‖₁
    let lambda = beta / T::from_usize(k.max(1)).unwrap();
    let threshold = lambda / T::lit(2.0);
    let mut weights = Matrix::zeros(k, m.t());
    for d in 0..m.t() {
        let fit = coordinate_descent(&c.gram, &c.cross.column(d), threshold);
        if !fit.converged {
            warn!(
                "lasso (beta = {beta}) stopped after {} sweeps without converging",
                fit.sweeps
            );
        }
        for (i, &v) in fit.weights.iter().enumerate() {
            weights[(i, d)] = v;
        }
    }
    Ok(c.model(weights))
}

/// Minimises `(1/N)Σ(y_d − f_d)² + (β/K)Σ|w_k|` per target dimension with an
/// unpenalised intercept. `β = 0` is ordinary least squares and is solved
/// directly rather than by coordinate descent.
pub fn fit_lasso<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>, beta: T) -> Result<LinearModel<T>> {
    check_training(x, y)?;
    lasso_from_moments(&Moments::from_rows(x, y, 0..x.nrows()), beta)
}

use crate::linalg::{dot, pivoted_cholesky, Matrix};
use crate::{Error, Result, Scalar};

/// `f_d(x) = intercept[d] + Σₖ weights[(k, d)]·xₖ` for every target dimension d.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub intercept: Vec<T>,
    /// K × t.
    pub weights: Matrix<T>,
}

impl<T: Scalar> LinearModel<T> {
    /// Model that always predicts the origin.
    pub fn zero(k: usize, t: usize) -> Self {
        LinearModel {
            intercept: vec![T::zero(); t],
            weights: Matrix::zeros(k, t),
        }
    }

    pub fn predict_row(&self, x: &[T]) -> Vec<T> {
        let mut out = self.intercept.clone();
        for (k, &xk) in x.iter().enumerate() {
            if xk == T::zero() {
                continue;
            }
            for (o, &w) in out.iter_mut().zip(self.weights.row(k)) {
                *o = *o + xk * w;
            }
        }
        out
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.ncols() != self.weights.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.nrows(),
                found: x.ncols(),
            });
        }
        let mut out = Matrix::zeros(x.nrows(), self.intercept.len());
        for (i, row) in x.rows_iter().enumerate() {
            out.row_mut(i).copy_from_slice(&self.predict_row(row));
        }
        Ok(out)
    }

    pub(crate) fn predict_rows(&self, x: &Matrix<T>, rows: &[usize]) -> Matrix<T> {
        let mut out = Matrix::zeros(rows.len(), self.intercept.len());
        for (i, &r) in rows.iter().enumerate() {
            out.row_mut(i).copy_from_slice(&self.predict_row(x.row(r)));
        }
        out
    }
}

/// Raw sums over a set of rows, enough to fit any of the linear models
/// without revisiting the rows. Sums over disjoint row sets add up.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments<T> {
    n: usize,
    sum_x: Vec<T>,
    sum_y: Vec<T>,
    /// Upper triangle of XᵀX, row-major K × K.
    xx: Vec<T>,
    /// Xᵀ Y, row-major K × t.
    xy: Vec<T>,
}

/// Centred, 1/n-scaled normal equations plus the means they were centred on.
pub(crate) struct Centered<T> {
    pub gram: Matrix<T>,
    pub cross: Matrix<T>,
    pub mean_x: Vec<T>,
    pub mean_y: Vec<T>,
}

impl<T: Scalar> Moments<T> {
    pub fn from_rows(x: &Matrix<T>, y: &Matrix<T>, rows: impl IntoIterator<Item = usize>) -> Self {
        let (k, t) = (x.ncols(), y.ncols());
        let mut m = Moments {
            n: 0,
            sum_x: vec![T::zero(); k],
            sum_y: vec![T::zero(); t],
            xx: vec![T::zero(); k * k],
            xy: vec![T::zero(); k * t],
        };
        for r in rows {
            let (xr, yr) = (x.row(r), y.row(r));
            m.n += 1;
            for (s, &v) in m.sum_x.iter_mut().zip(xr) {
                *s = *s + v;
            }
            for (s, &v) in m.sum_y.iter_mut().zip(yr) {
                *s = *s + v;
            }
            for i in 0..k {
                let xi = xr[i];
                if xi == T::zero() {
                    continue;
                }
                for (g, &xj) in m.xx[i * k + i..(i + 1) * k].iter_mut().zip(&xr[i..]) {
                    *g = *g + xi * xj;
                }
                for (c, &yd) in m.xy[i * t..(i + 1) * t].iter_mut().zip(yr) {
                    *c = *c + xi * yd;
                }
            }
        }
        m
    }

    pub fn add(&mut self, other: &Moments<T>) {
        self.n += other.n;
        for (a, &b) in self.sum_x.iter_mut().zip(&other.sum_x) {
            *a = *a + b;
        }
        for (a, &b) in self.sum_y.iter_mut().zip(&other.sum_y) {
            *a = *a + b;
        }
        for (a, &b) in self.xx.iter_mut().zip(&other.xx) {
            *a = *a + b;
        }
        for (a, &b) in self.xy.iter_mut().zip(&other.xy) {
            *a = *a + b;
        }
    }

    pub fn k(&self) -> usize {
        self.sum_x.len()
    }

    pub fn t(&self) -> usize {
        self.sum_y.len()
    }

    pub fn centered(&self) -> Result<Centered<T>> {
        if self.n == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        let (k, t) = (self.k(), self.t());
        let n = T::from_usize(self.n).unwrap();
        let mean_x: Vec<T> = self.sum_x.iter().map(|&s| s / n).collect();
        let mean_y: Vec<T> = self.sum_y.iter().map(|&s| s / n).collect();
        let mut gram = Matrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = self.xx[i * k + j] / n - mean_x[i] * mean_x[j];
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let mut cross = Matrix::zeros(k, t);
        for i in 0..k {
            for d in 0..t {
                cross[(i, d)] = self.xy[i * t + d] / n - mean_x[i] * mean_y[d];
            }
        }
        Ok(Centered {
            gram,
            cross,
            mean_x,
            mean_y,
        })
    }
}

impl<T: Scalar> Centered<T> {
    pub fn model(&self, weights: Matrix<T>) -> LinearModel<T> {
        let t = self.mean_y.len();
        let intercept = (0..t)
            .map(|d| self.mean_y[d] - dot(&self.mean_x, &weights.column(d)))
            .collect();
        LinearModel { intercept, weights }
    }
}

pub(crate) fn check_training(x: &Matrix<impl Scalar>, y: &Matrix<impl Scalar>) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if x.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.nrows(),
        });
    }
    Ok(())
}

pub(crate) fn linear_from_moments<T: Scalar>(m: &Moments<T>) -> Result<LinearModel<T>> {
    let c = m.centered()?;
    let factor = pivoted_cholesky(&c.gram);
    let rhs: Vec<Vec<T>> = (0..m.t()).map(|d| c.cross.column(d)).collect();
    let solutions = factor.solve_min_norm_many(&rhs);
    let mut weights = Matrix::zeros(m.k(), m.t());
    for (d, w) in solutions.iter().enumerate() {
        for (k, &v) in w.iter().enumerate() {
            weights[(k, d)] = v;
        }
    }
    Ok(c.model(weights))
}

/// Least squares with an unpenalised intercept, one target dimension at a
/// time. Rank-deficient designs get the minimum-norm weight vector.
pub fn fit_linear<T: Scalar>(x: &Matrix<T>, y: &Matrix<T>) -> Result<LinearModel<T>> {
    check_training(x, y)?;
    linear_from_moments(&Moments::from_rows(x, y, 0..x.nrows()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn exact_line() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [5.0]]).unwrap();
        let y = Matrix::from_rows(&[[1.0], [3.0], [5.0], [11.0]]).unwrap();
        let m = fit_linear(&x, &y).unwrap();
        assert!((m.weights[(0, 0)] - 2.0f64).abs() < 1e-9);
        assert!((m.intercept[0] - 1.0f64).abs() < 1e-9);
    }

    #[test]
    fn collinear_columns_get_minimum_norm_weights() {
        // constant column plus a duplicated one
        let x: Matrix<f64> =
            Matrix::from_rows(&[[1.0, 0.0, 0.0], [1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 4.0, 4.0]]).unwrap();
        let y = Matrix::from_rows(&[[3.0], [5.0], [7.0], [11.0]]).unwrap();
        let m = fit_linear(&x, &y).unwrap();
        let p = m.predict(&x).unwrap();
        for i in 0..4 {
            assert!((p[(i, 0)] - y[(i, 0)]).abs() < 1e-9);
        }
        // the slope of 2 is split evenly between the duplicates
        assert!(m.weights[(0, 0)].abs() < 1e-9);
        assert!((m.weights[(1, 0)] - 1.0f64).abs() < 1e-9);
        assert!((m.weights[(2, 0)] - 1.0f64).abs() < 1e-9);
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut rng = crate::rng::indexed_stream(5, 0);
        let (n, k, t) = (50usize, 5usize, 3usize);
        let x = Matrix::from_vec(n, k, (0..n * k).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let y: Matrix<f64> = Matrix::from_vec(n, t, (0..n * t).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let model = fit_linear(&x, &y).unwrap();
        let fitted = model.predict(&x).unwrap();

        // independent route: [1 X] β = y through nalgebra's LU on the normal equations
        let design = nalgebra::DMatrix::from_fn(n, k + 1, |i, j| if j == 0 { 1.0 } else { x[(i, j - 1)] });
        let normal = design.transpose() * &design;
        for d in 0..t {
            let yd = nalgebra::DVector::from_fn(n, |i, _| y[(i, d)]);
            let beta = normal.clone().lu().solve(&(design.transpose() * &yd)).unwrap();
            let oracle = &design * beta;
            for i in 0..n {
                assert!((fitted[(i, d)] - oracle[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn moments_add_up() {
        let mut rng = crate::rng::indexed_stream(2, 0);
        let x = Matrix::from_vec(6, 2, (0..12).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let y = Matrix::from_vec(6, 1, (0..6).map(|_| rng.random_range(-1.0f64..1.0)).collect()).unwrap();
        let mut a = Moments::from_rows(&x, &y, [0, 2, 4]);
        a.add(&Moments::from_rows(&x, &y, [1, 3, 5]));
        let all = Moments::from_rows(&x, &y, 0..6);
        for (u, v) in a.xx.iter().zip(&all.xx) {
            assert!((u - v).abs() < 1e-14);
        }
        assert_eq!(a.n, 6);
    }

    #[test]
    fn empty_training_set() {
        let x = Matrix::<f64>::zeros(0, 2);
        let y = Matrix::<f64>::zeros(0, 1);
        assert!(matches!(fit_linear(&x, &y), Err(Error::EmptyTrainingSet)));
    }
}

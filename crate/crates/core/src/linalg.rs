//! Small dense linear algebra kernels used by the regressions and NNLS.
//!
//! Everything here works on a row-major [`Matrix`] and is generic over
//! [`Scalar`], so the same code serves `f32` feature matrices and the `f64`
//! solvers.

use std::ops::{Index, IndexMut};

use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows. An empty slice gives a 0x0 matrix.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[T]> {
        // chunks_exact panics on a zero chunk size
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == T::zero() {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Cholesky factor `L` (lower triangular) of a symmetric positive definite
/// matrix. Returns `None` when a pivot is not strictly positive.
pub fn cholesky<T: Scalar>(a: &Matrix<T>) -> Option<Matrix<T>> {
    let n = a.nrows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag = diag - l[(j, k)] * l[(j, k)];
        }
        if !(diag > T::zero()) {
            return None;
        }
        let diag = diag.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / diag;
        }
    }
    Some(l)
}

/// Solves `L x = b` in place for lower triangular `L`.
pub fn forward_substitute<T: Scalar>(l: &Matrix<T>, b: &mut [T]) {
    for i in 0..b.len() {
        let mut s = b[i];
        for k in 0..i {
            s = s - l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves `Lᵀ x = b` in place for lower triangular `L`.
pub fn backward_substitute_transposed<T: Scalar>(l: &Matrix<T>, b: &mut [T]) {
    for i in (0..b.len()).rev() {
        let mut s = b[i];
        for k in i + 1..b.len() {
            s = s - l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Rank-revealing Cholesky with symmetric pivoting: `A[p][p] ≈ L Lᵀ` where
/// `L` is `n × rank`.
#[derive(Debug, Clone)]
pub struct PivotedCholesky<T> {
    pub factor: Matrix<T>,
    pub permutation: Vec<usize>,
    pub rank: usize,
}

/// Factorizes a symmetric positive semidefinite matrix. Pivoting stops once
/// the largest remaining diagonal falls below `n · ε · max(diag A)`.
pub fn pivoted_cholesky<T: Scalar>(a: &Matrix<T>) -> PivotedCholesky<T> {
    let n = a.nrows();
    let mut work = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(T::zero(), T::max);
    let tol = T::from_usize(n.max(1)).unwrap() * T::epsilon() * max_diag;
    let mut l = Matrix::zeros(n, n);
    let mut rank = 0;

    for j in 0..n {
        // pick the largest remaining diagonal
        let (mut best, mut best_val) = (j, work[(j, j)]);
        for i in j + 1..n {
            if work[(i, i)] > best_val {
                best = i;
                best_val = work[(i, i)];
            }
        }
        if !(best_val > tol) || max_diag <= T::zero() {
            break;
        }
        if best != j {
            swap_symmetric(&mut work, j, best);
            perm.swap(j, best);
            for k in 0..j {
                let tmp = l[(j, k)];
                l[(j, k)] = l[(best, k)];
                l[(best, k)] = tmp;
            }
        }
        let d = work[(j, j)].sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            l[(i, j)] = work[(i, j)] / d;
        }
        // Schur complement update of the trailing block
        for i in j + 1..n {
            let lij = l[(i, j)];
            for k in j + 1..=i {
                let v = work[(i, k)] - lij * l[(k, j)];
                work[(i, k)] = v;
                work[(k, i)] = v;
            }
        }
        rank += 1;
    }

    let mut factor = Matrix::zeros(n, rank);
    for i in 0..n {
        for k in 0..rank {
            factor[(i, k)] = l[(i, k)];
        }
    }
    PivotedCholesky {
        factor,
        permutation: perm,
        rank,
    }
}

fn swap_symmetric<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    let n = m.nrows();
    for k in 0..n {
        let tmp = m[(a, k)];
        m[(a, k)] = m[(b, k)];
        m[(b, k)] = tmp;
    }
    for k in 0..n {
        let tmp = m[(k, a)];
        m[(k, a)] = m[(k, b)];
        m[(k, b)] = tmp;
    }
}

impl<T: Scalar> PivotedCholesky<T> {
    /// Minimum-norm solution of `A x = b` for `b` in the range of `A`.
    pub fn solve_min_norm(&self, b: &[T]) -> Vec<T> {
        self.solve_min_norm_many(&[b.to_vec()])
            .pop()
            .expect("one right-hand side")
    }

    /// [`Self::solve_min_norm`] for several right-hand sides sharing the factor.
    pub fn solve_min_norm_many(&self, rhs: &[Vec<T>]) -> Vec<Vec<T>> {
        let n = self.permutation.len();
        let r = self.rank;
        if r == 0 {
            return vec![vec![T::zero(); n]; rhs.len()];
        }
        let l = &self.factor;
        // rank-deficient case: z = L M⁻¹ M⁻¹ Lᵀ b with M = LᵀL, the pseudo-inverse of L Lᵀ
        let mc = (r < n).then(|| {
            let mut m = Matrix::zeros(r, r);
            for i in 0..r {
                for j in 0..=i {
                    let mut s = T::zero();
                    for k in 0..n {
                        s = s + l[(k, i)] * l[(k, j)];
                    }
                    m[(i, j)] = s;
                    m[(j, i)] = s;
                }
            }
            cholesky(&m).expect("LᵀL is positive definite for a full-rank factor")
        });
        rhs.iter()
            .map(|b| {
                let bp: Vec<T> = self.permutation.iter().map(|&p| b[p]).collect();
                let z = match &mc {
                    None => {
                        let mut z = bp;
                        forward_substitute(l, &mut z);
                        backward_substitute_transposed(l, &mut z);
                        z
                    }
                    Some(mc) => {
                        let mut v: Vec<T> = (0..r)
                            .map(|i| (0..n).fold(T::zero(), |acc, k| acc + l[(k, i)] * bp[k]))
                            .collect();
                        for _ in 0..2 {
                            forward_substitute(mc, &mut v);
                            backward_substitute_transposed(mc, &mut v);
                        }
                        (0..n)
                            .map(|k| (0..r).fold(T::zero(), |acc, i| acc + l[(k, i)] * v[i]))
                            .collect()
                    }
                };
                let mut x = vec![T::zero(); n];
                for (i, &p) in self.permutation.iter().enumerate() {
                    x[p] = z[i];
                }
                x
            })
            .collect()
    }
}

/// Least squares `min ‖A x − b‖` by Householder QR. `A` must have full
/// column rank; returns `None` if a column is numerically dependent.
pub fn least_squares_qr<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let (m, n) = (a.nrows(), a.ncols());
    if n == 0 {
        return Some(Vec::new());
    }
    if m < n {
        return None;
    }
    let mut r = a.clone();
    let mut rhs = b.to_vec();
    let scale = a.as_slice().iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let tol = T::from_usize(m.max(n)).unwrap() * T::epsilon() * scale;

    for j in 0..n {
        let norm = (j..m).fold(T::zero(), |acc, i| acc + r[(i, j)] * r[(i, j)]).sqrt();
        if !(norm > tol) {
            return None;
        }
        let alpha = if r[(j, j)] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (j..m).map(|i| r[(i, j)]).collect();
        v[0] = v[0] - alpha;
        let vnorm2 = dot(&v, &v);
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::lit(2.0);
        for c in j..n {
            let s = (j..m).fold(T::zero(), |acc, i| acc + v[i - j] * r[(i, c)]);
            let f = two * s / vnorm2;
            for i in j..m {
                r[(i, c)] = r[(i, c)] - f * v[i - j];
            }
        }
        let s = (j..m).fold(T::zero(), |acc, i| acc + v[i - j] * rhs[i]);
        let f = two * s / vnorm2;
        for i in j..m {
            rhs[i] = rhs[i] - f * v[i - j];
        }
    }

    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in i + 1..n {
            s = s - r[(i, k)] * x[k];
        }
        x[i] = s / r[(i, i)];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = Matrix::from_rows(&[[4.0, 2.0], [2.0, 3.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        let mut x = vec![2.0, 1.0];
        forward_substitute(&l, &mut x);
        backward_substitute_transposed(&l, &mut x);
        approx(&x, &[0.5, 0.0], 1e-14);
    }

    #[test]
    fn pivoted_cholesky_min_norm_on_singular_matrix() {
        // A = v vᵀ with v = (1, 1): solutions of A x = (2, 2) are x1 + x2 = 2,
        // the minimum-norm one is (1, 1)
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let f = pivoted_cholesky(&a);
        assert_eq!(f.rank, 1);
        approx(&f.solve_min_norm(&[2.0, 2.0]), &[1.0, 1.0], 1e-12);
    }

    #[test]
    fn pivoted_cholesky_full_rank_matches_inverse() {
        let a = Matrix::from_rows(&[[2.0, 0.5, 0.0], [0.5, 3.0, 1.0], [0.0, 1.0, 5.0]]).unwrap();
        let f = pivoted_cholesky(&a);
        assert_eq!(f.rank, 3);
        let x = f.solve_min_norm(&[1.0, 2.0, 3.0]);
        let ax: Vec<f64> = (0..3).map(|i| dot(a.row(i), &x)).collect();
        approx(&ax, &[1.0, 2.0, 3.0], 1e-12);
    }

    #[test]
    fn qr_least_squares_fits_line() {
        let a = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]).unwrap();
        let x = least_squares_qr(&a, &[1.0, 3.0, 5.0]).unwrap();
        approx(&x, &[1.0, 2.0], 1e-12);
        let dependent = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(least_squares_qr(&dependent, &[1.0, 1.0]).is_none());
    }
}

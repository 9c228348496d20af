//! Non-negative least squares, Lawson–Hanson active-set method.
//!
//! The solver works on the normal equations `G = AᵀA`, `c = Aᵀb`, which
//! keeps every passive-set subproblem at the size of the passive set rather
//! than the number of observations.

use crate::linalg::{backward_substitute_transposed, cholesky, dot, forward_substitute, Matrix};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution<T> {
    pub x: Vec<T>,
    /// `‖A x − b‖`; only filled by [`nnls`], which has `A` at hand.
    pub residual_norm: T,
    /// Negative gradient `Aᵀ(b − A x)` at the solution.
    pub dual: Vec<T>,
    pub iterations: usize,
}

/// Solves `min ‖A x − b‖` subject to `x ≥ 0`.
pub fn nnls<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Result<NnlsSolution<T>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: b.len(),
        });
    }
    let k = a.ncols();
    let mut gram = Matrix::zeros(k, k);
    let mut c = vec![T::zero(); k];
    for (row, &bi) in a.rows_iter().zip(b) {
        for i in 0..k {
            let ri = row[i];
            if ri == T::zero() {
                continue;
            }
            c[i] = c[i] + ri * bi;
            for j in i..k {
                gram[(i, j)] = gram[(i, j)] + ri * row[j];
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    let scale =
        a.as_slice().iter().fold(T::zero(), |m, v| m.max(v.abs())) * b.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let tol = T::lit(10.0) * T::epsilon() * T::from_usize(a.nrows().max(k).max(1)).unwrap() * scale;
    let mut sol = nnls_gram(&gram, &c, tol)?;
    let residual = a.rows_iter().zip(b).fold(T::zero(), |acc, (row, &bi)| {
        let r = dot(row, &sol.x) - bi;
        acc + r * r
    });
    sol.residual_norm = residual.sqrt();
    Ok(sol)
}

/// Lawson–Hanson on the normal equations. `tol` is the dual-feasibility
/// threshold: a coordinate enters the passive set only when its negative
/// gradient exceeds it.
pub fn nnls_gram<T: Scalar>(gram: &Matrix<T>, c: &[T], tol: T) -> Result<NnlsSolution<T>> {
    let k = c.len();
    if gram.nrows() != k || gram.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: gram.nrows(),
        });
    }
    let max_iterations = 3 * k + 10;
    let mut x = vec![T::zero(); k];
    let mut passive = vec![false; k];
    // coordinates whose column is numerically dependent on the passive set
    let mut blocked = vec![false; k];
    let mut iterations = 0;

    let dual_of = |x: &[T]| -> Vec<T> { (0..k).map(|i| c[i] - dot(gram.row(i), x)).collect() };
    let mut w = dual_of(&x);

    loop {
        let candidate = (0..k)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal));
        let Some(j) = candidate else { break };
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::NnlsIterationLimit(max_iterations));
        }
        passive[j] = true;

        loop {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let Some(z) = solve_passive(gram, c, &idx) else {
                passive[j] = false;
                blocked[j] = true;
                break;
            };
            if z.iter().all(|&v| v > T::zero()) {
                for (&i, &v) in idx.iter().zip(&z) {
                    x[i] = v;
                }
                break;
            }
            // step back towards x until the first passive coordinate hits zero
            let mut alpha = T::one();
            for (&i, &v) in idx.iter().zip(&z) {
                if v <= T::zero() {
                    let step = x[i] / (x[i] - v);
                    if step < alpha {
                        alpha = step;
                    }
                }
            }
            for (&i, &v) in idx.iter().zip(&z) {
                x[i] = x[i] + alpha * (v - x[i]);
            }
            let mut removed = false;
            for &i in &idx {
                if x[i] <= T::zero() || (i != j && x[i] <= tol) {
                    x[i] = T::zero();
                    passive[i] = false;
                    removed = true;
                }
            }
            if !removed {
                // alpha rounding left every coordinate positive; drop the smallest
                let &smallest = idx
                    .iter()
                    .min_by(|&&a, &&b| x[a].partial_cmp(&x[b]).unwrap_or(std::cmp::Ordering::Equal))
                    .expect("passive set is nonempty");
                x[smallest] = T::zero();
                passive[smallest] = false;
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        w = dual_of(&x);
        // a fresh dual unblocks coordinates whose dependence may have changed
        if blocked.iter().any(|&b| b) && passive.iter().any(|&p| p) {
            for (i, b) in blocked.iter_mut().enumerate() {
                if *b && !passive[i] && w[i] <= tol {
                    *b = false;
                }
            }
        }
    }

    Ok(NnlsSolution {
        x,
        residual_norm: T::nan(),
        dual: w,
        iterations,
    })
}

fn solve_passive<T: Scalar>(gram: &Matrix<T>, c: &[T], idx: &[usize]) -> Option<Vec<T>> {
    let p = idx.len();
    let mut sub = Matrix::zeros(p, p);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            sub[(a, b)] = gram[(i, j)];
        }
    }
    let l = cholesky(&sub)?;
    // reject near-singular pivots: they signal a dependent column
    let max_diag = (0..p).map(|i| gram[(idx[i], idx[i])]).fold(T::zero(), T::max);
    let floor = T::from_usize(p).unwrap() * T::epsilon() * max_diag;
    if (0..p).any(|i| l[(i, i)] * l[(i, i)] <= floor) {
        return None;
    }
    let mut z: Vec<T> = idx.iter().map(|&i| c[i]).collect();
    forward_substitute(&l, &mut z);
    backward_substitute_transposed(&l, &mut z);
    Some(z)
}

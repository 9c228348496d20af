//! Domain types shared by every stage of the pipeline.
//!
//! Rows are always matched by label, never by position: a dissimilarity
//! matrix, a configuration and a feature matrix may list the same stimuli in
//! different orders.

mod csv;

use std::collections::{BTreeMap, HashSet};

pub use self::csv::{
    load_configuration_csv, load_dissimilarity_csv, load_feature_csv, read_configuration_csv, read_dissimilarity_csv,
    read_feature_csv, save_configuration_csv, save_dissimilarity_csv, save_feature_csv, write_configuration_csv,
};
use crate::linalg::Matrix;
use crate::rng::indexed_stream;
use crate::{Error, Result, Scalar};

/// Absolute asymmetry below which a dissimilarity matrix is symmetrized by
/// averaging instead of rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_unique(labels: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// Positions of `wanted` labels inside `have`, failing unless both are the
/// same set.
pub(crate) fn alignment(have: &[String], wanted: &[String]) -> Result<Vec<usize>> {
    if have.len() != wanted.len() {
        return Err(Error::LabelMismatch(format!(
            "{} labels vs {} labels",
            have.len(),
            wanted.len()
        )));
    }
    let index: BTreeMap<&str, usize> = have.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    wanted
        .iter()
        .map(|l| {
            index
                .get(l.as_str())
                .copied()
                .ok_or_else(|| Error::LabelMismatch(format!("`{l}` not present")))
        })
        .collect()
}

/// Symmetric matrix of pairwise stimulus dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix<T> {
    labels: Vec<String>,
    values: Matrix<T>,
}

impl<T: Scalar> DissimilarityMatrix<T> {
    /// Validates and stores the matrix. Asymmetries up to
    /// [`SYMMETRY_TOLERANCE`] are averaged away.
    pub fn new(labels: Vec<String>, mut values: Matrix<T>) -> Result<Self> {
        let n = labels.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::ShapeMismatch(format!(
                "{n} labels for a {}x{} matrix",
                values.nrows(),
                values.ncols()
            )));
        }
        check_unique(&labels)?;
        if !values.all_finite() {
            return Err(Error::NonFinite {
                context: "dissimilarity matrix",
            });
        }
        let tol = T::lit(SYMMETRY_TOLERANCE);
        for i in 0..n {
            if values[(i, i)] != T::zero() {
                return Err(Error::NonzeroDiagonal { index: i });
            }
            for j in 0..n {
                if values[(i, j)] < T::zero() {
                    return Err(Error::NegativeEntry { row: i, col: j });
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (values[(i, j)], values[(j, i)]);
                let diff = (a - b).abs();
                if diff > tol {
                    return Err(Error::AsymmetricMatrix {
                        row: i,
                        col: j,
                        difference: diff.to_f64_lossy(),
                    });
                }
                if a != b {
                    let avg = (a + b) / T::lit(2.0);
                    values[(i, j)] = avg;
                    values[(j, i)] = avg;
                }
            }
        }
        Ok(DissimilarityMatrix { labels, values })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }

    /// Entries above the diagonal in row-major order: (0,1), (0,2), …, (n−2,n−1).
    pub fn upper_triangle(&self) -> Vec<T> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                out.push(self.values[(i, j)]);
            }
        }
        out
    }

    /// Same matrix with rows and columns permuted into `labels` order.
    pub fn reordered(&self, labels: &[String]) -> Result<Self> {
        let idx = alignment(&self.labels, labels)?;
        let n = idx.len();
        let mut values = Matrix::zeros(n, n);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                values[(a, b)] = self.values[(i, j)];
            }
        }
        Ok(DissimilarityMatrix {
            labels: labels.to_vec(),
            values,
        })
    }
}

/// Anything with one labelled row per stimulus.
pub trait Representation<T> {
    fn row_labels(&self) -> &[String];
    fn matrix(&self) -> &Matrix<T>;
}

/// Points of the stimuli in a `t`-dimensional similarity space.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    labels: Vec<String>,
    coords: Matrix<T>,
}

impl<T: Scalar> Configuration<T> {
    pub fn new(labels: Vec<String>, coords: Matrix<T>) -> Result<Self> {
        if coords.nrows() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                coords.nrows()
            )));
        }
        if coords.ncols() == 0 {
            return Err(Error::InvalidOption(
                "configuration needs at least one dimension".into(),
            ));
        }
        check_unique(&labels)?;
        if !coords.all_finite() {
            return Err(Error::NonFinite {
                context: "configuration",
            });
        }
        Ok(Configuration { labels, coords })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn dims(&self) -> usize {
        self.coords.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> &Matrix<T> {
        &self.coords
    }

    pub fn point(&self, i: usize) -> &[T] {
        self.coords.row(i)
    }

    pub fn reordered(&self, labels: &[String]) -> Result<Self> {
        let idx = alignment(&self.labels, labels)?;
        let rows: Vec<&[T]> = idx.iter().map(|&i| self.coords.row(i)).collect();
        Ok(Configuration {
            labels: labels.to_vec(),
            coords: Matrix::from_rows(&rows)?,
        })
    }

    /// Translates the configuration so every coordinate has mean zero.
    pub fn centered(&self) -> Self {
        let mut coords = self.coords.clone();
        center_columns(&mut coords);
        Configuration {
            labels: self.labels.clone(),
            coords,
        }
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> T {
        euclidean(self.point(i), self.point(j))
    }
}

impl<T: Scalar> Representation<T> for Configuration<T> {
    fn row_labels(&self) -> &[String] {
        &self.labels
    }

    fn matrix(&self) -> &Matrix<T> {
        &self.coords
    }
}

pub(crate) fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        .sqrt()
}

pub(crate) fn center_columns<T: Scalar>(m: &mut Matrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return;
    }
    let nt = T::from_usize(n).unwrap();
    for j in 0..m.ncols() {
        let mean = (0..n).fold(T::zero(), |acc, i| acc + m[(i, j)]) / nt;
        for i in 0..n {
            m[(i, j)] = m[(i, j)] - mean;
        }
    }
}

/// Centers the configuration and rescales it by one scalar so the mean
/// squared norm of the points is 1. Regression targets are always passed
/// through this, which pins the zero baseline at MSE 1 and R² 0.
pub fn normalize_configuration<T: Scalar>(config: &Configuration<T>) -> Result<Configuration<T>> {
    let n = config.n();
    if n < 2 {
        return Err(Error::DegenerateConfiguration("need at least two points"));
    }
    let mut coords = config.coords.clone();
    center_columns(&mut coords);
    let total = coords.as_slice().iter().fold(T::zero(), |acc, &v| acc + v * v);
    let mean_sq = total / T::from_usize(n).unwrap();
    if !(mean_sq > T::zero()) {
        return Err(Error::DegenerateConfiguration("all points coincide"));
    }
    let scale = mean_sq.sqrt().recip();
    let coords = coords.map(|v| v * scale);
    Ok(Configuration {
        labels: config.labels.clone(),
        coords,
    })
}

/// Feature vectors, one row per (possibly augmented) sample. `group_ids`
/// name the original stimulus each row was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    sample_ids: Vec<String>,
    group_ids: Vec<String>,
    values: Matrix<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(sample_ids: Vec<String>, group_ids: Vec<String>, values: Matrix<T>) -> Result<Self> {
        if sample_ids.len() != values.nrows() || group_ids.len() != values.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "{} sample ids and {} group ids for {} rows",
                sample_ids.len(),
                group_ids.len(),
                values.nrows()
            )));
        }
        check_unique(&sample_ids)?;
        if !values.all_finite() {
            return Err(Error::NonFinite {
                context: "feature matrix",
            });
        }
        Ok(FeatureMatrix {
            sample_ids,
            group_ids,
            values,
        })
    }

    /// One row per stimulus; each sample is its own group.
    pub fn ungrouped(sample_ids: Vec<String>, values: Matrix<T>) -> Result<Self> {
        let groups = sample_ids.clone();
        Self::new(sample_ids, groups, values)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn k(&self) -> usize {
        self.values.ncols()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn group_ids(&self) -> &[String] {
        &self.group_ids
    }

    pub fn values(&self) -> &Matrix<T> {
        &self.values
    }

    /// Distinct group ids, sorted.
    pub fn groups(&self) -> Vec<String> {
        let mut g: Vec<String> = self.group_ids.clone();
        g.sort();
        g.dedup();
        g
    }

    /// Row indices of each group, keyed by group id.
    pub fn rows_by_group(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, g) in self.group_ids.iter().enumerate() {
            map.entry(g.as_str()).or_default().push(i);
        }
        map
    }
}

impl<T: Scalar> Representation<T> for FeatureMatrix<T> {
    fn row_labels(&self) -> &[String] {
        &self.sample_ids
    }

    fn matrix(&self) -> &Matrix<T> {
        &self.values
    }
}

/// Seed for which [`TargetAssignment::shuffled`] applies the identity
/// permutation (while still marking the assignment as shuffled).
pub const IDENTITY_SHUFFLE_SEED: u64 = u64::MAX;

/// Regression target point for every group.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetAssignment<T> {
    groups: Vec<String>,
    points: Matrix<T>,
    shuffled: bool,
}

impl<T: Scalar> TargetAssignment<T> {
    /// Each configuration label becomes a group mapped onto its own point.
    pub fn from_configuration(config: &Configuration<T>) -> Self {
        let mut order: Vec<usize> = (0..config.n()).collect();
        order.sort_by(|&a, &b| config.labels[a].cmp(&config.labels[b]));
        let rows: Vec<&[T]> = order.iter().map(|&i| config.point(i)).collect();
        TargetAssignment {
            groups: order.iter().map(|&i| config.labels[i].clone()).collect(),
            points: Matrix::from_rows(&rows).expect("rows share the configuration width"),
            shuffled: false,
        }
    }

    pub fn dims(&self) -> usize {
        self.points.ncols()
    }

    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn is_shuffled(&self) -> bool {
        self.shuffled
    }

    pub fn target(&self, group: &str) -> Option<&[T]> {
        self.groups
            .binary_search_by(|g| g.as_str().cmp(group))
            .ok()
            .map(|i| self.points.row(i))
    }

    /// Applies a seeded uniform permutation to the group → point mapping.
    pub fn shuffled(&self, seed: u64) -> Self {
        use rand::seq::SliceRandom;

        let mut perm: Vec<usize> = (0..self.groups.len()).collect();
        if seed != IDENTITY_SHUFFLE_SEED {
            perm.shuffle(&mut indexed_stream(seed, 0));
        }
        let rows: Vec<&[T]> = perm.iter().map(|&i| self.points.row(i)).collect();
        TargetAssignment {
            groups: self.groups.clone(),
            points: Matrix::from_rows(&rows).expect("rows share the target width"),
            shuffled: true,
        }
    }

    /// Target matrix with one row per feature row. Every group in the
    /// features needs a target point.
    pub fn targets_for(&self, features: &FeatureMatrix<T>) -> Result<Matrix<T>> {
        let mut out = Matrix::zeros(features.rows(), self.dims());
        for (i, g) in features.group_ids().iter().enumerate() {
            let point = self
                .target(g)
                .ok_or_else(|| Error::LabelMismatch(format!("group `{g}` has no target point")))?;
            out.row_mut(i).copy_from_slice(point);
        }
        Ok(out)
    }
}

/// Free function form of [`TargetAssignment::shuffled`].
pub fn shuffle_targets<T: Scalar>(assignment: &TargetAssignment<T>, seed: u64) -> TargetAssignment<T> {
    assignment.shuffled(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn config(rows: &[&[f64]]) -> Configuration<f64> {
        let l = (0..rows.len()).map(|i| format!("s{}", i + 1)).collect();
        Configuration::new(l, Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn dissimilarity_validation() {
        let ok = Matrix::from_rows(&[[0.0, 3.0], [3.0, 0.0]]).unwrap();
        let d = DissimilarityMatrix::new(labels(&["a", "b"]), ok).unwrap();
        assert_eq!(d.get(0, 1), 3.0);

        let near = Matrix::from_rows(&[[0.0, 3.0], [3.0 + 1e-12, 0.0]]).unwrap();
        let d = DissimilarityMatrix::new(labels(&["a", "b"]), near).unwrap();
        assert!((d.get(1, 0) - 3.0f64).abs() < 1e-11);
        assert_eq!(d.get(0, 1), d.get(1, 0));

        let far = Matrix::from_rows(&[[0.0, 3.0], [3.1, 0.0]]).unwrap();
        assert!(matches!(
            DissimilarityMatrix::new(labels(&["a", "b"]), far),
            Err(Error::AsymmetricMatrix { .. })
        ));
        let diag = Matrix::from_rows(&[[1.0, 3.0], [3.0, 0.0]]).unwrap();
        assert!(matches!(
            DissimilarityMatrix::new(labels(&["a", "b"]), diag),
            Err(Error::NonzeroDiagonal { index: 0 })
        ));
        let neg = Matrix::from_rows(&[[0.0, -1.0], [-1.0, 0.0]]).unwrap();
        assert!(matches!(
            DissimilarityMatrix::new(labels(&["a", "b"]), neg),
            Err(Error::NegativeEntry { .. })
        ));
        let dup = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            DissimilarityMatrix::new(labels(&["a", "a"]), dup),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn reorder_by_label() {
        let m = Matrix::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]]).unwrap();
        let d = DissimilarityMatrix::new(labels(&["a", "b", "c"]), m).unwrap();
        let r = d.reordered(&labels(&["c", "a", "b"])).unwrap();
        assert_eq!(r.get(0, 1), 2.0);
        assert_eq!(r.get(0, 2), 3.0);
        assert!(d.reordered(&labels(&["a", "b", "x"])).is_err());
    }

    #[test]
    fn normalize_examples() {
        let fixed = normalize_configuration(&config(&[&[1.0], &[-1.0]])).unwrap();
        assert_eq!(fixed.coords().as_slice(), &[1.0, -1.0]);

        let moved = normalize_configuration(&config(&[&[0.0], &[2.0]])).unwrap();
        assert_eq!(moved.coords().as_slice(), &[-1.0, 1.0]);

        assert!(matches!(
            normalize_configuration(&config(&[&[0.0, 0.0], &[0.0, 0.0]])),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let l = (0..64).map(|i| format!("g{i:02}")).collect();
        let c = Configuration::new(l, Matrix::from_rows(&rows).unwrap()).unwrap();
        let a = TargetAssignment::from_configuration(&c);

        let id = a.shuffled(IDENTITY_SHUFFLE_SEED);
        assert!(id.is_shuffled());
        assert_eq!(id.points, a.points);

        let s = a.shuffled(3);
        assert!(s.is_shuffled());
        assert_ne!(s.points, a.points);
        let mut before: Vec<f64> = a.points.column(0);
        let mut after: Vec<f64> = s.points.column(0);
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        assert_eq!(before, after);
        // rows move as whole points
        for g in s.groups() {
            let p = s.target(g).unwrap();
            assert_eq!(p[1], p[0] * p[0]);
        }
    }
}

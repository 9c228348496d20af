//! Distances between stimulus representations and their correlation with
//! dissimilarity ratings.
//!
//! Three distance functions are supported, each optionally with
//! non-negative per-dimension weights:
//!
//! * Euclidean `√Σ wₖ(uₖ − vₖ)²`
//! * Manhattan `Σ wₖ|uₖ − vₖ|`
//! * negated inner product `−Σ wₖuₖvₖ`
//!
//! Weights are learned by NNLS on stimulus pairs with k-fold cross
//! validation; correlations then use the held-out predictions.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::data::{alignment, DissimilarityMatrix, Representation};
use crate::linalg::{dot, Matrix};
use crate::nnls::nnls;
use crate::rng::indexed_stream;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DistanceMetric {
    Euclidean,
    Manhattan,
    InnerProduct,
}

impl DistanceMetric {
    pub const ALL: [DistanceMetric; 3] = [
        DistanceMetric::Euclidean,
        DistanceMetric::Manhattan,
        DistanceMetric::InnerProduct,
    ];
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistanceMetric::Euclidean => "euclidean",
            DistanceMetric::Manhattan => "manhattan",
            DistanceMetric::InnerProduct => "inner_product",
        })
    }
}

impl FromStr for DistanceMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(DistanceMetric::Euclidean),
            "manhattan" => Ok(DistanceMetric::Manhattan),
            "inner_product" | "inner-product" => Ok(DistanceMetric::InnerProduct),
            other => Err(Error::InvalidOption(format!("unknown distance metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSpec<T> {
    pub metric: DistanceMetric,
    pub weights: Option<Vec<T>>,
}

impl<T: Scalar> DistanceSpec<T> {
    pub fn unweighted(metric: DistanceMetric) -> Self {
        DistanceSpec { metric, weights: None }
    }

    pub fn weighted(metric: DistanceMetric, weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !(*w >= T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidOption(
                "distance weights must be finite and nonnegative".into(),
            ));
        }
        if weights.iter().all(|w| *w == T::zero()) {
            return Err(Error::InvalidOption("distance weights must not all be zero".into()));
        }
        Ok(DistanceSpec {
            metric,
            weights: Some(weights),
        })
    }

    /// Distance between two vectors, before any shift.
    pub fn distance(&self, u: &[T], v: &[T]) -> T {
        let w = |k: usize| self.weights.as_ref().map_or(T::one(), |w| w[k]);
        match self.metric {
            DistanceMetric::Euclidean => (0..u.len())
                .fold(T::zero(), |acc, k| acc + w(k) * (u[k] - v[k]) * (u[k] - v[k]))
                .sqrt(),
            DistanceMetric::Manhattan => (0..u.len()).fold(T::zero(), |acc, k| acc + w(k) * (u[k] - v[k]).abs()),
            DistanceMetric::InnerProduct => -(0..u.len()).fold(T::zero(), |acc, k| acc + w(k) * u[k] * v[k]),
        }
    }
}

/// Pairwise distances as a dissimilarity matrix. For the negated inner
/// product the off-diagonal entries are shifted by `shift` (the magnitude of
/// the most negative value) and the diagonal set to zero; pair ordering is
/// unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDistances<T> {
    pub matrix: DissimilarityMatrix<T>,
    pub shift: T,
}

pub fn pairwise_distances<T: Scalar, R: Representation<T>>(
    representation: &R,
    spec: &DistanceSpec<T>,
) -> Result<PairwiseDistances<T>> {
    let rows = representation.matrix();
    if let Some(w) = &spec.weights {
        if w.len() != rows.ncols() {
            return Err(Error::DimensionMismatch {
                expected: rows.ncols(),
                found: w.len(),
            });
        }
    }
    let n = rows.nrows();
    let mut m = Matrix::zeros(n, n);
    let mut min = T::infinity();
    for i in 0..n {
        for j in i + 1..n {
            let d = spec.distance(rows.row(i), rows.row(j));
            m[(i, j)] = d;
            m[(j, i)] = d;
            min = min.min(d);
        }
    }
    let shift = if min < T::zero() { -min } else { T::zero() };
    if shift > T::zero() {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[(i, j)] = m[(i, j)] + shift;
                }
            }
        }
    }
    let matrix = DissimilarityMatrix::new(representation.row_labels().to_vec(), m)?;
    Ok(PairwiseDistances { matrix, shift })
}

/// Pearson's r.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidOption("correlation needs at least two samples".into()));
    }
    let n = T::from_usize(x.len()).unwrap();
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::ConstantInput);
    }
    let r = sxy / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn fractional_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // positions start..=end hold ranks start+1..=end+1
        let rank = T::from_usize(start + end + 2).unwrap() / T::lit(2.0);
        for &i in &order[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }
    ranks
}

/// Spearman's ρ: Pearson's r on fractional ranks.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// Per-dimension terms whose weighted sum models the (transformed)
/// distance of a pair: `(uₖ − vₖ)²`, `|uₖ − vₖ|` or `uₖvₖ`.
pub fn pair_contributions<T: Scalar>(u: &[T], v: &[T], metric: DistanceMetric) -> Vec<T> {
    u.iter()
        .zip(v)
        .map(|(&a, &b)| match metric {
            DistanceMetric::Euclidean => (a - b) * (a - b),
            DistanceMetric::Manhattan => (a - b).abs(),
            DistanceMetric::InnerProduct => a * b,
        })
        .collect()
}

/// Regression response for a pair with dissimilarity `delta`.
fn response<T: Scalar>(delta: T, metric: DistanceMetric) -> T {
    match metric {
        DistanceMetric::Euclidean => delta * delta,
        DistanceMetric::Manhattan => delta,
        DistanceMetric::InnerProduct => -delta,
    }
}

/// Turns a fitted response back into a distance.
fn predicted_distance<T: Scalar>(fitted: T, metric: DistanceMetric) -> T {
    match metric {
        DistanceMetric::Euclidean => fitted.max(T::zero()).sqrt(),
        DistanceMetric::Manhattan => fitted,
        DistanceMetric::InnerProduct => -fitted,
    }
}

/// Learned dimension weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceWeights<T> {
    /// Refit on all pairs.
    pub weights: Vec<T>,
    /// Held-out predicted distance of every pair, in upper-triangle order.
    pub cv_predictions: Vec<T>,
    /// The all-pairs fit put zero weight on every dimension.
    pub degenerate: bool,
}

fn aligned_rows<T: Scalar, R: Representation<T>>(rep: &R, labels: &[String]) -> Result<Matrix<T>> {
    let idx = alignment(rep.row_labels(), labels)?;
    let rows: Vec<&[T]> = idx.iter().map(|&i| rep.matrix().row(i)).collect();
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Matrix::from_rows(&rows)
}

/// Assigns every item to one of `folds` folds by a seeded shuffle.
pub(crate) fn seeded_folds(items: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidOption("need at least two folds".into()));
    }
    if items < folds {
        return Err(Error::FoldTooSmall { fold: items });
    }
    let mut order: Vec<usize> = (0..items).collect();
    order.shuffle(&mut indexed_stream(seed, 0));
    let mut fold_of = vec![0; items];
    for (pos, &item) in order.iter().enumerate() {
        fold_of[item] = pos % folds;
    }
    Ok(fold_of)
}

/// Learns non-negative dimension weights for `metric` by NNLS, with
/// `folds`-fold cross validation over stimulus pairs.
pub fn fit_distance_weights<T: Scalar, R: Representation<T>>(
    representation: &R,
    metric: DistanceMetric,
    delta: &DissimilarityMatrix<T>,
    folds: usize,
    seed: u64,
) -> Result<DistanceWeights<T>> {
    let rows = aligned_rows(representation, delta.labels())?;
    let n = rows.nrows();
    let k = rows.ncols();
    let pairs = n * n.saturating_sub(1) / 2;

    let mut design = Matrix::zeros(pairs, k);
    let mut target = Vec::with_capacity(pairs);
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            design
                .row_mut(p)
                .copy_from_slice(&pair_contributions(rows.row(i), rows.row(j), metric));
            target.push(response(delta.get(i, j), metric));
            p += 1;
        }
    }

    let fold_of = seeded_folds(pairs, folds, seed)?;
    let mut cv_predictions = vec![T::zero(); pairs];
    for f in 0..folds {
        let train: Vec<usize> = (0..pairs).filter(|&p| fold_of[p] != f).collect();
        let train_rows: Vec<&[T]> = train.iter().map(|&p| design.row(p)).collect();
        let train_target: Vec<T> = train.iter().map(|&p| target[p]).collect();
        let sol = nnls(&Matrix::from_rows(&train_rows)?, &train_target)?;
        for p in (0..pairs).filter(|&p| fold_of[p] == f) {
            cv_predictions[p] = predicted_distance(dot(design.row(p), &sol.x), metric);
        }
    }

    let full = nnls(&design, &target)?;
    let degenerate = full.x.iter().all(|&w| w == T::zero());
    if degenerate {
        log::warn!("NNLS put zero weight on every dimension ({metric})");
    }
    Ok(DistanceWeights {
        weights: full.x,
        cv_predictions,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weighting {
    None,
    Nnls,
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Weighting::None),
            "nnls" => Ok(Weighting::Nnls),
            other => Err(Error::InvalidOption(format!("unknown weighting `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport<T> {
    pub pearson_r: T,
    pub spearman_rho: T,
    pub n_pairs: usize,
    pub metric: DistanceMetric,
    pub weighted: bool,
}

/// Correlates the distances of a representation with the dissimilarities,
/// over the pairs above the diagonal.
pub fn correlation_analysis<T: Scalar, R: Representation<T>>(
    representation: &R,
    delta: &DissimilarityMatrix<T>,
    metric: DistanceMetric,
    weighting: Weighting,
    folds: usize,
    seed: u64,
) -> Result<CorrelationReport<T>> {
    let targets = delta.upper_triangle();
    let distances = match weighting {
        Weighting::None => {
            let rows = aligned_rows(representation, delta.labels())?;
            let n = rows.nrows();
            let spec = DistanceSpec::unweighted(metric);
            let mut out = Vec::with_capacity(targets.len());
            for i in 0..n {
                for j in i + 1..n {
                    out.push(spec.distance(rows.row(i), rows.row(j)));
                }
            }
            out
        }
        Weighting::Nnls => fit_distance_weights(representation, metric, delta, folds, seed)?.cv_predictions,
    };
    Ok(CorrelationReport {
        pearson_r: pearson(&distances, &targets)?,
        spearman_rho: spearman(&distances, &targets)?,
        n_pairs: targets.len(),
        metric,
        weighted: weighting == Weighting::Nnls,
    })
}

/// Writes `metric,weighted,pearson_r,spearman_rho,n_pairs`.
pub fn write_correlation_csv<T: Scalar, W: Write>(reports: &[CorrelationReport<T>], writer: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "metric,weighted,pearson_r,spearman_rho,n_pairs")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.metric, r.weighted, r.pearson_r, r.spearman_rho, r.n_pairs
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Configuration, FeatureMatrix};
    use proptest::prelude::*;
    use rand::Rng;

    fn features(rows: &[Vec<f64>]) -> FeatureMatrix<f64> {
        let ids = (0..rows.len()).map(|i| format!("s{i}")).collect();
        FeatureMatrix::ungrouped(ids, Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn single_pair_examples() {
        let e = DistanceSpec::unweighted(DistanceMetric::Euclidean);
        assert_eq!(e.distance(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
        let m = DistanceSpec::weighted(DistanceMetric::Manhattan, vec![1.0, 0.0]).unwrap();
        assert_eq!(m.distance(&[0.0, 0.0], &[3.0, 4.0]), 3.0);
        let ip = DistanceSpec::unweighted(DistanceMetric::InnerProduct);
        assert_eq!(ip.distance(&[1.0, 2.0], &[2.0, 1.0]), -4.0);
    }

    #[test]
    fn weight_validation() {
        assert!(DistanceSpec::weighted(DistanceMetric::Euclidean, vec![0.0, 0.0]).is_err());
        assert!(DistanceSpec::weighted(DistanceMetric::Euclidean, vec![-1.0, 2.0]).is_err());
        let spec = DistanceSpec::weighted(DistanceMetric::Euclidean, vec![1.0]).unwrap();
        let f = features(&[vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(
            pairwise_distances(&f, &spec),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn inner_product_is_shifted_into_a_dissimilarity_matrix() {
        let f = features(&[vec![1.0, 2.0], vec![2.0, 1.0], vec![0.0, 1.0]]);
        let out = pairwise_distances(&f, &DistanceSpec::unweighted(DistanceMetric::InnerProduct)).unwrap();
        // raw: (0,1) = −4, (0,2) = −2, (1,2) = −1
        assert_eq!(out.shift, 4.0);
        assert_eq!(out.matrix.upper_triangle(), vec![0.0, 2.0, 3.0]);
        assert_eq!(out.matrix.get(1, 1), 0.0);
    }

    #[test]
    fn correlation_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        // direct evaluation: x̄ = 2.5, ȳ = 7.5, Σdxdy = 25, Σdx² = 5, Σdy² = 129
        let oracle = 25.0 / (5.0f64.sqrt() * 129.0f64.sqrt());
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0, 16.0]).unwrap() - oracle).abs() < 1e-12);

        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[1.0, 4.0, 9.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[9.0, 4.0, 1.0]).unwrap(), -1.0);
        assert_eq!(fractional_ranks(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert!((spearman(&[1.0, 1.0, 2.0], &[3.0, 3.0, 5.0]).unwrap() - 1.0f64).abs() < 1e-15);

        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::ConstantInput)));
    }

    fn dimension_one_construction() -> (FeatureMatrix<f64>, DissimilarityMatrix<f64>) {
        let mut rng = indexed_stream(17, 0);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let f = features(&rows);
        let spec = DistanceSpec::weighted(DistanceMetric::Euclidean, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let delta = pairwise_distances(&f, &spec).unwrap().matrix;
        (f, delta)
    }

    #[test]
    fn nnls_recovers_single_informative_dimension() {
        let (f, delta) = dimension_one_construction();
        let w = fit_distance_weights(&f, DistanceMetric::Euclidean, &delta, 5, 3).unwrap();
        assert!((w.weights[0] - 1.0).abs() < 1e-9);
        assert!(w.weights[1..].iter().all(|&v| v.abs() < 1e-9));
        assert!(!w.degenerate);
        let r = pearson(&w.cv_predictions, &delta.upper_triangle()).unwrap();
        assert!(r > 0.999);

        let report = correlation_analysis(&f, &delta, DistanceMetric::Euclidean, Weighting::Nnls, 5, 3).unwrap();
        assert!(report.pearson_r > 0.999);
        assert_eq!(report.n_pairs, 66);
        assert!(report.weighted);
    }

    #[test]
    fn single_dimension_weight_is_closed_form() {
        let rows: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![3.0], vec![4.5]];
        let f = features(&rows);
        let mut m = Matrix::zeros(4, 4);
        let vals = [0.7, 2.0, 4.1, 1.5, 3.2, 1.1];
        let mut p = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                m[(i, j)] = vals[p];
                m[(j, i)] = vals[p];
                p += 1;
            }
        }
        let delta = DissimilarityMatrix::new(f.sample_ids().to_vec(), m).unwrap();
        let w = fit_distance_weights(&f, DistanceMetric::Manhattan, &delta, 2, 0).unwrap();
        let mut c = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                c.push((rows[i][0] - rows[j][0]).abs());
            }
        }
        let expected = (dot(&c, &vals) / dot(&c, &c)).max(0.0);
        assert!((w.weights[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_weights_are_a_warning() {
        // inner-product response −δ is negative while every uₖvₖ is positive
        let f = features(&[vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0], vec![0.5, 1.0]]);
        let (_, delta) = dimension_one_construction();
        let delta = delta.reordered(&delta.labels()[..4]);
        assert!(delta.is_err());
        let mut m = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    m[(i, j)] = 1.0 + (i + j) as f64;
                }
            }
        }
        let delta = DissimilarityMatrix::new(f.sample_ids().to_vec(), m).unwrap();
        let w = fit_distance_weights(&f, DistanceMetric::InnerProduct, &delta, 2, 0).unwrap();
        assert!(w.degenerate);
        assert_eq!(w.weights, vec![0.0, 0.0]);
    }

    #[test]
    fn constant_representation_is_rejected() {
        let (_, delta) = dimension_one_construction();
        let c = Configuration::new(delta.labels().to_vec(), Matrix::from_vec(12, 2, vec![0.5; 24]).unwrap()).unwrap();
        for weighting in [Weighting::None, Weighting::Nnls] {
            assert!(matches!(
                correlation_analysis(&c, &delta, DistanceMetric::Euclidean, weighting, 5, 0),
                Err(Error::ConstantInput)
            ));
        }
    }

    #[test]
    fn folds_need_enough_pairs() {
        assert!(matches!(seeded_folds(3, 5, 0), Err(Error::FoldTooSmall { .. })));
        assert!(seeded_folds(3, 1, 0).is_err());
        let f = seeded_folds(10, 5, 0).unwrap();
        for fold in 0..5 {
            assert_eq!(f.iter().filter(|&&x| x == fold).count(), 2);
        }
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            x in prop::collection::vec(-100.0f64..100.0, 3..30),
            a in 0.1f64..10.0,
            b in -10.0f64..10.0,
        ) {
            prop_assume!(x.iter().any(|v| (v - x[0]).abs() > 1e-3));
            let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let z: Vec<f64> = x.iter().map(|v| -a * v + b).collect();
            prop_assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-12);
        }

        #[test]
        fn spearman_monotone_invariance(
            pairs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 3..30),
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            prop_assume!(x.iter().any(|v| *v != x[0]) && y.iter().any(|v| *v != y[0]));
            let cubed: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
            let expd: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            let base = spearman(&x, &y).unwrap();
            prop_assert!((spearman(&cubed, &expd).unwrap() - base).abs() < 1e-12);
        }

        #[test]
        fn unit_weights_equal_unweighted(seed in any::<u64>(), metric_index in 0usize..3) {
            let mut rng = indexed_stream(seed, 1);
            let rows: Vec<Vec<f64>> = (0..6).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let f = features(&rows);
            let metric = DistanceMetric::ALL[metric_index];
            let plain = pairwise_distances(&f, &DistanceSpec::unweighted(metric)).unwrap();
            let ones = pairwise_distances(&f, &DistanceSpec::weighted(metric, vec![1.0; 3]).unwrap()).unwrap();
            prop_assert_eq!(&plain, &ones);
            let m = &plain.matrix;
            for i in 0..6 {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..6 {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                }
            }
        }
    }
}

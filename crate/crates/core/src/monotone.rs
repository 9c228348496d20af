//! Weighted isotonic regression by pool-adjacent-violators.

use crate::{Error, Result, Scalar};

/// Least-squares nondecreasing fit.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneFit<T> {
    pub fitted: Vec<T>,
    pub sse: T,
}

/// Weighted least-squares nondecreasing fit of `values` (stack-based PAVA,
/// linear time).
pub fn pava<T: Scalar>(values: &[T], weights: &[T]) -> Result<MonotoneFit<T>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if weights.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: values.len(),
            found: weights.len(),
        });
    }
    if let Some(index) = weights.iter().position(|w| !(*w > T::zero())) {
        return Err(Error::NonpositiveWeight { index });
    }

    // blocks: (weighted mean, total weight, element count)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        let mut cur = (v, w, 1usize);
        while let Some(&(mean, weight, count)) = blocks.last() {
            if mean <= cur.0 {
                break;
            }
            blocks.pop();
            let total = weight + cur.1;
            cur = ((mean * weight + cur.0 * cur.1) / total, total, count + cur.2);
        }
        blocks.push(cur);
    }

    let mut fitted = Vec::with_capacity(values.len());
    for (mean, _, count) in blocks {
        fitted.extend(std::iter::repeat_n(mean, count));
    }
    let sse = values
        .iter()
        .zip(weights)
        .zip(&fitted)
        .fold(T::zero(), |acc, ((&v, &w), &f)| acc + w * (v - f) * (v - f));
    Ok(MonotoneFit { fitted, sse })
}

/// Nonmetric disparities: the monotone fit of `distances` taken in order of
/// ascending `dissimilarities`. Tied dissimilarities are ordered by distance
/// first (primary tie approach), so ties impose no constraint. The result is
/// returned in the input order.
pub fn monotone_disparities<T: Scalar>(distances: &[T], dissimilarities: &[T]) -> Result<Vec<T>> {
    if distances.len() != dissimilarities.len() {
        return Err(Error::DimensionMismatch {
            expected: dissimilarities.len(),
            found: distances.len(),
        });
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| {
        dissimilarities[a]
            .partial_cmp(&dissimilarities[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                distances[a]
                    .partial_cmp(&distances[b])
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            .then(a.cmp(&b))
    });
    let sorted: Vec<T> = order.iter().map(|&i| distances[i]).collect();
    let ones = vec![T::one(); sorted.len()];
    let fit = pava(&sorted, &ones)?;
    let mut out = vec![T::zero(); distances.len()];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = fit.fitted[pos];
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Best nondecreasing fit over every contiguous block partition, each
    /// block set to its weighted mean. Exponential; for short inputs only.
    pub fn brute_force_sse(values: &[f64], weights: &[f64]) -> f64 {
        let n = values.len();
        let mut best = f64::INFINITY;
        // bit i set = a block boundary after element i
        for mask in 0u32..(1 << (n - 1)) {
            let mut start = 0;
            let mut prev_mean = f64::NEG_INFINITY;
            let mut sse = 0.0;
            let mut feasible = true;
            for end in 0..n {
                if end == n - 1 || mask & (1 << end) != 0 {
                    let w: f64 = weights[start..=end].iter().sum();
                    let m: f64 = (start..=end).map(|i| values[i] * weights[i]).sum::<f64>() / w;
                    if m < prev_mean {
                        feasible = false;
                        break;
                    }
                    sse += (start..=end).map(|i| weights[i] * (values[i] - m).powi(2)).sum::<f64>();
                    prev_mean = m;
                    start = end + 1;
                }
            }
            if feasible {
                best = best.min(sse);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let f = pava(&[1.0, 2.0, 3.0], &[1.0; 3]).unwrap();
        assert_eq!(f.fitted, vec![1.0, 2.0, 3.0]);
        assert_eq!(f.sse, 0.0);

        let f = pava(&[3.0, 1.0, 2.0], &[1.0; 3]).unwrap();
        assert_eq!(f.fitted, vec![2.0, 2.0, 2.0]);
        assert!((f.sse - 2.0f64).abs() < 1e-15);
        assert!((oracle::brute_force_sse(&[3.0, 1.0, 2.0], &[1.0; 3]) - 2.0).abs() < 1e-15);

        let f = pava(&[5.0], &[1.0]).unwrap();
        assert_eq!(f.fitted, vec![5.0]);
        assert_eq!(f.sse, 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(pava::<f64>(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(
            pava(&[1.0, 2.0], &[1.0, 0.0]),
            Err(Error::NonpositiveWeight { index: 1 })
        ));
    }

    #[test]
    fn weighted_pooling() {
        // pooled mean of 4 (w=3) and 0 (w=1) is 3
        let f = pava(&[4.0, 0.0], &[3.0, 1.0]).unwrap();
        assert_eq!(f.fitted, vec![3.0, 3.0]);
    }

    #[test]
    fn ties_impose_no_constraint() {
        // equal dissimilarities: distances in any order are already a fit
        let d = monotone_disparities(&[2.0, 1.0, 3.0], &[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(d, vec![2.0, 1.0, 3.0]);
        // a real violation across distinct dissimilarities gets pooled
        let d = monotone_disparities(&[2.0, 1.0], &[1.0, 2.0]).unwrap();
        assert_eq!(d, vec![1.5, 1.5]);
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pairs in prop::collection::vec((-10.0f64..10.0, 0.1f64..5.0), 1..=8)
        ) {
            let (v, w): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let fit = pava(&v, &w).unwrap();
            prop_assert!((fit.sse - oracle::brute_force_sse(&v, &w)).abs() < 1e-9);
            for pair in fit.fitted.windows(2) {
                prop_assert!(pair[0] <= pair[1] + 1e-12);
            }
        }

        #[test]
        fn idempotent_and_mean_preserving(v in prop::collection::vec(-100.0f64..100.0, 1..40)) {
            let ones = vec![1.0; v.len()];
            let fit = pava(&v, &ones).unwrap();
            let again = pava(&fit.fitted, &ones).unwrap();
            for (a, b) in fit.fitted.iter().zip(&again.fitted) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let n = v.len() as f64;
            let mean_v: f64 = v.iter().sum::<f64>() / n;
            let mean_f: f64 = fit.fitted.iter().sum::<f64>() / n;
            prop_assert!((mean_v - mean_f).abs() < 1e-12);
        }
    }
}

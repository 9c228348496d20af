//! Metric and nonmetric multidimensional scaling by SMACOF.
//!
//! Stress is Kruskal's normalized form
//! `√(Σ (dᵢⱼ − d̂ᵢⱼ)² / Σ dᵢⱼ²)` over the pairs `i < j`, where `d` are the
//! Euclidean distances of the configuration and `d̂` the disparities: the
//! best linear fit `a·δ` in metric mode, the monotone (PAVA) fit of `d`
//! ordered by `δ` in nonmetric mode.
//!
//! Each restart starts from uniform random coordinates in `[−1, 1]` and
//! applies the Guttman transform `X ← n⁻¹ B(X) X` until the stress
//! decrease drops below the convergence threshold. Restarts draw from
//! independent seeded streams and run in parallel; the result does not
//! depend on scheduling.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::data::{Configuration, DissimilarityMatrix};
use crate::linalg::Matrix;
use crate::monotone::monotone_disparities;
use crate::rng::indexed_stream;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MdsMode {
    Metric,
    Nonmetric,
}

impl MdsMode {
    pub fn other(self) -> Self {
        match self {
            MdsMode::Metric => MdsMode::Nonmetric,
            MdsMode::Nonmetric => MdsMode::Metric,
        }
    }
}

impl fmt::Display for MdsMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MdsMode::Metric => "metric",
            MdsMode::Nonmetric => "nonmetric",
        })
    }
}

impl FromStr for MdsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "metric" => Ok(MdsMode::Metric),
            "nonmetric" | "non-metric" => Ok(MdsMode::Nonmetric),
            other => Err(Error::InvalidOption(format!("unknown MDS mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsOptions {
    pub mode: MdsMode,
    pub dims: usize,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Minimum stress decrease per iteration before a restart is
    /// considered converged.
    pub convergence_epsilon: f64,
    pub seed: u64,
}

impl MdsOptions {
    pub fn new(mode: MdsMode, dims: usize) -> Self {
        MdsOptions {
            mode,
            dims,
            restarts: 256,
            max_iterations: 1000,
            convergence_epsilon: 1e-6,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 {
            return Err(Error::InvalidOption("dims must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidOption("restarts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidOption("max_iterations must be at least 1".into()));
        }
        if !(self.convergence_epsilon > 0.0) {
            return Err(Error::InvalidOption("convergence_epsilon must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MdsResult<T> {
    pub configuration: Configuration<T>,
    /// Final stress of the winning restart in the optimized mode.
    pub stress: T,
    pub best_restart: usize,
    pub restart_stresses: Vec<T>,
    pub iterations_used: Vec<usize>,
}

/// Outcome of a single SMACOF run from one starting configuration.
#[derive(Debug, Clone)]
pub struct RestartOutcome<T> {
    pub coords: Matrix<T>,
    pub stress: T,
    pub iterations: usize,
    /// Stress before the first update and after every Guttman transform.
    pub trace: Vec<T>,
}

/// Upper-triangle Euclidean distances of the rows of `x`.
fn pair_distances<T: Scalar>(x: &Matrix<T>) -> Vec<T> {
    let n = x.nrows();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(crate::data::euclidean(x.row(i), x.row(j)));
        }
    }
    out
}

/// Disparities for the given distances, and the resulting stress. `None`
/// when every distance is zero.
fn disparities_and_stress<T: Scalar>(distances: &[T], delta: &[T], mode: MdsMode) -> Result<Option<(Vec<T>, T)>> {
    let ss_d = distances.iter().fold(T::zero(), |acc, &d| acc + d * d);
    if !(ss_d > T::zero()) {
        return Ok(None);
    }
    let dhat = match mode {
        MdsMode::Metric => {
            let ss_delta = delta.iter().fold(T::zero(), |acc, &v| acc + v * v);
            let cross = distances.iter().zip(delta).fold(T::zero(), |acc, (&d, &v)| acc + d * v);
            let a = if ss_delta > T::zero() {
                cross / ss_delta
            } else {
                T::zero()
            };
            delta.iter().map(|&v| a * v).collect()
        }
        MdsMode::Nonmetric => monotone_disparities(distances, delta)?,
    };
    let residual = distances
        .iter()
        .zip(&dhat)
        .fold(T::zero(), |acc, (&d, &h)| acc + (d - h) * (d - h));
    Ok(Some((dhat, (residual / ss_d).sqrt())))
}

/// Stress of `config` against `delta`. Points are matched to the matrix by
/// label.
pub fn evaluate_stress<T: Scalar>(
    config: &Configuration<T>,
    delta: &DissimilarityMatrix<T>,
    mode: MdsMode,
) -> Result<T> {
    let aligned = config.reordered(delta.labels())?;
    let d = pair_distances(aligned.coords());
    match disparities_and_stress(&d, &delta.upper_triangle(), mode)? {
        Some((_, stress)) => Ok(stress),
        None => Err(Error::DegenerateConfiguration("all pairwise distances are zero")),
    }
}

/// One Guttman transform: row i of the result is
/// `n⁻¹ Σⱼ (d̂ᵢⱼ / dᵢⱼ)(xᵢ − xⱼ)`, pairs at zero distance contributing nothing.
fn guttman_transform<T: Scalar>(x: &Matrix<T>, distances: &[T], dhat: &[T]) -> Matrix<T> {
    let (n, t) = (x.nrows(), x.ncols());
    let mut out: Matrix<T> = Matrix::zeros(n, t);
    let inv_n = T::from_usize(n).unwrap().recip();
    let mut p = 0;
    for i in 0..n {
        for j in i + 1..n {
            let d = distances[p];
            if d > T::zero() {
                let ratio = dhat[p] / d;
                for k in 0..t {
                    let diff = ratio * (x[(i, k)] - x[(j, k)]);
                    out[(i, k)] = out[(i, k)] + diff;
                    out[(j, k)] = out[(j, k)] - diff;
                }
            }
            p += 1;
        }
    }
    out.map(|v| v * inv_n)
}

/// Runs SMACOF from `init` against the upper-triangle dissimilarities
/// `delta`. In nonmetric mode the disparities are rescaled each iteration
/// so that `Σ d̂² = Σ d²`.
pub fn run_restart<T: Scalar>(
    delta: &[T],
    init: Matrix<T>,
    mode: MdsMode,
    max_iterations: usize,
    convergence_epsilon: T,
) -> Result<RestartOutcome<T>> {
    let n = init.nrows();
    if delta.len() != n * n.saturating_sub(1) / 2 {
        return Err(Error::DimensionMismatch {
            expected: n * n.saturating_sub(1) / 2,
            found: delta.len(),
        });
    }
    let mut x = init;
    let mut d = pair_distances(&x);
    let (mut dhat, mut stress) = disparities_and_stress(&d, delta, mode)?.ok_or(Error::DegenerateConfiguration(
        "initial configuration has all points coincident",
    ))?;
    let mut trace = vec![stress];
    let mut iterations = 0;

    while iterations < max_iterations {
        if mode == MdsMode::Nonmetric {
            let ss_d = d.iter().fold(T::zero(), |acc, &v| acc + v * v);
            let ss_h = dhat.iter().fold(T::zero(), |acc, &v| acc + v * v);
            if ss_h > T::zero() {
                let s = (ss_d / ss_h).sqrt();
                dhat.iter_mut().for_each(|v| *v = *v * s);
            }
        }
        let next = guttman_transform(&x, &d, &dhat);
        let next_d = pair_distances(&next);
        let Some((next_dhat, next_stress)) = disparities_and_stress(&next_d, delta, mode)? else {
            // collapsed onto a single point; keep the last proper iterate
            break;
        };
        iterations += 1;
        trace.push(next_stress);
        let decrease = stress - next_stress;
        x = next;
        d = next_d;
        dhat = next_dhat;
        stress = next_stress;
        if decrease < convergence_epsilon {
            break;
        }
    }
    Ok(RestartOutcome {
        coords: x,
        stress,
        iterations,
        trace,
    })
}

/// Starting configuration of restart `restart`: i.i.d. uniform `[−1, 1]`.
pub fn random_start<T: Scalar>(n: usize, dims: usize, seed: u64, restart: usize) -> Matrix<T> {
    let mut rng = indexed_stream(seed, restart as u64);
    let data = (0..n * dims).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect();
    Matrix::from_vec(n, dims, data).expect("n * dims values")
}

pub fn fit_mds<T: Scalar>(delta: &DissimilarityMatrix<T>, options: &MdsOptions) -> Result<MdsResult<T>> {
    options.validate()?;
    let n = delta.n();
    if n < 2 {
        return Err(Error::InvalidOption("MDS needs at least two stimuli".into()));
    }
    let upper = delta.upper_triangle();
    let eps = T::lit(options.convergence_epsilon);

    let outcomes: Vec<RestartOutcome<T>> = (0..options.restarts)
        .into_par_iter()
        .map(|r| {
            let init = random_start(n, options.dims, options.seed, r);
            run_restart(&upper, init, options.mode, options.max_iterations, eps)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (r, o) in outcomes.iter().enumerate() {
        if o.stress < outcomes[best].stress {
            best = r;
        }
    }
    let restart_stresses = outcomes.iter().map(|o| o.stress).collect();
    let iterations_used = outcomes.iter().map(|o| o.iterations).collect();
    let winner = outcomes.into_iter().nth(best).expect("at least one restart");
    let configuration = Configuration::new(delta.labels().to_vec(), winner.coords)?.centered();
    Ok(MdsResult {
        configuration,
        stress: winner.stress,
        best_restart: best,
        restart_stresses,
        iterations_used,
    })
}

/// One row of a Scree table.
#[derive(Debug, Clone)]
pub struct SweepEntry<T> {
    pub dims: usize,
    pub result: MdsResult<T>,
    pub metric_stress: T,
    pub nonmetric_stress: T,
}

/// Fits one solution per dimensionality and scores each in both modes.
pub fn dimension_sweep<T: Scalar>(
    delta: &DissimilarityMatrix<T>,
    dims: RangeInclusive<usize>,
    options: &MdsOptions,
) -> Result<Vec<SweepEntry<T>>> {
    if dims.is_empty() || *dims.start() == 0 {
        return Err(Error::InvalidOption(
            "dimension range must be nonempty and start at 1 or above".into(),
        ));
    }
    dims.map(|t| {
        let opts = MdsOptions {
            dims: t,
            ..options.clone()
        };
        let result = fit_mds(delta, &opts)?;
        let other = evaluate_stress(&result.configuration, delta, options.mode.other())?;
        let (metric_stress, nonmetric_stress) = match options.mode {
            MdsMode::Metric => (result.stress, other),
            MdsMode::Nonmetric => (other, result.stress),
        };
        Ok(SweepEntry {
            dims: t,
            result,
            metric_stress,
            nonmetric_stress,
        })
    })
    .collect()
}

/// Writes `dims,metric_stress,nonmetric_stress,best_restart,iterations`.
pub fn write_scree_csv<T: Scalar, W: Write>(entries: &[SweepEntry<T>], writer: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(writer);
    writeln!(w, "dims,metric_stress,nonmetric_stress,best_restart,iterations")?;
    for e in entries {
        writeln!(
            w,
            "{},{},{},{},{}",
            e.dims,
            e.metric_stress,
            e.nonmetric_stress,
            e.result.best_restart,
            e.result.iterations_used[e.result.best_restart]
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    fn config(rows: &[Vec<f64>]) -> Configuration<f64> {
        Configuration::new(labels(rows.len()), Matrix::from_rows(rows).unwrap()).unwrap()
    }

    fn delta_from(rows: &[Vec<f64>], warp: impl Fn(f64) -> f64) -> DissimilarityMatrix<f64> {
        let n = rows.len();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m[(i, j)] = warp(crate::data::euclidean(&rows[i], &rows[j]));
                }
            }
        }
        DissimilarityMatrix::new(labels(n), m).unwrap()
    }

    fn random_points(n: usize, t: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = indexed_stream(seed, 999);
        (0..n)
            .map(|_| (0..t).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn perfect_and_warped_fits() {
        let pts = random_points(8, 2, 1);
        let exact = delta_from(&pts, |d| d);
        assert!(evaluate_stress(&config(&pts), &exact, MdsMode::Metric).unwrap() < 1e-12);

        let cubed = delta_from(&pts, |d| d.powi(3));
        assert!(evaluate_stress(&config(&pts), &cubed, MdsMode::Nonmetric).unwrap() < 1e-12);
        assert!(evaluate_stress(&config(&pts), &cubed, MdsMode::Metric).unwrap() > 0.01);
    }

    #[test]
    fn three_points_on_a_line_match_direct_formula() {
        // independent evaluation: d = (1, 2, 1), δ = (0.5, 1.0, 1.5)
        let d = [1.0f64, 2.0, 1.0];
        let delta = [0.5f64, 1.0, 1.5];
        let ss_d: f64 = d.iter().map(|v| v * v).sum();
        let a = (0.5 + 2.0 + 1.5) / (0.25 + 1.0 + 2.25);
        let metric_oracle = (d.iter().zip(&delta).map(|(x, y)| (x - a * y).powi(2)).sum::<f64>() / ss_d).sqrt();
        // monotone fit of (1, 2, 1) in δ order pools the last two into 1.5
        let nonmetric_oracle = (((2.0f64 - 1.5).powi(2) + (1.0f64 - 1.5).powi(2)) / ss_d).sqrt();

        let c = config(&[vec![0.0], vec![1.0], vec![2.0]]);
        let mut m = Matrix::zeros(3, 3);
        for (p, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            m[(i, j)] = delta[p];
            m[(j, i)] = delta[p];
        }
        let dm = DissimilarityMatrix::new(labels(3), m).unwrap();
        assert!((evaluate_stress(&c, &dm, MdsMode::Metric).unwrap() - metric_oracle).abs() < 1e-12);
        assert!((evaluate_stress(&c, &dm, MdsMode::Nonmetric).unwrap() - nonmetric_oracle).abs() < 1e-12);
    }

    #[test]
    fn stress_errors() {
        let pts = random_points(4, 2, 2);
        let dm = delta_from(&pts, |d| d);
        let other = Configuration::new(
            vec!["x".into(), "s1".into(), "s2".into(), "s3".into()],
            Matrix::from_rows(&pts).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            evaluate_stress(&other, &dm, MdsMode::Metric),
            Err(Error::LabelMismatch(_))
        ));
        let flat = config(&vec![vec![1.0, 1.0]; 4]);
        assert!(matches!(
            evaluate_stress(&flat, &dm, MdsMode::Metric),
            Err(Error::DegenerateConfiguration(_))
        ));
    }

    #[test]
    fn two_points_are_always_exact() {
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = 2.5;
        m[(1, 0)] = 2.5;
        let dm = DissimilarityMatrix::new(labels(2), m).unwrap();
        for mode in [MdsMode::Metric, MdsMode::Nonmetric] {
            let opts = MdsOptions {
                restarts: 4,
                ..MdsOptions::new(mode, 1)
            };
            let r = fit_mds(&dm, &opts).unwrap();
            assert!(r.stress < 1e-12);
            assert!(r.configuration.distance(0, 1) > 0.0);
        }
    }

    #[test]
    fn fit_is_deterministic_and_centered() {
        let pts = random_points(10, 3, 3);
        let dm = delta_from(&pts, |d| d);
        let opts = MdsOptions {
            restarts: 8,
            seed: 11,
            ..MdsOptions::new(MdsMode::Metric, 3)
        };
        let a = fit_mds(&dm, &opts).unwrap();
        let b = fit_mds(&dm, &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.stress < 1e-3);
        assert_eq!(
            a.stress,
            a.restart_stresses.iter().cloned().fold(f64::INFINITY, f64::min)
        );
        for k in 0..3 {
            let mean: f64 = a.configuration.coords().column(k).iter().sum::<f64>() / 10.0;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn restarts_form_a_prefix_stream() {
        let pts = random_points(9, 3, 4);
        let dm = delta_from(&pts, |d| d.sqrt());
        let base = MdsOptions {
            restarts: 4,
            seed: 5,
            ..MdsOptions::new(MdsMode::Nonmetric, 2)
        };
        let small = fit_mds(&dm, &base).unwrap();
        let big = fit_mds(&dm, &MdsOptions { restarts: 8, ..base }).unwrap();
        assert_eq!(&big.restart_stresses[..4], &small.restart_stresses[..]);
        assert!(big.stress <= small.stress);
    }

    #[test]
    fn sweep_single_dimension_equals_fit() {
        let pts = random_points(7, 2, 6);
        let dm = delta_from(&pts, |d| d);
        let opts = MdsOptions {
            restarts: 4,
            ..MdsOptions::new(MdsMode::Metric, 2)
        };
        let sweep = dimension_sweep(&dm, 2..=2, &opts).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].result, fit_mds(&dm, &opts).unwrap());
        assert!(dimension_sweep(&dm, 0..=2, &opts).is_err());

        let mut buf = Vec::new();
        write_scree_csv(&sweep, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("dims,metric_stress,nonmetric_stress,best_restart,iterations\n2,"));
    }

    #[test]
    fn options_are_validated() {
        let mut o = MdsOptions::new(MdsMode::Metric, 2);
        o.restarts = 0;
        assert!(o.validate().is_err());
        assert_eq!("nonmetric".parse::<MdsMode>().unwrap(), MdsMode::Nonmetric);
        assert!("ordinal".parse::<MdsMode>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn stress_is_similarity_invariant(
            seed in 0u64..1000,
            angle in 0.0f64..std::f64::consts::TAU,
            shift in -5.0f64..5.0,
            scale in 0.1f64..10.0,
        ) {
            let pts = random_points(7, 2, seed);
            let dm = delta_from(&random_points(7, 3, seed + 1), |d| d);
            let (c, s) = (angle.cos(), angle.sin());
            let moved: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| vec![scale * (c * p[0] - s * p[1]) + shift, scale * (s * p[0] + c * p[1]) - shift])
                .collect();
            for mode in [MdsMode::Metric, MdsMode::Nonmetric] {
                let a = evaluate_stress(&config(&pts), &dm, mode).unwrap();
                let b = evaluate_stress(&config(&moved), &dm, mode).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn nonmetric_never_exceeds_metric(seed in 0u64..1000) {
            let pts = random_points(8, 2, seed);
            let dm = delta_from(&random_points(8, 4, seed + 7), |d| d);
            let m = evaluate_stress(&config(&pts), &dm, MdsMode::Metric).unwrap();
            let nm = evaluate_stress(&config(&pts), &dm, MdsMode::Nonmetric).unwrap();
            prop_assert!(nm <= m + 1e-12);
            prop_assert!((0.0..=1.0).contains(&nm) && (0.0..=1.0).contains(&m));
        }

        #[test]
        fn stress_trace_is_monotone(seed in 0u64..1000, nonmetric in any::<bool>()) {
            let n = 9;
            let dm = delta_from(&random_points(n, 5, seed), |d| d * d);
            let mode = if nonmetric { MdsMode::Nonmetric } else { MdsMode::Metric };
            let out = run_restart(&dm.upper_triangle(), random_start(n, 2, seed, 0), mode, 300, 1e-12).unwrap();
            for w in out.trace.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-10, "{} -> {}", w[0], w[1]);
            }
        }
    }
}

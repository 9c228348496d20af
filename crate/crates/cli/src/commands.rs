use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;

use simspace_core::augment::{augment_dataset, AugmentationManifest, AugmentationPlan};
use simspace_core::data::{
    load_configuration_csv, load_dissimilarity_csv, load_feature_csv, normalize_configuration, save_configuration_csv,
    save_feature_csv, Representation, TargetAssignment,
};
use simspace_core::distance::{
    correlation_analysis, write_correlation_csv, CorrelationReport, DistanceMetric, Weighting,
};
use simspace_core::mds::{dimension_sweep, evaluate_stress, fit_mds, write_scree_csv, MdsMode, MdsOptions};
use simspace_core::pixel::{list_images, pixel_features};
use simspace_core::regression::{
    save_detailed_csv, write_report_csv, EvaluationReport, GroupedFolds, RegressorKind, RegressorSpec, ReportRow,
    DEFAULT_BETA_GRID,
};
use simspace_core::{FeatureMatrixF32, FeatureMatrixF64};

use crate::args::{AugmentArgs, CorrelateArgs, MdsArgs, PixelArgs, RegressArgs, StressArgs, WeightingChoice};
use crate::error::{io_error, CliError, CliResult};

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

/// Missing inputs are the caller's mistake, unlike failures while reading.
fn input(path: &Path) -> CliResult<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(CliError::Validation(format!(
            "input `{}` does not exist",
            path.display()
        )))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn mds(args: &MdsArgs) -> CliResult<()> {
    let delta = load_dissimilarity_csv::<f64>(input(&args.dissimilarities)?)?;
    let options = MdsOptions {
        restarts: args.restarts,
        max_iterations: args.max_iter,
        convergence_epsilon: args.epsilon,
        seed: args.seed,
        ..MdsOptions::new(args.mode, args.dims)
    };
    let result = fit_mds(&delta, &options)?;
    save_configuration_csv(&result.configuration, &args.out)?;
    println!(
        "{} stress {} in {} dimensions (restart {})",
        args.mode, result.stress, args.dims, result.best_restart
    );
    if let Some(path) = &args.scree {
        let sweep = dimension_sweep(&delta, 1..=args.scree_max, &options)?;
        write_scree_csv(&sweep, create(path)?).map_err(|e| io_error(path, e))?;
        info!("wrote {} scree rows to {}", sweep.len(), path.display());
    }
    Ok(())
}

pub fn stress(args: &StressArgs) -> CliResult<()> {
    let delta = load_dissimilarity_csv::<f64>(input(&args.dissimilarities)?)?;
    let config = load_configuration_csv::<f64>(input(&args.configuration)?)?;
    let modes = match args.mode {
        Some(m) => vec![m],
        None => vec![MdsMode::Metric, MdsMode::Nonmetric],
    };
    println!("mode,stress");
    for mode in modes {
        println!("{mode},{}", evaluate_stress(&config, &delta, mode)?);
    }
    Ok(())
}

fn correlations<R: Representation<f64>>(
    representation: &R,
    args: &CorrelateArgs,
) -> CliResult<Vec<CorrelationReport<f64>>> {
    let delta = load_dissimilarity_csv::<f64>(input(&args.dissimilarities)?)?;
    let metrics = if args.metric.is_empty() {
        DistanceMetric::ALL.to_vec()
    } else {
        args.metric.clone()
    };
    let weightings = match args.weighting {
        WeightingChoice::None => vec![Weighting::None],
        WeightingChoice::Nnls => vec![Weighting::Nnls],
        WeightingChoice::Both => vec![Weighting::None, Weighting::Nnls],
    };
    let mut reports = Vec::new();
    for &metric in &metrics {
        for &weighting in &weightings {
            reports.push(correlation_analysis(
                representation,
                &delta,
                metric,
                weighting,
                args.folds,
                args.seed,
            )?);
        }
    }
    Ok(reports)
}

pub fn correlate(args: &CorrelateArgs) -> CliResult<()> {
    let reports = match (&args.features, &args.configuration) {
        (Some(path), _) => correlations(&load_feature_csv::<f64>(input(path)?)?, args)?,
        (None, Some(path)) => correlations(&load_configuration_csv::<f64>(input(path)?)?, args)?,
        (None, None) => {
            return Err(CliError::Validation(
                "one of --features or --configuration is required".into(),
            ))
        }
    };
    let best = reports
        .iter()
        .max_by(|a, b| a.pearson_r.total_cmp(&b.pearson_r))
        .expect("at least one metric and weighting");
    let summary = format!(
        "best: {} ({}) r = {}, rho = {}",
        best.metric,
        if best.weighted { "nnls weights" } else { "unweighted" },
        best.pearson_r,
        best.spearman_rho
    );
    match &args.out {
        Some(path) => {
            write_correlation_csv(&reports, create(path)?).map_err(|e| io_error(path, e))?;
            println!("{summary}");
        }
        None => {
            write_correlation_csv(&reports, io::stdout().lock()).map_err(|e| io_error(Path::new("<stdout>"), e))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// `features.csv` with block 40 becomes `features_k40.csv`.
pub fn block_suffixed(path: &Path, block: usize) -> PathBuf {
    let name = match path.extension() {
        Some(ext) => format!("{}_k{block}.{}", stem(path), ext.to_string_lossy()),
        None => format!("{}_k{block}", stem(path)),
    };
    path.with_file_name(name)
}

pub fn pixel_baseline(args: &PixelArgs) -> CliResult<()> {
    let images = list_images(input(&args.images)?)?;
    let groups = match &args.manifest {
        Some(path) => Some(AugmentationManifest::read_csv(input(path)?)?.groups()),
        None => None,
    };
    for &block in &args.block {
        let features: FeatureMatrixF32 = pixel_features(&images, block, args.aggregator, groups.as_ref())?;
        let out = if args.block.len() == 1 {
            args.out.clone()
        } else {
            block_suffixed(&args.out, block)
        };
        save_feature_csv(&features, &out)?;
        println!(
            "{} images x {} features -> {}",
            features.rows(),
            features.k(),
            out.display()
        );
    }
    Ok(())
}

pub fn augment(args: &AugmentArgs) -> CliResult<()> {
    let plan = AugmentationPlan::new(args.count, args.seed);
    let manifest = augment_dataset(input(&args.images)?, &plan, &args.out)?;
    println!(
        "wrote {} augmented images to {}",
        manifest.rows.len(),
        args.out.display()
    );
    Ok(())
}

/// Runs `kind` on prepared folds: one report for the baseline and linear
/// regression, the whole grid (best entries flagged) for lasso.
pub fn run_regressor(
    folds: &GroupedFolds<'_, f64>,
    kind: RegressorKind,
    grid: &[f64],
    feature_space: &str,
    target_space: &str,
) -> CliResult<Vec<EvaluationReport<f64>>> {
    let reports = match kind {
        RegressorKind::ZeroBaseline => vec![folds.evaluate(&RegressorSpec::zero_baseline())?],
        RegressorKind::Linear => vec![folds.evaluate(&RegressorSpec::linear())?],
        RegressorKind::Lasso => folds.beta_sweep(grid)?,
    };
    Ok(reports
        .into_iter()
        .map(|r| r.with_spaces(feature_space, target_space))
        .collect())
}

/// The table row for one regressor's reports.
pub fn summary_row(reports: &[EvaluationReport<f64>]) -> ReportRow<f64> {
    match reports {
        [single] => ReportRow::from_report(single),
        sweep => ReportRow::from_sweep(sweep).expect("a sweep flags at least one entry"),
    }
}

pub fn beta_grid(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        DEFAULT_BETA_GRID.to_vec()
    } else {
        values.to_vec()
    }
}

pub fn regress(args: &RegressArgs) -> CliResult<()> {
    let features: FeatureMatrixF64 = load_feature_csv(input(&args.features)?)?;
    let config = normalize_configuration(&load_configuration_csv::<f64>(input(&args.targets)?)?)?;
    let mut assignment = TargetAssignment::from_configuration(&config);
    if let Some(seed) = args.shuffle_targets {
        assignment = assignment.shuffled(seed);
    }
    let feature_space = args.feature_space.clone().unwrap_or_else(|| stem(&args.features));
    let target_space = args.target_space.clone().unwrap_or_else(|| stem(&args.targets));
    let folds = GroupedFolds::new(&features, &assignment, args.folds, args.seed)?;
    let reports = run_regressor(
        &folds,
        args.regressor,
        &beta_grid(&args.beta_grid),
        &feature_space,
        &target_space,
    )?;
    let rows = [summary_row(&reports)];
    match &args.out {
        Some(path) => write_report_csv(&rows, create(path)?),
        None => write_report_csv(&rows, io::stdout().lock()),
    }
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(path) = &args.detailed {
        save_detailed_csv(&reports, path)?;
    }
    io::stdout().flush().map_err(|e| io_error(Path::new("<stdout>"), e))
}

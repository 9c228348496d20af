//! Experiment configuration files and their execution.
//!
//! The file is TOML. Relative paths are resolved against the directory
//! holding the configuration file; every output goes below `output_dir`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::info;
use serde::Deserialize;

use simspace_core::augment::{augment_dataset, AugmentationManifest, AugmentationPlan};
use simspace_core::data::{
    load_configuration_csv, load_dissimilarity_csv, load_feature_csv, normalize_configuration, save_configuration_csv,
    save_feature_csv, Configuration, TargetAssignment,
};
use simspace_core::mds::{dimension_sweep, fit_mds, write_scree_csv, MdsMode, MdsOptions};
use simspace_core::pixel::{list_images, pixel_features, Aggregator};
use simspace_core::regression::{
    save_detailed_csv, save_report_csv, EvaluationReport, GroupedFolds, RegressorKind, ReportRow,
};
use simspace_core::{ConfigurationF64, FeatureMatrixF64};

use crate::commands::{beta_grid, run_regressor, summary_row};
use crate::error::{io_error, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// One four-dimensional target space; every feature space with correct
    /// and shuffled targets.
    Exp1,
    /// Several target spaces, correct targets only.
    Exp2,
    /// Nonmetric spaces of increasing dimensionality built from the
    /// dissimilarities.
    Exp3,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Exp1 => "exp1",
            Preset::Exp2 => "exp2",
            Preset::Exp3 => "exp3",
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Option<Preset>,
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Seed of the target permutation; `seed` when absent.
    pub shuffle_seed: Option<u64>,
    /// Also evaluate shuffled targets; on by default for `exp1` only.
    pub shuffled: Option<bool>,
    /// Subset of `baseline`, `linear`, `lasso`; all three by default.
    pub regressors: Option<Vec<String>>,
    pub beta_grid: Option<Vec<f64>>,
    pub mds: Option<MdsSection>,
    pub augment: Option<AugmentSection>,
    #[serde(default)]
    pub features: Vec<FeatureSection>,
    #[serde(default)]
    pub targets: Vec<TargetSection>,
}

fn default_folds() -> usize {
    8
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdsSection {
    pub dissimilarities: PathBuf,
    /// Dimensionalities swept by `exp3`; 1 to 10 by default.
    pub dims: Option<Vec<usize>>,
    pub restarts: Option<usize>,
    pub max_iterations: Option<usize>,
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    pub images: PathBuf,
    pub per_image: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    pub name: String,
    /// Precomputed feature matrix CSV.
    pub path: Option<PathBuf>,
    /// Pixel features with this block size.
    pub block: Option<usize>,
    pub aggregator: Option<String>,
    /// Image directory for pixel features; the augmented images by default.
    pub images: Option<PathBuf>,
    /// Manifest giving group ids for `images`.
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    pub name: String,
    /// Configuration CSV.
    pub path: Option<PathBuf>,
    /// Fit a space of this dimensionality to the `[mds]` dissimilarities.
    pub mds_dims: Option<usize>,
    /// `metric` or `nonmetric` (default) for `mds_dims`.
    pub mode: Option<String>,
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError::Validation(message.into())
}

fn parse<T: FromStr>(value: &str, what: &str) -> CliResult<T> {
    value.parse().map_err(|_| invalid(format!("invalid {what} `{value}`")))
}

enum FeatureSource {
    Csv(PathBuf),
    Pixels {
        block: usize,
        aggregator: Aggregator,
        images: Option<PathBuf>,
        manifest: Option<PathBuf>,
    },
}

enum TargetSource {
    Csv(PathBuf),
    Mds { dims: usize, mode: MdsMode },
}

/// A configuration with defaults applied, paths resolved and checked.
pub struct Plan {
    pub preset: Option<Preset>,
    pub output_dir: PathBuf,
    seed: u64,
    folds: usize,
    shuffle_seed: u64,
    shuffled: bool,
    regressors: Vec<RegressorKind>,
    grid: Vec<f64>,
    mds: Option<(PathBuf, MdsOptions, Vec<usize>)>,
    augment: Option<(PathBuf, AugmentationPlan)>,
    features: Vec<(String, FeatureSource)>,
    targets: Vec<(String, TargetSource)>,
    /// `exp3` without explicit targets: one nonmetric space per swept dimensionality.
    sweep_targets: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("bad experiment configuration: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Applies preset defaults, resolves paths against `base` and checks
    /// that every input exists.
    pub fn plan(&self, base: &Path) -> CliResult<Plan> {
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let existing = |p: &Path| -> CliResult<PathBuf> {
            let full = resolve(p);
            if full.exists() {
                Ok(full)
            } else {
                Err(invalid(format!("input `{}` does not exist", full.display())))
            }
        };

        if self.folds < 2 {
            return Err(invalid("folds must be at least 2"));
        }
        let regressors = match &self.regressors {
            None => vec![RegressorKind::ZeroBaseline, RegressorKind::Linear, RegressorKind::Lasso],
            Some(list) if list.is_empty() => return Err(invalid("regressors must not be empty")),
            Some(list) => list.iter().map(|r| parse(r, "regressor")).collect::<CliResult<_>>()?,
        };
        let grid = beta_grid(self.beta_grid.as_deref().unwrap_or(&[]));
        if grid.iter().any(|b| b.is_nan() || *b < 0.0 || b.is_infinite()) {
            return Err(invalid("beta_grid values must be finite and nonnegative"));
        }

        let mds = match &self.mds {
            None => None,
            Some(m) => {
                let dims = m.dims.clone().unwrap_or_else(|| (1..=10).collect());
                if dims.is_empty() || dims.contains(&0) {
                    return Err(invalid("mds.dims must list positive dimensionalities"));
                }
                let mut options = MdsOptions::new(MdsMode::Nonmetric, 1);
                options.restarts = m.restarts.unwrap_or(options.restarts);
                options.max_iterations = m.max_iterations.unwrap_or(options.max_iterations);
                options.convergence_epsilon = m.epsilon.unwrap_or(options.convergence_epsilon);
                options.seed = m.seed.unwrap_or(self.seed);
                options.validate()?;
                Some((existing(&m.dissimilarities)?, options, dims))
            }
        };

        let augment = match &self.augment {
            None => None,
            Some(a) => {
                let plan = AugmentationPlan::new(a.per_image, a.seed.unwrap_or(self.seed));
                plan.validate()?;
                Some((existing(&a.images)?, plan))
            }
        };

        if self.features.is_empty() {
            return Err(invalid("at least one [[features]] entry is required"));
        }
        let mut features = Vec::new();
        for f in &self.features {
            let source = match (&f.path, f.block) {
                (Some(path), None) => FeatureSource::Csv(existing(path)?),
                (None, Some(block)) => {
                    if f.images.is_none() && augment.is_none() {
                        return Err(invalid(format!(
                            "pixel features `{}` need `images` or an [augment] section",
                            f.name
                        )));
                    }
                    FeatureSource::Pixels {
                        block,
                        aggregator: parse(f.aggregator.as_deref().unwrap_or("mean"), "aggregator")?,
                        images: f.images.as_deref().map(existing).transpose()?,
                        manifest: f.manifest.as_deref().map(existing).transpose()?,
                    }
                }
                _ => {
                    return Err(invalid(format!(
                        "features `{}` need exactly one of `path` or `block`",
                        f.name
                    )))
                }
            };
            features.push((f.name.clone(), source));
        }

        let mut targets = Vec::new();
        for t in &self.targets {
            let source = match (&t.path, t.mds_dims) {
                (Some(path), None) => TargetSource::Csv(existing(path)?),
                (None, Some(dims)) => {
                    if mds.is_none() {
                        return Err(invalid(format!("targets `{}` need an [mds] section", t.name)));
                    }
                    TargetSource::Mds {
                        dims,
                        mode: parse(t.mode.as_deref().unwrap_or("nonmetric"), "MDS mode")?,
                    }
                }
                _ => {
                    return Err(invalid(format!(
                        "targets `{}` need exactly one of `path` or `mds_dims`",
                        t.name
                    )))
                }
            };
            targets.push((t.name.clone(), source));
        }
        check_unique(self.features.iter().map(|f| &f.name), "feature space")?;
        check_unique(self.targets.iter().map(|t| &t.name), "target space")?;

        let sweep_targets = self.preset == Some(Preset::Exp3) && targets.is_empty();
        match self.preset {
            Some(Preset::Exp1) if targets.len() != 1 => {
                return Err(invalid("exp1 takes exactly one [[targets]] entry"));
            }
            Some(Preset::Exp2) if targets.len() < 2 => {
                return Err(invalid("exp2 compares at least two [[targets]] entries"));
            }
            Some(Preset::Exp3) if mds.is_none() => {
                return Err(invalid("exp3 needs an [mds] section"));
            }
            _ if targets.is_empty() && !sweep_targets => {
                return Err(invalid("at least one [[targets]] entry is required"))
            }
            _ => {}
        }

        Ok(Plan {
            preset: self.preset,
            output_dir: resolve(&self.output_dir),
            seed: self.seed,
            folds: self.folds,
            shuffle_seed: self.shuffle_seed.unwrap_or(self.seed),
            shuffled: self.shuffled.unwrap_or(self.preset == Some(Preset::Exp1)),
            regressors,
            grid,
            mds,
            augment,
            features,
            targets,
            sweep_targets,
        })
    }
}

fn check_unique<'a>(names: impl Iterator<Item = &'a String>, what: &str) -> CliResult<()> {
    let mut seen = std::collections::BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(invalid(format!("duplicate {what} name `{n}`")));
        }
    }
    Ok(())
}

fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| io_error(path, e))
}

/// Everything an experiment run wrote.
pub struct Outcome {
    pub rows: Vec<ReportRow<f64>>,
    pub reports: Vec<EvaluationReport<f64>>,
}

impl Plan {
    fn feature_spaces(&self) -> CliResult<Vec<(String, FeatureMatrixF64)>> {
        let augmented = match &self.augment {
            Some((images, plan)) => {
                let out = self.output_dir.join("augmented");
                let manifest = augment_dataset(images, plan, &out)?;
                info!("augmented {} images into {}", manifest.rows.len(), out.display());
                Some((out, manifest.groups()))
            }
            None => None,
        };
        let dir = self.output_dir.join("features");
        let mut spaces = Vec::new();
        for (name, source) in &self.features {
            let features = match source {
                FeatureSource::Csv(path) => load_feature_csv(path)?,
                FeatureSource::Pixels {
                    block,
                    aggregator,
                    images,
                    manifest,
                } => {
                    let (files, groups) = match (images, &augmented) {
                        (Some(images), _) => {
                            let groups = match manifest {
                                Some(m) => Some(AugmentationManifest::read_csv(m)?.groups()),
                                None => None,
                            };
                            (list_images(images)?, groups)
                        }
                        (None, Some((out, groups))) => (list_images(out)?, Some(groups.clone())),
                        (None, None) => unreachable!("checked when planning"),
                    };
                    let features = pixel_features(&files, *block, *aggregator, groups.as_ref())?;
                    create_dir(&dir)?;
                    save_feature_csv(&features, dir.join(format!("{name}.csv")))?;
                    features
                }
            };
            info!(
                "feature space {name}: {} rows x {} features",
                features.rows(),
                features.k()
            );
            spaces.push((name.clone(), features));
        }
        Ok(spaces)
    }

    /// Normalized target spaces, each also written to `targets/`.
    fn target_spaces(&self) -> CliResult<Vec<(String, ConfigurationF64)>> {
        let mut raw: Vec<(String, Configuration<f64>)> = Vec::new();
        if let Some((path, options, dims)) = &self.mds {
            let delta = load_dissimilarity_csv::<f64>(path)?;
            if self.sweep_targets {
                let (lo, hi) = (*dims.iter().min().unwrap(), *dims.iter().max().unwrap());
                let sweep = dimension_sweep(&delta, lo..=hi, options)?;
                let scree = self.output_dir.join("scree.csv");
                let file = fs::File::create(&scree).map_err(|e| io_error(&scree, e))?;
                write_scree_csv(&sweep, file).map_err(|e| io_error(&scree, e))?;
                for entry in sweep.into_iter().filter(|e| dims.contains(&e.dims)) {
                    raw.push((format!("nonmetric_{}d", entry.dims), entry.result.configuration));
                }
            }
            for (name, source) in &self.targets {
                if let TargetSource::Mds { dims, mode } = source {
                    let opts = MdsOptions {
                        mode: *mode,
                        dims: *dims,
                        ..options.clone()
                    };
                    raw.push((name.clone(), fit_mds(&delta, &opts)?.configuration));
                }
            }
        }
        for (name, source) in &self.targets {
            if let TargetSource::Csv(path) = source {
                raw.push((name.clone(), load_configuration_csv(path)?));
            }
        }
        // keep the order of the configuration file
        let order: Vec<&String> = self.targets.iter().map(|(n, _)| n).collect();
        raw.sort_by_key(|(n, _)| order.iter().position(|o| *o == n));

        if self.preset == Some(Preset::Exp1) && raw[0].1.dims() != 4 {
            return Err(invalid(format!(
                "exp1 expects a four-dimensional target space, `{}` has {}",
                raw[0].0,
                raw[0].1.dims()
            )));
        }
        let dir = self.output_dir.join("targets");
        create_dir(&dir)?;
        raw.into_iter()
            .map(|(name, config)| {
                let normalized = normalize_configuration(&config)?;
                save_configuration_csv(&normalized, dir.join(format!("{name}.csv")))?;
                Ok((name, normalized))
            })
            .collect()
    }

    pub fn run(&self) -> CliResult<Outcome> {
        create_dir(&self.output_dir)?;
        let features = self.feature_spaces()?;
        let targets = self.target_spaces()?;
        let mut rows = Vec::new();
        let mut reports = Vec::new();
        for (target_name, config) in &targets {
            let correct = TargetAssignment::from_configuration(config);
            let mut assignments = vec![correct.clone()];
            if self.shuffled {
                assignments.push(correct.shuffled(self.shuffle_seed));
            }
            for (feature_name, matrix) in &features {
                for assignment in &assignments {
                    let folds = GroupedFolds::new(matrix, assignment, self.folds, self.seed)?;
                    for &kind in &self.regressors {
                        let evaluated = run_regressor(&folds, kind, &self.grid, feature_name, target_name)?;
                        rows.push(summary_row(&evaluated));
                        reports.extend(evaluated);
                    }
                }
            }
        }
        save_report_csv(&rows, &self.output_dir.join("report.csv"))?;
        save_detailed_csv(&reports, &self.output_dir.join("report_detailed.csv"))?;
        Ok(Outcome { rows, reports })
    }
}

/// Loads, plans and runs the experiment described by `path`.
pub fn run_file(path: &Path, output_override: Option<&Path>) -> CliResult<Outcome> {
    let mut config = ExperimentConfig::load(path)?;
    if let Some(dir) = output_override {
        config.output_dir = dir.to_path_buf();
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let plan = config.plan(&base)?;
    info!(
        "running {} into {}",
        plan.preset
            .map(|p| p.to_string())
            .unwrap_or_else(|| "custom experiment".into()),
        plan.output_dir.display()
    );
    plan.run()
}

/// Fixed-width text rendering of the report rows.
pub fn render_table(rows: &[ReportRow<f64>]) -> String {
    let mut out = format!(
        "{:<9} {:<14} {:<14} {:<8} {:<12} {:>8} {:>8} {:>8} {:>9} {:>9} {:>9}\n",
        "regressor", "features", "targets", "shuffled", "beta", "MSE", "MED", "R2", "MSE ovf", "MED ovf", "R2 ovf"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<9} {:<14} {:<14} {:<8} {:<12} {:>8.4} {:>8.4} {:>8.4} {:>9.4} {:>9.4} {:>9.4}\n",
            r.regressor.to_string(),
            r.feature_space,
            r.target_space,
            r.shuffled,
            r.beta,
            r.test.mse,
            r.test.med,
            r.test.r_squared,
            r.overfitting.mse,
            r.overfitting.med,
            r.overfitting.r_squared
        ));
    }
    out
}

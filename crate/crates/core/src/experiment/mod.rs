//! End-to-end experiment: clean and split the data, fit the copula on the
//! real training rows, then for the baseline and each synthetic volume tune,
//! train, and evaluate a boosting model, validate the synthetic batch with
//! per-column KS tests, and compare fold losses against the baseline with
//! paired t-tests.

mod bundled;
mod report;

pub use bundled::{
    make_bundled_dataset, make_bundled_dataset_with, BUNDLED_SCHEMA, BUNDLED_TARGET,
    DEFAULT_MISSING_FRAC,
};
pub use report::write_report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{fit_copula, validate_synthetic, CopulaModel, KsValidation};
use crate::error::{Error, Result, StageExt};
use crate::learners::fit_gbm;
use crate::model_select::{evaluate, grid_search, kfold_indices, HyperGrid, HyperPoint, MetricSet};
use crate::preprocess::{polynomial_expand, Imputer, Standardizer};
use crate::stats::paired_ttest;
use crate::table::{drop_missing_target, load_csv, train_test_split, Table};

/// Seed offsets applied to the master seed, one per pipeline stage.
const SEED_OFFSET_DATA: u64 = 1;
const SEED_OFFSET_SPLIT: u64 = 2;
const SEED_OFFSET_COPULA: u64 = 3;
const SEED_OFFSET_TUNING: u64 = 4;
const SEED_OFFSET_EVAL: u64 = 5;
const SEED_OFFSET_LEVELS: u64 = 1000;

/// Two-sided p-value threshold for flagging a comparison as significant.
pub const SIGNIFICANCE_ALPHA: f64 = 0.05;

/// Full experiment configuration. Unknown keys in a config file are
/// rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Path to an input CSV, or "bundled" for the built-in generator.
    pub input_path: String,
    /// Expected feature and target column names, in order.
    pub schema: Vec<String>,
    pub target: String,
    pub split_ratio: f64,
    pub synthetic_levels: Vec<usize>,
    pub tuning_k: usize,
    pub eval_k: usize,
    pub grid: HyperGrid,
    pub poly_degree: usize,
    pub ks_alpha: f64,
    pub pe_epsilon: f64,
    pub master_seed: u64,
    /// Row count for the bundled generator; ignored for CSV input.
    pub bundled_rows: usize,
    /// Missing-cell fraction for the bundled generator.
    pub bundled_missing_frac: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            input_path: "bundled".into(),
            schema: BUNDLED_SCHEMA.map(str::to_string).to_vec(),
            target: BUNDLED_TARGET.into(),
            split_ratio: 0.8,
            synthetic_levels: vec![100, 250, 500, 750, 1000],
            tuning_k: 5,
            eval_k: 10,
            grid: HyperGrid::default(),
            poly_degree: 2,
            ks_alpha: 0.05,
            pe_epsilon: 1e-6,
            master_seed: 42,
            bundled_rows: 12_657,
            bundled_missing_frac: DEFAULT_MISSING_FRAC,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "split_ratio must be in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if !self.synthetic_levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "synthetic_levels must be strictly increasing".into(),
            ));
        }
        if self.tuning_k < 2 || self.eval_k < 2 {
            return Err(Error::InvalidConfig("fold counts must be >= 2".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidConfig("hyperparameter grid is empty".into()));
        }
        if self.poly_degree < 1 {
            return Err(Error::InvalidConfig("poly_degree must be >= 1".into()));
        }
        if !(self.ks_alpha > 0.0 && self.ks_alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "ks_alpha must be in (0, 1), got {}",
                self.ks_alpha
            )));
        }
        if !(self.pe_epsilon > 0.0) {
            return Err(Error::InvalidConfig("pe_epsilon must be positive".into()));
        }
        if self.schema.is_empty() || !self.schema.contains(&self.target) {
            return Err(Error::InvalidConfig(format!(
                "target {:?} must appear in schema {:?}",
                self.target, self.schema
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Evaluation-CV summary for one model on its (augmented) training set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalCv {
    pub fold_losses: Vec<f64>,
    pub mean_mse: f64,
    pub mean_r2: f64,
    /// Number of synthetic rows that landed in each validation fold.
    pub fold_synthetic_counts: Vec<usize>,
}

/// Everything recorded for one trained model (baseline or one synthetic
/// level).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelReport {
    pub name: String,
    /// Number of synthetic rows appended to the training set (0 = baseline).
    pub synthetic_rows: usize,
    pub best_config: HyperPoint,
    pub tuning_mean_r2: f64,
    /// Metrics on the held-out real test split, standardized target scale.
    pub test_metrics: MetricSet,
    pub eval_cv: EvalCv,
    /// KS validation of this level's synthetic batch against the real
    /// training data (absent for the baseline).
    pub ks: Option<KsValidation>,
}

/// Paired t-test of baseline fold losses against one level's fold losses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TtestReport {
    pub comparison: String,
    pub synthetic_rows: usize,
    pub t_statistic: f64,
    pub df: usize,
    /// Mean of (baseline fold MSE - augmented fold MSE); positive favors
    /// augmentation.
    pub mean_diff: f64,
    pub p_two_sided: f64,
    pub p_one_sided: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub seed_data: u64,
    pub seed_split: u64,
    pub seed_copula: u64,
    pub seed_tuning: u64,
    pub seed_eval: u64,
    pub seed_levels: Vec<u64>,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub unix_timestamp: u64,
}

/// Result of a full experiment run: baseline first, then one entry per
/// synthetic level, plus the baseline-versus-level t-tests.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub models: Vec<ModelReport>,
    pub ttests: Vec<TtestReport>,
    pub provenance: Provenance,
}

/// Runs the experiment on the rayon pool sized to `workers` threads
/// (0 = one per available core). Thread count never affects the result.
pub fn run_experiment_with_workers(
    cfg: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}

/// Runs the experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let seed_data = cfg.master_seed.wrapping_add(SEED_OFFSET_DATA);
    let seed_split = cfg.master_seed.wrapping_add(SEED_OFFSET_SPLIT);
    let seed_copula = cfg.master_seed.wrapping_add(SEED_OFFSET_COPULA);
    let seed_tuning = cfg.master_seed.wrapping_add(SEED_OFFSET_TUNING);
    let seed_eval = cfg.master_seed.wrapping_add(SEED_OFFSET_EVAL);
    let seed_levels: Vec<u64> = (0..cfg.synthetic_levels.len())
        .map(|i| {
            cfg.master_seed
                .wrapping_add(SEED_OFFSET_LEVELS)
                .wrapping_add(i as u64)
        })
        .collect();

    let raw = if cfg.input_path == "bundled" {
        make_bundled_dataset_with(cfg.bundled_rows, seed_data, cfg.bundled_missing_frac)
    } else {
        load_csv(&cfg.input_path, &cfg.schema, &cfg.target).stage("load")?
    };
    let cleaned = drop_missing_target(&raw).stage("clean")?;
    let split = train_test_split(&cleaned, cfg.split_ratio, seed_split).stage("split")?;

    let imputer = Imputer::fit(&split.train).stage("impute")?;
    let train = imputer.apply(&split.train).stage("impute")?;
    let test = imputer.apply(&split.test).stage("impute")?;

    let copula = fit_copula(&train, seed_copula).stage("copula")?;

    // Baseline plus one job per synthetic level, evaluated in parallel;
    // results are collected in configuration order.
    let mut jobs: Vec<(String, usize, u64)> = vec![("baseline".into(), 0, 0)];
    for (i, &level) in cfg.synthetic_levels.iter().enumerate() {
        jobs.push((format!("synthetic_{level}"), level, seed_levels[i]));
    }
    let models: Vec<ModelReport> = jobs
        .par_iter()
        .map(|(name, level, level_seed)| {
            evaluate_model(
                cfg,
                &train,
                &test,
                &copula,
                name,
                *level,
                *level_seed,
                seed_tuning,
                seed_eval,
            )
        })
        .collect::<Result<_>>()?;

    let baseline_losses = models[0].eval_cv.fold_losses.clone();
    let mut ttests = Vec::new();
    for model in &models[1..] {
        let outcome = paired_ttest(&baseline_losses, &model.eval_cv.fold_losses).stage("ttest")?;
        ttests.push(TtestReport {
            comparison: format!("baseline_vs_{}", model.name),
            synthetic_rows: model.synthetic_rows,
            t_statistic: outcome.t_statistic,
            df: outcome.df,
            mean_diff: outcome.mean_diff,
            p_two_sided: outcome.p_value,
            p_one_sided: outcome.p_one_sided(),
            significant: outcome.p_value < SIGNIFICANCE_ALPHA,
        });
    }

    let config_json = serde_json::to_string(cfg)?;
    let provenance = Provenance {
        master_seed: cfg.master_seed,
        seed_data,
        seed_split,
        seed_copula,
        seed_tuning,
        seed_eval,
        seed_levels,
        config: cfg.clone(),
        config_hash: format!("{:016x}", fnv1a64(config_json.as_bytes())),
        unix_timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };

    Ok(ExperimentResult {
        models,
        ttests,
        provenance,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_model(
    cfg: &ExperimentConfig,
    train: &Table,
    test: &Table,
    copula: &CopulaModel,
    name: &str,
    level: usize,
    level_seed: u64,
    seed_tuning: u64,
    seed_eval: u64,
) -> Result<ModelReport> {
    // Augment the training split only; the test split stays real.
    let (augmented, ks) = if level == 0 {
        (train.clone(), None)
    } else {
        let synth = copula.sample_with_seed(level, level_seed);
        let ks = validate_synthetic(train, &synth, cfg.ks_alpha).stage("ks")?;
        (train.append(&synth).stage("augment")?, Some(ks))
    };

    let train_poly = polynomial_expand(&augmented, cfg.poly_degree).stage("poly")?;
    let test_poly = polynomial_expand(test, cfg.poly_degree).stage("poly")?;
    let scaler = Standardizer::fit(&train_poly).stage("standardize")?;
    let train_std = scaler.apply(&train_poly).stage("standardize")?;
    let test_std = scaler.apply(&test_poly).stage("standardize")?;

    let x = train_std.feature_matrix();
    let y = train_std.target_column().to_vec();
    let (best, tuning) =
        grid_search(&x, &y, &cfg.grid, cfg.tuning_k, seed_tuning).stage("grid_search")?;
    let tuning_mean_r2 = tuning
        .iter()
        .find(|r| r.config == best)
        .map_or(f64::NEG_INFINITY, |r| r.mean_r2);

    let model = fit_gbm(&x, &y, &best.to_config()).stage("train")?;
    let preds = model.predict(&test_std.feature_matrix()).stage("predict")?;
    let test_metrics =
        evaluate(test_std.target_column(), &preds, cfg.pe_epsilon).stage("evaluate")?;

    let folds = kfold_indices(y.len(), cfg.eval_k, seed_eval).stage("eval_cv")?;
    let cv = crate::model_select::cross_validate_model(&x, &y, best, cfg.eval_k, seed_eval)
        .stage("eval_cv")?;
    let synth_flags = train_std.synthetic_flags();
    let fold_synthetic_counts = folds
        .iter()
        .map(|(_, valid)| valid.iter().filter(|&&r| synth_flags[r]).count())
        .collect();

    Ok(ModelReport {
        name: name.to_string(),
        synthetic_rows: level,
        best_config: best,
        tuning_mean_r2,
        test_metrics,
        eval_cv: EvalCv {
            fold_losses: cv.fold_losses,
            mean_mse: cv.mean_mse,
            mean_r2: cv.mean_r2,
            fold_synthetic_counts,
        },
        ks,
    })
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x1_0000_01b3);
    }
    hash
}

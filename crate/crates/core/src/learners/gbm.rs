//! Least-squares gradient boosting over CART regression trees.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::tree::{presort_features, Grower, TreeNode, TreeParams};

/// Format tag written into persisted boosting model files.
pub const GBM_FORMAT: &str = "gbm-v1";

/// Boosting hyperparameters. Only the three grid-tuned knobs vary in
/// practice; the rest keep reference defaults. There is no stochastic
/// subsampling (subsample is fixed at 1.0), so `seed` is carried for
/// interface stability but does not influence the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbmConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for GbmConfig {
    fn default() -> Self {
        GbmConfig {
            n_estimators: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_split: 2,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

/// A fitted boosting ensemble: prediction is
/// `init_value + learning_rate * sum_k tree_k(x)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbmModel {
    pub format: String,
    pub init_value: f64,
    pub trees: Vec<TreeNode>,
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
    pub n_features: usize,
    /// Training MSE recorded after each boosting stage.
    pub staged_train_mse: Vec<f64>,
}

/// Fits least-squares gradient boosting: the initial prediction is the
/// target mean, and each stage fits a tree to the current residuals (the
/// negative gradient of squared loss), scaled by the learning rate.
pub fn fit_gbm(x: &[Vec<f64>], y: &[f64], config: &GbmConfig) -> Result<GbmModel> {
    let n = y.len();
    if n == 0 || x.is_empty() {
        return Err(Error::EmptyInput);
    }
    for col in x {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                left: col.len(),
                right: n,
            });
        }
        if col.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "learning_rate must be positive, got {}",
            config.learning_rate
        )));
    }
    if config.max_depth == 0 {
        return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
    }

    let init_value = y.iter().sum::<f64>() / n as f64;
    let tree_params = TreeParams {
        max_depth: config.max_depth,
        min_samples_split: config.min_samples_split,
        min_samples_leaf: config.min_samples_leaf,
    };
    let sorted = presort_features(x);

    let mut predictions = vec![init_value; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(config.n_estimators);
    let mut staged_train_mse = Vec::with_capacity(config.n_estimators);
    for _ in 0..config.n_estimators {
        for ((r, &target), &pred) in residuals.iter_mut().zip(y).zip(&predictions) {
            *r = target - pred;
        }
        let tree = Grower::new(x, &residuals, &tree_params).grow(&sorted, 0);
        let mut sse = 0.0;
        for (row, pred) in predictions.iter_mut().enumerate() {
            *pred += config.learning_rate * tree.predict_row(x, row);
            let err = y[row] - *pred;
            sse += err * err;
        }
        staged_train_mse.push(sse / n as f64);
        trees.push(tree);
    }

    Ok(GbmModel {
        format: GBM_FORMAT.to_string(),
        init_value,
        trees,
        learning_rate: config.learning_rate,
        n_estimators: config.n_estimators,
        max_depth: config.max_depth,
        n_features: x.len(),
        staged_train_mse,
    })
}

impl GbmModel {
    /// Predicts every row of a column-major feature matrix.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: x.len(),
            });
        }
        let n = x.first().map_or(0, Vec::len);
        let mut out = vec![self.init_value; n];
        for tree in &self.trees {
            for (row, pred) in out.iter_mut().enumerate() {
                *pred += self.learning_rate * tree.predict_row(x, row);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<GbmModel> {
        let model: GbmModel = serde_json::from_str(text)?;
        if model.format != GBM_FORMAT {
            return Err(Error::BadFormat {
                expected: GBM_FORMAT.to_string(),
                found: model.format,
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GbmModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GbmModel::from_json(&text)
    }
}

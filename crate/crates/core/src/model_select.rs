//! k-fold cross-validation, exhaustive grid search over the boosting
//! hyperparameters, and evaluation metrics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{fit_gbm, GbmConfig};
use crate::shuffle::shuffled_indices;
use crate::stats::percent_error_stats;

/// Hyperparameter grid; the Cartesian product is enumerated in declaration
/// order (n_estimators outermost, max_depth innermost).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperGrid {
    pub n_estimators: Vec<usize>,
    pub learning_rate: Vec<f64>,
    pub max_depth: Vec<usize>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            n_estimators: vec![100, 200, 300],
            learning_rate: vec![0.01, 0.05, 0.1],
            max_depth: vec![3, 5, 7],
        }
    }
}

impl HyperGrid {
    /// A minimal 1x1x1 grid for fast CI runs.
    pub fn fast() -> Self {
        HyperGrid {
            n_estimators: vec![100],
            learning_rate: vec![0.1],
            max_depth: vec![3],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.n_estimators.is_empty() || self.learning_rate.is_empty() || self.max_depth.is_empty()
    }

    pub fn points(&self) -> Vec<HyperPoint> {
        let mut out = Vec::new();
        for &n in &self.n_estimators {
            for &lr in &self.learning_rate {
                for &d in &self.max_depth {
                    out.push(HyperPoint {
                        n_estimators: n,
                        learning_rate: lr,
                        max_depth: d,
                    });
                }
            }
        }
        out
    }
}

/// One point of the hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPoint {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

impl HyperPoint {
    pub fn to_config(self) -> GbmConfig {
        GbmConfig {
            n_estimators: self.n_estimators,
            learning_rate: self.learning_rate,
            max_depth: self.max_depth,
            ..GbmConfig::default()
        }
    }
}

/// Evaluation metrics for one model on one data set. `percent_errors` holds
/// the per-row values behind the summary statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSet {
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub r2: f64,
    pub percent_errors: Vec<f64>,
    pub pe_mean: f64,
    pub pe_median: f64,
    pub pe_std: f64,
}

/// Computes MSE, RMSE, MAE, R^2, and percent errors
/// 100 * |pred - true| / max(|true|, epsilon).
///
/// Degenerate R^2 (zero total variance): 1 when the fit is also exact, else
/// negative infinity so that model selection ranks it below everything.
pub fn evaluate(y_true: &[f64], y_pred: &[f64], epsilon: f64) -> Result<MetricSet> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch {
            left: y_true.len(),
            right: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = y_true.len() as f64;
    let mut sse = 0.0;
    let mut abs_sum = 0.0;
    for (&t, &p) in y_true.iter().zip(y_pred) {
        let e = p - t;
        sse += e * e;
        abs_sum += e.abs();
    }
    let mse = sse / n;
    let mean = y_true.iter().sum::<f64>() / n;
    let sst: f64 = y_true.iter().map(|&t| (t - mean) * (t - mean)).sum();
    let r2 = r2_from_sums(sse, sst);
    let percent_errors: Vec<f64> = y_true
        .iter()
        .zip(y_pred)
        .map(|(&t, &p)| 100.0 * (p - t).abs() / t.abs().max(epsilon))
        .collect();
    let (pe_mean, pe_median, pe_std) = percent_error_stats(&percent_errors)?;
    Ok(MetricSet {
        mse,
        rmse: mse.sqrt(),
        mae: abs_sum / n,
        r2,
        percent_errors,
        pe_mean,
        pe_median,
        pe_std,
    })
}

fn r2_from_sums(sse: f64, sst: f64) -> f64 {
    if sst == 0.0 {
        if sse == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - sse / sst
    }
}

/// Cross-validation outcome for one hyperparameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvResult {
    pub config: HyperPoint,
    /// Per-fold validation MSE.
    pub fold_losses: Vec<f64>,
    pub mean_mse: f64,
    pub mean_r2: f64,
}

/// Deterministic shuffled partition of `0..n` into `k` validation folds with
/// sizes differing by at most one. Returns (train, validation) index pairs.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    let order = shuffled_indices(n, seed);
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for fold in 0..k {
        let size = base + usize::from(fold < extra);
        let valid: Vec<usize> = order[start..start + size].to_vec();
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        folds.push((train, valid));
        start += size;
    }
    Ok(folds)
}

struct FoldData {
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    valid_x: Vec<Vec<f64>>,
    valid_y: Vec<f64>,
}

fn gather(x: &[Vec<f64>], y: &[f64], rows: &[usize]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let cols = x
        .iter()
        .map(|c| rows.iter().map(|&r| c[r]).collect())
        .collect();
    let target = rows.iter().map(|&r| y[r]).collect();
    (cols, target)
}

fn materialize_folds(
    x: &[Vec<f64>],
    y: &[f64],
    folds: &[(Vec<usize>, Vec<usize>)],
) -> Vec<FoldData> {
    folds
        .iter()
        .map(|(train, valid)| {
            let (train_x, train_y) = gather(x, y, train);
            let (valid_x, valid_y) = gather(x, y, valid);
            FoldData {
                train_x,
                train_y,
                valid_x,
                valid_y,
            }
        })
        .collect()
}

fn cross_validate_on_folds(point: HyperPoint, folds: &[FoldData]) -> Result<CvResult> {
    let config = point.to_config();
    let mut fold_losses = Vec::with_capacity(folds.len());
    let mut r2_sum = 0.0;
    for fold in folds {
        let model = fit_gbm(&fold.train_x, &fold.train_y, &config)?;
        let preds = model.predict(&fold.valid_x)?;
        let n = fold.valid_y.len() as f64;
        let sse: f64 = preds
            .iter()
            .zip(&fold.valid_y)
            .map(|(p, t)| (p - t) * (p - t))
            .sum();
        let mean = fold.valid_y.iter().sum::<f64>() / n;
        let sst: f64 = fold.valid_y.iter().map(|&t| (t - mean) * (t - mean)).sum();
        fold_losses.push(sse / n);
        r2_sum += r2_from_sums(sse, sst);
    }
    let k = folds.len() as f64;
    Ok(CvResult {
        config: point,
        mean_mse: fold_losses.iter().sum::<f64>() / k,
        mean_r2: r2_sum / k,
        fold_losses,
    })
}

/// k-fold cross-validation of a single configuration: per-fold validation
/// MSE from a model trained on the complementary rows.
pub fn cross_validate_model(
    x: &[Vec<f64>],
    y: &[f64],
    point: HyperPoint,
    k: usize,
    seed: u64,
) -> Result<CvResult> {
    let folds = kfold_indices(y.len(), k, seed)?;
    let data = materialize_folds(x, y, &folds);
    cross_validate_on_folds(point, &data)
}

/// Exhaustive grid search under k-fold cross-validation. Every configuration
/// is scored on the same seeded folds by mean validation R^2; ties break
/// toward smaller n_estimators, then smaller max_depth, then smaller
/// learning_rate. Configurations run in parallel and results are reduced in
/// enumeration order.
pub fn grid_search(
    x: &[Vec<f64>],
    y: &[f64],
    grid: &HyperGrid,
    k: usize,
    seed: u64,
) -> Result<(HyperPoint, Vec<CvResult>)> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("hyperparameter grid is empty".into()));
    }
    let folds = kfold_indices(y.len(), k, seed)?;
    let data = materialize_folds(x, y, &folds);
    let results: Vec<CvResult> = grid
        .points()
        .into_par_iter()
        .map(|point| cross_validate_on_folds(point, &data))
        .collect::<Result<_>>()?;
    let best = results[select_best(&results)].config;
    Ok((best, results))
}

/// Index of the winning configuration under the R^2-then-size ordering.
pub(crate) fn select_best(results: &[CvResult]) -> usize {
    let mut best = 0;
    for (i, candidate) in results.iter().enumerate().skip(1) {
        if better(candidate, &results[best]) {
            best = i;
        }
    }
    best
}

fn better(a: &CvResult, b: &CvResult) -> bool {
    // NaN never wins; negative infinity loses to any finite score.
    let ra = if a.mean_r2.is_nan() {
        f64::NEG_INFINITY
    } else {
        a.mean_r2
    };
    let rb = if b.mean_r2.is_nan() {
        f64::NEG_INFINITY
    } else {
        b.mean_r2
    };
    if ra != rb {
        return ra > rb;
    }
    let ka = (
        a.config.n_estimators,
        a.config.max_depth,
        ordered(a.config.learning_rate),
    );
    let kb = (
        b.config.n_estimators,
        b.config.max_depth,
        ordered(b.config.learning_rate),
    );
    ka < kb
}

fn ordered(v: f64) -> u64 {
    // Monotone map for non-negative floats, enough for learning rates.
    v.to_bits()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kfold_equal_sizes() {
        let folds = kfold_indices(10, 5, 1).unwrap();
        assert_eq!(folds.len(), 5);
        for (train, valid) in &folds {
            assert_eq!(valid.len(), 2);
            assert_eq!(train.len(), 8);
        }
    }

    #[test]
    fn kfold_remainder_distribution() {
        let folds = kfold_indices(11, 5, 1).unwrap();
        let mut sizes: Vec<usize> = folds.iter().map(|(_, v)| v.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
    }

    #[test]
    fn kfold_is_partition() {
        let folds = kfold_indices(23, 4, 9).unwrap();
        let mut seen = vec![0usize; 23];
        for (train, valid) in &folds {
            for &i in valid {
                seen[i] += 1;
            }
            let mut all: Vec<usize> = train.iter().chain(valid).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..23).collect::<Vec<_>>());
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn kfold_bad_k() {
        assert!(matches!(
            kfold_indices(5, 1, 0).unwrap_err(),
            Error::BadK { .. }
        ));
        assert!(matches!(
            kfold_indices(5, 6, 0).unwrap_err(),
            Error::BadK { .. }
        ));
    }

    #[test]
    fn kfold_seed_changes_partition_not_sizes() {
        let a = kfold_indices(17, 5, 1).unwrap();
        let b = kfold_indices(17, 5, 2).unwrap();
        assert_eq!(kfold_indices(17, 5, 1).unwrap(), a);
        assert_ne!(a, b);
        let sizes = |f: &[(Vec<usize>, Vec<usize>)]| {
            let mut s: Vec<usize> = f.iter().map(|(_, v)| v.len()).collect();
            s.sort_unstable();
            s
        };
        assert_eq!(sizes(&a), sizes(&b));
    }

    #[test]
    fn evaluate_perfect_fit() {
        let y = [1.0, 2.0, 3.0];
        let m = evaluate(&y, &y, 1e-6).unwrap();
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mae, 0.0);
        assert_eq!(m.r2, 1.0);
        assert!(m.percent_errors.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn evaluate_unit_errors() {
        let m = evaluate(&[0.0, 0.0], &[1.0, 1.0], 1e-6).unwrap();
        assert_eq!(m.mse, 1.0);
        assert_eq!(m.rmse, 1.0);
        assert_eq!(m.mae, 1.0);
    }

    #[test]
    fn rmse_is_sqrt_of_mse_reported_pair() {
        // Consistency fixture for the published metric pair 0.2215 / 0.4706.
        let rmse = 0.2215f64.sqrt();
        assert!((rmse - 0.4706).abs() < 5e-4, "rmse = {rmse}");
    }

    #[test]
    fn evaluate_matches_simple_loop_oracle() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(1..1000);
            let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect();
            let m = evaluate(&y, &p, 1e-6).unwrap();

            let mut mse = 0.0;
            let mut mae = 0.0;
            for i in 0..n {
                mse += (p[i] - y[i]) * (p[i] - y[i]);
                mae += (p[i] - y[i]).abs();
            }
            mse /= n as f64;
            mae /= n as f64;
            assert!((m.mse - mse).abs() <= 1e-12 * mse.max(1.0));
            assert!((m.mae - mae).abs() <= 1e-12 * mae.max(1.0));
            assert!((m.rmse * m.rmse - m.mse).abs() <= 1e-12 * m.mse.max(1.0));
            assert!(m.mae <= m.rmse + 1e-12);
        }
    }

    #[test]
    fn evaluate_degenerate_r2() {
        let m = evaluate(&[2.0, 2.0], &[2.0, 2.0], 1e-6).unwrap();
        assert_eq!(m.r2, 1.0);
        let m = evaluate(&[2.0, 2.0], &[2.5, 2.5], 1e-6).unwrap();
        assert_eq!(m.r2, f64::NEG_INFINITY);
    }

    #[test]
    fn evaluate_length_mismatch() {
        assert!(matches!(
            evaluate(&[1.0], &[1.0, 2.0], 1e-6).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
    }

    fn linear_data(n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<f64> = (0..n).map(|i| i as f64 / 7.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        (vec![x], y)
    }

    #[test]
    fn cross_validate_constant_target() {
        let (x, _) = linear_data(40);
        let y = vec![3.0; 40];
        let cv = cross_validate_model(
            &x,
            &y,
            HyperPoint {
                n_estimators: 10,
                learning_rate: 0.1,
                max_depth: 2,
            },
            5,
            1,
        )
        .unwrap();
        assert_eq!(cv.fold_losses.len(), 5);
        assert!(cv.fold_losses.iter().all(|&l| l == 0.0));
        let mean: f64 = cv.fold_losses.iter().sum::<f64>() / 5.0;
        assert!((cv.mean_mse - mean).abs() < 1e-12);
    }

    #[test]
    fn grid_search_single_config() {
        let (x, y) = linear_data(60);
        let grid = HyperGrid {
            n_estimators: vec![20],
            learning_rate: vec![0.1],
            max_depth: vec![2],
        };
        let (best, results) = grid_search(&x, &y, &grid, 4, 2).unwrap();
        assert_eq!(results.len(), 1);
        assert_eq!(best, results[0].config);
    }

    #[test]
    fn grid_search_enumerates_full_product() {
        let (x, y) = linear_data(40);
        let grid = HyperGrid {
            n_estimators: vec![5, 10],
            learning_rate: vec![0.1, 0.2],
            max_depth: vec![1, 2],
        };
        let (_, results) = grid_search(&x, &y, &grid, 3, 2).unwrap();
        assert_eq!(results.len(), 8);
        for r in &results {
            assert_eq!(r.fold_losses.len(), 3);
        }
        // Declaration order: n_estimators outermost, max_depth innermost.
        assert_eq!(results[0].config.n_estimators, 5);
        assert_eq!(results[0].config.max_depth, 1);
        assert_eq!(results[1].config.max_depth, 2);
        assert_eq!(results[4].config.n_estimators, 10);
    }

    #[test]
    fn higher_learning_rate_wins_on_linear_data() {
        let (x, y) = linear_data(120);
        let grid = HyperGrid {
            n_estimators: vec![100],
            learning_rate: vec![0.01, 0.1],
            max_depth: vec![3],
        };
        let (best, results) = grid_search(&x, &y, &grid, 5, 7).unwrap();
        assert_eq!(best.learning_rate, 0.1);
        let slow = &results[0];
        let fast = &results[1];
        assert!(fast.mean_r2 > slow.mean_r2);
    }

    #[test]
    fn tie_breaking_order() {
        let mk = |n, d, lr, r2| CvResult {
            config: HyperPoint {
                n_estimators: n,
                learning_rate: lr,
                max_depth: d,
            },
            fold_losses: vec![0.0],
            mean_mse: 0.0,
            mean_r2: r2,
        };
        // Higher R^2 wins outright.
        assert_eq!(select_best(&[mk(300, 7, 0.1, 0.5), mk(100, 3, 0.01, 0.9)]), 1);
        // Equal R^2: smaller n_estimators first.
        assert_eq!(select_best(&[mk(300, 3, 0.01, 0.9), mk(100, 7, 0.1, 0.9)]), 1);
        // Then smaller max_depth.
        assert_eq!(select_best(&[mk(100, 7, 0.01, 0.9), mk(100, 3, 0.1, 0.9)]), 1);
        // Then smaller learning rate.
        assert_eq!(select_best(&[mk(100, 3, 0.1, 0.9), mk(100, 3, 0.01, 0.9)]), 1);
        // Undefined R^2 sinks below finite scores.
        assert_eq!(
            select_best(&[mk(100, 3, 0.1, f64::NEG_INFINITY), mk(300, 7, 0.1, -5.0)]),
            1
        );
    }
}

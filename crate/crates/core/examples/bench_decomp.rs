use copaug::copula::fit_copula;
use copaug::learners::fit_gbm;
use copaug::model_select::{kfold_indices, HyperPoint};
use copaug::preprocess::{polynomial_expand, Imputer, Standardizer};
use copaug::experiment::make_bundled_dataset;
use copaug::table::{drop_missing_target, train_test_split, Table};

fn gather(x: &[Vec<f64>], rows: &[usize]) -> Vec<Vec<f64>> {
    x.iter().map(|c| rows.iter().map(|&r| c[r]).collect()).collect()
}

// Per-fold validation losses split into real-row and synthetic-row parts.
fn eval_cv_split(std: &Table, point: HyperPoint, k: usize, seed: u64) -> (Vec<f64>, f64, f64) {
    let x = std.feature_matrix();
    let y = std.target_column();
    let flags = std.synthetic_flags();
    let folds = kfold_indices(y.len(), k, seed).unwrap();
    let mut fold_losses = Vec::new();
    let mut real_sse = 0.0; let mut real_n = 0usize;
    let mut syn_sse = 0.0; let mut syn_n = 0usize;
    for (train, valid) in &folds {
        let tx = gather(&x, train);
        let ty: Vec<f64> = train.iter().map(|&r| y[r]).collect();
        let model = fit_gbm(&tx, &ty, &point.to_config()).unwrap();
        let vx = gather(&x, valid);
        let preds = model.predict(&vx).unwrap();
        let mut sse = 0.0;
        for (i, &r) in valid.iter().enumerate() {
            let e = (preds[i] - y[r]) * (preds[i] - y[r]);
            sse += e;
            if flags[r] { syn_sse += e; syn_n += 1; } else { real_sse += e; real_n += 1; }
        }
        fold_losses.push(sse / valid.len() as f64);
    }
    (fold_losses, real_sse / real_n as f64, syn_sse / syn_n.max(1) as f64)
}

fn main() {
    let master = 42u64;
    let point = HyperPoint { n_estimators: 200, learning_rate: 0.05, max_depth: 5 };
    let raw = make_bundled_dataset(12657, master + 1);
    let cleaned = drop_missing_target(&raw).unwrap();
    let split = train_test_split(&cleaned, 0.8, master + 2).unwrap();
    let train = Imputer::fit(&split.train).unwrap().apply(&split.train).unwrap();
    let copula = fit_copula(&train, master + 3).unwrap();

    for level in [0usize, 100, 250] {
        let aug = if level == 0 { train.clone() } else {
            train.append(&copula.sample_with_seed(level, 1042 + level as u64)).unwrap()
        };
        let poly = polynomial_expand(&aug, 2).unwrap();
        let std = Standardizer::fit(&poly).unwrap().apply(&poly).unwrap();
        let (folds, real_mse, syn_mse) = eval_cv_split(&std, point, 10, master + 5);
        let mean = folds.iter().sum::<f64>() / folds.len() as f64;
        println!(
            "level {level:>4}: mean_fold={mean:.5} real_rows_mse={real_mse:.5} synth_rows_mse={syn_mse:.5}"
        );
    }
}

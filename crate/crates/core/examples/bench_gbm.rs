use copaug::experiment::make_bundled_dataset_with;
use copaug::learners::{fit_gbm, GbmConfig};
use copaug::preprocess::{polynomial_expand, Standardizer};
use std::time::Instant;

fn main() {
    let t = make_bundled_dataset_with(10126, 1, 0.0);
    let poly = polynomial_expand(&t, 2).unwrap();
    let std = Standardizer::fit(&poly).unwrap().apply(&poly).unwrap();
    let x = std.feature_matrix();
    let y = std.target_column().to_vec();
    println!("rows={} features={}", y.len(), x.len());
    for (ne, lr, d) in [(100usize, 0.1f64, 3usize), (300, 0.1, 7), (200, 0.05, 5)] {
        let start = Instant::now();
        let cfg = GbmConfig { n_estimators: ne, learning_rate: lr, max_depth: d, ..GbmConfig::default() };
        let model = fit_gbm(&x, &y, &cfg).unwrap();
        let el = start.elapsed();
        println!("ne={ne} depth={d}: {:.2?} final_mse={:.4}", el, model.staged_train_mse.last().unwrap());
    }
}

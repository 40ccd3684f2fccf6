use copaug::copula::fit_copula;
use copaug::learners::{fit_gbm, GbmConfig};
use copaug::model_select::{cross_validate_model, HyperPoint};
use copaug::preprocess::{polynomial_expand, Imputer, Standardizer};
use copaug::experiment::make_bundled_dataset;
use copaug::stats::paired_ttest;
use copaug::table::{drop_missing_target, train_test_split};

fn mse(y: &[f64], p: &[f64]) -> f64 {
    y.iter().zip(p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64
}
fn var(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

fn main() {
    let master = 42u64;
    let point = HyperPoint { n_estimators: 200, learning_rate: 0.05, max_depth: 5 };
    let raw = make_bundled_dataset(12657, master + 1);
    let cleaned = drop_missing_target(&raw).unwrap();
    let split = train_test_split(&cleaned, 0.8, master + 2).unwrap();
    let imputer = Imputer::fit(&split.train).unwrap();
    let train = imputer.apply(&split.train).unwrap();
    let test = imputer.apply(&split.test).unwrap();
    let copula = fit_copula(&train, master + 3).unwrap();

    // Marginal fidelity: synthetic target variance vs real target variance.
    let big = copula.sample_with_seed(20000, 777);
    let vr = var(train.target_column());
    let vs = var(big.target_column());
    println!("target var real={vr:.4} synth={vs:.4} ratio={:.4}", vs / vr);

    // mu_s / mu_r under the fixed config.
    let train_poly = polynomial_expand(&train, 2).unwrap();
    let scaler = Standardizer::fit(&train_poly).unwrap();
    let train_std = scaler.apply(&train_poly).unwrap();
    let test_std = scaler.apply(&polynomial_expand(&test, 2).unwrap()).unwrap();
    let synth_std = scaler.apply(&polynomial_expand(&copula.sample_with_seed(5000, 999), 2).unwrap()).unwrap();
    let x = train_std.feature_matrix();
    let y = train_std.target_column().to_vec();
    let model = fit_gbm(&x, &y, &point.to_config()).unwrap();
    let mu_r = mse(test_std.target_column(), &model.predict(&test_std.feature_matrix()).unwrap());
    let mu_s = mse(synth_std.target_column(), &model.predict(&synth_std.feature_matrix()).unwrap());
    println!("mu_real={mu_r:.4} mu_synth={mu_s:.4} ratio={:.3}", mu_s / mu_r);

    // Matched-fold eval CV at fixed config for levels 0/100/250.
    let mut baseline_losses = Vec::new();
    for level in [0usize, 100, 250] {
        let aug = if level == 0 {
            train.clone()
        } else {
            train.append(&copula.sample_with_seed(level, 1042 + level as u64)).unwrap()
        };
        let poly = polynomial_expand(&aug, 2).unwrap();
        let sc = Standardizer::fit(&poly).unwrap();
        let std = sc.apply(&poly).unwrap();
        let cv = cross_validate_model(
            &std.feature_matrix(),
            &std.target_column().to_vec(),
            point,
            10,
            master + 5,
        )
        .unwrap();
        if level == 0 {
            baseline_losses = cv.fold_losses.clone();
            println!("level {level}: mean_mse={:.5}", cv.mean_mse);
        } else {
            let t = paired_ttest(&baseline_losses, &cv.fold_losses).unwrap();
            println!(
                "level {level}: mean_mse={:.5} mean_diff={:+.5} ({:+.2}%) t={:.2} p_one={:.4}",
                cv.mean_mse,
                t.mean_diff,
                100.0 * t.mean_diff / (baseline_losses.iter().sum::<f64>() / 10.0),
                t.t_statistic,
                t.p_one_sided(),
            );
        }
    }
}

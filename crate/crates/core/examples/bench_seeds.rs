use copaug::copula::fit_copula;
use copaug::model_select::{cross_validate_model, HyperPoint};
use copaug::preprocess::{polynomial_expand, Imputer, Standardizer};
use copaug::experiment::make_bundled_dataset;
use copaug::stats::paired_ttest;
use copaug::table::{drop_missing_target, train_test_split};

fn main() {
    let master = 42u64;
    let point = HyperPoint { n_estimators: 100, learning_rate: 0.05, max_depth: 3 };
    let raw = make_bundled_dataset(12657, master + 1);
    let cleaned = drop_missing_target(&raw).unwrap();
    let split = train_test_split(&cleaned, 0.8, master + 2).unwrap();
    let train = Imputer::fit(&split.train).unwrap().apply(&split.train).unwrap();
    let copula = fit_copula(&train, master + 3).unwrap();

    let eval_cv = |t: &copaug::table::Table| {
        let poly = polynomial_expand(t, 2).unwrap();
        let std = Standardizer::fit(&poly).unwrap().apply(&poly).unwrap();
        cross_validate_model(&std.feature_matrix(), &std.target_column().to_vec(), point, 10, master + 5).unwrap()
    };
    let base = eval_cv(&train);
    println!("baseline mean={:.5}", base.mean_mse);
    for level in [100usize, 250] {
        for seed in [1042u64, 2042, 3042, 4042, 5042] {
            let aug = train.append(&copula.sample_with_seed(level, seed)).unwrap();
            let cv = eval_cv(&aug);
            let t = paired_ttest(&base.fold_losses, &cv.fold_losses).unwrap();
            println!(
                "level {level} seed {seed}: mean_diff={:+.2}% t={:+.2} p_two={:.3}",
                100.0 * t.mean_diff / base.mean_mse, t.t_statistic, t.p_value
            );
        }
    }
}

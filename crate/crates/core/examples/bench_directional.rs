use copaug::experiment::{run_experiment_with_workers, ExperimentConfig};
use std::time::Instant;

fn main() {
    let levels: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|v| v.parse().unwrap()).collect())
        .unwrap_or_else(|| vec![100, 250]);
    let cfg = ExperimentConfig {
        synthetic_levels: levels,
        master_seed: 42,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let result = run_experiment_with_workers(&cfg, 0).unwrap();
    println!("elapsed: {:.1?}", start.elapsed());
    for m in &result.models {
        println!(
            "{:<16} best=({},{},{}) test_mse={:.4} cv_mean_mse={:.5} cv_folds[0..3]={:.5?} synth_in_folds={:?}",
            m.name,
            m.best_config.n_estimators, m.best_config.learning_rate, m.best_config.max_depth,
            m.test_metrics.mse, m.eval_cv.mean_mse,
            &m.eval_cv.fold_losses[..3], m.eval_cv.fold_synthetic_counts,
        );
        if let Some(ks) = &m.ks {
            println!("  ks all_pass={} d={:?}", ks.all_pass, ks.columns.iter().map(|c| (c.column.clone(), (c.outcome.d_statistic*1000.0).round()/1000.0, (c.outcome.p_value*1000.0).round()/1000.0)).collect::<Vec<_>>());
        }
    }
    for t in &result.ttests {
        println!(
            "{}: t={:.3} mean_diff={:.6} p_two={:.5} p_one={:.5} significant={}",
            t.comparison, t.t_statistic, t.mean_diff, t.p_two_sided, t.p_one_sided, t.significant
        );
    }
}

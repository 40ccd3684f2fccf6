//! Report serialization: a full structured JSON result plus plot-ready CSV
//! files (overall metrics, percent-error summaries, t-tests, per-fold CV
//! losses, and per-row percent errors).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::experiment::ExperimentResult;

/// Writes all report files into `out_dir` (created if needed) and returns
/// the written paths:
/// report.json, metrics.csv, percent_error.csv, ttests.csv, cv_folds.csv,
/// pe_density.csv.
pub fn write_report(result: &ExperimentResult, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let mut json = serde_json::to_string_pretty(result)?;
    json.push('\n');
    written.push(write_file(dir.join("report.json"), json)?);

    let mut metrics = String::from("model,mse,rmse,mae\n");
    for m in &result.models {
        let _ = writeln!(
            metrics,
            "{},{},{},{}",
            m.name,
            sig6(m.test_metrics.mse),
            sig6(m.test_metrics.rmse),
            sig6(m.test_metrics.mae)
        );
    }
    written.push(write_file(dir.join("metrics.csv"), metrics)?);

    let mut pe = String::from("model,mean,median,std\n");
    for m in &result.models {
        let _ = writeln!(
            pe,
            "{},{},{},{}",
            m.name,
            sig6(m.test_metrics.pe_mean),
            sig6(m.test_metrics.pe_median),
            sig6(m.test_metrics.pe_std)
        );
    }
    written.push(write_file(dir.join("percent_error.csv"), pe)?);

    let mut ttests = String::from("comparison,p_value,significant\n");
    for t in &result.ttests {
        let _ = writeln!(
            ttests,
            "{},{},{}",
            t.comparison,
            sig6(t.p_two_sided),
            if t.significant { "yes" } else { "no" }
        );
    }
    written.push(write_file(dir.join("ttests.csv"), ttests)?);

    let mut folds = String::from("model,fold,mse\n");
    for m in &result.models {
        for (i, loss) in m.eval_cv.fold_losses.iter().enumerate() {
            let _ = writeln!(folds, "{},{},{}", m.name, i, sig6(*loss));
        }
    }
    written.push(write_file(dir.join("cv_folds.csv"), folds)?);

    let mut density = String::from("model,percent_error\n");
    for m in &result.models {
        for pe_row in &m.test_metrics.percent_errors {
            let _ = writeln!(density, "{},{}", m.name, sig6(*pe_row));
        }
    }
    written.push(write_file(dir.join("pe_density.csv"), density)?);

    Ok(written)
}

fn write_file(path: PathBuf, content: String) -> Result<PathBuf> {
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Formats a float with six significant digits, decimal notation where
/// reasonable and scientific otherwise (like printf %.6g).
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent parses");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        let trimmed = fixed.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{exp}")
    }
}

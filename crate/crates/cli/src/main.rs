//! Command-line interface for the synthetic-data augmentation pipeline.
//!
//! Exit codes: 0 success, 1 pipeline error, 2 usage error, 3 validation
//! failed (distributions differ in `ks-test`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use copaug::copula::{fit_copula, validate_synthetic, CopulaModel};
use copaug::experiment::{
    make_bundled_dataset_with, run_experiment_with_workers, write_report, ExperimentConfig,
    ExperimentResult,
};
use copaug::model_select::HyperGrid;
use copaug::table::{load_csv, write_csv, Table};

const EXIT_OK: u8 = 0;
const EXIT_PIPELINE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

/// Environment variable that overrides the master seed of `run`.
const SEED_ENV: &str = "COPAUG_SEED";

#[derive(Parser)]
#[command(
    name = "copaug",
    version,
    about = "Gaussian-copula synthetic data augmentation for tabular regression"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the bundled desk-scale dataset as a CSV file.
    GenerateData {
        /// Number of rows (minimum 100).
        #[arg(long, default_value_t = 12_657)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Fraction of cells flagged missing.
        #[arg(long, default_value_t = 0.02)]
        missing_frac: f64,
        /// Output CSV path.
        #[arg(long, default_value = "bundled.csv")]
        out: PathBuf,
    },
    /// Fit a Gaussian copula to a CSV file and write a copula-v1 model.
    FitCopula {
        /// Input CSV (header row required; all columns are used).
        #[arg(long)]
        input: PathBuf,
        /// Output model path.
        #[arg(long, default_value = "copula.json")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target column name (defaults to the last header column).
        #[arg(long)]
        target: Option<String>,
    },
    /// Draw synthetic rows from a saved copula model into a CSV file.
    Sample {
        /// Model file written by fit-copula.
        #[arg(long)]
        model: PathBuf,
        /// Number of rows to draw (minimum 1).
        #[arg(long)]
        n: usize,
        /// Output CSV path.
        #[arg(long, default_value = "synthetic.csv")]
        out: PathBuf,
        /// Override the seed stored in the model.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Per-column two-sample KS test between two CSV files.
    KsTest {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Target column name (defaults to the last header column).
        #[arg(long)]
        target: Option<String>,
    },
    /// Run the full experiment sweep and write report files.
    Run {
        /// JSON config file; inline flags below override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Input CSV path or "bundled".
        #[arg(long)]
        input: Option<String>,
        /// Comma-separated synthetic volumes, e.g. "100,250".
        #[arg(long)]
        levels: Option<String>,
        /// Master seed (the COPAUG_SEED environment variable wins over this).
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for report files.
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Worker threads (0 = one per core).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Shrink the hyperparameter grid to a single point for quick runs.
        #[arg(long)]
        fast: bool,
        /// Row count for the bundled generator.
        #[arg(long)]
        bundled_rows: Option<usize>,
    },
    /// Re-print the summary tables from an existing report.json.
    Report {
        #[arg(long, default_value = "results/report.json")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::from(EXIT_PIPELINE)
        }
    }
}

fn usage_error(message: &str) -> u8 {
    eprintln!("usage error: {message}");
    eprintln!("run with --help for usage");
    EXIT_USAGE
}

fn dispatch(command: Command) -> copaug::Result<u8> {
    match command {
        Command::GenerateData {
            n,
            seed,
            missing_frac,
            out,
        } => {
            if n < 100 {
                return Ok(usage_error("--n must be at least 100"));
            }
            if !(0.0..1.0).contains(&missing_frac) {
                return Ok(usage_error("--missing-frac must be in [0, 1)"));
            }
            let table = make_bundled_dataset_with(n, seed, missing_frac);
            write_csv(&table, &out)?;
            println!("wrote {} rows to {}", table.n_rows(), out.display());
            Ok(EXIT_OK)
        }
        Command::FitCopula {
            input,
            out,
            seed,
            target,
        } => {
            let table = load_full_csv(&input, target.as_deref())?;
            let model = fit_copula(&table, seed)?;
            model.save(&out)?;
            print_copula_summary(&model);
            println!("wrote model to {}", out.display());
            Ok(EXIT_OK)
        }
        Command::Sample {
            model,
            n,
            out,
            seed,
        } => {
            if n < 1 {
                return Ok(usage_error("--n must be at least 1"));
            }
            let model = CopulaModel::load(&model)?;
            let table = match seed {
                Some(s) => model.sample_with_seed(n, s),
                None => model.sample(n),
            };
            write_csv(&table, &out)?;
            println!("wrote {} synthetic rows to {}", n, out.display());
            Ok(EXIT_OK)
        }
        Command::KsTest {
            real,
            synth,
            alpha,
            target,
        } => {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Ok(usage_error("--alpha must be in (0, 1)"));
            }
            let real_table = load_full_csv(&real, target.as_deref())?;
            let synth_table = load_csv(
                &synth,
                &real_table.column_names().to_vec(),
                real_table.target_name(),
            )?;
            let validation = validate_synthetic(&real_table, &synth_table, alpha)?;
            println!("{:<12} {:>10} {:>12} {:>6}", "column", "D", "p", "pass");
            for col in &validation.columns {
                println!(
                    "{:<12} {:>10.6} {:>12.6e} {:>6}",
                    col.column,
                    col.outcome.d_statistic,
                    col.outcome.p_value,
                    if col.pass { "yes" } else { "no" }
                );
            }
            if validation.all_pass {
                println!("all columns pass at alpha = {alpha}");
                Ok(EXIT_OK)
            } else {
                println!("distributions differ at alpha = {alpha}");
                Ok(EXIT_VALIDATION)
            }
        }
        Command::Run {
            config,
            input,
            levels,
            seed,
            out,
            workers,
            fast,
            bundled_rows,
        } => {
            let mut cfg = match config {
                Some(path) => match std::fs::read_to_string(&path) {
                    Ok(text) => match ExperimentConfig::from_json(&text) {
                        Ok(cfg) => cfg,
                        Err(e) => {
                            return Ok(usage_error(&format!(
                                "config {} is invalid: {e}",
                                path.display()
                            )))
                        }
                    },
                    Err(e) => {
                        return Ok(usage_error(&format!(
                            "cannot read config {}: {e}",
                            path.display()
                        )))
                    }
                },
                None => ExperimentConfig::default(),
            };
            if let Some(input) = input {
                cfg.input_path = input;
            }
            if let Some(levels) = levels {
                match parse_levels(&levels) {
                    Ok(parsed) => cfg.synthetic_levels = parsed,
                    Err(msg) => return Ok(usage_error(&msg)),
                }
            }
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            if let Some(rows) = bundled_rows {
                cfg.bundled_rows = rows;
            }
            if fast {
                cfg.grid = HyperGrid::fast();
            }
            if let Ok(env_seed) = std::env::var(SEED_ENV) {
                match env_seed.parse::<u64>() {
                    Ok(s) => cfg.master_seed = s,
                    Err(_) => {
                        return Ok(usage_error(&format!(
                            "{SEED_ENV} must be an unsigned integer, got {env_seed:?}"
                        )))
                    }
                }
            }
            if let Err(e) = cfg.validate() {
                return Ok(usage_error(&e.to_string()));
            }

            let result = run_experiment_with_workers(&cfg, workers)?;
            let files = write_report(&result, &out)?;
            print_summary(&result);
            eprintln!("report files:");
            for f in &files {
                eprintln!("  {}", f.display());
            }
            Ok(EXIT_OK)
        }
        Command::Report { input } => {
            let text = std::fs::read_to_string(&input)
                .map_err(|e| copaug::Error::io(&input, e))?;
            let result: ExperimentResult = serde_json::from_str(&text)?;
            print_summary(&result);
            Ok(EXIT_OK)
        }
    }
}

fn parse_levels(spec: &str) -> Result<Vec<usize>, String> {
    if spec.trim().is_empty() {
        return Ok(Vec::new());
    }
    spec.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid level {part:?} in --levels"))
        })
        .collect()
}

/// Loads a CSV using its entire header as the schema; the target defaults to
/// the last header column.
fn load_full_csv(path: &Path, target: Option<&str>) -> copaug::Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| copaug::Error::io(path, e))?;
    let first = text.lines().next().unwrap_or("");
    if first.trim().is_empty() {
        return Err(copaug::Error::EmptyFile(path.to_path_buf()));
    }
    let headers: Vec<String> = first.split(',').map(|s| s.trim().to_string()).collect();
    let target = target
        .unwrap_or_else(|| headers.last().expect("non-empty").as_str())
        .to_string();
    load_csv(path, &headers, &target)
}

fn print_copula_summary(model: &CopulaModel) {
    println!("columns: {}", model.columns.join(", "));
    println!("{:<12} {:>8} {:>12} {:>12}", "column", "n", "clip_min", "clip_max");
    for (i, name) in model.columns.iter().enumerate() {
        println!(
            "{:<12} {:>8} {:>12.5} {:>12.5}",
            name,
            model.marginals[i].len(),
            model.clip_min[i],
            model.clip_max[i]
        );
    }
    println!("normal-score correlation matrix:");
    for row in &model.corr {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>8.4}")).collect();
        println!("  [{}]", cells.join(" "));
    }
}

fn print_summary(result: &ExperimentResult) {
    println!(
        "{:<16} {:>10} {:>10} {:>10} {:>12}",
        "model", "mse", "rmse", "mae", "cv_mean_mse"
    );
    for m in &result.models {
        println!(
            "{:<16} {:>10.4} {:>10.4} {:>10.4} {:>12.5}",
            m.name, m.test_metrics.mse, m.test_metrics.rmse, m.test_metrics.mae, m.eval_cv.mean_mse
        );
    }
    println!();
    println!(
        "{:<16} {:>10} {:>10} {:>10}",
        "model", "pe_mean", "pe_median", "pe_std"
    );
    for m in &result.models {
        println!(
            "{:<16} {:>10.2} {:>10.2} {:>10.2}",
            m.name, m.test_metrics.pe_mean, m.test_metrics.pe_median, m.test_metrics.pe_std
        );
    }
    if !result.ttests.is_empty() {
        println!();
        println!(
            "{:<30} {:>12} {:>12} {:>6}",
            "comparison", "p_two_sided", "p_one_sided", "sig"
        );
        for t in &result.ttests {
            println!(
                "{:<30} {:>12.5} {:>12.5} {:>6}",
                t.comparison,
                t.p_two_sided,
                t.p_one_sided,
                if t.significant { "yes" } else { "no" }
            );
        }
    }
    if result.models.iter().any(|m| m.ks.is_some()) {
        println!();
        println!("KS validation (synthetic batch vs real training data):");
        for m in &result.models {
            if let Some(ks) = &m.ks {
                let worst = ks
                    .columns
                    .iter()
                    .min_by(|a, b| a.outcome.p_value.total_cmp(&b.outcome.p_value));
                if let Some(w) = worst {
                    println!(
                        "  {:<16} all_pass={} worst column {} (D={:.4}, p={:.4})",
                        m.name, ks.all_pass, w.column, w.outcome.d_statistic, w.outcome.p_value
                    );
                }
            }
        }
    }
}

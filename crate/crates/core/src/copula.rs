//! Gaussian copula over empirical marginals: fitting, seeded synthetic
//! sampling with range clipping, KS validation of the generated batch, and
//! model persistence.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, jacobi_eigen};
use crate::special::{normal_cdf, normal_quantile};
use crate::stats::{ks_two_sample, KsOutcome};
use crate::table::Table;

/// Format tag written into persisted copula model files.
pub const COPULA_FORMAT: &str = "copula-v1";

/// Eigenvalue floor used when repairing a correlation estimate that is not
/// positive semi-definite.
const PSD_EIGENVALUE_FLOOR: f64 = 1e-10;

/// A univariate marginal distribution.
///
/// The empirical variant interpolates linearly between order statistics at
/// plotting positions rank/(n+1); u values outside [1/(n+1), n/(n+1)] map to
/// the sample minimum or maximum. Constant columns get a degenerate marginal.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Marginal {
    Empirical { sorted_values: Vec<f64> },
    Constant { value: f64 },
}

impl Marginal {
    fn from_column(values: &[f64]) -> Marginal {
        let mut sorted = values.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        if sorted[0] == sorted[sorted.len() - 1] {
            Marginal::Constant { value: sorted[0] }
        } else {
            Marginal::Empirical {
                sorted_values: sorted,
            }
        }
    }

    /// CDF mapping the sample range into (0, 1) exclusive.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Constant { .. } => 0.5,
            Marginal::Empirical { sorted_values: v } => {
                let n = v.len();
                let denom = (n + 1) as f64;
                if x <= v[0] {
                    return 1.0 / denom;
                }
                if x >= v[n - 1] {
                    return n as f64 / denom;
                }
                // Last index k with v[k] <= x; ties collapse to the top of
                // their flat segment so cdf and inverse_cdf stay consistent.
                let k = v.partition_point(|&s| s <= x) - 1;
                let uk = (k + 1) as f64 / denom;
                if v[k] == x {
                    return uk;
                }
                let uk1 = (k + 2) as f64 / denom;
                uk + (x - v[k]) / (v[k + 1] - v[k]) * (uk1 - uk)
            }
        }
    }

    /// Inverse CDF; tail mass beyond the plotting positions returns the
    /// sample extremes.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        match self {
            Marginal::Constant { value } => *value,
            Marginal::Empirical { sorted_values: v } => {
                let n = v.len();
                let denom = (n + 1) as f64;
                if u <= 1.0 / denom {
                    return v[0];
                }
                if u >= n as f64 / denom {
                    return v[n - 1];
                }
                let k = ((u * denom).floor() as usize - 1).min(n - 2);
                let uk = (k + 1) as f64 / denom;
                let uk1 = (k + 2) as f64 / denom;
                v[k] + (u - uk) / (uk1 - uk) * (v[k + 1] - v[k])
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Marginal::Constant { .. } => 1,
            Marginal::Empirical { sorted_values } => sorted_values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fitted Gaussian copula: one marginal per column (features and target),
/// a positive semi-definite normal-score correlation matrix, per-column clip
/// bounds from the training data, and the generator seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CopulaModel {
    pub format: String,
    pub columns: Vec<String>,
    pub target: String,
    pub marginals: Vec<Marginal>,
    /// Row-major correlation matrix.
    pub corr: Vec<Vec<f64>>,
    pub clip_min: Vec<f64>,
    pub clip_max: Vec<f64>,
    pub seed: u64,
}

/// Fits a Gaussian copula to a fully observed table.
///
/// Marginals are empirical CDFs with rank/(n+1) plotting positions; the
/// correlation matrix is the Pearson correlation of the normal scores
/// z = Phi^-1(u), repaired to be positive semi-definite if needed. Clip
/// bounds are the per-column training min and max.
pub fn fit_copula(train: &Table, seed: u64) -> Result<CopulaModel> {
    let n = train.n_rows();
    if n < 10 {
        return Err(Error::TooFewRows { needed: 10, got: n });
    }
    if train.has_missing() {
        return Err(Error::NonFiniteInput);
    }
    for c in 0..train.n_cols() {
        if train.column(c).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
    }

    let d = train.n_cols();
    let marginals: Vec<Marginal> = (0..d).map(|c| Marginal::from_column(train.column(c))).collect();

    // Normal scores per column; constant columns contribute zeros and zero
    // correlation with everything else.
    let scores: Vec<Vec<f64>> = (0..d)
        .map(|c| {
            let m = &marginals[c];
            match m {
                Marginal::Constant { .. } => vec![0.0; n],
                Marginal::Empirical { .. } => train
                    .column(c)
                    .iter()
                    .map(|&x| normal_quantile(m.cdf(x)))
                    .collect(),
            }
        })
        .collect();

    let mut corr = vec![vec![0.0; d]; d];
    for i in 0..d {
        corr[i][i] = 1.0;
        for j in (i + 1)..d {
            let r = if matches!(marginals[i], Marginal::Constant { .. })
                || matches!(marginals[j], Marginal::Constant { .. })
            {
                0.0
            } else {
                pearson(&scores[i], &scores[j]).clamp(-1.0, 1.0)
            };
            corr[i][j] = r;
            corr[j][i] = r;
        }
    }
    let corr = repair_psd(corr);

    let clip_min = (0..d)
        .map(|c| train.column(c).iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let clip_max = (0..d)
        .map(|c| train.column(c).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();

    Ok(CopulaModel {
        format: COPULA_FORMAT.to_string(),
        columns: train.column_names().to_vec(),
        target: train.target_name().to_string(),
        marginals,
        corr,
        clip_min,
        clip_max,
        seed,
    })
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa * sbb).sqrt()
    }
}

/// Clips negative eigenvalues to a small floor and renormalizes the diagonal
/// to one. A matrix that is already PSD is returned unchanged.
fn repair_psd(corr: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let d = corr.len();
    let (values, vectors) = jacobi_eigen(&corr);
    if values.iter().all(|&l| l >= PSD_EIGENVALUE_FLOOR) {
        return corr;
    }
    let clipped: Vec<f64> = values
        .iter()
        .map(|&l| l.max(PSD_EIGENVALUE_FLOOR))
        .collect();
    // Reconstruct V diag(clipped) V'.
    let mut rebuilt = vec![vec![0.0; d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += vectors[i][k] * clipped[k] * vectors[j][k];
            }
            rebuilt[i][j] = s;
        }
    }
    // Renormalize to unit diagonal.
    let scale: Vec<f64> = (0..d).map(|i| rebuilt[i][i].sqrt()).collect();
    for i in 0..d {
        for j in 0..d {
            rebuilt[i][j] /= scale[i] * scale[j];
        }
    }
    rebuilt
}

impl CopulaModel {
    /// Draws `n` synthetic rows using the model's stored seed. Every call
    /// restarts the stream, so equal seeds give identical tables.
    pub fn sample(&self, n: usize) -> Table {
        self.sample_with_seed(n, self.seed)
    }

    /// Draws `n` synthetic rows from an explicit seed so parallel callers can
    /// use independent streams.
    pub fn sample_with_seed(&self, n: usize, seed: u64) -> Table {
        let d = self.columns.len();
        let factor = self.correlation_factor();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
        let mut eps = vec![0.0; d];
        for _ in 0..n {
            for e in eps.iter_mut() {
                *e = rng.sample(StandardNormal);
            }
            for j in 0..d {
                let mut z = 0.0;
                for k in 0..=j {
                    z += factor[j][k] * eps[k];
                }
                let u = normal_cdf(z);
                let x = self.marginals[j].inverse_cdf(u);
                columns[j].push(x.clamp(self.clip_min[j], self.clip_max[j]));
            }
        }
        let mut table = Table::from_columns(self.columns.clone(), columns, &self.target)
            .expect("copula schema is valid by construction");
        table.set_all_synthetic();
        table
    }

    /// Lower-triangular factor of the correlation matrix: Cholesky when the
    /// matrix is positive definite, eigen square root otherwise.
    fn correlation_factor(&self) -> Vec<Vec<f64>> {
        if let Some(l) = cholesky(&self.corr) {
            return l;
        }
        let d = self.corr.len();
        let (values, vectors) = jacobi_eigen(&self.corr);
        let mut factor = vec![vec![0.0; d]; d];
        for i in 0..d {
            for k in 0..d {
                factor[i][k] = vectors[i][k] * values[k].max(0.0).sqrt();
            }
        }
        factor
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<CopulaModel> {
        let model: CopulaModel = serde_json::from_str(text)?;
        if model.format != COPULA_FORMAT {
            return Err(Error::BadFormat {
                expected: COPULA_FORMAT.to_string(),
                found: model.format,
            });
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CopulaModel> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CopulaModel::from_json(&text)
    }
}

/// Per-column KS comparison of a synthetic batch against real data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnKs {
    pub column: String,
    #[serde(flatten)]
    pub outcome: KsOutcome,
    pub pass: bool,
}

/// Validation verdict: every column must pass for the batch to pass.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsValidation {
    pub alpha: f64,
    pub columns: Vec<ColumnKs>,
    pub all_pass: bool,
}

/// Runs a per-column two-sample KS test between real and synthetic tables
/// with identical schemas. A column passes when p >= alpha.
pub fn validate_synthetic(real: &Table, synth: &Table, alpha: f64) -> Result<KsValidation> {
    if real.column_names() != synth.column_names() {
        return Err(Error::SchemaMismatch(format!(
            "real columns {:?} vs synthetic columns {:?}",
            real.column_names(),
            synth.column_names()
        )));
    }
    let mut columns = Vec::with_capacity(real.n_cols());
    for c in 0..real.n_cols() {
        let outcome = ks_two_sample(&real.observed(c), &synth.observed(c))?;
        let pass = outcome.p_value >= alpha;
        columns.push(ColumnKs {
            column: real.column_names()[c].clone(),
            outcome,
            pass,
        });
    }
    let all_pass = columns.iter().all(|c| c.pass);
    Ok(KsValidation {
        alpha,
        columns,
        all_pass,
    })
}

/// Appends `n` synthetic rows drawn from the model (its stored seed) to the
/// training table. Appended rows carry the synthetic provenance flag.
pub fn augment(train: &Table, model: &CopulaModel, n: usize) -> Result<Table> {
    if train.column_names() != model.columns.as_slice() || train.target_name() != model.target {
        return Err(Error::SchemaMismatch(format!(
            "table columns {:?} vs model columns {:?}",
            train.column_names(),
            model.columns
        )));
    }
    if n == 0 {
        return Ok(train.clone());
    }
    train.append(&model.sample(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn two_col(x: Vec<f64>, y: Vec<f64>) -> Table {
        Table::from_columns(vec!["x".into(), "y".into()], vec![x, y], "y").unwrap()
    }

    #[test]
    fn perfectly_dependent_columns() {
        let x: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let model = fit_copula(&two_col(x, y), 1).unwrap();
        assert!(model.corr[0][1] >= 0.99, "corr = {}", model.corr[0][1]);
    }

    #[test]
    fn independent_columns_have_near_zero_corr() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>()).collect();
        let model = fit_copula(&two_col(x, y), 1).unwrap();
        assert!(model.corr[0][1].abs() < 0.05, "corr = {}", model.corr[0][1]);
    }

    #[test]
    fn single_column_unit_corr() {
        let t = Table::from_columns(
            vec!["y".into()],
            vec![(0..20).map(|i| i as f64).collect()],
            "y",
        )
        .unwrap();
        let model = fit_copula(&t, 0).unwrap();
        assert_eq!(model.corr, vec![vec![1.0]]);
    }

    #[test]
    fn too_few_rows() {
        let t = two_col(vec![1.0; 5], vec![2.0; 5]);
        assert!(matches!(
            fit_copula(&t, 0).unwrap_err(),
            Error::TooFewRows { .. }
        ));
    }

    #[test]
    fn marginal_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut values: Vec<f64> = (0..200).map(|_| rng.gen::<f64>() * 10.0).collect();
        // Inject duplicates to exercise flat segments.
        values[10] = values[20];
        values[11] = values[20];
        let m = Marginal::from_column(&values);
        let range = 10.0;
        for &x in &values {
            let back = m.inverse_cdf(m.cdf(x));
            assert!(
                (back - x).abs() <= range * 1e-6,
                "x={x} back={back}"
            );
        }
    }

    #[test]
    fn samples_respect_clip_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..500).map(|_| rng.gen::<f64>() * 4.0 - 2.0).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.gen::<f64>()).collect();
        let model = fit_copula(&two_col(x, y), 11).unwrap();
        let synth = model.sample(1000);
        for c in 0..2 {
            for &v in synth.column(c) {
                assert!(v >= model.clip_min[c] && v <= model.clip_max[c]);
            }
        }
        assert_eq!(synth.synthetic_count(), 1000);
    }

    #[test]
    fn dependent_fit_produces_dependent_samples() {
        let x: Vec<f64> = (0..500).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let model = fit_copula(&two_col(x, y), 13).unwrap();
        let synth = model.sample(1000);
        let r = pearson(synth.column(0), synth.column(1));
        assert!(r >= 0.95, "sample corr = {r}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let model = fit_copula(&two_col(x, y), 21).unwrap();
        let a = model.sample(64);
        let b = model.sample(64);
        assert_eq!(a, b);
        let c = model.sample_with_seed(64, 22);
        assert_ne!(a, c);
    }

    #[test]
    fn psd_repair_fixes_indefinite_estimate() {
        // 0.9/0.9/-0.9 pairwise correlations are jointly infeasible.
        let broken = vec![
            vec![1.0, 0.9, 0.9],
            vec![0.9, 1.0, -0.9],
            vec![0.9, -0.9, 1.0],
        ];
        let fixed = repair_psd(broken);
        let (values, _) = jacobi_eigen(&fixed);
        assert!(values.iter().all(|&l| l >= 0.0));
        for (i, row) in fixed.iter().enumerate() {
            assert!((row[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_repair_noop_when_already_psd() {
        let ok = vec![vec![1.0, 0.3], vec![0.3, 1.0]];
        let fixed = repair_psd(ok.clone());
        let mut frob = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                frob += (fixed[i][j] - ok[i][j]).powi(2);
            }
        }
        assert!(frob.sqrt() <= 1e-6);
    }

    #[test]
    fn validate_identical_tables_pass() {
        let t = two_col(
            (0..100).map(|i| i as f64).collect(),
            (0..100).map(|i| (i * i) as f64).collect(),
        );
        let v = validate_synthetic(&t, &t, 0.05).unwrap();
        assert!(v.all_pass);
        for c in &v.columns {
            assert_eq!(c.outcome.d_statistic, 0.0);
            assert_eq!(c.outcome.p_value, 1.0);
        }
    }

    #[test]
    fn validate_offset_tables_fail() {
        let t = two_col(
            (1..=100).map(|i| i as f64).collect(),
            (1..=100).map(|i| i as f64).collect(),
        );
        let shifted = two_col(
            (1..=100).map(|i| i as f64 + 1000.0).collect(),
            (1..=100).map(|i| i as f64 + 1000.0).collect(),
        );
        let v = validate_synthetic(&t, &shifted, 0.05).unwrap();
        assert!(!v.all_pass);
        assert_eq!(v.columns[0].outcome.d_statistic, 1.0);
    }

    #[test]
    fn copula_samples_pass_ks_against_source() {
        // Regression fixture: pinned seed, 5000-row source, 1000 samples.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x: Vec<f64> = (0..5000).map(|_| rng.gen::<f64>() * 3.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| v.sin() + 0.2 * rng.gen::<f64>())
            .collect();
        let real = two_col(x, y);
        let model = fit_copula(&real, 23).unwrap();
        let synth = model.sample(1000);
        let v = validate_synthetic(&real, &synth, 0.01).unwrap();
        assert!(v.all_pass, "{:?}", v.columns);
    }

    #[test]
    fn augment_identity_and_counts() {
        let t = two_col(
            (0..200).map(|i| i as f64).collect(),
            (0..200).map(|i| 3.0 * i as f64).collect(),
        );
        let model = fit_copula(&t, 29).unwrap();
        assert_eq!(augment(&t, &model, 0).unwrap(), t);
        let grown = augment(&t, &model, 250).unwrap();
        assert_eq!(grown.n_rows(), 450);
        assert_eq!(grown.synthetic_count(), 250);
    }

    #[test]
    fn augment_schema_mismatch() {
        let t = two_col(
            (0..50).map(|i| i as f64).collect(),
            (0..50).map(|i| i as f64).collect(),
        );
        let model = fit_copula(&t, 0).unwrap();
        let other = Table::from_columns(
            vec!["a".into(), "y".into()],
            vec![vec![1.0; 10], vec![1.0; 10]],
            "y",
        )
        .unwrap();
        assert!(matches!(
            augment(&other, &model, 5),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn persistence_round_trip() {
        let x: Vec<f64> = (0..60).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| v * 0.5 + 1.0).collect();
        let model = fit_copula(&two_col(x, y), 31).unwrap();
        let json = model.to_json().unwrap();
        assert!(json.contains("copula-v1"));
        let loaded = CopulaModel::from_json(&json).unwrap();
        assert_eq!(loaded.to_json().unwrap(), json);
        assert_eq!(loaded.sample(25), model.sample(25));

        let bad = json.replace("copula-v1", "copula-v9");
        assert!(matches!(
            CopulaModel::from_json(&bad).unwrap_err(),
            Error::BadFormat { .. }
        ));
    }
}

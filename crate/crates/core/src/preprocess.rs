//! Preprocessing transformers: median imputation, z-score standardization,
//! and polynomial feature expansion. Transformers are fit on the training
//! split only and are immutable once fitted.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::table::Table;

/// Columns whose population standard deviation falls below this are treated
/// as constant and standardize to zero.
pub const CONSTANT_STD_FLOOR: f64 = 1e-12;

/// Maximum number of expanded feature columns `polynomial_expand` will emit.
pub const MAX_POLY_COLUMNS: usize = 1000;

/// Median of a slice; even-length inputs use the mean of the two middle
/// order statistics.
pub fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Per-feature training medians used to fill missing feature cells.
#[derive(Debug, Clone)]
pub struct Imputer {
    /// (column name, training median) for every feature column.
    medians: Vec<(String, f64)>,
}

impl Imputer {
    /// Computes the median of each feature column over its non-missing
    /// training cells. A feature column with no observed values is an error.
    pub fn fit(train: &Table) -> Result<Self> {
        let mut medians = Vec::new();
        for idx in train.feature_indices() {
            let observed = train.observed(idx);
            if observed.is_empty() {
                return Err(Error::AllMissingColumn(
                    train.column_names()[idx].clone(),
                ));
            }
            medians.push((train.column_names()[idx].clone(), median(&observed)));
        }
        Ok(Imputer { medians })
    }

    pub fn medians(&self) -> &[(String, f64)] {
        &self.medians
    }

    /// Fills every missing feature cell with the training median of its
    /// column. Non-missing cells are untouched.
    pub fn apply(&self, t: &Table) -> Result<Table> {
        let mut out = t.clone();
        for (name, med) in &self.medians {
            let col = t
                .column_names()
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::MissingColumn(name.clone()))?;
            for row in 0..t.n_rows() {
                if t.is_missing(row, col) {
                    out.set_cell(row, col, *med, false);
                }
            }
        }
        Ok(out)
    }
}

/// Per-column mean and population standard deviation (divisor n), fit on the
/// training split. Applies to every column, target included, so all error
/// metrics downstream live on the standardized target scale.
#[derive(Debug, Clone)]
pub struct Standardizer {
    scales: Vec<ColumnScale>,
}

#[derive(Debug, Clone)]
pub struct ColumnScale {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub constant: bool,
}

impl Standardizer {
    pub fn fit(train: &Table) -> Result<Self> {
        if train.has_missing() {
            return Err(Error::NonFiniteInput);
        }
        let n = train.n_rows();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let scales = (0..train.n_cols())
            .map(|c| {
                let col = train.column(c);
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
                let std = var.sqrt();
                ColumnScale {
                    name: train.column_names()[c].clone(),
                    mean,
                    std,
                    constant: std < CONSTANT_STD_FLOOR,
                }
            })
            .collect();
        Ok(Standardizer { scales })
    }

    pub fn scales(&self) -> &[ColumnScale] {
        &self.scales
    }

    /// Transforms every column to (x - mean) / std; constant columns map to
    /// all zeros.
    pub fn apply(&self, t: &Table) -> Result<Table> {
        if t.n_cols() != self.scales.len() {
            return Err(Error::SchemaMismatch(format!(
                "standardizer fit on {} columns, table has {}",
                self.scales.len(),
                t.n_cols()
            )));
        }
        let mut out = t.clone();
        for (c, scale) in self.scales.iter().enumerate() {
            if t.column_names()[c] != scale.name {
                return Err(Error::SchemaMismatch(format!(
                    "column {c} is {:?}, standardizer expects {:?}",
                    t.column_names()[c],
                    scale.name
                )));
            }
            for row in 0..t.n_rows() {
                if t.is_missing(row, c) {
                    continue;
                }
                let v = t.column(c)[row];
                let z = if scale.constant {
                    0.0
                } else {
                    (v - scale.mean) / scale.std
                };
                out.set_cell(row, c, z, false);
            }
        }
        Ok(out)
    }
}

/// Expands the feature columns into all monomials of total degree
/// `1..=degree` (no constant term), in graded-lexicographic order; the target
/// column passes through unchanged as the last column. Degree-1 terms keep
/// their original names; higher-order terms are named like "a^2" and "a*b".
pub fn polynomial_expand(t: &Table, degree: usize) -> Result<Table> {
    if degree < 1 {
        return Err(Error::InvalidConfig(format!(
            "polynomial degree must be >= 1, got {degree}"
        )));
    }
    let features = t.feature_indices();
    let f = features.len();
    let n_out = expanded_count(f, degree);
    if n_out > MAX_POLY_COLUMNS {
        return Err(Error::DegreeTooLarge {
            cols: n_out,
            cap: MAX_POLY_COLUMNS,
        });
    }

    let n = t.n_rows();
    let mut names: Vec<String> = Vec::with_capacity(n_out + 1);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n_out + 1);
    let mut missing: Vec<Vec<bool>> = Vec::with_capacity(n_out + 1);
    for d in 1..=degree {
        for combo in (0..f).combinations_with_replacement(d) {
            names.push(monomial_name(t, &features, &combo));
            let mut col = vec![1.0; n];
            let mut miss = vec![false; n];
            for &slot in &combo {
                let src = features[slot];
                for row in 0..n {
                    col[row] *= t.column(src)[row];
                    miss[row] |= t.is_missing(row, src);
                }
            }
            for row in 0..n {
                if miss[row] {
                    col[row] = f64::NAN;
                }
            }
            columns.push(col);
            missing.push(miss);
        }
    }
    names.push(t.target_name().to_string());
    columns.push(t.target_column().to_vec());
    missing.push(t.column_missing(t.target_index()).to_vec());

    let mut out = Table::new(names, columns, missing, t.target_name())?;
    for (row, &s) in t.synthetic_flags().iter().enumerate() {
        if s {
            out.mark_synthetic(row);
        }
    }
    Ok(out)
}

/// Number of monomials of total degree 1..=degree over f variables.
pub fn expanded_count(f: usize, degree: usize) -> usize {
    (1..=degree).map(|d| n_multichoose(f, d)).sum()
}

fn n_multichoose(f: usize, d: usize) -> usize {
    // C(f + d - 1, d)
    if f == 0 {
        return 0;
    }
    let mut num = 1usize;
    for i in 0..d {
        num = num * (f + i) / (i + 1);
    }
    num
}

fn monomial_name(t: &Table, features: &[usize], combo: &[usize]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < combo.len() {
        let mut j = i;
        while j < combo.len() && combo[j] == combo[i] {
            j += 1;
        }
        let name = &t.column_names()[features[combo[i]]];
        if j - i == 1 {
            parts.push(name.clone());
        } else {
            parts.push(format!("{name}^{}", j - i));
        }
        i = j;
    }
    parts.join("*")
}

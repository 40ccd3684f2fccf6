//! Column-major numeric table with a missing-value mask, CSV ingestion, row
//! cleaning, and the seeded train/test split.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::shuffle::shuffled_indices;

/// A named-column numeric dataset. One column is designated as the target;
/// the rest are features in declaration order. Missing cells hold NaN and are
/// flagged in a parallel mask, which is the authority — all statistics ignore
/// flagged cells.
#[derive(Debug, Clone)]
pub struct Table {
    column_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    missing: Vec<Vec<bool>>,
    target_index: usize,
    /// Per-row provenance: true for rows appended by the synthetic generator.
    synthetic: Vec<bool>,
}

impl PartialEq for Table {
    /// Missing cells compare equal regardless of their sentinel bits;
    /// observed cells compare bit-exactly.
    fn eq(&self, other: &Self) -> bool {
        if self.column_names != other.column_names
            || self.target_index != other.target_index
            || self.missing != other.missing
            || self.synthetic != other.synthetic
        {
            return false;
        }
        self.columns
            .iter()
            .zip(&other.columns)
            .zip(&self.missing)
            .all(|((a, b), mask)| {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .zip(mask)
                        .all(|((x, y), &m)| m || x.to_bits() == y.to_bits())
            })
    }
}

impl Table {
    /// Builds a table, validating the column-length and target invariants.
    pub fn new(
        column_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        missing: Vec<Vec<bool>>,
        target_name: &str,
    ) -> Result<Self> {
        if column_names.len() != columns.len() || columns.len() != missing.len() {
            return Err(Error::SchemaMismatch(format!(
                "{} names, {} columns, {} masks",
                column_names.len(),
                columns.len(),
                missing.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::SchemaMismatch(format!(
                    "column {name:?} has {} rows, expected {n_rows}",
                    col.len()
                )));
            }
        }
        for (name, mask) in column_names.iter().zip(&missing) {
            if mask.len() != n_rows {
                return Err(Error::SchemaMismatch(format!(
                    "mask for {name:?} has {} rows, expected {n_rows}",
                    mask.len()
                )));
            }
        }
        let target_index = column_names
            .iter()
            .position(|n| n == target_name)
            .ok_or_else(|| Error::MissingColumn(target_name.to_string()))?;
        Ok(Table {
            column_names,
            columns,
            missing,
            target_index,
            synthetic: vec![false; n_rows],
        })
    }

    /// Convenience constructor for fully observed data.
    pub fn from_columns(
        column_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        target_name: &str,
    ) -> Result<Self> {
        let missing = columns
            .iter()
            .map(|c| c.iter().map(|v| v.is_nan()).collect())
            .collect();
        Table::new(column_names, columns, missing, target_name)
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn target_name(&self) -> &str {
        &self.column_names[self.target_index]
    }

    pub fn target_index(&self) -> usize {
        self.target_index
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.column_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[col][row]
    }

    pub fn column_missing(&self, col: usize) -> &[bool] {
        &self.missing[col]
    }

    pub fn has_missing(&self) -> bool {
        self.missing.iter().any(|m| m.iter().any(|&b| b))
    }

    /// Non-missing values of one column.
    pub fn observed(&self, col: usize) -> Vec<f64> {
        self.columns[col]
            .iter()
            .zip(&self.missing[col])
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
            .collect()
    }

    /// Indices of the feature columns (everything except the target).
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.n_cols()).filter(|&i| i != self.target_index).collect()
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.feature_indices()
            .into_iter()
            .map(|i| self.column_names[i].as_str())
            .collect()
    }

    /// Feature columns cloned into a column-major matrix, in schema order.
    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        self.feature_indices()
            .into_iter()
            .map(|i| self.columns[i].clone())
            .collect()
    }

    pub fn target_column(&self) -> &[f64] {
        &self.columns[self.target_index]
    }

    pub fn synthetic_flags(&self) -> &[bool] {
        &self.synthetic
    }

    pub fn synthetic_count(&self) -> usize {
        self.synthetic.iter().filter(|&&s| s).count()
    }

    pub(crate) fn set_all_synthetic(&mut self) {
        self.synthetic.iter_mut().for_each(|s| *s = true);
    }

    pub(crate) fn mark_synthetic(&mut self, row: usize) {
        self.synthetic[row] = true;
    }

    pub(crate) fn set_cell(&mut self, row: usize, col: usize, value: f64, missing: bool) {
        self.columns[col][row] = value;
        self.missing[col][row] = missing;
    }

    /// A new table containing the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Table {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        let missing = self
            .missing
            .iter()
            .map(|m| rows.iter().map(|&r| m[r]).collect())
            .collect();
        Table {
            column_names: self.column_names.clone(),
            columns,
            missing,
            target_index: self.target_index,
            synthetic: rows.iter().map(|&r| self.synthetic[r]).collect(),
        }
    }

    /// Appends the rows of `other`, which must have an identical schema.
    /// Synthetic flags of both sides are preserved.
    pub fn append(&self, other: &Table) -> Result<Table> {
        if self.column_names != other.column_names || self.target_index != other.target_index {
            return Err(Error::SchemaMismatch(format!(
                "cannot append table with columns {:?} to table with columns {:?}",
                other.column_names, self.column_names
            )));
        }
        let mut out = self.clone();
        for (dst, src) in out.columns.iter_mut().zip(&other.columns) {
            dst.extend_from_slice(src);
        }
        for (dst, src) in out.missing.iter_mut().zip(&other.missing) {
            dst.extend_from_slice(src);
        }
        out.synthetic.extend_from_slice(&other.synthetic);
        Ok(out)
    }
}

/// Loads a CSV file, keeping the `schema` columns in schema order.
///
/// Blank or non-numeric cells are flagged missing. Extra CSV columns are
/// ignored; a schema column absent from the header is an error, as is a data
/// row whose field count differs from the header's.
pub fn load_csv(path: impl AsRef<Path>, schema: &[String], target: &str) -> Result<Table> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, e))
            }
            _ => Error::Csv(e),
        })?;

    let headers: Vec<String> = match reader.headers() {
        Ok(h) if !h.is_empty() => h.iter().map(str::to_string).collect(),
        _ => return Err(Error::EmptyFile(path.to_path_buf())),
    };
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }

    let mut col_pos = Vec::with_capacity(schema.len());
    for name in schema {
        let pos = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        col_pos.push(pos);
    }
    if !schema.iter().any(|n| n == target) {
        return Err(Error::MissingColumn(target.to_string()));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
    let mut missing: Vec<Vec<bool>> = vec![Vec::new(); schema.len()];
    for record in reader.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::MalformedRow {
                line: record.position().map_or(0, |p| p.line()),
                expected: headers.len(),
                got: record.len(),
            });
        }
        for (slot, &pos) in col_pos.iter().enumerate() {
            let cell = record.get(pos).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    columns[slot].push(v);
                    missing[slot].push(false);
                }
                _ => {
                    columns[slot].push(f64::NAN);
                    missing[slot].push(true);
                }
            }
        }
    }
    if columns[0].is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Table::new(schema.to_vec(), columns, missing, target)
}

/// Writes a table as UTF-8 comma-separated text: header row, decimal floats,
/// blank cells for missing values.
pub fn write_csv(table: &Table, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&table.column_names().join(","));
    out.push('\n');
    for row in 0..table.n_rows() {
        for col in 0..table.n_cols() {
            if col > 0 {
                out.push(',');
            }
            if !table.is_missing(row, col) {
                let _ = write!(out, "{}", table.column(col)[row]);
            }
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Removes every row whose target cell is missing. Rows with missing feature
/// cells are retained for imputation.
pub fn drop_missing_target(t: &Table) -> Result<Table> {
    let target = t.target_index();
    let keep: Vec<usize> = (0..t.n_rows())
        .filter(|&r| !t.is_missing(r, target))
        .collect();
    if keep.is_empty() {
        return Err(Error::AllRowsDropped);
    }
    Ok(t.subset(&keep))
}

/// Train and test halves of a split, plus the parameters that produced them.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Table,
    pub test: Table,
    pub split_ratio: f64,
    pub seed: u64,
}

/// Splits rows into train and test parts with `round(n * (1 - ratio))` test
/// rows (at least one row on each side), using a deterministic seeded
/// permutation.
pub fn train_test_split(t: &Table, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split ratio must be in (0, 1), got {ratio}"
        )));
    }
    let n = t.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    let test_size = ((n as f64) * (1.0 - ratio)).round() as usize;
    let test_size = test_size.clamp(1, n - 1);
    let order = shuffled_indices(n, seed);
    let (train_idx, test_idx) = order.split_at(n - test_size);
    Ok(SplitPair {
        train: t.subset(train_idx),
        test: t.subset(test_idx),
        split_ratio: ratio,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn schema() -> Vec<String> {
        ["temp", "sal", "uvb", "chla"].map(str::to_string).to_vec()
    }

    #[test]
    fn load_clean_csv() {
        let f = write_temp("temp,sal,uvb,chla\n1,2,3,4\n5,6,7,8\n9,10,11,12\n");
        let t = load_csv(f.path(), &schema(), "chla").unwrap();
        assert_eq!(t.n_rows(), 3);
        assert!(!t.has_missing());
        assert_eq!(t.column_by_name("sal").unwrap(), &[2.0, 6.0, 10.0]);
        assert_eq!(t.target_name(), "chla");
    }

    #[test]
    fn blank_cell_is_missing() {
        let f = write_temp("temp,sal,uvb,chla\n1,,3,4\n5,6,7,8\n");
        let t = load_csv(f.path(), &schema(), "chla").unwrap();
        assert!(t.is_missing(0, 1));
        assert!(!t.is_missing(0, 0));
        assert!(!t.is_missing(1, 1));
        assert_eq!(t.column(0)[0], 1.0);
    }

    #[test]
    fn non_numeric_cell_is_missing() {
        let f = write_temp("temp,sal,uvb,chla\n1,abc,3,4\n");
        let t = load_csv(f.path(), &schema(), "chla").unwrap();
        assert!(t.is_missing(0, 1));
    }

    #[test]
    fn missing_schema_column_errors() {
        let f = write_temp("temp,sal,chla\n1,2,4\n");
        let err = load_csv(f.path(), &schema(), "chla").unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "uvb"));
    }

    #[test]
    fn extra_columns_ignored_and_reordered() {
        let f = write_temp("junk,chla,uvb,sal,temp\n0,4,3,2,1\n");
        let t = load_csv(f.path(), &schema(), "chla").unwrap();
        assert_eq!(t.column_names(), &schema()[..]);
        assert_eq!(t.column(0), &[1.0]);
        assert_eq!(t.column(3), &[4.0]);
    }

    #[test]
    fn wrong_field_count_is_malformed() {
        let f = write_temp("temp,sal,uvb,chla\n1,2,3,4\n1,2,3\n");
        let err = load_csv(f.path(), &schema(), "chla").unwrap_err();
        assert!(matches!(err, Error::MalformedRow { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn empty_file_errors() {
        let f = write_temp("");
        assert!(matches!(
            load_csv(f.path(), &schema(), "chla").unwrap_err(),
            Error::EmptyFile(_)
        ));
        let f = write_temp("temp,sal,uvb,chla\n");
        assert!(matches!(
            load_csv(f.path(), &schema(), "chla").unwrap_err(),
            Error::EmptyFile(_)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let f = write_temp("temp,sal,uvb,chla\n1.5,,3,4\n5,6.25,7,\n");
        let t = load_csv(f.path(), &schema(), "chla").unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_csv(&t, out.path()).unwrap();
        let t2 = load_csv(out.path(), &schema(), "chla").unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn drop_missing_target_counts() {
        let t = Table::from_columns(
            vec!["x".into(), "y".into()],
            vec![
                vec![1.0, 2.0, 3.0, 4.0, 5.0],
                vec![1.0, f64::NAN, 3.0, f64::NAN, 5.0],
            ],
            "y",
        )
        .unwrap();
        let cleaned = drop_missing_target(&t).unwrap();
        assert_eq!(cleaned.n_rows(), 3);
        assert_eq!(cleaned.column(0), &[1.0, 3.0, 5.0]);
    }

    #[test]
    fn drop_missing_target_identity_when_clean() {
        let t = Table::from_columns(
            vec!["x".into(), "y".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            "y",
        )
        .unwrap();
        assert_eq!(drop_missing_target(&t).unwrap(), t);
    }

    #[test]
    fn drop_missing_target_all_rows() {
        let t = Table::from_columns(
            vec!["x".into(), "y".into()],
            vec![vec![1.0, 2.0], vec![f64::NAN, f64::NAN]],
            "y",
        )
        .unwrap();
        assert!(matches!(
            drop_missing_target(&t).unwrap_err(),
            Error::AllRowsDropped
        ));
    }

    fn numbered_table(n: usize) -> Table {
        Table::from_columns(
            vec!["x".into(), "y".into()],
            vec![
                (0..n).map(|i| i as f64).collect(),
                (0..n).map(|i| 2.0 * i as f64).collect(),
            ],
            "y",
        )
        .unwrap()
    }

    #[test]
    fn split_sizes() {
        let sp = train_test_split(&numbered_table(10), 0.8, 1).unwrap();
        assert_eq!(sp.train.n_rows(), 8);
        assert_eq!(sp.test.n_rows(), 2);
    }

    #[test]
    fn split_deterministic() {
        let t = numbered_table(50);
        let a = train_test_split(&t, 0.7, 99).unwrap();
        let b = train_test_split(&t, 0.7, 99).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
    }

    #[test]
    fn split_paper_row_count() {
        let sp = train_test_split(&numbered_table(12_657), 0.8, 42).unwrap();
        assert_eq!(sp.train.n_rows(), 10_126);
        assert_eq!(sp.test.n_rows(), 2_531);
    }

    #[test]
    fn split_too_few_rows() {
        assert!(matches!(
            train_test_split(&numbered_table(1), 0.8, 0).unwrap_err(),
            Error::TooFewRows { .. }
        ));
    }

    #[test]
    fn split_is_partition() {
        let t = numbered_table(37);
        let sp = train_test_split(&t, 0.8, 3).unwrap();
        let mut ids: Vec<i64> = sp
            .train
            .column(0)
            .iter()
            .chain(sp.test.column(0))
            .map(|&v| v as i64)
            .collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..37).collect::<Vec<i64>>());
    }

    #[test]
    fn append_checks_schema() {
        let a = numbered_table(3);
        let b = Table::from_columns(
            vec!["x".into(), "z".into()],
            vec![vec![1.0], vec![2.0]],
            "z",
        )
        .unwrap();
        assert!(matches!(a.append(&b), Err(Error::SchemaMismatch(_))));
        let joined = a.append(&numbered_table(2)).unwrap();
        assert_eq!(joined.n_rows(), 5);
    }
}

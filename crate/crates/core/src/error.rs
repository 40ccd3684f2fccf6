use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by any stage of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0:?} not found in CSV header")]
    MissingColumn(String),
    #[error("{0}: file is empty or contains no data rows")]
    EmptyFile(PathBuf),
    #[error("malformed CSV row at line {line}: expected {expected} fields, got {got}")]
    MalformedRow {
        line: u64,
        expected: usize,
        got: usize,
    },
    #[error("all rows were dropped during cleaning (every target cell is missing)")]
    AllRowsDropped,
    #[error("column {0:?} has no observed values to impute from")]
    AllMissingColumn(String),
    #[error("too few rows: need at least {needed}, got {got}")]
    TooFewRows { needed: usize, got: usize },
    #[error("polynomial expansion would produce {cols} columns, above the cap of {cap}")]
    DegreeTooLarge { cols: usize, cap: usize },
    #[error("input contains a non-finite or missing value")]
    NonFiniteInput,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("empty input")]
    EmptyInput,
    #[error("dimension mismatch: model expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular system: ordinary least squares has no unique solution")]
    SingularSystem,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("invalid fold count k={k} for n={n} (need 2 <= k <= n)")]
    BadK { k: usize, n: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported model format {found:?}, expected {expected:?}")]
    BadFormat { expected: String, found: String },
    #[error("I/O error for {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV parse error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Annotates an error with the pipeline stage it came from.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}

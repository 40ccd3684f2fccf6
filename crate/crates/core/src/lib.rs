//! Synthetic tabular data augmentation for regression: fit a Gaussian copula
//! to environmental measurements, generate synthetic rows at controlled
//! volumes, train gradient-boosted regressors on augmented versus baseline
//! data, and compare the outcomes with KS and paired-t statistics.
//!
//! The crate is organized to mirror the pipeline:
//!
//! * [`table`] / [`preprocess`] — CSV ingestion, cleaning, imputation,
//!   splitting, standardization, polynomial expansion;
//! * [`copula`] — Gaussian copula fit, seeded sampling, clipping, KS
//!   validation of synthetic batches;
//! * [`learners`] — CART regression trees, least-squares gradient boosting,
//!   and a ridge baseline, all self-contained;
//! * [`model_select`] — k-fold CV, exhaustive grid search, metrics;
//! * [`stats`] — two-sample Kolmogorov-Smirnov and paired t-tests;
//! * [`experiment`] — the end-to-end sweep over synthetic volumes plus
//!   report files.

pub mod copula;
pub mod error;
pub mod experiment;
pub mod learners;
mod linalg;
pub mod model_select;
pub mod preprocess;
pub mod special;
pub mod stats;
pub mod table;

mod shuffle;

pub use error::{Error, Result};

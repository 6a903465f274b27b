//! Data validation for tabular ML training batches.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of in-memory values: loading from files, the CLI and on-disk
//! formats live in the `dataval` crate.
//!
//! Layout follows the validation flow:
//!
//! - [`dataset`]: typed, immutable columnar batches built from raw text cells.
//! - [`statistics`]: per-feature summaries, histograms and frequency tables.
//! - [`schema`]: schema inference, validation and revision proposals.
//! - [`checks`]: declarative feature/dataset quality checks.
//! - [`skew`]: cross-batch comparison (feature-set diff, Jensen-Shannon divergence).
//! - [`stream`]: record-at-a-time validation with online statistics and window drift.
//! - [`report`]: report assembly, mitigation suggestions and rendering.
//! - [`generator`]: seeded synthetic corpora with recorded, injected errors.
#![no_std]

extern crate alloc;

pub mod checks;
pub mod dataset;
pub mod generator;
pub mod report;
pub mod schema;
pub mod skew;
pub mod statistics;
pub mod stream;

mod numfmt;

pub use numfmt::{format_cell_float, format_decimal};

pub use checks::{Check, CheckKind, CheckResult, Severity, Targets};
pub use dataset::{Dataset, FeatureColumn, FeatureType, Value};
pub use report::{ValidationReport, Verdict};
pub use schema::{Schema, SchemaAnomaly};
pub use skew::SkewReport;

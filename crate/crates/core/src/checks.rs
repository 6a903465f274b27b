//! Declarative feature- and dataset-level quality checks.
//!
//! A [`Check`] is a kind plus its targets and kind-specific parameters. It is
//! usually read from a JSON checks file, an array of
//! `{"kind": ..., "targets": "DATASET" | [names], "params": {...}, "severity": ...}`
//! objects. Parameters that do not belong to the kind are rejected.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, DatasetError, FeatureColumn, FeatureType, RowKey};
use crate::statistics::{frequency_table, quartiles, summarize, FrequencyTable};

pub const DEFAULT_IQR_MULTIPLIER: f64 = 1.5;
pub const DEFAULT_MIN_FREQUENCY: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{kind} check cannot run on {ftype} feature `{feature}`")]
    TypeIncompatible {
        kind: CheckKind,
        feature: String,
        ftype: FeatureType,
    },
    #[error("invalid {kind} check: {reason}")]
    InvalidParams { kind: CheckKind, reason: String },
    #[error("malformed checks document: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CheckKind {
    Completeness,
    Uniqueness,
    Size,
    InRange,
    Duplicates,
    Outliers,
    RareCategories,
    ConstantFeature,
}

impl CheckKind {
    /// Section title used in reports.
    pub fn title(self) -> &'static str {
        match self {
            CheckKind::Completeness => "Completeness",
            CheckKind::Uniqueness => "Uniqueness",
            CheckKind::Size => "Size",
            CheckKind::InRange => "In range",
            CheckKind::Duplicates => "Duplicated",
            CheckKind::Outliers => "Outliers",
            CheckKind::RareCategories => "Rare categories",
            CheckKind::ConstantFeature => "Constant features",
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            CheckKind::Completeness => "completeness",
            CheckKind::Uniqueness => "uniqueness",
            CheckKind::Size => "size",
            CheckKind::InRange => "in-range ratio",
            CheckKind::Duplicates => "duplicate ratio",
            CheckKind::Outliers => "outlier ratio",
            CheckKind::RareCategories => "rare category ratio",
            CheckKind::ConstantFeature => "constant feature ratio",
        }
    }
}

impl core::fmt::Display for CheckKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            CheckKind::Completeness => "COMPLETENESS",
            CheckKind::Uniqueness => "UNIQUENESS",
            CheckKind::Size => "SIZE",
            CheckKind::InRange => "IN_RANGE",
            CheckKind::Duplicates => "DUPLICATES",
            CheckKind::Outliers => "OUTLIERS",
            CheckKind::RareCategories => "RARE_CATEGORIES",
            CheckKind::ConstantFeature => "CONSTANT_FEATURE",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum DatasetMarker {
    #[serde(rename = "DATASET")]
    Dataset,
}

/// What a check applies to. Serialized as `"DATASET"` or a list of names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "TargetsDoc", into = "TargetsDoc")]
pub enum Targets {
    Dataset,
    Features(Vec<String>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TargetsDoc {
    Dataset(DatasetMarker),
    Features(Vec<String>),
}

impl From<TargetsDoc> for Targets {
    fn from(doc: TargetsDoc) -> Self {
        match doc {
            TargetsDoc::Dataset(_) => Targets::Dataset,
            TargetsDoc::Features(f) => Targets::Features(f),
        }
    }
}

impl From<Targets> for TargetsDoc {
    fn from(t: Targets) -> Self {
        match t {
            Targets::Dataset => TargetsDoc::Dataset(DatasetMarker::Dataset),
            Targets::Features(f) => TargetsDoc::Features(f),
        }
    }
}

impl Targets {
    /// Report label: `Dataset` or the comma-joined feature names.
    pub fn label(&self) -> String {
        match self {
            Targets::Dataset => "Dataset".into(),
            Targets::Features(f) => f.join(", "),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum OutlierScope {
    /// Fraction of rows holding at least one outlying cell.
    #[default]
    Rows,
    /// Fraction of non-null numeric cells that are outlying.
    Cells,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    #[default]
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CheckParams {
    /// Every target's non-null fraction must be at least `threshold`.
    Completeness { threshold: f64 },
    /// Fraction of rows whose key is unique must be at least `threshold`.
    Uniqueness { threshold: f64 },
    Size { min: Option<u64>, max: Option<u64> },
    /// Fraction of checked cells inside `[min, max]` must be at least `threshold`.
    InRange { min: f64, max: f64, threshold: f64 },
    Duplicates { max_ratio: f64 },
    Outliers { k: f64, scope: OutlierScope, max_ratio: f64 },
    RareCategories { min_freq: f64 },
    ConstantFeature,
}

impl CheckParams {
    pub fn kind(&self) -> CheckKind {
        match self {
            CheckParams::Completeness { .. } => CheckKind::Completeness,
            CheckParams::Uniqueness { .. } => CheckKind::Uniqueness,
            CheckParams::Size { .. } => CheckKind::Size,
            CheckParams::InRange { .. } => CheckKind::InRange,
            CheckParams::Duplicates { .. } => CheckKind::Duplicates,
            CheckParams::Outliers { .. } => CheckKind::Outliers,
            CheckParams::RareCategories { .. } => CheckKind::RareCategories,
            CheckParams::ConstantFeature => CheckKind::ConstantFeature,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CheckDoc", into = "CheckDoc")]
pub struct Check {
    pub targets: Targets,
    pub params: CheckParams,
    pub severity: Severity,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scope: Option<OutlierScope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_freq: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckDoc {
    kind: CheckKind,
    #[serde(default = "dataset_targets")]
    targets: Targets,
    #[serde(default)]
    params: ParamsDoc,
    #[serde(default)]
    severity: Severity,
}

fn dataset_targets() -> Targets {
    Targets::Dataset
}

impl TryFrom<CheckDoc> for Check {
    type Error = CheckError;

    fn try_from(doc: CheckDoc) -> Result<Self, Self::Error> {
        let kind = doc.kind;
        let p = doc.params;
        let invalid = |reason: &str| CheckError::InvalidParams {
            kind,
            reason: reason.into(),
        };
        let allowed: &[&str] = match kind {
            CheckKind::Completeness | CheckKind::Uniqueness => &["threshold"],
            CheckKind::Size => &["min", "max"],
            CheckKind::InRange => &["min", "max", "threshold"],
            CheckKind::Duplicates => &["max_ratio"],
            CheckKind::Outliers => &["k", "scope", "max_ratio"],
            CheckKind::RareCategories => &["min_freq"],
            CheckKind::ConstantFeature => &[],
        };
        let present = [
            ("threshold", p.threshold.is_some()),
            ("min", p.min.is_some()),
            ("max", p.max.is_some()),
            ("max_ratio", p.max_ratio.is_some()),
            ("k", p.k.is_some()),
            ("scope", p.scope.is_some()),
            ("min_freq", p.min_freq.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(invalid(&format!("parameter `{name}` does not apply")));
            }
        }
        let count = |v: Option<f64>, name: &str| -> Result<Option<u64>, CheckError> {
            match v {
                None => Ok(None),
                Some(x) if x >= 0.0 && libm::trunc(x) == x => Ok(Some(x as u64)),
                Some(_) => Err(invalid(&format!("`{name}` must be a non-negative integer"))),
            }
        };
        let params = match kind {
            CheckKind::Completeness => CheckParams::Completeness {
                threshold: p.threshold.unwrap_or(1.0),
            },
            CheckKind::Uniqueness => CheckParams::Uniqueness {
                threshold: p.threshold.unwrap_or(1.0),
            },
            CheckKind::Size => CheckParams::Size {
                min: count(p.min, "min")?,
                max: count(p.max, "max")?,
            },
            CheckKind::InRange => CheckParams::InRange {
                min: p.min.ok_or_else(|| invalid("`min` is required"))?,
                max: p.max.ok_or_else(|| invalid("`max` is required"))?,
                threshold: p.threshold.unwrap_or(1.0),
            },
            CheckKind::Duplicates => CheckParams::Duplicates {
                max_ratio: p.max_ratio.unwrap_or(0.0),
            },
            CheckKind::Outliers => CheckParams::Outliers {
                k: p.k.unwrap_or(DEFAULT_IQR_MULTIPLIER),
                scope: p.scope.unwrap_or_default(),
                max_ratio: p.max_ratio.unwrap_or(0.0),
            },
            CheckKind::RareCategories => CheckParams::RareCategories {
                min_freq: p.min_freq.unwrap_or(DEFAULT_MIN_FREQUENCY),
            },
            CheckKind::ConstantFeature => CheckParams::ConstantFeature,
        };
        Check::new(doc.targets, params, doc.severity)
    }
}

impl From<Check> for CheckDoc {
    fn from(c: Check) -> Self {
        let mut p = ParamsDoc::default();
        match c.params {
            CheckParams::Completeness { threshold } | CheckParams::Uniqueness { threshold } => {
                p.threshold = Some(threshold)
            }
            CheckParams::Size { min, max } => {
                p.min = min.map(|v| v as f64);
                p.max = max.map(|v| v as f64);
            }
            CheckParams::InRange { min, max, threshold } => {
                p.min = Some(min);
                p.max = Some(max);
                p.threshold = Some(threshold);
            }
            CheckParams::Duplicates { max_ratio } => p.max_ratio = Some(max_ratio),
            CheckParams::Outliers { k, scope, max_ratio } => {
                p.k = Some(k);
                p.scope = Some(scope);
                p.max_ratio = Some(max_ratio);
            }
            CheckParams::RareCategories { min_freq } => p.min_freq = Some(min_freq),
            CheckParams::ConstantFeature => {}
        }
        CheckDoc {
            kind: c.params.kind(),
            targets: c.targets,
            params: p,
            severity: c.severity,
        }
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl Check {
    pub fn new(targets: Targets, params: CheckParams, severity: Severity) -> Result<Self, CheckError> {
        let kind = params.kind();
        let invalid = |reason: &str| {
            Err(CheckError::InvalidParams {
                kind,
                reason: reason.into(),
            })
        };
        if matches!(&targets, Targets::Features(f) if f.is_empty()) {
            return invalid("target list is empty");
        }
        match params {
            CheckParams::Completeness { threshold }
            | CheckParams::Uniqueness { threshold }
            | CheckParams::InRange { threshold, .. }
                if !unit(threshold) =>
            {
                invalid("`threshold` must lie in [0, 1]")
            }
            CheckParams::Size { min: None, max: None } => invalid("needs `min` and/or `max`"),
            CheckParams::Size { min: Some(lo), max: Some(hi) } if lo > hi => invalid("`min` exceeds `max`"),
            CheckParams::Size { .. } if targets != Targets::Dataset => invalid("targets must be DATASET"),
            CheckParams::InRange { min, max, .. } if !(min.is_finite() && max.is_finite() && min <= max) => {
                invalid("needs finite `min` <= `max`")
            }
            CheckParams::Duplicates { max_ratio } | CheckParams::Outliers { max_ratio, .. } if !unit(max_ratio) => {
                invalid("`max_ratio` must lie in [0, 1]")
            }
            CheckParams::Outliers { k, .. } if !(k.is_finite() && k >= 0.0) => invalid("`k` must be >= 0"),
            CheckParams::RareCategories { min_freq } if !unit(min_freq) => invalid("`min_freq` must lie in [0, 1]"),
            _ => Ok(Self {
                targets,
                params,
                severity,
            }),
        }
    }

    pub fn kind(&self) -> CheckKind {
        self.params.kind()
    }

    pub fn duplicates(targets: Targets) -> Self {
        Self::new(targets, CheckParams::Duplicates { max_ratio: 0.0 }, Severity::Error).expect("valid defaults")
    }

    pub fn outliers(targets: Targets, k: f64, scope: OutlierScope) -> Result<Self, CheckError> {
        Self::new(
            targets,
            CheckParams::Outliers {
                k,
                scope,
                max_ratio: 0.0,
            },
            Severity::Error,
        )
    }

    /// The check set used when no checks file is given: dataset-level
    /// duplicates and outliers.
    pub fn defaults() -> Vec<Check> {
        vec![
            Self::duplicates(Targets::Dataset),
            Self::outliers(Targets::Dataset, DEFAULT_IQR_MULTIPLIER, OutlierScope::Rows).expect("valid defaults"),
        ]
    }
}

/// Parses a checks file: a JSON array of check objects.
pub fn parse_checks(text: &str) -> Result<Vec<Check>, CheckError> {
    serde_json::from_str(text).map_err(|e| CheckError::Parse(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: Check,
    /// Row count for SIZE, a ratio in `[0, 1]` otherwise.
    pub metric: f64,
    pub passed: bool,
    /// Sorted, distinct, `< n_rows`.
    pub failed_rows: Vec<usize>,
    pub per_feature: Option<BTreeMap<String, f64>>,
    /// Human-readable specifics such as rare categories or constant features.
    pub details: Vec<String>,
}

impl CheckResult {
    fn new(check: Check, metric: f64, passed: bool) -> Self {
        Self {
            check,
            metric,
            passed,
            failed_rows: Vec::new(),
            per_feature: None,
            details: Vec::new(),
        }
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn target_columns<'a>(ds: &'a Dataset, targets: &Targets) -> Result<Vec<&'a FeatureColumn>, CheckError> {
    match targets {
        Targets::Dataset => Ok(ds.columns().iter().collect()),
        Targets::Features(names) => {
            let idx = ds.column_indices(names)?;
            Ok(idx.into_iter().map(|i| &ds.columns()[i]).collect())
        }
    }
}

/// Resolves targets, keeping only columns that satisfy `accept`. Named
/// targets of the wrong type are an error; DATASET silently filters.
fn typed_columns<'a>(
    ds: &'a Dataset,
    targets: &Targets,
    kind: CheckKind,
    accept: impl Fn(FeatureType) -> bool,
) -> Result<Vec<&'a FeatureColumn>, CheckError> {
    let cols = target_columns(ds, targets)?;
    if let Targets::Features(_) = targets {
        if let Some(bad) = cols.iter().find(|c| !accept(c.ftype())) {
            return Err(CheckError::TypeIncompatible {
                kind,
                feature: bad.name().into(),
                ftype: bad.ftype(),
            });
        }
    }
    Ok(cols.into_iter().filter(|c| accept(c.ftype())).collect())
}

fn key_indices(ds: &Dataset, targets: &Targets) -> Result<Vec<usize>, CheckError> {
    Ok(match targets {
        Targets::Dataset => (0..ds.n_columns()).collect(),
        Targets::Features(names) => ds.column_indices(names)?,
    })
}

/// Runs one check. Deterministic for a given dataset and check.
pub fn run_check(ds: &Dataset, check: &Check) -> Result<CheckResult, CheckError> {
    match check.params {
        CheckParams::Completeness { threshold } => completeness(ds, check, threshold),
        CheckParams::Uniqueness { threshold } => uniqueness(ds, check, threshold),
        CheckParams::Size { min, max } => {
            let n = ds.n_rows() as u64;
            let passed = min.is_none_or(|m| n >= m) && max.is_none_or(|m| n <= m);
            Ok(CheckResult::new(check.clone(), n as f64, passed))
        }
        CheckParams::InRange { min, max, threshold } => in_range(ds, check, min, max, threshold),
        CheckParams::Duplicates { max_ratio } => {
            let (metric, failed_rows) = duplicate_rows(ds, &key_indices(ds, &check.targets)?);
            let mut r = CheckResult::new(check.clone(), metric, metric <= max_ratio);
            r.failed_rows = failed_rows;
            Ok(r)
        }
        CheckParams::Outliers { k, scope, max_ratio } => outliers(ds, check, k, scope, max_ratio),
        CheckParams::RareCategories { min_freq } => {
            let cols = typed_columns(ds, &check.targets, CheckKind::RareCategories, |t| t == FeatureType::String)?;
            Ok(rare_in_columns(check.clone(), &cols, min_freq, ds.n_rows()))
        }
        CheckParams::ConstantFeature => {
            let cols = target_columns(ds, &check.targets)?;
            Ok(constant_in_columns(check.clone(), &cols))
        }
    }
}

/// Completeness of one column: `1 - nulls / rows` (1 for an empty column).
pub fn completeness_of(col: &FeatureColumn) -> f64 {
    if col.is_empty() {
        1.0
    } else {
        1.0 - col.null_count() as f64 / col.len() as f64
    }
}

fn completeness(ds: &Dataset, check: &Check, threshold: f64) -> Result<CheckResult, CheckError> {
    let cols = target_columns(ds, &check.targets)?;
    let mut per = BTreeMap::new();
    let mut metric: f64 = 1.0;
    let mut rows = BTreeSet::new();
    for col in &cols {
        let c = completeness_of(col);
        metric = metric.min(c);
        per.insert(col.name().to_string(), c);
        rows.extend((0..col.len()).filter(|&r| col.get(r).is_null()));
    }
    let mut r = CheckResult::new(check.clone(), metric, metric >= threshold);
    r.failed_rows = rows.into_iter().collect();
    r.per_feature = Some(per);
    Ok(r)
}

fn key_counts<'a>(ds: &'a Dataset, idx: &[usize]) -> (Vec<RowKey<'a>>, HashMap<RowKey<'a>, usize>) {
    let keys: Vec<RowKey<'a>> = (0..ds.n_rows()).map(|r| ds.key_at(idx, r)).collect();
    let mut counts: HashMap<RowKey<'a>, usize> = HashMap::with_capacity(keys.len());
    for k in &keys {
        *counts.entry(k.clone()).or_insert(0) += 1;
    }
    (keys, counts)
}

fn uniqueness(ds: &Dataset, check: &Check, threshold: f64) -> Result<CheckResult, CheckError> {
    let idx = key_indices(ds, &check.targets)?;
    let (keys, counts) = key_counts(ds, &idx);
    let failed_rows: Vec<usize> = (0..keys.len()).filter(|&r| counts[&keys[r]] > 1).collect();
    let metric = if keys.is_empty() {
        1.0
    } else {
        1.0 - ratio(failed_rows.len(), keys.len())
    };
    let mut r = CheckResult::new(check.clone(), metric, metric >= threshold);
    r.failed_rows = failed_rows;
    Ok(r)
}

fn in_range(ds: &Dataset, check: &Check, min: f64, max: f64, threshold: f64) -> Result<CheckResult, CheckError> {
    let cols = typed_columns(ds, &check.targets, CheckKind::InRange, FeatureType::is_numeric)?;
    let mut per = BTreeMap::new();
    let mut rows = BTreeSet::new();
    let (mut checked, mut outside) = (0, 0);
    for col in &cols {
        let (mut c_checked, mut c_out) = (0, 0);
        for (row, x) in col.numeric() {
            c_checked += 1;
            if x < min || x > max {
                c_out += 1;
                rows.insert(row);
            }
        }
        checked += c_checked;
        outside += c_out;
        per.insert(col.name().to_string(), 1.0 - ratio(c_out, c_checked));
    }
    let metric = 1.0 - ratio(outside, checked);
    let mut r = CheckResult::new(check.clone(), metric, metric >= threshold);
    r.failed_rows = rows.into_iter().collect();
    r.per_feature = Some(per);
    Ok(r)
}

/// `(ratio, rows repeating an earlier key)`; the first occurrence of each
/// key is kept out of the failed set.
fn duplicate_rows(ds: &Dataset, idx: &[usize]) -> (f64, Vec<usize>) {
    let mut seen: HashSet<RowKey<'_>> = HashSet::with_capacity(ds.n_rows());
    let mut failed = Vec::new();
    for row in 0..ds.n_rows() {
        if !seen.insert(ds.key_at(idx, row)) {
            failed.push(row);
        }
    }
    (ratio(failed.len(), ds.n_rows()), failed)
}

/// Duplicate ratio `(rows - distinct keys) / rows` under `key_columns`
/// (all columns when `None`).
pub fn duplicate_ratio<S: AsRef<str>>(ds: &Dataset, key_columns: Option<&[S]>) -> Result<CheckResult, CheckError> {
    let targets = match key_columns {
        None => Targets::Dataset,
        Some(names) => Targets::Features(names.iter().map(|s| s.as_ref().to_string()).collect()),
    };
    run_check(ds, &Check::duplicates(targets))
}

/// IQR fences `(Q1 - k*IQR, Q3 + k*IQR)`; `None` without values.
pub fn outlier_fences(values: &[f64], k: f64) -> Option<(f64, f64)> {
    let (q1, q3) = quartiles(values)?;
    let iqr = q3 - q1;
    Some((q1 - k * iqr, q3 + k * iqr))
}

fn outliers(ds: &Dataset, check: &Check, k: f64, scope: OutlierScope, max_ratio: f64) -> Result<CheckResult, CheckError> {
    let cols = typed_columns(ds, &check.targets, CheckKind::Outliers, FeatureType::is_numeric)?;
    let mut per = BTreeMap::new();
    let mut flagged_rows = vec![false; ds.n_rows()];
    let (mut cells, mut outlying) = (0, 0);
    for col in &cols {
        let values: Vec<(usize, f64)> = col.numeric().collect();
        let xs: Vec<f64> = values.iter().map(|&(_, x)| x).collect();
        let mut c_out = 0;
        if let Some((lo, hi)) = outlier_fences(&xs, k) {
            for &(row, x) in &values {
                if x < lo || x > hi {
                    c_out += 1;
                    flagged_rows[row] = true;
                }
            }
        }
        cells += values.len();
        outlying += c_out;
        per.insert(col.name().to_string(), ratio(c_out, values.len()));
    }
    let failed_rows: Vec<usize> = (0..ds.n_rows()).filter(|&r| flagged_rows[r]).collect();
    let metric = match scope {
        OutlierScope::Rows => ratio(failed_rows.len(), ds.n_rows()),
        OutlierScope::Cells => ratio(outlying, cells),
    };
    let mut r = CheckResult::new(check.clone(), metric, metric <= max_ratio);
    r.failed_rows = failed_rows;
    r.per_feature = Some(per);
    Ok(r)
}

/// Dataset-level IQR outlier ratio over all numeric columns.
pub fn outlier_ratio(ds: &Dataset, k: f64, scope: OutlierScope) -> Result<CheckResult, CheckError> {
    run_check(ds, &Check::outliers(Targets::Dataset, k, scope)?)
}

/// Categories whose relative frequency is below `min_freq`.
pub fn rare_category_set(table: &FrequencyTable, min_freq: f64) -> BTreeSet<String> {
    let total = table.total();
    table
        .counts
        .iter()
        .filter(|&(_, &c)| (c as f64) / (total as f64) < min_freq)
        .map(|(k, _)| k.clone())
        .collect()
}

fn rare_in_columns(check: Check, cols: &[&FeatureColumn], min_freq: f64, n_rows: usize) -> CheckResult {
    let mut per = BTreeMap::new();
    let mut rows = BTreeSet::new();
    let mut details = Vec::new();
    let (mut cells, mut rare_cells) = (0, 0);
    for col in cols {
        let table = frequency_table(col);
        let rare = rare_category_set(&table, min_freq);
        let mut c_rare = 0;
        for row in 0..n_rows {
            if col.get(row).as_str().is_some_and(|s| rare.contains(s)) {
                c_rare += 1;
                rows.insert(row);
            }
        }
        for cat in &rare {
            details.push(format!("{}: {} ({})", col.name(), cat, table.get(cat)));
        }
        let total = table.total() as usize;
        cells += total;
        rare_cells += c_rare;
        per.insert(col.name().to_string(), ratio(c_rare, total));
    }
    let mut r = CheckResult::new(check, ratio(rare_cells, cells), details.is_empty());
    r.failed_rows = rows.into_iter().collect();
    r.per_feature = Some(per);
    r.details = details;
    r
}

/// Rare categories of a single STRING column.
pub fn rare_categories(col: &FeatureColumn, min_freq: f64) -> Result<CheckResult, CheckError> {
    if col.ftype() != FeatureType::String {
        return Err(CheckError::TypeIncompatible {
            kind: CheckKind::RareCategories,
            feature: col.name().into(),
            ftype: col.ftype(),
        });
    }
    let check = Check::new(
        Targets::Features(vec![col.name().into()]),
        CheckParams::RareCategories { min_freq },
        Severity::Error,
    )?;
    Ok(rare_in_columns(check, &[col], min_freq, col.len()))
}

fn constant_in_columns(check: Check, cols: &[&FeatureColumn]) -> CheckResult {
    let mut per = BTreeMap::new();
    let mut details = Vec::new();
    for col in cols {
        let s = summarize(col);
        let all_zero = s.zero_count.is_some_and(|z| z == s.non_null());
        let flagged = s.distinct_count <= 1 || all_zero;
        if flagged {
            details.push(col.name().to_string());
        }
        per.insert(col.name().to_string(), if flagged { 1.0 } else { 0.0 });
    }
    let metric = ratio(details.len(), cols.len());
    let mut r = CheckResult::new(check, metric, details.is_empty());
    r.per_feature = Some(per);
    r.details = details;
    r
}

/// Flags columns that are constant or all-zero among non-null values.
pub fn constant_features(ds: &Dataset) -> CheckResult {
    let check = Check::new(Targets::Dataset, CheckParams::ConstantFeature, Severity::Error).expect("valid");
    let cols: Vec<&FeatureColumn> = ds.columns().iter().collect();
    constant_in_columns(check, &cols)
}

/// Rows named by `result.failed_rows`, in their original order, all columns.
pub fn retrieve_failed_records(ds: &Dataset, result: &CheckResult) -> Result<Dataset, DatasetError> {
    ds.take_rows(&result.failed_rows)
}

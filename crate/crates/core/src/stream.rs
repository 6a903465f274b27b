//! Record-at-a-time validation against a schema, with online statistics and
//! a sliding window used for drift checks against a reference profile.
//!
//! [`StreamState`] has a single-writer contract: one caller feeds records,
//! readers may clone it between updates.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureType;
use crate::schema::{AnomalyDetail, AnomalyKind, Bounds, Presence, Schema, SchemaAnomaly};
use crate::skew::{js_divergence, FeatureProfile, ReferenceProfile, DEFAULT_JSD_THRESHOLD};
use crate::statistics::{locate, normalize, BinPosition};

pub const DEFAULT_WINDOW: usize = 1000;
pub const DEFAULT_MIN_WINDOW: usize = 100;

/// Feature name used for anomalies that concern the whole record.
pub const RECORD_FIELD: &str = "<record>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldValue {
    Null,
    Text(String),
    /// A value with no scalar reading, e.g. a nested JSON array.
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawRecord {
    Fields(BTreeMap<String, FieldValue>),
    /// The line could not be parsed into fields at all.
    Malformed(String),
}

/// Welford single-pass mean and population variance, plus min and max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineStats {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the running mean.
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for OnlineStats {
    fn default() -> Self {
        Self {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl OnlineStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }

    pub fn stddev(&self) -> f64 {
        libm::sqrt(self.variance())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WindowCell {
    Null,
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
struct FeatureState {
    name: String,
    ftype: FeatureType,
    stats: OnlineStats,
    window: VecDeque<WindowCell>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamConfig {
    pub window: usize,
    pub min_window: usize,
    /// Leave records with anomalies out of statistics and windows.
    pub exclude_anomalous: bool,
    pub jsd_threshold: f64,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            min_window: DEFAULT_MIN_WINDOW,
            exclude_anomalous: false,
            jsd_threshold: DEFAULT_JSD_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamState {
    cfg: StreamConfig,
    features: Vec<FeatureState>,
    records_seen: u64,
    records_rejected: u64,
    anomaly_counts: BTreeMap<AnomalyKind, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordVerdict {
    pub record_index: u64,
    pub accepted: bool,
    pub anomalies: Vec<SchemaAnomaly>,
}

fn anomaly(feature: &str, detail: AnomalyDetail) -> SchemaAnomaly {
    SchemaAnomaly {
        feature: feature.into(),
        detail,
        failed_rows: Vec::new(),
    }
}

/// Reads a field under the declared type. `Err` means the value does not conform.
fn parse_field(value: &FieldValue, ftype: FeatureType) -> Result<WindowCell, ()> {
    let text = match value {
        FieldValue::Null => return Ok(WindowCell::Null),
        FieldValue::Unsupported(_) => return Err(()),
        FieldValue::Text(t) => t,
    };
    match ftype {
        FeatureType::String => Ok(WindowCell::Text(text.clone())),
        FeatureType::Int => text.parse::<i64>().map(|v| WindowCell::Num(v as f64)).map_err(drop),
        FeatureType::Float => match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(WindowCell::Num(v)),
            _ => Err(()),
        },
    }
}

/// Record-local anomalies, independent of stream position.
///
/// Fields not named by the schema are ignored; absent REQUIRED fields are
/// MISSING_FEATURE; nulls are accepted (null fractions are a batch property).
pub fn record_anomalies(record: &RawRecord, schema: &Schema) -> Vec<SchemaAnomaly> {
    record_cells(record, schema).1
}

fn record_cells(record: &RawRecord, schema: &Schema) -> (Vec<WindowCell>, Vec<SchemaAnomaly>) {
    let fields = match record {
        RawRecord::Malformed(_) => {
            let cells = vec![WindowCell::Null; schema.features.len()];
            let a = anomaly(
                RECORD_FIELD,
                AnomalyDetail::TypeMismatch {
                    expected: FeatureType::String,
                    found: FeatureType::String,
                    count: 1,
                },
            );
            return (cells, vec![a]);
        }
        RawRecord::Fields(f) => f,
    };
    let mut cells = Vec::with_capacity(schema.features.len());
    let mut out = Vec::new();
    for spec in &schema.features {
        let Some(value) = fields.get(&spec.name) else {
            if spec.presence == Presence::Required {
                out.push(anomaly(&spec.name, AnomalyDetail::MissingFeature));
            }
            cells.push(WindowCell::Null);
            continue;
        };
        match parse_field(value, spec.ftype) {
            Err(()) => {
                out.push(anomaly(
                    &spec.name,
                    AnomalyDetail::TypeMismatch {
                        expected: spec.ftype,
                        found: FeatureType::String,
                        count: 1,
                    },
                ));
                let raw = match value {
                    FieldValue::Text(t) | FieldValue::Unsupported(t) => t.clone(),
                    FieldValue::Null => String::new(),
                };
                cells.push(WindowCell::Text(raw));
            }
            Ok(cell) => {
                match (&cell, spec.bounds, &spec.domain) {
                    (WindowCell::Num(x), Some(b), _) if !b.contains(*x) => out.push(anomaly(
                        &spec.name,
                        AnomalyDetail::NotInMinMax {
                            count: 1,
                            checked: 1,
                            bounds: b,
                            observed: Bounds { min: *x, max: *x },
                        },
                    )),
                    (WindowCell::Text(t), _, Some(domain)) if !domain.contains(t) => out.push(anomaly(
                        &spec.name,
                        AnomalyDetail::DomainViolation {
                            count: 1,
                            unseen: [t.clone()].into_iter().collect(),
                        },
                    )),
                    _ => {}
                }
                cells.push(cell);
            }
        }
    }
    (cells, out)
}

impl StreamState {
    pub fn new(schema: &Schema, cfg: StreamConfig) -> Self {
        let features = schema
            .features
            .iter()
            .map(|f| FeatureState {
                name: f.name.clone(),
                ftype: f.ftype,
                stats: OnlineStats::default(),
                window: VecDeque::with_capacity(cfg.window.min(4096)),
            })
            .collect();
        Self {
            cfg,
            features,
            records_seen: 0,
            records_rejected: 0,
            anomaly_counts: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &StreamConfig {
        &self.cfg
    }

    pub fn records_seen(&self) -> u64 {
        self.records_seen
    }

    pub fn records_rejected(&self) -> u64 {
        self.records_rejected
    }

    pub fn anomaly_counts(&self) -> &BTreeMap<AnomalyKind, u64> {
        &self.anomaly_counts
    }

    /// Running statistics of a numeric feature.
    pub fn stats(&self, feature: &str) -> Option<&OnlineStats> {
        self.features
            .iter()
            .find(|f| f.name == feature && f.ftype.is_numeric())
            .map(|f| &f.stats)
    }

    pub fn window(&self, feature: &str) -> Option<&VecDeque<WindowCell>> {
        self.features.iter().find(|f| f.name == feature).map(|f| &f.window)
    }

    /// Records currently held by the windows.
    pub fn window_len(&self) -> usize {
        self.features.first().map_or(0, |f| f.window.len())
    }

    /// Validates one record against `schema` (the schema this state was
    /// created for) and folds its values into the state.
    pub fn validate_record(&mut self, record: &RawRecord, schema: &Schema) -> RecordVerdict {
        let record_index = self.records_seen;
        self.records_seen += 1;
        let (cells, anomalies) = record_cells(record, schema);
        let accepted = anomalies.is_empty();
        if !accepted {
            self.records_rejected += 1;
        }
        for a in &anomalies {
            *self.anomaly_counts.entry(a.kind()).or_insert(0) += 1;
        }
        if accepted || !self.cfg.exclude_anomalous {
            for (state, cell) in self.features.iter_mut().zip(cells) {
                if let WindowCell::Num(x) = cell {
                    state.stats.push(x);
                }
                if self.cfg.window > 0 {
                    if state.window.len() == self.cfg.window {
                        state.window.pop_front();
                    }
                    state.window.push_back(cell);
                }
            }
        }
        RecordVerdict {
            record_index,
            accepted,
            anomalies,
        }
    }
}

/// Convenience wrapper matching the free-function form.
pub fn validate_record(record: &RawRecord, schema: &Schema, state: &mut StreamState) -> RecordVerdict {
    state.validate_record(record, schema)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DriftStatus {
    /// The window is smaller than the configured minimum; no scores.
    NotReady { window_len: usize, min_window: usize },
    Ready { jsd: BTreeMap<String, f64> },
}

impl DriftStatus {
    /// Features whose divergence exceeds `threshold`.
    pub fn flagged(&self, threshold: f64) -> Vec<String> {
        match self {
            DriftStatus::NotReady { .. } => Vec::new(),
            DriftStatus::Ready { jsd } => jsd
                .iter()
                .filter(|&(_, &v)| v > threshold)
                .map(|(k, _)| k.clone())
                .collect(),
        }
    }
}

/// Window distribution aligned to a profile; the reference gets zero mass
/// in the extra slots (values outside its range, unseen categories).
fn aligned(window: &VecDeque<WindowCell>, profile: &FeatureProfile) -> Option<(Vec<f64>, Vec<f64>)> {
    match profile {
        FeatureProfile::Numeric { edges, mass } => {
            let n = mass.len();
            let mut counts = vec![0u64; n + 2];
            let mut any = false;
            for cell in window {
                let WindowCell::Num(x) = cell else { continue };
                any = true;
                let slot = match locate(edges, *x) {
                    BinPosition::Below => 0,
                    BinPosition::In(i) => i + 1,
                    BinPosition::Above => n + 1,
                };
                counts[slot] += 1;
            }
            let mut reference = Vec::with_capacity(n + 2);
            reference.push(0.0);
            reference.extend_from_slice(mass);
            reference.push(0.0);
            any.then(|| (reference, normalize(&counts)))
        }
        FeatureProfile::Categorical { categories, mass } => {
            let mut counts = vec![0u64; categories.len() + 1];
            let mut any = false;
            for cell in window {
                let WindowCell::Text(t) = cell else { continue };
                any = true;
                let slot = categories.binary_search(t).unwrap_or(categories.len());
                counts[slot] += 1;
            }
            let mut reference = mass.clone();
            reference.push(0.0);
            any.then(|| (reference, normalize(&counts)))
        }
    }
}

/// Per-feature JSD between the current window and the reference profile.
/// Features with no usable window values are omitted.
pub fn window_drift(state: &StreamState, reference: &ReferenceProfile) -> DriftStatus {
    let window_len = state.window_len();
    if window_len < state.cfg.min_window || window_len == 0 {
        return DriftStatus::NotReady {
            window_len,
            min_window: state.cfg.min_window,
        };
    }
    let mut jsd = BTreeMap::new();
    for f in &state.features {
        let Some(profile) = reference.features.get(&f.name) else { continue };
        let Some((p, q)) = aligned(&f.window, profile) else { continue };
        if let Ok(d) = js_divergence(&p, &q) {
            jsd.insert(f.name.clone(), d);
        }
    }
    DriftStatus::Ready { jsd }
}

/// End-of-stream totals for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub records_seen: u64,
    pub records_rejected: u64,
    pub anomaly_counts: BTreeMap<AnomalyKind, u64>,
    pub drift_alerts: u64,
    /// Features that raised at least one drift alert, sorted.
    pub drifted_features: Vec<String>,
}

impl StreamSummary {
    pub fn new(state: &StreamState, drift_alerts: u64, mut drifted_features: Vec<String>) -> Self {
        drifted_features.sort();
        drifted_features.dedup();
        Self {
            records_seen: state.records_seen,
            records_rejected: state.records_rejected,
            anomaly_counts: state.anomaly_counts.clone(),
            drift_alerts,
            drifted_features,
        }
    }

    pub fn describe(&self) -> String {
        format!(
            "{} records, {} rejected, {} drift alerts",
            self.records_seen, self.records_rejected, self.drift_alerts
        )
    }
}

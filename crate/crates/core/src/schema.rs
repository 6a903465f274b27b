//! Versioned expected-properties schema: inference, validation, revisions.
//!
//! Type compatibility is one-directional: an INT column satisfies a FLOAT
//! spec, a FLOAT column does not satisfy an INT spec, and any column
//! satisfies a STRING spec (categories are compared by their text).

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, FeatureColumn, FeatureType, Value};
use crate::numfmt::format_decimal;
use crate::statistics::summarize;

pub const DEFAULT_DOMAIN_MAX_DISTINCT: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("schema version must be a positive integer")]
    ZeroVersion,
    #[error("duplicate feature `{0}` in schema")]
    DuplicateFeature(String),
    #[error("feature `{feature}`: {reason}")]
    InvalidFeature { feature: String, reason: String },
    #[error("malformed schema document: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Presence {
    Required,
    Optional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", format_decimal(self.min), format_decimal(self.max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FeatureDoc", into = "FeatureDoc")]
pub struct FeatureSpec {
    pub name: String,
    pub ftype: FeatureType,
    pub presence: Presence,
    pub bounds: Option<Bounds>,
    pub domain: Option<BTreeSet<String>>,
    pub max_null_fraction: f64,
}

impl FeatureSpec {
    fn check(&self) -> Result<(), SchemaError> {
        let invalid = |reason: &str| SchemaError::InvalidFeature {
            feature: self.name.clone(),
            reason: reason.into(),
        };
        if let Some(b) = self.bounds {
            if !self.ftype.is_numeric() {
                return Err(invalid("bounds are only allowed on INT or FLOAT features"));
            }
            if !(b.min.is_finite() && b.max.is_finite()) || b.min > b.max {
                return Err(invalid("bounds need finite min <= max"));
            }
        }
        if self.domain.is_some() && self.ftype != FeatureType::String {
            return Err(invalid("domain is only allowed on STRING features"));
        }
        if !(0.0..=1.0).contains(&self.max_null_fraction) {
            return Err(invalid("max_null_fraction must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// On-disk layout of one feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureDoc {
    name: String,
    #[serde(rename = "type")]
    ftype: FeatureType,
    presence: Presence,
    #[serde(default)]
    min: Option<f64>,
    #[serde(default)]
    max: Option<f64>,
    #[serde(default)]
    domain: Option<BTreeSet<String>>,
    max_null_fraction: f64,
}

impl TryFrom<FeatureDoc> for FeatureSpec {
    type Error = SchemaError;

    fn try_from(doc: FeatureDoc) -> Result<Self, Self::Error> {
        let bounds = match (doc.min, doc.max) {
            (Some(min), Some(max)) => Some(Bounds { min, max }),
            (None, None) => None,
            _ => {
                return Err(SchemaError::InvalidFeature {
                    feature: doc.name,
                    reason: "min and max must be given together".into(),
                })
            }
        };
        let spec = FeatureSpec {
            name: doc.name,
            ftype: doc.ftype,
            presence: doc.presence,
            bounds,
            domain: doc.domain,
            max_null_fraction: doc.max_null_fraction,
        };
        spec.check()?;
        Ok(spec)
    }
}

impl From<FeatureSpec> for FeatureDoc {
    fn from(spec: FeatureSpec) -> Self {
        FeatureDoc {
            name: spec.name,
            ftype: spec.ftype,
            presence: spec.presence,
            min: spec.bounds.map(|b| b.min),
            max: spec.bounds.map(|b| b.max),
            domain: spec.domain,
            max_null_fraction: spec.max_null_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemaDoc", into = "SchemaDoc")]
pub struct Schema {
    pub version: u32,
    pub source_batch: String,
    pub features: Vec<FeatureSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaDoc {
    #[serde(deserialize_with = "positive_version")]
    version: u32,
    source_batch: String,
    features: Vec<FeatureSpec>,
}

// Checked while parsing so the error carries a line and column.
fn positive_version<'de, D: serde::Deserializer<'de>>(d: D) -> Result<u32, D::Error> {
    let v = u32::deserialize(d)?;
    if v == 0 {
        return Err(serde::de::Error::custom(SchemaError::ZeroVersion));
    }
    Ok(v)
}

impl TryFrom<SchemaDoc> for Schema {
    type Error = SchemaError;

    fn try_from(doc: SchemaDoc) -> Result<Self, Self::Error> {
        Schema::new(doc.version, doc.source_batch, doc.features)
    }
}

impl From<Schema> for SchemaDoc {
    fn from(s: Schema) -> Self {
        SchemaDoc {
            version: s.version,
            source_batch: s.source_batch,
            features: s.features,
        }
    }
}

impl Schema {
    pub fn new(
        version: u32,
        source_batch: impl Into<String>,
        features: Vec<FeatureSpec>,
    ) -> Result<Self, SchemaError> {
        if version == 0 {
            return Err(SchemaError::ZeroVersion);
        }
        let mut names = BTreeSet::new();
        for f in &features {
            if !names.insert(f.name.as_str()) {
                return Err(SchemaError::DuplicateFeature(f.name.clone()));
            }
            f.check()?;
        }
        Ok(Self {
            version,
            source_batch: source_batch.into(),
            features,
        })
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureSpec> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Strict parse: unknown fields and invariant violations are errors.
    /// Messages carry the line and column of the offending element.
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        serde_json::from_str(text).map_err(|e| SchemaError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("schema serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferConfig {
    /// STRING columns with at most this many categories get a domain.
    pub domain_max_distinct: usize,
    /// Added to the observed null fraction (result clamped to 1).
    pub null_slack: f64,
}

impl Default for InferConfig {
    fn default() -> Self {
        Self {
            domain_max_distinct: DEFAULT_DOMAIN_MAX_DISTINCT,
            null_slack: 0.0,
        }
    }
}

pub fn infer_feature_spec(col: &FeatureColumn, cfg: &InferConfig) -> FeatureSpec {
    let stats = summarize(col);
    let ftype = col.ftype();
    let bounds = match (stats.min, stats.max) {
        (Some(min), Some(max)) => Some(Bounds { min, max }),
        _ => None,
    };
    let domain = (ftype == FeatureType::String
        && stats.non_null() > 0
        && stats.distinct_count <= cfg.domain_max_distinct)
        .then(|| col.iter().filter_map(|v| v.as_str().map(String::from)).collect());
    FeatureSpec {
        name: col.name().into(),
        ftype,
        presence: Presence::Required,
        bounds,
        domain,
        max_null_fraction: (stats.null_fraction() + cfg.null_slack).clamp(0.0, 1.0),
    }
}

/// Version-1 schema describing `ds` as observed.
pub fn infer_schema(ds: &Dataset, cfg: &InferConfig) -> Schema {
    Schema {
        version: 1,
        source_batch: ds.batch_id().into(),
        features: ds.columns().iter().map(|c| infer_feature_spec(c, cfg)).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnomalyKind {
    NewFeature,
    MissingFeature,
    TypeMismatch,
    NotInMinMax,
    DomainViolation,
    NullFractionExceeded,
}

impl AnomalyKind {
    pub const ALL: [AnomalyKind; 6] = [
        AnomalyKind::NewFeature,
        AnomalyKind::MissingFeature,
        AnomalyKind::TypeMismatch,
        AnomalyKind::NotInMinMax,
        AnomalyKind::DomainViolation,
        AnomalyKind::NullFractionExceeded,
    ];

    /// Aggregate label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            AnomalyKind::NewFeature => "New features",
            AnomalyKind::MissingFeature => "Missing features",
            AnomalyKind::TypeMismatch => "Type mismatch",
            AnomalyKind::NotInMinMax => "Not in Min-Max",
            AnomalyKind::DomainViolation => "Domain violation",
            AnomalyKind::NullFractionExceeded => "Null fraction exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnomalyDetail {
    NewFeature {
        ftype: FeatureType,
    },
    MissingFeature,
    TypeMismatch {
        expected: FeatureType,
        found: FeatureType,
        /// Cells that do not conform to the declared type.
        count: usize,
    },
    NotInMinMax {
        count: usize,
        /// Non-null numeric cells compared against the bounds.
        checked: usize,
        bounds: Bounds,
        observed: Bounds,
    },
    DomainViolation {
        count: usize,
        unseen: BTreeSet<String>,
    },
    NullFractionExceeded {
        count: usize,
        null_fraction: f64,
        max_null_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaAnomaly {
    pub feature: String,
    #[serde(flatten)]
    pub detail: AnomalyDetail,
    /// Offending rows for value-level kinds; empty otherwise.
    pub failed_rows: Vec<usize>,
}

impl SchemaAnomaly {
    pub fn kind(&self) -> AnomalyKind {
        match self.detail {
            AnomalyDetail::NewFeature { .. } => AnomalyKind::NewFeature,
            AnomalyDetail::MissingFeature => AnomalyKind::MissingFeature,
            AnomalyDetail::TypeMismatch { .. } => AnomalyKind::TypeMismatch,
            AnomalyDetail::NotInMinMax { .. } => AnomalyKind::NotInMinMax,
            AnomalyDetail::DomainViolation { .. } => AnomalyKind::DomainViolation,
            AnomalyDetail::NullFractionExceeded { .. } => AnomalyKind::NullFractionExceeded,
        }
    }

    /// Cell count behind the anomaly (1 for feature-level kinds).
    pub fn count(&self) -> usize {
        match &self.detail {
            AnomalyDetail::NewFeature { .. } | AnomalyDetail::MissingFeature => 1,
            AnomalyDetail::TypeMismatch { count, .. }
            | AnomalyDetail::NotInMinMax { count, .. }
            | AnomalyDetail::DomainViolation { count, .. }
            | AnomalyDetail::NullFractionExceeded { count, .. } => *count,
        }
    }

    pub fn summary(&self) -> String {
        match &self.detail {
            AnomalyDetail::NewFeature { ftype } => format!("new {ftype} feature not in schema"),
            AnomalyDetail::MissingFeature => "required feature absent from batch".into(),
            AnomalyDetail::TypeMismatch { expected, found, count } => {
                format!("expected {expected}, found {found} ({count} non-conforming cells)")
            }
            AnomalyDetail::NotInMinMax {
                count,
                checked,
                bounds,
                observed,
            } => format!("{count} of {checked} values outside {bounds} (observed {observed})"),
            AnomalyDetail::DomainViolation { count, unseen } => {
                let list: Vec<&str> = unseen.iter().map(String::as_str).collect();
                format!("{count} values outside domain: {}", list.join(", "))
            }
            AnomalyDetail::NullFractionExceeded {
                null_fraction,
                max_null_fraction,
                ..
            } => format!(
                "null fraction {} exceeds {}",
                format_decimal(*null_fraction),
                format_decimal(*max_null_fraction)
            ),
        }
    }
}

fn conforms(value: Value<'_>, expected: FeatureType) -> bool {
    match (value, expected) {
        (Value::Null, _) | (_, FeatureType::String) => true,
        (Value::Int(_), _) => true,
        (Value::Float(x), FeatureType::Float) => x.is_finite(),
        (Value::Float(x), FeatureType::Int) => {
            libm::trunc(x) == x && x >= i64::MIN as f64 && x < i64::MAX as f64
        }
        (Value::Str(s), FeatureType::Int) => s.parse::<i64>().is_ok(),
        (Value::Str(s), FeatureType::Float) => s.parse::<f64>().is_ok_and(f64::is_finite),
    }
}

fn type_compatible(found: FeatureType, expected: FeatureType) -> bool {
    found == expected || expected == FeatureType::String || (found == FeatureType::Int && expected == FeatureType::Float)
}

/// Validates a batch against a schema. An empty result means it conforms.
///
/// NEW_FEATURE anomalies come first in dataset column order, then the
/// per-spec anomalies in schema order.
pub fn validate_schema(ds: &Dataset, schema: &Schema) -> Vec<SchemaAnomaly> {
    let mut out = Vec::new();
    for col in ds.columns() {
        if schema.feature(col.name()).is_none() {
            out.push(SchemaAnomaly {
                feature: col.name().into(),
                detail: AnomalyDetail::NewFeature { ftype: col.ftype() },
                failed_rows: Vec::new(),
            });
        }
    }
    for spec in &schema.features {
        match ds.column(&spec.name) {
            None if spec.presence == Presence::Required => out.push(SchemaAnomaly {
                feature: spec.name.clone(),
                detail: AnomalyDetail::MissingFeature,
                failed_rows: Vec::new(),
            }),
            None => {}
            Some(col) => validate_column(col, spec, &mut out),
        }
    }
    out
}

fn validate_column(col: &FeatureColumn, spec: &FeatureSpec, out: &mut Vec<SchemaAnomaly>) {
    let n = col.len();
    let nulls: Vec<usize> = (0..n).filter(|&r| col.get(r).is_null()).collect();
    let has_values = nulls.len() < n;

    let mut type_ok = true;
    if has_values && !type_compatible(col.ftype(), spec.ftype) {
        type_ok = false;
        let failed_rows: Vec<usize> = (0..n).filter(|&r| !conforms(col.get(r), spec.ftype)).collect();
        out.push(SchemaAnomaly {
            feature: spec.name.clone(),
            detail: AnomalyDetail::TypeMismatch {
                expected: spec.ftype,
                found: col.ftype(),
                count: failed_rows.len(),
            },
            failed_rows,
        });
    }

    if type_ok {
        if let Some(bounds) = spec.bounds.filter(|_| col.ftype().is_numeric()) {
            let mut failed_rows = Vec::new();
            let mut checked = 0;
            let mut observed = Bounds {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            };
            for (row, x) in col.numeric() {
                checked += 1;
                observed.min = observed.min.min(x);
                observed.max = observed.max.max(x);
                if !bounds.contains(x) {
                    failed_rows.push(row);
                }
            }
            if !failed_rows.is_empty() {
                out.push(SchemaAnomaly {
                    feature: spec.name.clone(),
                    detail: AnomalyDetail::NotInMinMax {
                        count: failed_rows.len(),
                        checked,
                        bounds,
                        observed,
                    },
                    failed_rows,
                });
            }
        }
        if let Some(domain) = &spec.domain {
            let mut failed_rows = Vec::new();
            let mut unseen = BTreeSet::new();
            for row in 0..n {
                let Some(text) = col.get(row).to_text() else { continue };
                if !domain.contains(&text) {
                    failed_rows.push(row);
                    unseen.insert(text);
                }
            }
            if !failed_rows.is_empty() {
                out.push(SchemaAnomaly {
                    feature: spec.name.clone(),
                    detail: AnomalyDetail::DomainViolation {
                        count: failed_rows.len(),
                        unseen,
                    },
                    failed_rows,
                });
            }
        }
    }

    let null_fraction = if n == 0 { 0.0 } else { nulls.len() as f64 / n as f64 };
    if null_fraction > spec.max_null_fraction {
        out.push(SchemaAnomaly {
            feature: spec.name.clone(),
            detail: AnomalyDetail::NullFractionExceeded {
                count: nulls.len(),
                null_fraction,
                max_null_fraction: spec.max_null_fraction,
            },
            failed_rows: nulls,
        });
    }
}

/// Proposed next schema version. The proposal is never applied implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaRevision {
    pub schema: Schema,
    /// One line per automatic change carried by `schema`.
    pub changes: Vec<String>,
    /// Anomalies that need a human decision rather than a schema edit.
    pub notes: Vec<String>,
}

impl SchemaRevision {
    pub fn has_changes(&self) -> bool {
        !self.changes.is_empty()
    }
}

/// Builds a revision proposal from anomalies found by [`validate_schema`].
/// Returns `None` when there is nothing to revise.
pub fn suggest_schema_update(anomalies: &[SchemaAnomaly], ds: &Dataset, schema: &Schema) -> Option<SchemaRevision> {
    if anomalies.is_empty() {
        return None;
    }
    let mut next = schema.clone();
    next.version = schema.version + 1;
    let mut changes = Vec::new();
    let mut notes = Vec::new();
    let cfg = InferConfig::default();

    for anomaly in anomalies {
        let name = &anomaly.feature;
        match &anomaly.detail {
            AnomalyDetail::NewFeature { .. } => {
                let Some(col) = ds.column(name) else { continue };
                if next.feature(name).is_some() {
                    continue;
                }
                let mut spec = infer_feature_spec(col, &cfg);
                spec.presence = Presence::Optional;
                let mut line = format!("add OPTIONAL feature `{name}` ({})", spec.ftype);
                if let Some(b) = spec.bounds {
                    line.push_str(&format!(" with bounds {b}"));
                }
                changes.push(line);
                next.features.push(spec);
            }
            AnomalyDetail::NotInMinMax { observed, .. } => {
                let Some(spec) = next.features.iter_mut().find(|f| &f.name == name) else { continue };
                let Some(old) = spec.bounds else { continue };
                let widened = Bounds {
                    min: old.min.min(observed.min),
                    max: old.max.max(observed.max),
                };
                spec.bounds = Some(widened);
                changes.push(format!("widen bounds of `{name}` from {old} to {widened}"));
            }
            AnomalyDetail::DomainViolation { unseen, .. } => {
                let Some(spec) = next.features.iter_mut().find(|f| &f.name == name) else { continue };
                let Some(domain) = spec.domain.as_mut() else { continue };
                domain.extend(unseen.iter().cloned());
                let list: Vec<&str> = unseen.iter().map(String::as_str).collect();
                changes.push(format!("extend domain of `{name}` with {}", list.join(", ")));
            }
            AnomalyDetail::MissingFeature => notes.push(format!(
                "required feature `{name}` is missing: confirm whether the source stopped producing it"
            )),
            AnomalyDetail::TypeMismatch { expected, found, .. } => notes.push(format!(
                "feature `{name}` arrived as {found} but the schema declares {expected}: investigate the producer"
            )),
            AnomalyDetail::NullFractionExceeded { null_fraction, .. } => notes.push(format!(
                "feature `{name}` has null fraction {}: impute, or raise max_null_fraction deliberately",
                format_decimal(*null_fraction)
            )),
        }
    }

    Some(SchemaRevision {
        schema: next,
        changes,
        notes,
    })
}

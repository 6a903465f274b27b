//! Validation reports: assembly, mitigation suggestions and rendering.
//!
//! The text rendering is canonical and byte-stable. Each section is a title
//! line followed by entry lines shaped like Python dict literals:
//!
//! ```text
//! Schema validation
//! {'New features': 163, 'Not in Min-Max': 1}
//! Duplicated
//! {'Dataset': 'duplicate ratio: 0.337'}
//! Overall: ANOMALIES
//! ```

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::checks::{CheckKind, CheckParams, CheckResult, Severity, Targets};
use crate::numfmt::format_decimal;
use crate::schema::{AnomalyKind, SchemaAnomaly, SchemaRevision};
use crate::skew::SkewReport;
use crate::stream::StreamSummary;

pub const SCHEMA_TITLE: &str = "Schema validation";
pub const SKEW_TITLE: &str = "Skew";
pub const STREAM_TITLE: &str = "Stream";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Anomalies,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Anomalies => "ANOMALIES",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SectionSource {
    Schema,
    Check(CheckKind),
    Skew,
    Stream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEntry {
    pub label: String,
    pub count: u64,
    pub failed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricValue {
    Count(u64),
    Ratio(f64),
}

impl MetricValue {
    fn render(&self) -> String {
        match *self {
            MetricValue::Count(n) => n.to_string(),
            MetricValue::Ratio(x) => format_decimal(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricEntry {
    pub target: String,
    pub name: String,
    pub value: MetricValue,
    pub failed: bool,
    /// Failed at warning severity; does not affect the verdict.
    pub warning: bool,
    pub failed_rows: usize,
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportAnomaly {
    pub kind: AnomalyKind,
    pub feature: String,
    pub count: usize,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub title: String,
    pub source: SectionSource,
    /// Rendered together on one line.
    pub counts: Vec<CountEntry>,
    /// Rendered one per line.
    pub entries: Vec<MetricEntry>,
    pub anomalies: Vec<ReportAnomaly>,
}

impl Section {
    fn new(title: &str, source: SectionSource) -> Self {
        Self {
            title: title.into(),
            source,
            counts: Vec::new(),
            entries: Vec::new(),
            anomalies: Vec::new(),
        }
    }

    pub fn has_failures(&self) -> bool {
        !self.anomalies.is_empty() || self.counts.iter().any(|c| c.failed) || self.entries.iter().any(|e| e.failed)
    }

    /// True when `target` names a count label, entry target or anomaly feature.
    pub fn contains(&self, target: &str) -> bool {
        self.counts.iter().any(|c| c.label == target)
            || self.entries.iter().any(|e| e.target == target)
            || self.anomalies.iter().any(|a| a.feature == target)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MitigationAction {
    ImputeFixedValue,
    UpdateSchema,
    InvestigateSource,
    Deduplicate,
    ReviewOutliers,
}

impl MitigationAction {
    pub fn as_str(self) -> &'static str {
        match self {
            MitigationAction::ImputeFixedValue => "IMPUTE_FIXED_VALUE",
            MitigationAction::UpdateSchema => "UPDATE_SCHEMA",
            MitigationAction::InvestigateSource => "INVESTIGATE_SOURCE",
            MitigationAction::Deduplicate => "DEDUPLICATE",
            MitigationAction::ReviewOutliers => "REVIEW_OUTLIERS",
        }
    }
}

/// Points at a report entry: a section title plus a count label, entry
/// target or anomaly feature inside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryRef {
    pub section: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigationSuggestion {
    pub trigger: EntryRef,
    pub action: MitigationAction,
    /// Fill value for IMPUTE_FIXED_VALUE.
    pub value: Option<f64>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionSummary {
    pub version: u32,
    pub changes: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub batch_id: String,
    pub schema_version: Option<u32>,
    pub sections: Vec<Section>,
    pub schema_revision: Option<RevisionSummary>,
    pub mitigations: Vec<MitigationSuggestion>,
    pub overall: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MitigationConfig {
    pub impute_value: f64,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        Self { impute_value: 0.0 }
    }
}

/// Schema validation outcome for one batch.
#[derive(Debug, Clone, Copy)]
pub struct SchemaOutcome<'a> {
    pub schema_version: u32,
    pub anomalies: &'a [SchemaAnomaly],
    pub revision: Option<&'a SchemaRevision>,
    /// Cells in the batch (`rows * columns`), the Not-in-Min-Max ratio denominator.
    pub total_cells: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReportInputs<'a> {
    pub batch_id: &'a str,
    pub schema: Option<SchemaOutcome<'a>>,
    /// In configuration order.
    pub checks: &'a [CheckResult],
    pub skew: Option<&'a SkewReport>,
    pub stream: Option<&'a StreamSummary>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn schema_section(outcome: &SchemaOutcome<'_>) -> Section {
    let mut section = Section::new(SCHEMA_TITLE, SectionSource::Schema);
    let mut totals: BTreeMap<AnomalyKind, usize> = BTreeMap::new();
    for a in outcome.anomalies {
        let n = match a.kind() {
            AnomalyKind::NotInMinMax | AnomalyKind::DomainViolation => a.count(),
            _ => 1,
        };
        *totals.entry(a.kind()).or_insert(0) += n;
        section.anomalies.push(ReportAnomaly {
            kind: a.kind(),
            feature: a.feature.clone(),
            count: a.count(),
            summary: a.summary(),
        });
    }
    for kind in AnomalyKind::ALL {
        if let Some(&n) = totals.get(&kind) {
            section.counts.push(CountEntry {
                label: kind.label().into(),
                count: n as u64,
                failed: true,
            });
        }
    }
    if section.counts.is_empty() {
        section.counts.push(CountEntry {
            label: "Anomalies".into(),
            count: 0,
            failed: false,
        });
    }
    if let Some(&n) = totals.get(&AnomalyKind::NotInMinMax) {
        section.entries.push(MetricEntry {
            target: AnomalyKind::NotInMinMax.label().into(),
            name: "ratio".into(),
            value: MetricValue::Ratio(ratio(n, outcome.total_cells)),
            failed: true,
            warning: false,
            failed_rows: n,
            details: Vec::new(),
        });
    }
    section
}

fn check_entries(result: &CheckResult) -> Vec<MetricEntry> {
    let check = &result.check;
    let kind = check.kind();
    let is_error = check.severity == Severity::Error;
    let entry = |target: String, value: MetricValue, ok: bool, rows: usize, details: Vec<String>| MetricEntry {
        target,
        name: kind.metric_name().into(),
        value,
        failed: !ok && is_error,
        warning: !ok && !is_error,
        failed_rows: rows,
        details,
    };
    let per_feature_threshold = match check.params {
        CheckParams::Completeness { threshold } | CheckParams::InRange { threshold, .. } => Some(threshold),
        _ => None,
    };
    match (&result.per_feature, per_feature_threshold, kind) {
        (Some(per), Some(threshold), _) => per
            .iter()
            .map(|(f, &v)| entry(f.clone(), MetricValue::Ratio(v), v >= threshold, 0, Vec::new()))
            .collect(),
        (Some(per), None, CheckKind::RareCategories) => per
            .iter()
            .map(|(f, &v)| {
                let prefix = format!("{f}: ");
                let details: Vec<String> = result.details.iter().filter(|d| d.starts_with(&prefix)).cloned().collect();
                entry(f.clone(), MetricValue::Ratio(v), details.is_empty(), 0, details)
            })
            .collect(),
        _ => {
            let value = if kind == CheckKind::Size {
                MetricValue::Count(result.metric as u64)
            } else {
                MetricValue::Ratio(result.metric)
            };
            let mut e = entry(
                check.targets.label(),
                value,
                result.passed,
                result.failed_rows.len(),
                result.details.clone(),
            );
            e.failed_rows = result.failed_rows.len();
            alloc::vec![e]
        }
    }
}

fn skew_section(skew: &SkewReport) -> Section {
    let mut section = Section::new(SKEW_TITLE, SectionSource::Skew);
    let count = |label: &str, n: usize, failed: bool| CountEntry {
        label: label.into(),
        count: n as u64,
        failed,
    };
    section.counts = alloc::vec![
        count("Common features", skew.common_features.len(), false),
        count("New features", skew.new_features.len(), !skew.new_features.is_empty()),
        count("Missing features", skew.missing_features.len(), !skew.missing_features.is_empty()),
        count("Baseline rows", skew.row_count_change.0, false),
        count("Current rows", skew.row_count_change.1, false),
    ];
    for (name, d) in &skew.per_feature_divergence {
        let flagged = d.jsd > skew.jsd_threshold;
        section.entries.push(MetricEntry {
            target: name.clone(),
            name: "jsd".into(),
            value: MetricValue::Ratio(d.jsd),
            failed: flagged,
            warning: false,
            failed_rows: 0,
            details: Vec::new(),
        });
    }
    section
}

fn stream_section(s: &StreamSummary) -> Section {
    let mut section = Section::new(STREAM_TITLE, SectionSource::Stream);
    section.counts.push(CountEntry {
        label: "Records".into(),
        count: s.records_seen,
        failed: false,
    });
    section.counts.push(CountEntry {
        label: "Rejected".into(),
        count: s.records_rejected,
        failed: s.records_rejected > 0,
    });
    for (kind, &n) in &s.anomaly_counts {
        section.counts.push(CountEntry {
            label: kind.label().into(),
            count: n,
            failed: n > 0,
        });
    }
    section.counts.push(CountEntry {
        label: "Drift alerts".into(),
        count: s.drift_alerts,
        failed: s.drift_alerts > 0,
    });
    section
}

/// Assembles a report. Section order: schema validation, duplicates,
/// outliers, the remaining check kinds in first-configured order, skew,
/// stream. Mitigations are attached with `cfg`.
pub fn build_report(inputs: &ReportInputs<'_>, cfg: &MitigationConfig) -> ValidationReport {
    let mut sections = Vec::new();
    if let Some(outcome) = &inputs.schema {
        sections.push(schema_section(outcome));
    }

    let mut kinds: Vec<CheckKind> = Vec::new();
    for kind in [CheckKind::Duplicates, CheckKind::Outliers] {
        if inputs.checks.iter().any(|r| r.check.kind() == kind) {
            kinds.push(kind);
        }
    }
    for r in inputs.checks {
        if !kinds.contains(&r.check.kind()) {
            kinds.push(r.check.kind());
        }
    }
    for kind in kinds {
        let mut section = Section::new(kind.title(), SectionSource::Check(kind));
        for r in inputs.checks.iter().filter(|r| r.check.kind() == kind) {
            section.entries.extend(check_entries(r));
        }
        sections.push(section);
    }

    if let Some(skew) = inputs.skew {
        sections.push(skew_section(skew));
    }
    if let Some(stream) = inputs.stream {
        sections.push(stream_section(stream));
    }

    let overall = if sections.iter().any(Section::has_failures) {
        Verdict::Anomalies
    } else {
        Verdict::Pass
    };
    let mut report = ValidationReport {
        batch_id: inputs.batch_id.into(),
        schema_version: inputs.schema.map(|s| s.schema_version),
        sections,
        schema_revision: inputs.schema.and_then(|s| s.revision).map(|r| RevisionSummary {
            version: r.schema.version,
            changes: r.changes.clone(),
            notes: r.notes.clone(),
        }),
        mitigations: Vec::new(),
        overall,
    };
    report.mitigations = suggest_mitigations(&report, cfg);
    report
}

fn format_fill(value: f64) -> String {
    if libm::trunc(value) == value && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format_decimal(value)
    }
}

/// Derives the actionable next step for every failed entry in the report.
pub fn suggest_mitigations(report: &ValidationReport, cfg: &MitigationConfig) -> Vec<MitigationSuggestion> {
    let mut out = Vec::new();
    let push = |out: &mut Vec<MitigationSuggestion>, section: &Section, target: &str, action, value, message: String| {
        out.push(MitigationSuggestion {
            trigger: EntryRef {
                section: section.title.clone(),
                target: target.into(),
            },
            action,
            value,
            message,
        })
    };
    let fill = format_fill(cfg.impute_value);
    let revision = report
        .schema_revision
        .as_ref()
        .filter(|r| !r.changes.is_empty())
        .map(|r| format!("review proposed schema revision v{} ({} changes) and accept it explicitly", r.version, r.changes.len()));

    for section in &report.sections {
        match section.source {
            SectionSource::Schema => {
                let new_count = section.anomalies.iter().filter(|a| a.kind == AnomalyKind::NewFeature).count();
                if new_count > 0 {
                    let label = AnomalyKind::NewFeature.label();
                    let msg = format!(
                        "{new_count} features are not in the schema: {}",
                        revision.clone().unwrap_or_else(|| "extend the schema to describe them".into())
                    );
                    push(&mut out, section, label, MitigationAction::UpdateSchema, None, msg);
                }
                for a in &section.anomalies {
                    let f = &a.feature;
                    match a.kind {
                        AnomalyKind::NewFeature => {}
                        AnomalyKind::NotInMinMax | AnomalyKind::DomainViolation => {
                            let plural = if a.count == 1 { "" } else { "s" };
                            let what = if a.kind == AnomalyKind::NotInMinMax {
                                format!("value{plural} outside the schema bounds")
                            } else {
                                format!("value{plural} outside the schema domain")
                            };
                            let next = revision.clone().unwrap_or_else(|| "update the schema".into());
                            let msg = format!("`{f}` has {} {what}: {next}", a.count);
                            push(&mut out, section, f, MitigationAction::UpdateSchema, None, msg);
                        }
                        AnomalyKind::NullFractionExceeded => {
                            let msg = format!("impute nulls in `{f}` with the fixed value {fill}");
                            push(&mut out, section, f, MitigationAction::ImputeFixedValue, Some(cfg.impute_value), msg);
                        }
                        AnomalyKind::MissingFeature | AnomalyKind::TypeMismatch => {
                            let msg = format!("`{f}`: {}; explore the data source and confirm the anomaly", a.summary);
                            push(&mut out, section, f, MitigationAction::InvestigateSource, None, msg);
                        }
                    }
                }
            }
            SectionSource::Check(kind) => {
                for e in section.entries.iter().filter(|e| e.failed) {
                    let t = &e.target;
                    let (action, value, msg) = match kind {
                        CheckKind::Completeness => (
                            MitigationAction::ImputeFixedValue,
                            Some(cfg.impute_value),
                            format!("impute nulls in `{t}` with the fixed value {fill}"),
                        ),
                        CheckKind::Duplicates | CheckKind::Uniqueness => {
                            let key = if t == &Targets::Dataset.label() {
                                String::from("all columns")
                            } else {
                                format!("key ({t})")
                            };
                            (
                                MitigationAction::Deduplicate,
                                None,
                                format!("remove {} duplicated rows keyed on {key}, keeping first occurrences", e.failed_rows),
                            )
                        }
                        CheckKind::Outliers => (
                            MitigationAction::ReviewOutliers,
                            None,
                            format!("review {} records holding outlying values in {t}", e.failed_rows),
                        ),
                        _ => (
                            MitigationAction::InvestigateSource,
                            None,
                            format!("{} check failed on {t}: explore the data source and confirm the anomaly", kind.title()),
                        ),
                    };
                    push(&mut out, section, t, action, value, msg);
                }
            }
            SectionSource::Skew => {
                for c in section.counts.iter().filter(|c| c.failed) {
                    let msg = format!("{} {}: confirm the change in the data source, then update the schema", c.count, c.label.to_lowercase());
                    push(&mut out, section, &c.label, MitigationAction::InvestigateSource, None, msg);
                }
                for e in section.entries.iter().filter(|e| e.failed) {
                    let msg = format!(
                        "distribution of `{}` shifted (jsd {}): explore the data source and confirm the anomaly",
                        e.target,
                        e.value.render()
                    );
                    push(&mut out, section, &e.target, MitigationAction::InvestigateSource, None, msg);
                }
            }
            SectionSource::Stream => {
                for c in section.counts.iter().filter(|c| c.failed) {
                    let msg = format!("{} {}: explore the data source and confirm the anomaly", c.count, c.label.to_lowercase());
                    push(&mut out, section, &c.label, MitigationAction::InvestigateSource, None, msg);
                }
            }
        }
    }
    out
}

impl ValidationReport {
    pub fn resolves(&self, trigger: &EntryRef) -> bool {
        self.sections
            .iter()
            .any(|s| s.title == trigger.section && s.contains(&trigger.target))
    }

    /// Canonical text. No timestamps or styling: identical inputs give
    /// identical bytes.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for section in &self.sections {
            out.push_str(&section.title);
            out.push('\n');
            if !section.counts.is_empty() {
                out.push('{');
                for (i, c) in section.counts.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let _ = write!(out, "{}: {}", quote(&c.label), c.count);
                }
                out.push_str("}\n");
            }
            for e in &section.entries {
                let metric = format!("{}: {}", e.name, e.value.render());
                let _ = writeln!(out, "{{{}: {}}}", quote(&e.target), quote(&metric));
            }
        }
        if !self.mitigations.is_empty() {
            out.push_str("Mitigations\n");
            for m in &self.mitigations {
                let _ = writeln!(out, "- {} [{} / {}]: {}", m.action.as_str(), m.trigger.section, m.trigger.target, m.message);
            }
        }
        let _ = writeln!(out, "Overall: {}", self.overall.as_str());
        out
    }

    /// Structured form; keys keep declaration order.
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Single-quoted literal with `\` and `'` escaped.
fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for ch in s.chars() {
        if ch == '\'' || ch == '\\' {
            out.push('\\');
        }
        out.push(ch);
    }
    out.push('\'');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::{duplicate_ratio, run_check, Check, OutlierScope};
    use crate::dataset::{Dataset, FeatureColumn};
    use crate::schema::{infer_schema, suggest_schema_update, validate_schema, InferConfig};
    use crate::skew::{compare_batches, CompareConfig};
    use alloc::vec;

    fn ints(name: &str, v: &[i64]) -> FeatureColumn {
        FeatureColumn::int(name, v.iter().copied().map(Some).collect())
    }

    #[test]
    fn empty_report() {
        let r = build_report(&ReportInputs::default(), &MitigationConfig::default());
        assert_eq!(r.overall, Verdict::Pass);
        assert_eq!(r.render_text(), "Overall: PASS\n");
        assert!(r.mitigations.is_empty());
    }

    #[test]
    fn listing_shaped_schema_line() {
        let base = Dataset::new("b1", vec![ints("x", &[0, 10])]).unwrap();
        let schema = infer_schema(&base, &InferConfig::default());
        let mut cols = vec![ints("x", &[0, 11])];
        for i in 0..163 {
            cols.push(ints(&format!("n{i}"), &[1, 2]));
        }
        let batch = Dataset::new("b2", cols).unwrap();
        let anomalies = validate_schema(&batch, &schema);
        let rev = suggest_schema_update(&anomalies, &batch, &schema);
        let inputs = ReportInputs {
            batch_id: "b2",
            schema: Some(SchemaOutcome {
                schema_version: 1,
                anomalies: &anomalies,
                revision: rev.as_ref(),
                total_cells: 2 * 164,
            }),
            ..ReportInputs::default()
        };
        let r = build_report(&inputs, &MitigationConfig::default());
        let text = r.render_text();
        assert!(text.starts_with("Schema validation\n{'New features': 163, 'Not in Min-Max': 1}\n"), "{text}");
        assert_eq!(r.overall, Verdict::Anomalies);
        assert!(r.mitigations.iter().all(|m| m.action == MitigationAction::UpdateSchema));
        assert!(r.mitigations.iter().all(|m| r.resolves(&m.trigger)));
    }

    #[test]
    fn duplicates_line_and_mitigation() {
        let a = [1, 2, 3, 1, 4, 2, 5, 1, 6, 3];
        let ds = Dataset::new("b", vec![ints("a", &a)]).unwrap();
        let dup = duplicate_ratio::<&str>(&ds, None).unwrap();
        let results = [dup];
        let inputs = ReportInputs {
            batch_id: "b",
            checks: &results,
            ..ReportInputs::default()
        };
        let r = build_report(&inputs, &MitigationConfig::default());
        assert_eq!(
            r.render_text().lines().take(2).collect::<Vec<_>>(),
            vec!["Duplicated", "{'Dataset': 'duplicate ratio: 0.4'}"]
        );
        assert_eq!(r.mitigations.len(), 1);
        assert_eq!(r.mitigations[0].action, MitigationAction::Deduplicate);
        assert!(r.mitigations[0].message.contains("remove 4 duplicated rows"));
    }

    #[test]
    fn section_order_and_completeness_mitigation() {
        let ds = Dataset::new("b", vec![FeatureColumn::int("a", vec![Some(1), None, Some(3), Some(4)])]).unwrap();
        let checks: Vec<Check> = crate::checks::parse_checks(
            r#"[{"kind":"COMPLETENESS","targets":["a"]},{"kind":"OUTLIERS"},{"kind":"SIZE","params":{"min":1}},{"kind":"DUPLICATES"}]"#,
        )
        .unwrap();
        let results: Vec<_> = checks.iter().map(|c| run_check(&ds, c).unwrap()).collect();
        let r = build_report(
            &ReportInputs {
                batch_id: "b",
                checks: &results,
                ..ReportInputs::default()
            },
            &MitigationConfig::default(),
        );
        let titles: Vec<&str> = r.sections.iter().map(|s| s.title.as_str()).collect();
        assert_eq!(titles, vec!["Duplicated", "Outliers", "Completeness", "Size"]);
        assert_eq!(r.mitigations.len(), 1);
        assert_eq!(r.mitigations[0].action, MitigationAction::ImputeFixedValue);
        assert_eq!(r.mitigations[0].value, Some(0.0));
        assert!(r.render_text().contains("{'Dataset': 'size: 4'}"));
    }

    #[test]
    fn warnings_do_not_fail() {
        let ds = Dataset::new("b", vec![ints("a", &[1, 1])]).unwrap();
        let checks = crate::checks::parse_checks(r#"[{"kind":"DUPLICATES","severity":"warning"}]"#).unwrap();
        let results = [run_check(&ds, &checks[0]).unwrap()];
        let r = build_report(
            &ReportInputs {
                batch_id: "b",
                checks: &results,
                ..ReportInputs::default()
            },
            &MitigationConfig::default(),
        );
        assert_eq!(r.overall, Verdict::Pass);
        assert!(r.sections[0].entries[0].warning);
    }

    #[test]
    fn skew_flag_investigates_source() {
        let a = Dataset::new("a", vec![ints("x", &[0, 1, 2, 3])]).unwrap();
        let b = Dataset::new("b", vec![ints("x", &[100, 101, 102, 103])]).unwrap();
        let skew = compare_batches(&a, &b, &CompareConfig::default());
        let r = build_report(
            &ReportInputs {
                batch_id: "b",
                skew: Some(&skew),
                ..ReportInputs::default()
            },
            &MitigationConfig::default(),
        );
        assert_eq!(r.mitigations.len(), 1);
        assert_eq!(r.mitigations[0].action, MitigationAction::InvestigateSource);
        assert!(r.mitigations[0].message.contains("`x`"));
        assert!(r.render_text().contains("{'x': 'jsd: 1.0'}"));
    }

    #[test]
    fn json_round_trip() {
        let ds = Dataset::new("b", vec![ints("a", &[1, 1, 2, 50])]).unwrap();
        let results = vec![
            duplicate_ratio::<&str>(&ds, None).unwrap(),
            crate::checks::outlier_ratio(&ds, 1.5, OutlierScope::Rows).unwrap(),
        ];
        let r = build_report(
            &ReportInputs {
                batch_id: "b",
                checks: &results,
                ..ReportInputs::default()
            },
            &MitigationConfig::default(),
        );
        let json = r.render_json();
        assert!(json.contains("\"overall\""));
        assert_eq!(ValidationReport::from_json(&json).unwrap(), r);
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("it's"), "'it\\'s'");
    }
}

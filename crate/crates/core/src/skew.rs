//! Cross-batch comparison: feature-set diff and per-feature divergence.
//!
//! Numeric features are binned on edges shared by both batches (the
//! combined `[min, max]`), categorical features on the union of their
//! categories. Neither depends on the batches having the same row count or
//! feature count.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, FeatureColumn};
use crate::statistics::{bin_counts, equal_width_edges, frequency_table, normalize, summarize, DEFAULT_BINS};

pub const DEFAULT_JSD_THRESHOLD: f64 = 0.1;
const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SkewError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("input is not a probability vector")]
    NotNormalized,
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
}

fn is_distribution(p: &[f64]) -> bool {
    p.iter().all(|&x| x >= 0.0 && x.is_finite()) && (p.iter().sum::<f64>() - 1.0).abs() <= NORMALIZATION_TOLERANCE
}

fn kl_term(a: f64, m: f64) -> f64 {
    if a > 0.0 {
        a * libm::log2(a / m)
    } else {
        0.0
    }
}

/// Jensen-Shannon divergence in bits, so the result lies in `[0, 1]`.
///
/// Evaluated term-wise as `½ Σ p·log2(p/m) + q·log2(q/m)` with `m = (p+q)/2`,
/// which equals `H(m) - (H(p) + H(q))/2` but keeps precision near zero.
/// Each term is symmetric in `p` and `q`, so the result is exactly symmetric.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64, SkewError> {
    if p.len() != q.len() {
        return Err(SkewError::LengthMismatch(p.len(), q.len()));
    }
    if !is_distribution(p) || !is_distribution(q) {
        return Err(SkewError::NotNormalized);
    }
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = (a + b) / 2.0;
        sum += kl_term(a, m) + kl_term(b, m);
    }
    Ok((sum / 2.0).clamp(0.0, 1.0))
}

pub fn cosine_similarity(p: &[f64], q: &[f64]) -> Result<f64, SkewError> {
    if p.len() != q.len() {
        return Err(SkewError::LengthMismatch(p.len(), q.len()));
    }
    let dot: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let np = libm::sqrt(p.iter().map(|a| a * a).sum());
    let nq = libm::sqrt(q.iter().map(|a| a * a).sum());
    if np == 0.0 || nq == 0.0 {
        return Err(SkewError::ZeroVector);
    }
    Ok((dot / (np * nq)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DistributionKind {
    Histogram,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDivergence {
    pub jsd: f64,
    pub metric_kind: DistributionKind,
    /// `None` when either side has no non-null values.
    pub cosine: Option<f64>,
    /// Current null fraction minus baseline null fraction.
    pub null_fraction_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub n_bins: usize,
    pub jsd_threshold: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            n_bins: DEFAULT_BINS,
            jsd_threshold: DEFAULT_JSD_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewReport {
    pub baseline_batch: String,
    pub current_batch: String,
    /// All feature lists are sorted by name.
    pub common_features: Vec<String>,
    /// In the current batch only.
    pub new_features: Vec<String>,
    /// In the baseline batch only.
    pub missing_features: Vec<String>,
    pub per_feature_divergence: BTreeMap<String, FeatureDivergence>,
    /// `(baseline rows, current rows)`.
    pub row_count_change: (usize, usize),
    pub jsd_threshold: f64,
    pub flagged: Vec<String>,
}

impl SkewReport {
    /// True when a feature is flagged or the feature sets differ.
    pub fn has_anomalies(&self) -> bool {
        !(self.flagged.is_empty() && self.new_features.is_empty() && self.missing_features.is_empty())
    }
}

fn numeric_values(col: &FeatureColumn) -> Vec<f64> {
    col.numeric().map(|(_, x)| x).collect()
}

fn null_fraction(col: &FeatureColumn) -> f64 {
    summarize(col).null_fraction()
}

/// Divergence between two aligned mass vectors, either of which may be empty.
fn divergence(p: &[f64], q: &[f64], kind: DistributionKind, null_delta: f64) -> FeatureDivergence {
    let p_empty = p.iter().all(|&x| x == 0.0);
    let q_empty = q.iter().all(|&x| x == 0.0);
    let (jsd, cosine) = match (p_empty, q_empty) {
        (true, true) => (0.0, None),
        (true, false) | (false, true) => (1.0, None),
        (false, false) => (
            js_divergence(p, q).unwrap_or(1.0),
            cosine_similarity(p, q).ok(),
        ),
    };
    FeatureDivergence {
        jsd,
        metric_kind: kind,
        cosine,
        null_fraction_delta: null_delta,
    }
}

fn compare_numeric(base: &[f64], cur: &[f64], n_bins: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = base
        .iter()
        .chain(cur)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo > hi {
        return (Vec::new(), Vec::new());
    }
    let edges = equal_width_edges(lo, hi, n_bins);
    (
        normalize(&bin_counts(base.iter().copied(), &edges)),
        normalize(&bin_counts(cur.iter().copied(), &edges)),
    )
}

fn compare_categorical(base: &FeatureColumn, cur: &FeatureColumn) -> (Vec<f64>, Vec<f64>) {
    let (tb, tc) = (frequency_table(base), frequency_table(cur));
    let cats: BTreeSet<&String> = tb.counts.keys().chain(tc.counts.keys()).collect();
    let cb: Vec<u64> = cats.iter().map(|c| tb.get(c)).collect();
    let cc: Vec<u64> = cats.iter().map(|c| tc.get(c)).collect();
    (normalize(&cb), normalize(&cc))
}

/// Per-feature divergence of one feature present in both batches.
pub fn feature_divergence(base: &FeatureColumn, cur: &FeatureColumn, n_bins: usize) -> FeatureDivergence {
    let null_delta = null_fraction(cur) - null_fraction(base);
    if base.ftype().is_numeric() && cur.ftype().is_numeric() {
        let (p, q) = compare_numeric(&numeric_values(base), &numeric_values(cur), n_bins.max(1));
        divergence(&p, &q, DistributionKind::Histogram, null_delta)
    } else {
        let (p, q) = compare_categorical(base, cur);
        divergence(&p, &q, DistributionKind::Categorical, null_delta)
    }
}

pub fn compare_batches(baseline: &Dataset, current: &Dataset, cfg: &CompareConfig) -> SkewReport {
    let base_names: BTreeSet<&str> = baseline.names().collect();
    let cur_names: BTreeSet<&str> = current.names().collect();
    let common: Vec<String> = base_names.intersection(&cur_names).map(|s| String::from(*s)).collect();
    let new_features = cur_names.difference(&base_names).map(|s| String::from(*s)).collect();
    let missing_features = base_names.difference(&cur_names).map(|s| String::from(*s)).collect();

    let mut per = BTreeMap::new();
    let mut flagged = Vec::new();
    for name in &common {
        let (Some(b), Some(c)) = (baseline.column(name), current.column(name)) else { continue };
        let d = feature_divergence(b, c, cfg.n_bins);
        if d.jsd > cfg.jsd_threshold {
            flagged.push(name.clone());
        }
        per.insert(name.clone(), d);
    }
    SkewReport {
        baseline_batch: baseline.batch_id().into(),
        current_batch: current.batch_id().into(),
        common_features: common,
        new_features,
        missing_features,
        per_feature_divergence: per,
        row_count_change: (baseline.n_rows(), current.n_rows()),
        jsd_threshold: cfg.jsd_threshold,
        flagged,
    }
}

/// Baseline distribution of one feature, as exported for stream drift checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FeatureProfile {
    Numeric { edges: Vec<f64>, mass: Vec<f64> },
    Categorical { categories: Vec<String>, mass: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceProfile {
    pub batch_id: String,
    pub n_bins: usize,
    /// Features without any non-null value are omitted.
    pub features: BTreeMap<String, FeatureProfile>,
}

impl ReferenceProfile {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("profile serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Per-feature histograms (numeric, own `[min, max]`) and category
/// distributions (STRING) of a baseline batch.
pub fn reference_profile(ds: &Dataset, n_bins: usize) -> ReferenceProfile {
    let mut features = BTreeMap::new();
    for col in ds.columns() {
        let profile = if col.ftype().is_numeric() {
            let values = numeric_values(col);
            if values.is_empty() {
                continue;
            }
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let edges = equal_width_edges(lo, hi, n_bins.max(1));
            let mass = normalize(&bin_counts(values.iter().copied(), &edges));
            FeatureProfile::Numeric { edges, mass }
        } else {
            let table = frequency_table(col);
            if table.is_empty() {
                continue;
            }
            let counts: Vec<u64> = table.counts.values().copied().collect();
            FeatureProfile::Categorical {
                categories: table.counts.keys().cloned().collect(),
                mass: normalize(&counts),
            }
        };
        features.insert(col.name().into(), profile);
    }
    ReferenceProfile {
        batch_id: ds.batch_id().into(),
        n_bins,
        features,
    }
}

//! Per-feature summaries, histograms and frequency tables.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{FeatureColumn, KeyPart, Value};

pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("histogram needs at least one bin")]
    ZeroBins,
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
    #[error("invalid histogram range ({lo}, {hi})")]
    InvalidRange { lo: String, hi: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStatistics {
    pub count: usize,
    pub null_count: usize,
    /// Distinct non-null values.
    pub distinct_count: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub stddev: Option<f64>,
    pub zero_count: Option<usize>,
    pub is_constant: bool,
}

impl FeatureStatistics {
    pub fn non_null(&self) -> usize {
        self.count - self.null_count
    }

    pub fn null_fraction(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.null_count as f64 / self.count as f64
        }
    }
}

pub fn summarize(col: &FeatureColumn) -> FeatureStatistics {
    let count = col.len();
    let mut distinct: HashSet<KeyPart<'_>> = HashSet::new();
    let mut null_count = 0;
    for v in col.iter() {
        if v.is_null() {
            null_count += 1;
        } else {
            distinct.insert(v.into());
        }
    }
    let distinct_count = distinct.len();
    let mut stats = FeatureStatistics {
        count,
        null_count,
        distinct_count,
        min: None,
        max: None,
        mean: None,
        stddev: None,
        zero_count: None,
        is_constant: distinct_count <= 1,
    };
    if !col.ftype().is_numeric() {
        return stats;
    }
    stats.zero_count = Some(col.numeric().filter(|&(_, x)| x == 0.0).count());
    let n = count - null_count;
    if n == 0 {
        return stats;
    }
    let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    for (_, x) in col.numeric() {
        lo = lo.min(x);
        hi = hi.max(x);
        sum += x;
    }
    let mean = sum / n as f64;
    // second pass with the rounding-error correction term
    let (mut dev, mut sq) = (0.0, 0.0);
    for (_, x) in col.numeric() {
        let d = x - mean;
        dev += d;
        sq += d * d;
    }
    let var = ((sq - dev * dev / n as f64) / n as f64).max(0.0);
    stats.min = Some(lo);
    stats.max = Some(hi);
    stats.mean = Some(mean + dev / n as f64);
    stats.stddev = Some(if stats.is_constant { 0.0 } else { libm::sqrt(var) });
    stats
}

/// Where a value falls relative to a histogram's edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinPosition {
    Below,
    In(usize),
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub mass: Vec<f64>,
}

impl Histogram {
    pub fn n_bins(&self) -> usize {
        self.mass.len()
    }

    /// Bins are half-open `[e_i, e_{i+1})` except the last, which is closed.
    pub fn locate(&self, value: f64) -> BinPosition {
        locate(&self.edges, value)
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }
}

/// `n_bins` equal-width bins over `[lo, hi]`; a single bin when `lo == hi`.
pub fn equal_width_edges(lo: f64, hi: f64, n_bins: usize) -> Vec<f64> {
    if lo == hi || n_bins <= 1 {
        return vec![lo, hi];
    }
    let width = (hi - lo) / n_bins as f64;
    let mut edges: Vec<f64> = (0..n_bins).map(|i| lo + i as f64 * width).collect();
    edges.push(hi);
    edges
}

pub fn locate(edges: &[f64], value: f64) -> BinPosition {
    let n = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[n]);
    if value < lo {
        return BinPosition::Below;
    }
    if value > hi {
        return BinPosition::Above;
    }
    if hi == lo {
        return BinPosition::In(0);
    }
    let guess = libm::floor((value - lo) / (hi - lo) * n as f64);
    let mut idx = if guess.is_finite() && guess > 0.0 {
        (guess as usize).min(n - 1)
    } else {
        0
    };
    // rounding in the guess can be off by one near an edge
    while idx > 0 && value < edges[idx] {
        idx -= 1;
    }
    while idx + 1 < n && value >= edges[idx + 1] {
        idx += 1;
    }
    BinPosition::In(idx)
}

/// Counts per bin; values outside the edges clamp into the end bins.
pub fn bin_counts(values: impl IntoIterator<Item = f64>, edges: &[f64]) -> Vec<u64> {
    let n = edges.len() - 1;
    let mut counts = vec![0u64; n];
    for v in values {
        let idx = match locate(edges, v) {
            BinPosition::Below => 0,
            BinPosition::Above => n - 1,
            BinPosition::In(i) => i,
        };
        counts[idx] += 1;
    }
    counts
}

pub fn normalize(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Histogram over raw values. Default range is the values' own `[min, max]`.
pub fn histogram_of(values: &[f64], n_bins: usize, range: Option<(f64, f64)>) -> Result<Histogram, StatsError> {
    if n_bins == 0 {
        return Err(StatsError::ZeroBins);
    }
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(StatsError::InvalidRange {
                    lo: crate::format_decimal(lo),
                    hi: crate::format_decimal(hi),
                });
            }
            (lo, hi)
        }
        None if values.is_empty() => (0.0, 0.0),
        None => values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    };
    let edges = equal_width_edges(lo, hi, n_bins);
    let mass = normalize(&bin_counts(values.iter().copied(), &edges));
    Ok(Histogram { edges, mass })
}

pub fn histogram(col: &FeatureColumn, n_bins: usize, range: Option<(f64, f64)>) -> Result<Histogram, StatsError> {
    if !col.ftype().is_numeric() {
        return Err(StatsError::NotNumeric(col.name().into()));
    }
    let values: Vec<f64> = col.numeric().map(|(_, x)| x).collect();
    histogram_of(&values, n_bins, range)
}

/// Exact category counts, nulls excluded. Numeric cells are keyed by their text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyTable {
    pub counts: BTreeMap<String, u64>,
}

impl FrequencyTable {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, category: &str) -> u64 {
        self.counts.get(category).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn frequency_table(col: &FeatureColumn) -> FrequencyTable {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for v in col.iter() {
        match v {
            Value::Null => {}
            Value::Str(s) => {
                if let Some(c) = counts.get_mut(s) {
                    *c += 1;
                } else {
                    counts.insert(s.into(), 1);
                }
            }
            other => {
                if let Some(text) = other.to_text() {
                    *counts.entry(text).or_insert(0) += 1;
                }
            }
        }
    }
    FrequencyTable { counts }
}

/// Quantile of sorted data by linear interpolation between closest ranks.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Some(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// `(Q1, Q3)` of the given values.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some((quantile_sorted(&sorted, 0.25)?, quantile_sorted(&sorted, 0.75)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn ints(v: &[Option<i64>]) -> FeatureColumn {
        FeatureColumn::int("x", v.to_vec())
    }

    #[test]
    fn constant_column() {
        let s = summarize(&ints(&[Some(5), Some(5), Some(5)]));
        assert_eq!(s.mean, Some(5.0));
        assert_eq!(s.stddev, Some(0.0));
        assert!(s.is_constant);
    }

    #[test]
    fn textbook_population_stddev() {
        let col = ints(&[2, 4, 4, 4, 5, 5, 7, 9].map(Some));
        let s = summarize(&col);
        assert_eq!(s.mean, Some(5.0));
        assert_eq!(s.stddev, Some(2.0));
        assert_eq!((s.min, s.max), (Some(2.0), Some(9.0)));
        assert_eq!(s.distinct_count, 5);
    }

    #[test]
    fn nulls_excluded() {
        let s = summarize(&ints(&[Some(1), None, Some(3)]));
        assert_eq!((s.count, s.null_count), (3, 1));
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.zero_count, Some(0));
    }

    #[test]
    fn string_columns_have_no_moments() {
        let col = FeatureColumn::string("s", ["a", "b", "a"].map(|s| Some(s.to_string())).to_vec());
        let s = summarize(&col);
        assert_eq!(s.distinct_count, 2);
        assert!(s.mean.is_none() && s.zero_count.is_none() && !s.is_constant);
    }

    #[test]
    fn histogram_examples() {
        let col = ints(&(0..10).map(Some).collect::<Vec<_>>());
        let h = histogram(&col, 10, None).unwrap();
        assert_eq!(h.edges.len(), 11);
        for m in &h.mass {
            assert!((m - 0.1).abs() < 1e-15);
        }

        let h = histogram(&ints(&[Some(3), Some(3)]), 10, None).unwrap();
        assert_eq!(h.mass, vec![1.0]);

        let h = histogram(&ints(&[Some(0), Some(10)]), 2, Some((0.0, 10.0))).unwrap();
        assert_eq!(h.mass, vec![0.5, 0.5]);

        let h = histogram(&ints(&[None, None]), 4, None).unwrap();
        assert_eq!(h.total_mass(), 0.0);

        assert_eq!(histogram(&col, 0, None), Err(StatsError::ZeroBins));
    }

    #[test]
    fn out_of_range_values_clamp() {
        let h = histogram_of(&[-5.0, 0.25, 50.0], 2, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.mass, vec![2.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(h.locate(-5.0), BinPosition::Below);
        assert_eq!(h.locate(1.0), BinPosition::In(1));
    }

    #[test]
    fn frequency_examples() {
        let col = FeatureColumn::string("s", ["a", "a", "b"].map(|s| Some(s.to_string())).to_vec());
        let t = frequency_table(&col);
        assert_eq!((t.get("a"), t.get("b"), t.total()), (2, 1, 3));
        assert!(frequency_table(&FeatureColumn::string("s", vec![None, None])).is_empty());
    }

    #[test]
    fn interpolated_quartiles() {
        let v: Vec<f64> = (1..=10).map(f64::from).chain([100.0]).collect();
        assert_eq!(quartiles(&v), Some((3.5, 8.5)));
        assert_eq!(quartiles(&[]), None);
    }
}

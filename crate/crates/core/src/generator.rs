//! Seeded synthetic corpora with injected, recorded errors.
//!
//! The column layout mimics hardware-log training batches: a unique
//! `record_id`, integer pattern-count features, optional entry-rate,
//! duration and total-lines features, and optional tool verdict columns.
//! Numeric base values follow a symmetric triangular law whose support ends
//! inside the 1.5 IQR fences, so a clean corpus flags almost no outliers
//! (only through sampling noise in the quartiles).
//!
//! Errors are injected in a fixed order (duplicates, nulls, outliers) and
//! each phase draws from its own ChaCha stream, so toggling one error kind
//! never changes the values produced by another.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, DatasetError, FeatureColumn};
use crate::statistics::quartiles;

pub const ID_COLUMN: &str = "record_id";
pub const OUTLIER_IQR_MULTIPLE: f64 = 10.0;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeneratorError {
    #[error("{name} must lie in [0, 1], got {value}")]
    FractionOutOfRange { name: &'static str, value: f64 },
    #[error("skew_shift must be finite")]
    InvalidShift,
    #[error("{duplicates} duplicates and {outliers} outlier rows do not fit in {rows} rows (need 2*duplicates + outliers <= rows)")]
    Capacity { rows: usize, duplicates: usize, outliers: usize },
    #[error("no numeric column with a positive interquartile range to hold outliers")]
    NoOutlierColumn,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSpec {
    pub n_rows: usize,
    pub seed: u64,
    pub pattern_features: usize,
    pub include_entry_rate: bool,
    pub include_duration: bool,
    pub include_total_lines: bool,
    pub tool_columns: bool,
    pub duplicate_fraction: f64,
    pub null_fraction: f64,
    pub outlier_fraction: f64,
    pub n_new_features: usize,
    /// Mean shift of every pattern feature, in units of its standard deviation.
    pub skew_shift: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_rows: 1000,
            seed: 0,
            pattern_features: 50,
            include_entry_rate: true,
            include_duration: true,
            include_total_lines: true,
            tool_columns: true,
            duplicate_fraction: 0.0,
            null_fraction: 0.0,
            outlier_fraction: 0.0,
            n_new_features: 0,
            skew_shift: 0.0,
        }
    }
}

impl CorpusSpec {
    pub fn clean(n_rows: usize, seed: u64) -> Self {
        Self {
            n_rows,
            seed,
            ..Self::default()
        }
    }

    pub fn n_duplicates(&self) -> usize {
        libm::floor(self.duplicate_fraction * self.n_rows as f64) as usize
    }

    pub fn n_outlier_rows(&self) -> usize {
        libm::floor(self.outlier_fraction * self.n_rows as f64) as usize
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        for (name, value) in [
            ("duplicate_fraction", self.duplicate_fraction),
            ("null_fraction", self.null_fraction),
            ("outlier_fraction", self.outlier_fraction),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GeneratorError::FractionOutOfRange { name, value });
            }
        }
        if !self.skew_shift.is_finite() {
            return Err(GeneratorError::InvalidShift);
        }
        let (d, o) = (self.n_duplicates(), self.n_outlier_rows());
        if 2 * d + o > self.n_rows {
            return Err(GeneratorError::Capacity {
                rows: self.n_rows,
                duplicates: d,
                outliers: o,
            });
        }
        Ok(())
    }

    pub fn pattern_name(i: usize) -> String {
        format!("pattern_{i:03}")
    }

    pub fn new_feature_name(i: usize) -> String {
        format!("new_feature_{i:03}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRef {
    pub row: usize,
    pub feature: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuplicateRow {
    pub row: usize,
    pub source: usize,
}

/// Exact record of every corruption applied by [`generate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundTruth {
    pub n_rows: usize,
    pub seed: u64,
    /// Copied rows in ascending order; each source precedes its copy.
    pub duplicates: Vec<DuplicateRow>,
    pub null_cells: Vec<CellRef>,
    pub null_counts: BTreeMap<String, usize>,
    pub outlier_cells: Vec<CellRef>,
    pub new_features: Vec<String>,
    pub shifted_features: Vec<String>,
}

impl GroundTruth {
    pub fn duplicate_rows(&self) -> Vec<usize> {
        self.duplicates.iter().map(|d| d.row).collect()
    }

    pub fn outlier_rows(&self) -> Vec<usize> {
        let rows: BTreeSet<usize> = self.outlier_cells.iter().map(|c| c.row).collect();
        rows.into_iter().collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("ground truth serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

enum Data {
    Int(Vec<Option<i64>>),
    Float(Vec<Option<f64>>),
    Str(Vec<Option<String>>),
}

impl Data {
    fn copy_cell(&mut self, from: usize, to: usize) {
        match self {
            Data::Int(v) => v[to] = v[from],
            Data::Float(v) => v[to] = v[from],
            Data::Str(v) => v[to] = v[from].clone(),
        }
    }

    fn set_null(&mut self, row: usize) {
        match self {
            Data::Int(v) => v[row] = None,
            Data::Float(v) => v[row] = None,
            Data::Str(v) => v[row] = None,
        }
    }

    fn numeric(&self) -> Option<Vec<f64>> {
        match self {
            Data::Int(v) => Some(v.iter().flatten().map(|&x| x as f64).collect()),
            Data::Float(v) => Some(v.iter().flatten().copied().collect()),
            Data::Str(_) => None,
        }
    }
}

struct Col {
    name: String,
    data: Data,
    /// Excluded from error injection.
    protected: bool,
}

#[derive(Clone, Copy)]
enum Phase {
    Base = 1,
    Duplicates,
    Nulls,
    Outliers,
    NewFeatures,
}

fn rng_for(seed: u64, phase: Phase) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(phase as u64);
    rng
}

/// Symmetric triangular draw with the given mean and variance.
fn triangular<R: Rng>(rng: &mut R, mean: f64, var: f64) -> f64 {
    let half_width = libm::sqrt(6.0 * var);
    let u: f64 = rng.random::<f64>() + rng.random::<f64>() - 1.0;
    mean + half_width * u
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let scale = libm::pow(10.0, decimals as f64);
    libm::round(x * scale) / scale
}

fn count_column<R: Rng>(rng: &mut R, n: usize, shift_sd: f64) -> Vec<Option<i64>> {
    let lambda = rng.random_range(10.0..200.0);
    let shift = shift_sd * libm::sqrt(lambda);
    (0..n)
        .map(|_| Some(libm::round(triangular(rng, lambda, lambda) + shift) as i64))
        .collect()
}

fn base_columns(spec: &CorpusSpec) -> Result<(Vec<Col>, Vec<String>), GeneratorError> {
    let n = spec.n_rows;
    let mut rng = rng_for(spec.seed, Phase::Base);
    let mut cols = Vec::new();
    let mut shifted = Vec::new();
    let col = |name: String, data| Col {
        name,
        data,
        protected: false,
    };

    cols.push(Col {
        name: ID_COLUMN.into(),
        data: Data::Int((0..n as i64).map(Some).collect()),
        protected: true,
    });
    for i in 0..spec.pattern_features {
        let name = CorpusSpec::pattern_name(i);
        if spec.skew_shift != 0.0 {
            shifted.push(name.clone());
        }
        cols.push(col(name, Data::Int(count_column(&mut rng, n, spec.skew_shift))));
    }
    if spec.include_total_lines {
        for log in ["log_a", "log_b"] {
            let mean = rng.random_range(2000.0..8000.0);
            let v = (0..n)
                .map(|_| Some(libm::round(triangular(&mut rng, mean, mean)) as i64))
                .collect();
            cols.push(col(format!("{log}_total_lines"), Data::Int(v)));
        }
    }
    if spec.include_entry_rate {
        // Seconds between consecutive log records.
        let v = (0..n)
            .map(|_| Some(round_to(triangular(&mut rng, 2.0, 0.375), 3)))
            .collect();
        cols.push(col("entry_rate".into(), Data::Float(v)));
    }
    if spec.include_duration {
        let v = (0..n)
            .map(|_| Some(round_to(triangular(&mut rng, 600.0, 20000.0), 2)))
            .collect();
        cols.push(col("duration".into(), Data::Float(v)));
    }
    if spec.tool_columns {
        let mut result = Vec::with_capacity(n);
        let mut hits = Vec::with_capacity(n);
        let mut count = Vec::with_capacity(n);
        for _ in 0..n {
            if rng.random_bool(0.5) {
                result.push(Some(String::from("PASS")));
                hits.push(Some(String::from("none")));
                count.push(Some(0));
            } else {
                let k = rng.random_range(1..=4usize);
                let rules: Vec<String> = (0..k).map(|_| format!("R{:03}", rng.random_range(0..200))).collect();
                result.push(Some(String::from("FAIL")));
                hits.push(Some(rules.join(";")));
                count.push(Some(k as i64));
            }
        }
        cols.push(col("tool_result".into(), Data::Str(result)));
        cols.push(col("tool_hits".into(), Data::Str(hits)));
        cols.push(col("tool_hit_count".into(), Data::Int(count)));
    }

    let mut rng = rng_for(spec.seed, Phase::NewFeatures);
    for i in 0..spec.n_new_features {
        let data = Data::Int(count_column(&mut rng, n, 0.0));
        cols.push(Col {
            name: CorpusSpec::new_feature_name(i),
            data,
            protected: true,
        });
    }
    Ok((cols, shifted))
}

/// Builds the corpus for `spec` together with its ground truth.
pub fn generate(spec: &CorpusSpec) -> Result<(Dataset, GroundTruth), GeneratorError> {
    spec.validate()?;
    let n = spec.n_rows;
    let (mut cols, shifted) = base_columns(spec)?;

    // Duplicates: copy positions in [1, n), each copying an earlier original.
    let d = spec.n_duplicates();
    let mut rng = rng_for(spec.seed, Phase::Duplicates);
    let mut is_copy = vec![false; n];
    if d > 0 {
        for p in index::sample(&mut rng, n - 1, d) {
            is_copy[p + 1] = true;
        }
    }
    let mut originals_before = Vec::with_capacity(n);
    let mut duplicates = Vec::with_capacity(d);
    let mut is_source = vec![false; n];
    for (row, &copy) in is_copy.iter().enumerate() {
        if copy {
            let source = originals_before[rng.random_range(0..originals_before.len())];
            is_source[source] = true;
            duplicates.push(DuplicateRow { row, source });
            for c in cols.iter_mut() {
                c.data.copy_cell(source, row);
            }
        } else {
            originals_before.push(row);
        }
    }

    // Outlier rows are fixed before nulls so that they stay fully populated.
    let o = spec.n_outlier_rows();
    let mut rng_out = rng_for(spec.seed, Phase::Outliers);
    let available: Vec<usize> = (0..n).filter(|&r| !is_copy[r] && !is_source[r]).collect();
    let mut outlier_rows: Vec<usize> = index::sample(&mut rng_out, available.len(), o)
        .into_iter()
        .map(|i| available[i])
        .collect();
    outlier_rows.sort_unstable();
    let mut in_outlier = vec![false; n];
    for &r in &outlier_rows {
        in_outlier[r] = true;
    }

    // Nulls over eligible cells, in row-major order.
    let eligible_rows: Vec<usize> = (0..n)
        .filter(|&r| !is_copy[r] && !is_source[r] && !in_outlier[r])
        .collect();
    let eligible_cols: Vec<usize> = (0..cols.len()).filter(|&c| !cols[c].protected).collect();
    let n_cells = eligible_rows.len() * eligible_cols.len();
    let n_nulls = libm::floor(spec.null_fraction * n_cells as f64) as usize;
    let mut rng = rng_for(spec.seed, Phase::Nulls);
    let mut picks = index::sample(&mut rng, n_cells, n_nulls.min(n_cells)).into_vec();
    picks.sort_unstable();
    let mut null_cells = Vec::with_capacity(picks.len());
    let mut null_counts: BTreeMap<String, usize> = cols
        .iter()
        .filter(|c| !c.protected)
        .map(|c| (c.name.clone(), 0))
        .collect();
    for cell in picks {
        let row = eligible_rows[cell / eligible_cols.len()];
        let col = &mut cols[eligible_cols[cell % eligible_cols.len()]];
        col.data.set_null(row);
        *null_counts.get_mut(&col.name).expect("eligible column") += 1;
        null_cells.push(CellRef {
            row,
            feature: col.name.clone(),
        });
    }

    // Outliers: one numeric cell per chosen row, beyond Q3 + 10 IQR.
    let mut outlier_cells = Vec::with_capacity(o);
    if o > 0 {
        let targets: Vec<(usize, f64, f64)> = cols
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.protected)
            .filter_map(|(i, c)| {
                let (q1, q3) = quartiles(&c.data.numeric()?)?;
                (q3 > q1).then_some((i, q3, q3 - q1))
            })
            .collect();
        if targets.is_empty() {
            return Err(GeneratorError::NoOutlierColumn);
        }
        for &row in &outlier_rows {
            let (ci, q3, iqr) = targets[rng_out.random_range(0..targets.len())];
            let magnitude = q3 + (OUTLIER_IQR_MULTIPLE + 0.5 + rng_out.random::<f64>()) * iqr;
            let col = &mut cols[ci];
            match &mut col.data {
                Data::Int(v) => v[row] = Some(libm::ceil(magnitude) as i64),
                Data::Float(v) => v[row] = Some(round_to(magnitude, 3)),
                Data::Str(_) => unreachable!("string columns are never outlier targets"),
            }
            outlier_cells.push(CellRef {
                row,
                feature: col.name.clone(),
            });
        }
    }

    let new_features = (0..spec.n_new_features).map(CorpusSpec::new_feature_name).collect();
    let columns = cols
        .into_iter()
        .map(|c| match c.data {
            Data::Int(v) => Ok(FeatureColumn::int(c.name, v)),
            Data::Float(v) => FeatureColumn::float(c.name, v),
            Data::Str(v) => Ok(FeatureColumn::string(c.name, v)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let batch_id = format!("synthetic-{}", spec.seed);
    let ds = Dataset::with_rows(batch_id, n, columns)?;
    let gt = GroundTruth {
        n_rows: n,
        seed: spec.seed,
        duplicates,
        null_cells,
        null_counts,
        outlier_cells,
        new_features,
        shifted_features: shifted,
    };
    Ok((ds, gt))
}

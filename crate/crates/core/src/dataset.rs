//! Typed columnar batches.
//!
//! A [`Dataset`] is built once (usually through [`TableBuilder`] from raw CSV
//! text) and never mutated afterwards. Every column carries exactly one
//! [`FeatureType`], inferred per batch; cross-batch type authority belongs to
//! the schema.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numfmt::format_cell_float;

/// Cell tokens treated as null when no explicit set is configured.
pub const DEFAULT_NULL_TOKENS: [&str; 3] = ["", "NA", "null"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("empty input: no header row")]
    EmptyInput,
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown feature(s): {}", .0.join(", "))]
    UnknownFeatures(Vec<String>),
    #[error("row {row} out of range for dataset with {n_rows} rows")]
    RowOutOfRange { row: usize, n_rows: usize },
    #[error("row key needs at least one column")]
    EmptyKey,
    #[error("column `{column}` has {found} values, dataset has {expected} rows")]
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    #[error("column `{column}` row {row}: FLOAT values must be finite")]
    NonFinite { column: String, row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureType {
    Int,
    Float,
    String,
}

impl FeatureType {
    pub fn is_numeric(self) -> bool {
        matches!(self, FeatureType::Int | FeatureType::Float)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureType::Int => "INT",
            FeatureType::Float => "FLOAT",
            FeatureType::String => "STRING",
        }
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Borrowed view of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value<'a> {
    Null,
    Int(i64),
    Float(f64),
    Str(&'a str),
}

impl<'a> Value<'a> {
    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Value::Int(v) => Some(v as f64),
            Value::Float(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&'a str> {
        match *self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// CSV text for the cell; `None` for null.
    pub fn to_text(&self) -> Option<String> {
        match *self {
            Value::Null => None,
            Value::Int(v) => Some(v.to_string()),
            Value::Float(v) => Some(format_cell_float(v)),
            Value::Str(s) => Some(s.to_owned()),
        }
    }
}

/// Hashable composite-key component. Null is its own sentinel and floats
/// compare by bit pattern with `-0.0` folded into `0.0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyPart<'a> {
    Null,
    Int(i64),
    Float(u64),
    Str(&'a str),
}

impl<'a> From<Value<'a>> for KeyPart<'a> {
    fn from(value: Value<'a>) -> Self {
        match value {
            Value::Null => KeyPart::Null,
            Value::Int(v) => KeyPart::Int(v),
            Value::Float(v) => KeyPart::Float(if v == 0.0 { 0 } else { v.to_bits() }),
            Value::Str(s) => KeyPart::Str(s),
        }
    }
}

/// Composite row key over a fixed list of columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowKey<'a>(pub Vec<KeyPart<'a>>);

impl Hash for RowKey<'_> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Int(Vec<Option<i64>>),
    Float(Vec<Option<f64>>),
    Str(Vec<Option<String>>),
}

impl ColumnValues {
    fn len(&self) -> usize {
        match self {
            ColumnValues::Int(v) => v.len(),
            ColumnValues::Float(v) => v.len(),
            ColumnValues::Str(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureColumn {
    name: String,
    values: ColumnValues,
}

impl FeatureColumn {
    pub fn int(name: impl Into<String>, values: Vec<Option<i64>>) -> Self {
        Self {
            name: name.into(),
            values: ColumnValues::Int(values),
        }
    }

    pub fn float(name: impl Into<String>, values: Vec<Option<f64>>) -> Result<Self, DatasetError> {
        let name = name.into();
        if let Some(row) = values.iter().position(|v| v.is_some_and(|x| !x.is_finite())) {
            return Err(DatasetError::NonFinite { column: name, row });
        }
        Ok(Self {
            name,
            values: ColumnValues::Float(values),
        })
    }

    pub fn string(name: impl Into<String>, values: Vec<Option<String>>) -> Self {
        Self {
            name: name.into(),
            values: ColumnValues::Str(values),
        }
    }

    /// Builds a column from raw text, inferring its type first.
    pub fn from_raw(name: impl Into<String>, raw: &[Option<&str>]) -> Self {
        let name = name.into();
        let values = match infer_feature_type(raw.iter().copied()) {
            FeatureType::Int => {
                ColumnValues::Int(raw.iter().map(|c| c.map(|s| s.parse().unwrap_or_default())).collect())
            }
            FeatureType::Float => ColumnValues::Float(
                raw.iter().map(|c| c.map(|s| s.parse().unwrap_or_default())).collect(),
            ),
            FeatureType::String => {
                ColumnValues::Str(raw.iter().map(|c| c.map(ToOwned::to_owned)).collect())
            }
        };
        Self { name, values }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ftype(&self) -> FeatureType {
        match self.values {
            ColumnValues::Int(_) => FeatureType::Int,
            ColumnValues::Float(_) => FeatureType::Float,
            ColumnValues::Str(_) => FeatureType::String,
        }
    }

    pub fn values(&self) -> &ColumnValues {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, row: usize) -> Value<'_> {
        match &self.values {
            ColumnValues::Int(v) => v[row].map_or(Value::Null, Value::Int),
            ColumnValues::Float(v) => v[row].map_or(Value::Null, Value::Float),
            ColumnValues::Str(v) => v[row].as_deref().map_or(Value::Null, Value::Str),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Value<'_>> + '_ {
        (0..self.len()).map(move |row| self.get(row))
    }

    /// `(row, value)` for every non-null cell of a numeric column; empty for STRING.
    pub fn numeric(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.iter()
            .enumerate()
            .filter_map(|(row, v)| v.as_f64().map(|x| (row, x)))
    }

    pub fn null_count(&self) -> usize {
        self.iter().filter(Value::is_null).count()
    }

    fn take(&self, rows: &[usize]) -> Self {
        let values = match &self.values {
            ColumnValues::Int(v) => ColumnValues::Int(rows.iter().map(|&r| v[r]).collect()),
            ColumnValues::Float(v) => ColumnValues::Float(rows.iter().map(|&r| v[r]).collect()),
            ColumnValues::Str(v) => ColumnValues::Str(rows.iter().map(|&r| v[r].clone()).collect()),
        };
        Self {
            name: self.name.clone(),
            values,
        }
    }
}

/// Type inference over raw cells (`None` = null).
///
/// INT when every non-null cell parses as a 64-bit integer, else FLOAT when
/// every cell parses as a finite decimal, else STRING. Integers outside the
/// `i64` range therefore demote the column to FLOAT. All-null is STRING.
pub fn infer_feature_type<'a, I>(raw: I) -> FeatureType
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    let mut ftype = FeatureType::Int;
    let mut seen = false;
    for cell in raw.into_iter().flatten() {
        seen = true;
        if ftype == FeatureType::Int && cell.parse::<i64>().is_ok() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => ftype = FeatureType::Float,
            _ => return FeatureType::String,
        }
    }
    if seen {
        ftype
    } else {
        FeatureType::String
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    batch_id: String,
    n_rows: usize,
    columns: Vec<FeatureColumn>,
}

impl Dataset {
    /// Row count is taken from the first column (0 when there are none).
    pub fn new(batch_id: impl Into<String>, columns: Vec<FeatureColumn>) -> Result<Self, DatasetError> {
        let n_rows = columns.first().map_or(0, FeatureColumn::len);
        Self::with_rows(batch_id, n_rows, columns)
    }

    pub fn with_rows(
        batch_id: impl Into<String>,
        n_rows: usize,
        columns: Vec<FeatureColumn>,
    ) -> Result<Self, DatasetError> {
        let mut names = BTreeSet::new();
        for col in &columns {
            if !names.insert(col.name.as_str()) {
                return Err(DatasetError::DuplicateColumn(col.name.clone()));
            }
            if col.len() != n_rows {
                return Err(DatasetError::LengthMismatch {
                    column: col.name.clone(),
                    expected: n_rows,
                    found: col.len(),
                });
            }
        }
        Ok(Self {
            batch_id: batch_id.into(),
            n_rows,
            columns,
        })
    }

    pub fn batch_id(&self) -> &str {
        &self.batch_id
    }

    pub fn with_batch_id(mut self, batch_id: impl Into<String>) -> Self {
        self.batch_id = batch_id.into();
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> + '_ {
        self.columns.iter().map(FeatureColumn::name)
    }

    pub fn column(&self, name: &str) -> Option<&FeatureColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Column positions for `names`, or every missing name at once.
    pub fn column_indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>, DatasetError> {
        let mut missing = Vec::new();
        let mut indices = Vec::with_capacity(names.len());
        for name in names {
            match self.columns.iter().position(|c| c.name == name.as_ref()) {
                Some(i) => indices.push(i),
                None => missing.push(name.as_ref().to_owned()),
            }
        }
        if missing.is_empty() {
            Ok(indices)
        } else {
            Err(DatasetError::UnknownFeatures(missing))
        }
    }

    /// Keeps only `names`, in the order given. Row count is preserved even
    /// when no column is kept.
    pub fn project<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, DatasetError> {
        let indices = self.column_indices(names)?;
        let columns = indices.into_iter().map(|i| self.columns[i].clone()).collect();
        Self::with_rows(self.batch_id.clone(), self.n_rows, columns)
    }

    pub fn row_key<S: AsRef<str>>(&self, key_columns: &[S], row: usize) -> Result<RowKey<'_>, DatasetError> {
        if key_columns.is_empty() {
            return Err(DatasetError::EmptyKey);
        }
        let indices = self.column_indices(key_columns)?;
        if row >= self.n_rows {
            return Err(DatasetError::RowOutOfRange {
                row,
                n_rows: self.n_rows,
            });
        }
        Ok(self.key_at(&indices, row))
    }

    /// Key for `row` over pre-resolved column positions.
    pub fn key_at(&self, indices: &[usize], row: usize) -> RowKey<'_> {
        RowKey(indices.iter().map(|&i| self.columns[i].get(row).into()).collect())
    }

    /// Row subset in the order given. Indices must be `< n_rows`.
    pub fn take_rows(&self, rows: &[usize]) -> Result<Self, DatasetError> {
        if let Some(&row) = rows.iter().find(|&&r| r >= self.n_rows) {
            return Err(DatasetError::RowOutOfRange {
                row,
                n_rows: self.n_rows,
            });
        }
        Ok(Self {
            batch_id: self.batch_id.clone(),
            n_rows: rows.len(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
        })
    }

    /// Appends columns, enforcing name uniqueness and row count.
    pub fn with_columns(&self, extra: Vec<FeatureColumn>) -> Result<Self, DatasetError> {
        let mut columns = self.columns.clone();
        columns.extend(extra);
        Self::with_rows(self.batch_id.clone(), self.n_rows, columns)
    }

    /// One row rendered as CSV text cells (`None` for null).
    pub fn row_text(&self, row: usize) -> Vec<Option<String>> {
        self.columns.iter().map(|c| c.get(row).to_text()).collect()
    }
}

/// Accumulates raw text rows and infers column types on [`finish`](Self::finish).
#[derive(Debug)]
pub struct TableBuilder {
    batch_id: String,
    header: Vec<String>,
    null_tokens: Vec<String>,
    cells: Vec<Vec<Option<String>>>,
    n_rows: usize,
}

impl TableBuilder {
    pub fn new<S: AsRef<str>>(
        batch_id: impl Into<String>,
        header: Vec<String>,
        null_tokens: &[S],
    ) -> Result<Self, DatasetError> {
        let mut seen = BTreeSet::new();
        for name in &header {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateColumn(name.clone()));
            }
        }
        Ok(Self {
            batch_id: batch_id.into(),
            cells: header.iter().map(|_| Vec::new()).collect(),
            header,
            null_tokens: null_tokens.iter().map(|t| t.as_ref().to_owned()).collect(),
            n_rows: 0,
        })
    }

    pub fn n_columns(&self) -> usize {
        self.header.len()
    }

    /// Adds one data row. `row` in errors is the 0-based data row index.
    pub fn push_row<'a, I>(&mut self, fields: I) -> Result<(), DatasetError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let start = self.n_rows;
        let mut found = 0;
        for field in fields {
            if found < self.cells.len() {
                let cell = if self.null_tokens.iter().any(|t| t == field) {
                    None
                } else {
                    Some(field.to_owned())
                };
                self.cells[found].push(cell);
            }
            found += 1;
        }
        if found != self.cells.len() {
            for col in &mut self.cells {
                col.truncate(start);
            }
            return Err(DatasetError::RaggedRow {
                row: start,
                expected: self.cells.len(),
                found,
            });
        }
        self.n_rows += 1;
        Ok(())
    }

    pub fn finish(self) -> Dataset {
        let columns = self
            .header
            .into_iter()
            .zip(self.cells)
            .map(|(name, raw)| {
                let view: Vec<Option<&str>> = raw.iter().map(Option::as_deref).collect();
                FeatureColumn::from_raw(name, &view)
            })
            .collect();
        Dataset {
            batch_id: self.batch_id,
            n_rows: self.n_rows,
            columns,
        }
    }
}

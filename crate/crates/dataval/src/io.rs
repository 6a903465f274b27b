//! CSV batches and the JSON artifact files (schema, checks, ground truth,
//! reference profile).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use dataval_core::checks::parse_checks;
use dataval_core::dataset::{DatasetError, TableBuilder, DEFAULT_NULL_TOKENS};
use dataval_core::generator::GroundTruth;
use dataval_core::skew::ReferenceProfile;
use dataval_core::{Check, Dataset, Schema};

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub null_tokens: Vec<String>,
    pub has_header: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            null_tokens: DEFAULT_NULL_TOKENS.iter().map(|s| s.to_string()).collect(),
            has_header: true,
        }
    }
}

/// Reads a CSV batch. Without a header, columns are named `col_0`, `col_1`, ...
/// Errors name the 1-based line of the offending record.
pub fn load_csv<R: Read>(reader: R, batch_id: &str, opts: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.context("reading CSV header")?,
        None => bail!("input is empty"),
    };
    let (header, pending) = if opts.has_header {
        (first.iter().map(str::to_string).collect(), None)
    } else {
        ((0..first.len()).map(|i| format!("col_{i}")).collect(), Some(first))
    };
    let mut builder = TableBuilder::new(batch_id, header, &opts.null_tokens)?;
    let mut push = |record: &csv::StringRecord| -> Result<()> {
        builder.push_row(record.iter()).map_err(|e| match e {
            DatasetError::RaggedRow { expected, found, .. } => {
                let line = record.position().map_or(0, |p| p.line());
                anyhow!("line {line}: expected {expected} fields, found {found}")
            }
            other => other.into(),
        })
    };
    if let Some(r) = pending {
        push(&r)?;
    }
    for record in records {
        let record = record.context("reading CSV")?;
        push(&record)?;
    }
    Ok(builder.finish())
}

/// Batch id for a file: its stem.
pub fn batch_id_for(path: &Path) -> String {
    path.file_stem().map_or_else(|| "batch".into(), |s| s.to_string_lossy().into_owned())
}

pub fn load_csv_path(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_csv(std::io::BufReader::new(file), &batch_id_for(path), opts).with_context(|| format!("in {}", path.display()))
}

/// Writes a header plus one line per row; nulls become empty fields and
/// FLOAT cells keep a decimal point so types survive a reload.
pub fn write_csv<W: Write>(ds: &Dataset, writer: W, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    w.write_record(ds.names())?;
    for row in 0..ds.n_rows() {
        w.write_record(ds.row_text(row).iter().map(|c| c.as_deref().unwrap_or("")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path(ds: &Dataset, path: &Path) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_csv(ds, std::io::BufWriter::new(file), b',')
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_schema(path: &Path) -> Result<Schema> {
    Schema::from_json(&read_text(path)?).with_context(|| format!("invalid schema {}", path.display()))
}

pub fn write_schema(schema: &Schema, path: &Path) -> Result<()> {
    write_text(path, &schema.to_json())
}

/// `schema.json` -> `schema.rev.json`.
pub fn revision_path(schema_path: &Path) -> PathBuf {
    let stem = schema_path.file_stem().map_or_else(|| "schema".into(), |s| s.to_string_lossy().into_owned());
    schema_path.with_file_name(format!("{stem}.rev.json"))
}

pub fn read_checks(path: &Path) -> Result<Vec<Check>> {
    parse_checks(&read_text(path)?).with_context(|| format!("invalid checks file {}", path.display()))
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    GroundTruth::from_json(&read_text(path)?).with_context(|| format!("invalid ground truth {}", path.display()))
}

pub fn write_ground_truth(gt: &GroundTruth, path: &Path) -> Result<()> {
    write_text(path, &gt.to_json())
}

pub fn read_profile(path: &Path) -> Result<ReferenceProfile> {
    ReferenceProfile::from_json(&read_text(path)?).with_context(|| format!("invalid profile {}", path.display()))
}

pub fn write_profile(profile: &ReferenceProfile, path: &Path) -> Result<()> {
    write_text(path, &profile.to_json())
}

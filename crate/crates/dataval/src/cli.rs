//! The `dataval` command line. Exit codes: 0 PASS, 1 anomalies, 2 usage,
//! IO or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dataval_core::checks::run_check;
use dataval_core::generator::{generate, CorpusSpec};
use dataval_core::report::{build_report, MitigationConfig, ReportInputs, SchemaOutcome, ValidationReport};
use dataval_core::schema::{infer_schema, suggest_schema_update, validate_schema, InferConfig, DEFAULT_DOMAIN_MAX_DISTINCT};
use dataval_core::skew::{compare_batches, reference_profile, CompareConfig, ReferenceProfile, DEFAULT_JSD_THRESHOLD};
use dataval_core::statistics::DEFAULT_BINS;
use dataval_core::stream::{
    window_drift, DriftStatus, FieldValue, RawRecord, StreamConfig, StreamState, StreamSummary, DEFAULT_MIN_WINDOW, DEFAULT_WINDOW,
};
use dataval_core::{Check, Dataset, Schema, Verdict};

use crate::io::{
    load_csv_path, read_checks, read_profile, read_schema, revision_path, write_csv_path, write_ground_truth, write_profile,
    write_schema, LoadOptions,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ANOMALIES: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Records between drift evaluations once the window is ready.
pub const DRIFT_EVERY: u64 = 100;

#[derive(Debug, Parser)]
#[command(name = "dataval", version, about = "Validate ML training batches: schema, quality checks, skew and stream drift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infer a schema from a CSV batch.
    InferSchema(InferArgs),
    /// Validate a batch against a schema and run quality checks.
    Validate(ValidateArgs),
    /// Compare two batches for feature-set changes and distribution skew.
    Compare(CompareArgs),
    /// Validate records from standard input one at a time.
    Stream(StreamArgs),
    /// Write a synthetic corpus with injected errors.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Field delimiter (one ASCII character).
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Cell text read as null; repeatable. Defaults to "", "NA" and "null".
    #[arg(long = "null-token")]
    pub null_tokens: Vec<String>,
    /// The first line is data, not a header.
    #[arg(long)]
    pub no_header: bool,
}

impl CsvArgs {
    fn options(&self) -> Result<LoadOptions> {
        if !self.delimiter.is_ascii() {
            bail!("delimiter must be a single ASCII character");
        }
        let mut opts = LoadOptions {
            delimiter: self.delimiter as u8,
            has_header: !self.no_header,
            ..LoadOptions::default()
        };
        if !self.null_tokens.is_empty() {
            opts.null_tokens = self.null_tokens.clone();
        }
        Ok(opts)
    }
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// STRING features with at most this many categories get a domain.
    #[arg(long, default_value_t = DEFAULT_DOMAIN_MAX_DISTINCT)]
    pub domain_max_distinct: usize,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    /// JSON checks file; defaults to the duplicate and outlier checks.
    #[arg(long)]
    pub checks: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write every flagged row to this CSV.
    #[arg(long)]
    pub failed_records: Option<PathBuf>,
    /// Overwrite the schema with the proposed revision and validate against it.
    #[arg(long)]
    pub accept_schema_revision: bool,
    /// Prefix the text report with a generation timestamp.
    #[arg(long)]
    pub timestamp: bool,
    /// Fill value suggested for null imputation.
    #[arg(long, default_value_t = 0.0)]
    pub impute_value: f64,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub baseline: PathBuf,
    #[arg(long)]
    pub current: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    #[arg(long, default_value_t = DEFAULT_JSD_THRESHOLD)]
    pub jsd_threshold: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the baseline's reference profile for `stream --reference`.
    #[arg(long)]
    pub export_profile: Option<PathBuf>,
    #[arg(long)]
    pub timestamp: bool,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub schema: PathBuf,
    /// Reference profile exported by `compare`; enables drift alerts.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    pub window: usize,
    #[arg(long, default_value_t = DEFAULT_MIN_WINDOW)]
    pub min_window: usize,
    #[arg(long, default_value_t = DEFAULT_JSD_THRESHOLD)]
    pub jsd_threshold: f64,
    /// Keep rejected records out of statistics and windows.
    #[arg(long)]
    pub exclude_anomalous: bool,
    /// Read records from this file instead of standard input.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub csv: CsvArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub duplicates: f64,
    #[arg(long, default_value_t = 0.0)]
    pub nulls: f64,
    #[arg(long, default_value_t = 0.0)]
    pub outliers: f64,
    #[arg(long, default_value_t = 0)]
    pub new_features: usize,
    /// Mean shift of the pattern features, in standard deviations.
    #[arg(long, default_value_t = 0.0)]
    pub skew_shift: f64,
    #[arg(long, default_value_t = CorpusSpec::default().pattern_features)]
    pub pattern_features: usize,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub ground_truth: Option<PathBuf>,
}

/// Process streams and terminal facts, injectable for tests.
pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
    /// Bold section titles in text reports.
    pub styled: bool,
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, io: &mut Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let text = e.render().to_string();
            let out: &mut dyn Write = if e.use_stderr() { io.stderr } else { io.stdout };
            let _ = out.write_all(text.as_bytes());
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::InferSchema(a) => cmd_infer_schema(a, io),
        Command::Validate(a) => cmd_validate(a, io),
        Command::Compare(a) => cmd_compare(a, io),
        Command::Stream(a) => cmd_stream(a, io),
        Command::Generate(a) => cmd_generate(a, io),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.stderr, "error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Anomalies => EXIT_ANOMALIES,
    }
}

fn cmd_infer_schema(a: &InferArgs, io: &mut Io<'_>) -> Result<i32> {
    let ds = load_csv_path(&a.input, &a.csv.options()?)?;
    let cfg = InferConfig {
        domain_max_distinct: a.domain_max_distinct,
        ..InferConfig::default()
    };
    let schema = infer_schema(&ds, &cfg);
    write_schema(&schema, &a.output)?;
    writeln!(
        io.stdout,
        "inferred schema v{} with {} features from {} rows of {}",
        schema.version,
        schema.features.len(),
        ds.n_rows(),
        ds.batch_id()
    )?;
    Ok(EXIT_PASS)
}

fn emit_report(report: &ValidationReport, format: Format, timestamp: bool, io: &mut Io<'_>) -> Result<()> {
    match format {
        Format::Json => io.stdout.write_all(report.render_json().as_bytes())?,
        Format::Text => {
            if timestamp {
                writeln!(io.stdout, "# generated {}", chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))?;
            }
            let text = report.render_text();
            if io.styled {
                io.stdout.write_all(style_titles(report, &text).as_bytes())?;
            } else {
                io.stdout.write_all(text.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn style_titles(report: &ValidationReport, text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 64);
    for line in text.lines() {
        let title = line == "Mitigations" || line.starts_with("Overall: ") || report.sections.iter().any(|s| s.title == line);
        if title {
            out.push_str("\x1b[1m");
            out.push_str(line);
            out.push_str("\x1b[0m");
        } else {
            out.push_str(line);
        }
        out.push('\n');
    }
    out
}

fn cmd_validate(a: &ValidateArgs, io: &mut Io<'_>) -> Result<i32> {
    let mut schema = read_schema(&a.schema)?;
    let checks: Vec<Check> = match &a.checks {
        Some(p) => read_checks(p)?,
        None => Check::defaults(),
    };
    let ds = load_csv_path(&a.input, &a.csv.options()?)?;
    let results = checks
        .iter()
        .map(|c| run_check(&ds, c))
        .collect::<Result<Vec<_>, _>>()
        .context("running checks")?;

    let mut anomalies = validate_schema(&ds, &schema);
    let mut revision = suggest_schema_update(&anomalies, &ds, &schema).filter(|r| r.has_changes());
    if let Some(rev) = revision.take() {
        if a.accept_schema_revision {
            write_schema(&rev.schema, &a.schema)?;
            writeln!(io.stderr, "accepted schema revision v{} into {}", rev.schema.version, a.schema.display())?;
            schema = rev.schema;
            anomalies = validate_schema(&ds, &schema);
        } else {
            let path = revision_path(&a.schema);
            write_schema(&rev.schema, &path)?;
            writeln!(io.stderr, "proposed schema revision v{} written to {}", rev.schema.version, path.display())?;
            revision = Some(rev);
        }
    }

    if let Some(path) = &a.failed_records {
        write_failed_records(&ds, &results, &anomalies, path)?;
    }

    let inputs = ReportInputs {
        batch_id: ds.batch_id(),
        schema: Some(SchemaOutcome {
            schema_version: schema.version,
            anomalies: &anomalies,
            revision: revision.as_ref(),
            total_cells: ds.n_rows() * ds.n_columns(),
        }),
        checks: &results,
        skew: None,
        stream: None,
    };
    let report = build_report(&inputs, &MitigationConfig { impute_value: a.impute_value });
    emit_report(&report, a.format, a.timestamp, io)?;
    Ok(verdict_code(report.overall))
}

fn write_failed_records(
    ds: &Dataset,
    results: &[dataval_core::CheckResult],
    anomalies: &[dataval_core::SchemaAnomaly],
    path: &std::path::Path,
) -> Result<()> {
    let mut rows: Vec<usize> = results
        .iter()
        .flat_map(|r| r.failed_rows.iter().copied())
        .chain(anomalies.iter().flat_map(|a| a.failed_rows.iter().copied()))
        .collect();
    rows.sort_unstable();
    rows.dedup();
    write_csv_path(&ds.take_rows(&rows)?, path)
}

fn cmd_compare(a: &CompareArgs, io: &mut Io<'_>) -> Result<i32> {
    if a.bins == 0 {
        bail!("--bins must be at least 1");
    }
    if !(0.0..=1.0).contains(&a.jsd_threshold) {
        bail!("--jsd-threshold must lie in [0, 1]");
    }
    let opts = a.csv.options()?;
    let baseline = load_csv_path(&a.baseline, &opts)?;
    let current = load_csv_path(&a.current, &opts)?;
    let cfg = CompareConfig {
        n_bins: a.bins,
        jsd_threshold: a.jsd_threshold,
    };
    let skew = compare_batches(&baseline, &current, &cfg);
    if let Some(path) = &a.export_profile {
        write_profile(&reference_profile(&baseline, a.bins), path)?;
    }
    let inputs = ReportInputs {
        batch_id: current.batch_id(),
        skew: Some(&skew),
        ..ReportInputs::default()
    };
    let report = build_report(&inputs, &MitigationConfig::default());
    emit_report(&report, a.format, a.timestamp, io)?;
    Ok(verdict_code(report.overall))
}

/// One input line: a JSON object, or a CSV row in schema order.
fn parse_record(line: &str, schema: &Schema, opts: &LoadOptions) -> RawRecord {
    let field = |text: &str| {
        if opts.null_tokens.iter().any(|t| t == text) {
            FieldValue::Null
        } else {
            FieldValue::Text(text.to_string())
        }
    };
    if line.trim_start().starts_with('{') {
        let Ok(serde_json::Value::Object(map)) = serde_json::from_str::<serde_json::Value>(line) else {
            return RawRecord::Malformed(line.to_string());
        };
        let fields = map
            .into_iter()
            .map(|(k, v)| {
                let value = match v {
                    serde_json::Value::Null => FieldValue::Null,
                    serde_json::Value::String(s) => field(&s),
                    serde_json::Value::Number(n) => FieldValue::Text(n.to_string()),
                    serde_json::Value::Bool(b) => FieldValue::Text(b.to_string()),
                    other => FieldValue::Unsupported(other.to_string()),
                };
                (k, value)
            })
            .collect();
        return RawRecord::Fields(fields);
    }
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(line.as_bytes());
    match rdr.records().next() {
        Some(Ok(rec)) if rec.len() == schema.features.len() => RawRecord::Fields(
            schema
                .features
                .iter()
                .zip(rec.iter())
                .map(|(f, text)| (f.name.clone(), field(text)))
                .collect(),
        ),
        _ => RawRecord::Malformed(line.to_string()),
    }
}

#[derive(Default)]
struct DriftTracker {
    alerts: u64,
    drifted: Vec<String>,
    last_checked: Option<u64>,
}

impl DriftTracker {
    /// Scores the window and writes one alert line when any feature drifted.
    fn check(&mut self, state: &StreamState, reference: Option<&ReferenceProfile>, stderr: &mut dyn Write) -> Result<()> {
        let Some(reference) = reference else { return Ok(()) };
        self.last_checked = Some(state.records_seen());
        let status = window_drift(state, reference);
        let DriftStatus::Ready { jsd } = &status else { return Ok(()) };
        let flagged = status.flagged(state.config().jsd_threshold);
        if flagged.is_empty() {
            return Ok(());
        }
        let scores: BTreeMap<&str, f64> = flagged.iter().map(|f| (f.as_str(), jsd[f])).collect();
        let alert = serde_json::json!({
            "alert": "DRIFT",
            "records_seen": state.records_seen(),
            "window": state.window_len(),
            "jsd": scores,
        });
        writeln!(stderr, "{alert}")?;
        self.alerts += 1;
        self.drifted.extend(flagged);
        Ok(())
    }
}

fn cmd_stream(a: &StreamArgs, io: &mut Io<'_>) -> Result<i32> {
    if a.window == 0 {
        bail!("--window must be at least 1");
    }
    if a.min_window > a.window {
        bail!("--min-window ({}) cannot exceed --window ({})", a.min_window, a.window);
    }
    if !(0.0..=1.0).contains(&a.jsd_threshold) {
        bail!("--jsd-threshold must lie in [0, 1]");
    }
    let opts = a.csv.options()?;
    let schema = read_schema(&a.schema)?;
    let reference = a.reference.as_deref().map(read_profile).transpose()?;
    let cfg = StreamConfig {
        window: a.window,
        min_window: a.min_window,
        exclude_anomalous: a.exclude_anomalous,
        jsd_threshold: a.jsd_threshold,
    };
    let mut state = StreamState::new(&schema, cfg);

    let mut file_reader;
    let input: &mut dyn BufRead = match &a.input {
        Some(p) => {
            let f = fs::File::open(p).with_context(|| format!("cannot open {}", p.display()))?;
            file_reader = std::io::BufReader::new(f);
            &mut file_reader
        }
        None => io.stdin,
    };

    let header: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    let mut drift = DriftTracker::default();
    let mut first = true;
    for line in input.lines() {
        let line = line.context("reading records")?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if std::mem::take(&mut first) && !line.starts_with('{') {
            let mut rdr = csv::ReaderBuilder::new()
                .delimiter(opts.delimiter)
                .has_headers(false)
                .from_reader(line.as_bytes());
            if let Some(Ok(rec)) = rdr.records().next() {
                if rec.iter().eq(header.iter().copied()) {
                    continue;
                }
            }
        }
        let record = parse_record(line, &schema, &opts);
        let verdict = state.validate_record(&record, &schema);
        writeln!(io.stdout, "{}", serde_json::to_string(&verdict)?)?;
        if state.records_seen().is_multiple_of(DRIFT_EVERY) && state.window_len() >= cfg.min_window {
            drift.check(&state, reference.as_ref(), io.stderr)?;
        }
    }
    if drift.last_checked != Some(state.records_seen()) {
        drift.check(&state, reference.as_ref(), io.stderr)?;
    }

    let summary = StreamSummary::new(&state, drift.alerts, drift.drifted);
    let inputs = ReportInputs {
        batch_id: "stream",
        stream: Some(&summary),
        ..ReportInputs::default()
    };
    let report = build_report(&inputs, &MitigationConfig::default());
    match a.format {
        Format::Json => writeln!(io.stdout, "{}", serde_json::to_string(&report)?)?,
        Format::Text => emit_report(&report, Format::Text, false, io)?,
    }
    Ok(verdict_code(report.overall))
}

fn cmd_generate(a: &GenerateArgs, io: &mut Io<'_>) -> Result<i32> {
    let spec = CorpusSpec {
        n_rows: a.rows,
        seed: a.seed,
        pattern_features: a.pattern_features,
        duplicate_fraction: a.duplicates,
        null_fraction: a.nulls,
        outlier_fraction: a.outliers,
        n_new_features: a.new_features,
        skew_shift: a.skew_shift,
        ..CorpusSpec::default()
    };
    let (ds, gt) = generate(&spec)?;
    write_csv_path(&ds, &a.output)?;
    if let Some(path) = &a.ground_truth {
        write_ground_truth(&gt, path)?;
    }
    writeln!(
        io.stdout,
        "wrote {} rows x {} columns to {}",
        ds.n_rows(),
        ds.n_columns(),
        a.output.display()
    )?;
    Ok(EXIT_PASS)
}

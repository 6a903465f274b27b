use std::fs;
use std::path::Path;

use dataval::cli::{run, Io, EXIT_ANOMALIES, EXIT_ERROR, EXIT_PASS};
use dataval::io::{load_csv_path, read_ground_truth, read_profile, read_schema, LoadOptions};
use dataval_core::checks::run_check;
use dataval_core::report::ValidationReport;
use dataval_core::schema::Presence;
use dataval_core::{Check, Verdict};

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn dv(dir: &Path, args: &[&str], stdin: &str, styled: bool) -> Out {
    let mut input = stdin.as_bytes();
    let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
    let mut full = vec!["dataval".to_string()];
    for a in args {
        // Relative paths resolve inside the test directory.
        let is_path = a.ends_with(".csv") || a.ends_with(".json");
        full.push(if is_path { dir.join(a).to_string_lossy().into_owned() } else { a.to_string() });
    }
    let code = run(
        full,
        &mut Io {
            stdin: &mut input,
            stdout: &mut stdout,
            stderr: &mut stderr,
            styled,
        },
    );
    Out {
        code,
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn run_ok(dir: &Path, args: &[&str]) -> Out {
    let out = dv(dir, args, "", false);
    assert_eq!(out.code, EXIT_PASS, "{args:?}: {}", out.stderr);
    out
}

#[test]
fn infer_schema_is_deterministic_and_required() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "400", "--seed", "2", "--output", "c.csv"]);
    let out = run_ok(p, &["infer-schema", "--input", "c.csv", "--output", "a.json"]);
    assert!(out.stdout.contains("58 features"), "{}", out.stdout);
    run_ok(p, &["infer-schema", "--input", "c.csv", "--output", "b.json"]);
    assert_eq!(fs::read(p.join("a.json")).unwrap(), fs::read(p.join("b.json")).unwrap());
    let schema = read_schema(&p.join("a.json")).unwrap();
    assert!(schema.features.iter().all(|f| f.presence == Presence::Required));
}

#[test]
fn generate_records_ground_truth() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "1000", "--seed", "7", "--duplicates", "0.337", "--output", "c.csv", "--ground-truth", "gt.json"]);
    run_ok(p, &["generate", "--rows", "1000", "--seed", "7", "--duplicates", "0.337", "--output", "d.csv"]);
    assert_eq!(fs::read(p.join("c.csv")).unwrap(), fs::read(p.join("d.csv")).unwrap());
    let gt = read_ground_truth(&p.join("gt.json")).unwrap();
    assert_eq!(gt.duplicates.len(), 337);
    assert!(gt.duplicates.iter().all(|d| d.row < 1000));
    let out = dv(p, &["generate", "--rows", "10", "--seed", "1", "--nulls", "1.5", "--output", "x.csv"], "", false);
    assert_eq!(out.code, EXIT_ERROR);
    assert!(out.stderr.contains("null_fraction"), "{}", out.stderr);
}

#[test]
fn validate_writes_revision_and_failed_records() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "500", "--seed", "3", "--output", "base.csv"]);
    run_ok(
        p,
        &["generate", "--rows", "500", "--seed", "3", "--duplicates", "0.1", "--new-features", "2", "--output", "new.csv"],
    );
    run_ok(p, &["infer-schema", "--input", "base.csv", "--output", "s.json"]);

    let out = dv(p, &["validate", "--input", "new.csv", "--schema", "s.json", "--failed-records", "failed.csv"], "", false);
    assert_eq!(out.code, EXIT_ANOMALIES);
    assert!(out.stdout.starts_with("Schema validation\n{'New features': 2}\n"), "{}", out.stdout);
    assert!(out.stdout.contains("{'Dataset': 'duplicate ratio: 0.1'}"));
    assert!(out.stdout.contains("DEDUPLICATE"));
    assert!(out.stdout.ends_with("Overall: ANOMALIES\n"));
    let rev = read_schema(&p.join("s.rev.json")).unwrap();
    assert_eq!(rev.version, 2);
    assert_eq!(read_schema(&p.join("s.json")).unwrap().version, 1);
    // Union of every flagged row: the 50 copies plus rows with outliers.
    let batch = load_csv_path(&p.join("new.csv"), &LoadOptions::default()).unwrap();
    let mut rows: Vec<usize> = Check::defaults()
        .iter()
        .flat_map(|c| run_check(&batch, c).unwrap().failed_rows)
        .collect();
    rows.sort_unstable();
    rows.dedup();
    assert!(rows.len() >= 50);
    let failed = load_csv_path(&p.join("failed.csv"), &LoadOptions::default()).unwrap();
    assert_eq!(failed, batch.take_rows(&rows).unwrap().with_batch_id("failed"));

    // Accepting the revision clears the new-feature anomaly; duplicates remain.
    let out = dv(p, &["validate", "--input", "new.csv", "--schema", "s.json", "--accept-schema-revision"], "", false);
    assert_eq!(out.code, EXIT_ANOMALIES);
    assert!(out.stdout.starts_with("Schema validation\n{'Anomalies': 0}\n"), "{}", out.stdout);
    assert_eq!(read_schema(&p.join("s.json")).unwrap().version, 2);
}

#[test]
fn validate_json_round_trips_and_honors_checks_file() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "300", "--seed", "4", "--nulls", "0.05", "--output", "c.csv"]);
    run_ok(p, &["infer-schema", "--input", "c.csv", "--output", "s.json"]);
    fs::write(
        p.join("checks.json"),
        r#"[{"kind": "COMPLETENESS", "targets": ["pattern_000"], "params": {"threshold": 1.0}},
            {"kind": "SIZE", "params": {"min": 100}},
            {"kind": "RARE_CATEGORIES", "targets": ["tool_result"], "params": {"min_freq": 0.01}}]"#,
    )
    .unwrap();
    let out = dv(
        p,
        &["validate", "--input", "c.csv", "--schema", "s.json", "--checks", "checks.json", "--format", "json", "--impute-value", "7"],
        "",
        false,
    );
    assert_eq!(out.code, EXIT_ANOMALIES, "{}", out.stderr);
    let report = ValidationReport::from_json(&out.stdout).unwrap();
    assert_eq!(report.overall, Verdict::Anomalies);
    let titles: Vec<&str> = report.sections.iter().map(|s| s.title.as_str()).collect();
    assert_eq!(titles, ["Schema validation", "Completeness", "Size", "Rare categories"]);
    let impute = report.mitigations.iter().find(|m| m.trigger.section == "Completeness").unwrap();
    assert_eq!(impute.value, Some(7.0));
    assert!(report.mitigations.iter().all(|m| report.resolves(&m.trigger)));
}

#[test]
fn validate_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "50", "--seed", "4", "--output", "c.csv"]);
    run_ok(p, &["infer-schema", "--input", "c.csv", "--output", "s.json"]);
    let missing = dv(p, &["validate", "--input", "c.csv", "--schema", "none.json"], "", false);
    assert_eq!(missing.code, EXIT_ERROR);
    assert!(missing.stderr.starts_with("error: "));
    fs::write(p.join("checks.json"), r#"[{"kind": "OUTLIERS", "targets": ["tool_result"]}]"#).unwrap();
    let incompatible = dv(p, &["validate", "--input", "c.csv", "--schema", "s.json", "--checks", "checks.json"], "", false);
    assert_eq!(incompatible.code, EXIT_ERROR, "{}", incompatible.stdout);
    let no_schema = dv(p, &["validate", "--input", "c.csv"], "", false);
    assert_eq!(no_schema.code, EXIT_ERROR);
}

#[test]
fn styled_output_only_changes_titles() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "50", "--seed", "4", "--output", "c.csv"]);
    run_ok(p, &["infer-schema", "--input", "c.csv", "--output", "s.json"]);
    let plain = dv(p, &["validate", "--input", "c.csv", "--schema", "s.json"], "", false);
    let styled = dv(p, &["validate", "--input", "c.csv", "--schema", "s.json"], "", true);
    assert!(styled.stdout.contains("\x1b[1mSchema validation\x1b[0m"));
    assert_eq!(styled.stdout.replace("\x1b[1m", "").replace("\x1b[0m", ""), plain.stdout);
    let stamped = dv(p, &["validate", "--input", "c.csv", "--schema", "s.json", "--timestamp"], "", false);
    assert!(stamped.stdout.starts_with("# generated "));
}

#[test]
fn compare_reports_feature_set_changes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    fs::write(p.join("a.csv"), "x,y\n1,a\n2,b\n3,c\n").unwrap();
    fs::write(p.join("b.csv"), "z,w\n1,a\n2,b\n3,c\n").unwrap();
    let out = dv(p, &["compare", "--baseline", "a.csv", "--current", "b.csv"], "", false);
    assert_eq!(out.code, EXIT_ANOMALIES);
    assert!(out.stdout.contains("{'Common features': 0, 'New features': 2, 'Missing features': 2, 'Baseline rows': 3, 'Current rows': 3}"), "{}", out.stdout);

    let out = dv(p, &["compare", "--baseline", "a.csv", "--current", "a.csv", "--format", "json", "--export-profile", "p.json"], "", false);
    assert_eq!(out.code, EXIT_PASS);
    let report = ValidationReport::from_json(&out.stdout).unwrap();
    assert_eq!(report.overall, Verdict::Pass);
    let profile = read_profile(&p.join("p.json")).unwrap();
    assert_eq!(profile.features.len(), 2);
}

#[test]
fn stream_verdicts_alerts_and_summary() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    run_ok(p, &["generate", "--rows", "400", "--seed", "5", "--output", "ref.csv"]);
    run_ok(p, &["generate", "--rows", "400", "--seed", "5", "--skew-shift", "6", "--output", "drift.csv"]);
    run_ok(p, &["infer-schema", "--input", "ref.csv", "--output", "s.json"]);
    run_ok(p, &["compare", "--baseline", "ref.csv", "--current", "ref.csv", "--export-profile", "p.json"]);

    // Only the full window matches the reference: partial windows over the
    // ordered record_id would drift.
    let reference = fs::read_to_string(p.join("ref.csv")).unwrap();
    let args = ["stream", "--schema", "s.json", "--reference", "p.json", "--min-window", "400", "--format", "json"];
    let out = dv(p, &args, &reference, false);
    assert_eq!(out.code, EXIT_PASS, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines.len(), 401);
    assert!(lines[..400].iter().all(|l| l.contains("\"accepted\":true")));
    let summary = ValidationReport::from_json(lines[400]).unwrap();
    assert_eq!(summary.overall, Verdict::Pass);
    assert!(out.stderr.is_empty(), "{}", out.stderr);

    // Shifted values violate the bounds and move the window off the reference.
    let drift = fs::read_to_string(p.join("drift.csv")).unwrap();
    let out = dv(p, &["stream", "--schema", "s.json", "--reference", "p.json"], &drift, false);
    assert_eq!(out.code, EXIT_ANOMALIES);
    assert!(out.stdout.contains("NOT_IN_MIN_MAX"));
    assert!(out.stderr.lines().any(|l| l.contains("\"alert\":\"DRIFT\"") && l.contains("pattern_000")));
    assert!(out.stdout.contains("Stream\n{'Records': 400, 'Rejected': 400"), "{}", out.stdout);

    let json = r#"{"record_id": 1, "pattern_000": "oops"}
not,a,record
"#;
    let out = dv(p, &["stream", "--schema", "s.json"], json, false);
    assert_eq!(out.code, EXIT_ANOMALIES);
    assert!(out.stdout.lines().take(2).all(|l| l.contains("\"accepted\":false")));
}

#[test]
fn help_and_version_exit_zero() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(dv(d.path(), &["--help"], "", false).code, EXIT_PASS);
    assert_eq!(dv(d.path(), &["--version"], "", false).code, EXIT_PASS);
    assert_eq!(dv(d.path(), &[], "", false).code, EXIT_ERROR);
}

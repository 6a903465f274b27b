use std::collections::BTreeMap;

use dataval_core::checks::{duplicate_ratio, outlier_ratio, run_check, Check, CheckParams, OutlierScope};
use dataval_core::dataset::{infer_feature_type, Dataset, FeatureColumn, FeatureType};
use dataval_core::report::{build_report, MitigationConfig, ReportInputs, SchemaOutcome, ValidationReport};
use dataval_core::schema::{infer_schema, suggest_schema_update, validate_schema, AnomalyKind, InferConfig, Schema};
use dataval_core::skew::{compare_batches, js_divergence, CompareConfig};
use dataval_core::statistics::{histogram, summarize};
use dataval_core::stream::{FieldValue, RawRecord, StreamConfig, StreamState, WindowCell};
use dataval_core::Targets;
use proptest::prelude::*;

fn int_col(name: String, n: usize) -> impl Strategy<Value = FeatureColumn> {
    prop::collection::vec(prop::option::weighted(0.85, -50i64..50), n).prop_map(move |v| FeatureColumn::int(name.clone(), v))
}

fn float_col(name: String, n: usize) -> impl Strategy<Value = FeatureColumn> {
    prop::collection::vec(prop::option::weighted(0.85, -1e3f64..1e3), n)
        .prop_map(move |v| FeatureColumn::float(name.clone(), v).unwrap())
}

fn str_col(name: String, n: usize) -> impl Strategy<Value = FeatureColumn> {
    prop::collection::vec(prop::option::weighted(0.85, "[a-e]{1,2}"), n).prop_map(move |v| FeatureColumn::string(name.clone(), v))
}

fn column(name: String, n: usize) -> BoxedStrategy<FeatureColumn> {
    prop_oneof![int_col(name.clone(), n), float_col(name.clone(), n), str_col(name, n)].boxed()
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (1usize..40, 1usize..6).prop_flat_map(|(n, k)| {
        (0..k)
            .map(|i| column(format!("c{i}"), n))
            .collect::<Vec<_>>()
            .prop_map(move |cols| Dataset::with_rows("b", n, cols).unwrap())
    })
}

/// Two batches with the same column names and types but independent values.
fn batch_pair() -> impl Strategy<Value = (Dataset, Dataset)> {
    (1usize..30, 1usize..30, prop::collection::vec(0u8..3, 1..5)).prop_flat_map(|(n1, n2, kinds)| {
        let make = move |n: usize| {
            kinds
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let name = format!("c{i}");
                    match k {
                        0 => int_col(name, n).boxed(),
                        1 => float_col(name, n).boxed(),
                        _ => str_col(name, n).boxed(),
                    }
                })
                .collect::<Vec<_>>()
        };
        let a = make(n1).prop_map(move |c| Dataset::with_rows("a", n1, c).unwrap());
        let b = (make(n2), int_col("extra".into(), n2)).prop_map(move |(mut c, e)| {
            c.push(e);
            Dataset::with_rows("b", n2, c).unwrap()
        });
        (a, b)
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Independent oracle: JSD = H(m) - (H(p) + H(q)) / 2.
fn jsd_oracle(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| (a + b) / 2.0).collect();
    entropy(&m) - (entropy(p) + entropy(q)) / 2.0
}

fn distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], len).prop_filter_map("all zero", |v| {
        let s: f64 = v.iter().sum();
        (s > 0.0).then(|| v.iter().map(|x| x / s).collect())
    })
}

fn records_of(ds: &Dataset) -> Vec<RawRecord> {
    (0..ds.n_rows())
        .map(|r| {
            let fields = ds
                .names()
                .zip(ds.row_text(r))
                .map(|(n, t)| (n.to_string(), t.map_or(FieldValue::Null, FieldValue::Text)))
                .collect::<BTreeMap<_, _>>();
            RawRecord::Fields(fields)
        })
        .collect()
}

proptest! {
    #[test]
    fn inferred_schema_accepts_its_own_batch(ds in dataset()) {
        let schema = infer_schema(&ds, &InferConfig::default());
        prop_assert!(validate_schema(&ds, &schema).is_empty());
        prop_assert!(schema.features.iter().all(|f| f.presence == dataval_core::schema::Presence::Required));
    }

    #[test]
    fn schema_json_round_trip(ds in dataset()) {
        let schema = infer_schema(&ds, &InferConfig::default());
        prop_assert_eq!(Schema::from_json(&schema.to_json()).unwrap(), schema);
    }

    #[test]
    fn revision_clears_fixable_anomalies((a, b) in batch_pair()) {
        let schema = infer_schema(&a, &InferConfig::default());
        let anomalies = validate_schema(&b, &schema);
        let fixable = [AnomalyKind::NewFeature, AnomalyKind::NotInMinMax, AnomalyKind::DomainViolation];
        match suggest_schema_update(&anomalies, &b, &schema) {
            None => prop_assert!(anomalies.is_empty()),
            Some(rev) => {
                prop_assert_eq!(rev.schema.version, schema.version + 1);
                let after = validate_schema(&b, &rev.schema);
                prop_assert!(after.iter().all(|x| !fixable.contains(&x.kind())), "{:?}", after);
            }
        }
    }

    #[test]
    fn type_inference_ignores_order(mut cells in prop::collection::vec(prop::option::of(prop_oneof!["-?[0-9]{1,3}", "[0-9]\\.[0-9]", "[a-z]"]), 0..20), seed in any::<u64>()) {
        let before = infer_feature_type(cells.iter().map(|c| c.as_deref()));
        let n = cells.len();
        if n > 1 {
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                cells.swap(i, (s >> 33) as usize % (i + 1));
            }
        }
        prop_assert_eq!(infer_feature_type(cells.iter().map(|c| c.as_deref())), before);
    }

    #[test]
    fn projection_composes(ds in dataset(), mask in any::<u8>()) {
        let all: Vec<String> = ds.names().map(String::from).collect();
        let outer: Vec<&String> = all.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0 || *i == 0).map(|(_, n)| n).collect();
        let inner: Vec<&String> = outer.iter().step_by(2).copied().collect();
        let twice = ds.project(&outer).unwrap().project(&inner).unwrap();
        prop_assert_eq!(twice, ds.project(&inner).unwrap());
    }

    #[test]
    fn summary_matches_naive_two_pass(ds in dataset()) {
        for col in ds.columns().iter().filter(|c| c.ftype().is_numeric()) {
            let xs: Vec<f64> = col.numeric().map(|(_, v)| v).collect();
            let s = summarize(col);
            prop_assert_eq!(s.count, col.len());
            prop_assert_eq!(s.null_count, col.len() - xs.len());
            if xs.is_empty() {
                continue;
            }
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let sd = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt();
            prop_assert!((s.mean.unwrap() - mean).abs() <= 1e-9 * (1.0 + mean.abs()));
            prop_assert!((s.stddev.unwrap() - sd).abs() <= 1e-9 * (1.0 + sd));
        }
    }

    #[test]
    fn histogram_mass_sums_to_one(ds in dataset(), bins in 1usize..20) {
        for col in ds.columns().iter().filter(|c| c.ftype().is_numeric()) {
            let h = histogram(col, bins, None).unwrap();
            let total = h.total_mass();
            if col.null_count() == col.len() {
                prop_assert_eq!(total, 0.0);
            } else {
                prop_assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jsd_properties((p, q) in (2usize..12).prop_flat_map(|n| (distribution(n), distribution(n)))) {
        let d = js_divergence(&p, &q).unwrap();
        prop_assert_eq!(d, js_divergence(&q, &p).unwrap());
        prop_assert_eq!(js_divergence(&p, &p).unwrap(), 0.0);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((d - jsd_oracle(&p, &q)).abs() < 1e-9);
    }

    #[test]
    fn doubled_batch_is_at_least_half_duplicates(ds in dataset()) {
        let n = ds.n_rows();
        let rows: Vec<usize> = (0..n).chain(0..n).collect();
        let doubled = ds.take_rows(&rows).unwrap();
        let r = duplicate_ratio::<&str>(&doubled, None).unwrap();
        prop_assert!(r.metric >= 0.5);
    }

    #[test]
    fn cell_outliers_are_translation_invariant(values in prop::collection::vec(prop::option::weighted(0.9, -500i64..500), 1..60), shift in -10_000i64..10_000) {
        let col = |delta: i64| FeatureColumn::float("x", values.iter().map(|v| v.map(|x| (x + delta) as f64)).collect()).unwrap();
        let a = Dataset::new("a", vec![col(0)]).unwrap();
        let b = Dataset::new("b", vec![col(shift)]).unwrap();
        let ra = outlier_ratio(&a, 1.5, OutlierScope::Cells).unwrap();
        let rb = outlier_ratio(&b, 1.5, OutlierScope::Cells).unwrap();
        prop_assert_eq!(ra.failed_rows, rb.failed_rows);
        prop_assert_eq!(ra.metric, rb.metric);
    }

    #[test]
    fn check_ratios_lie_in_unit_interval(ds in dataset(), k in 0.0f64..4.0, min_freq in 0.0f64..0.5) {
        let names: Vec<String> = ds.names().map(String::from).collect();
        let strings: Vec<String> = ds.columns().iter().filter(|c| c.ftype() == FeatureType::String).map(|c| c.name().to_string()).collect();
        let mut checks = vec![
            Check::new(Targets::Features(names.clone()), CheckParams::Completeness { threshold: 1.0 }, Default::default()).unwrap(),
            Check::new(Targets::Features(names), CheckParams::Uniqueness { threshold: 1.0 }, Default::default()).unwrap(),
            Check::duplicates(Targets::Dataset),
            Check::outliers(Targets::Dataset, k, OutlierScope::Rows).unwrap(),
            Check::outliers(Targets::Dataset, k, OutlierScope::Cells).unwrap(),
            Check::new(Targets::Dataset, CheckParams::ConstantFeature, Default::default()).unwrap(),
        ];
        if !strings.is_empty() {
            checks.push(Check::new(Targets::Features(strings), CheckParams::RareCategories { min_freq }, Default::default()).unwrap());
        }
        for c in &checks {
            let r = run_check(&ds, c).unwrap();
            prop_assert!((0.0..=1.0).contains(&r.metric), "{:?} {}", c.kind(), r.metric);
            prop_assert!(r.failed_rows.iter().all(|&row| row < ds.n_rows()));
            prop_assert!(r.failed_rows.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn stream_matches_batch(ds in dataset()) {
        let schema = infer_schema(&ds, &InferConfig::default());
        let mut state = StreamState::new(&schema, StreamConfig::default());
        for rec in records_of(&ds) {
            prop_assert!(state.validate_record(&rec, &schema).accepted);
        }
        for col in ds.columns().iter().filter(|c| c.ftype().is_numeric()) {
            let batch = summarize(col);
            let Some(mean) = batch.mean else { continue };
            let online = state.stats(col.name()).unwrap();
            prop_assert!(close(online.mean, mean, 1e-9) || (online.mean - mean).abs() < 1e-9, "{} vs {}", online.mean, mean);
            let sd = batch.stddev.unwrap();
            prop_assert!(close(online.stddev(), sd, 1e-9) || (online.stddev() - sd).abs() < 1e-9, "{} vs {}", online.stddev(), sd);
        }
    }

    #[test]
    fn window_holds_latest_values(ds in dataset(), w in 1usize..50) {
        let schema = infer_schema(&ds, &InferConfig::default());
        let cfg = StreamConfig { window: w, ..StreamConfig::default() };
        let mut state = StreamState::new(&schema, cfg);
        for rec in records_of(&ds) {
            state.validate_record(&rec, &schema);
        }
        let n = ds.n_rows();
        let keep = w.min(n);
        prop_assert_eq!(state.window_len(), keep);
        for col in ds.columns() {
            let window: Vec<WindowCell> = state.window(col.name()).unwrap().iter().cloned().collect();
            let expected: Vec<WindowCell> = (n - keep..n)
                .map(|r| match col.get(r) {
                    v if v.is_null() => WindowCell::Null,
                    v => match v.as_f64() {
                        Some(x) if col.ftype().is_numeric() => WindowCell::Num(x),
                        _ => WindowCell::Text(v.to_text().unwrap()),
                    },
                })
                .collect();
            prop_assert_eq!(window, expected);
        }
    }

    #[test]
    fn reports_round_trip_and_mitigations_resolve((a, b) in batch_pair(), dup_rows in prop::collection::vec(0usize..30, 0..10)) {
        let schema = infer_schema(&a, &InferConfig::default());
        let rows: Vec<usize> = (0..b.n_rows()).chain(dup_rows.into_iter().filter(|&r| r < b.n_rows())).collect();
        let b = b.take_rows(&rows).unwrap();
        let anomalies = validate_schema(&b, &schema);
        let revision = suggest_schema_update(&anomalies, &b, &schema);
        let mut checks: Vec<_> = Check::defaults().iter().map(|c| run_check(&b, c).unwrap()).collect();
        let names: Vec<String> = b.names().map(String::from).collect();
        let completeness = Check::new(Targets::Features(names), CheckParams::Completeness { threshold: 1.0 }, Default::default()).unwrap();
        checks.push(run_check(&b, &completeness).unwrap());
        let skew = compare_batches(&a, &b, &CompareConfig::default());
        let inputs = ReportInputs {
            batch_id: "b",
            schema: Some(SchemaOutcome {
                schema_version: schema.version,
                anomalies: &anomalies,
                revision: revision.as_ref(),
                total_cells: b.n_rows() * b.n_columns(),
            }),
            checks: &checks,
            skew: Some(&skew),
            stream: None,
        };
        let report = build_report(&inputs, &MitigationConfig::default());
        for m in &report.mitigations {
            prop_assert!(report.resolves(&m.trigger), "{:?}", m.trigger);
        }
        let failing = report.sections.iter().any(|s| s.has_failures());
        prop_assert_eq!(failing, !report.mitigations.is_empty());
        prop_assert_eq!(ValidationReport::from_json(&report.render_json()).unwrap(), report.clone());
        prop_assert_eq!(build_report(&inputs, &MitigationConfig::default()).render_text(), report.render_text());
    }
}

#[test]
fn jsd_hand_value_and_disjoint_support() {
    let d = js_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap();
    assert!((d - 0.311278).abs() < 1e-6, "{d}");
    assert!((d - jsd_oracle(&[0.5, 0.5], &[1.0, 0.0])).abs() < 1e-12);
    let disjoint = js_divergence(&[0.25, 0.75, 0.0, 0.0], &[0.0, 0.0, 0.5, 0.5]).unwrap();
    assert!((disjoint - 1.0).abs() < 1e-12);
}

#[test]
fn sqrt_jsd_triangle_inequality() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng, n: usize| {
        let v: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
        let s: f64 = v.iter().sum();
        if s == 0.0 {
            let mut u = vec![0.0; n];
            u[0] = 1.0;
            u
        } else {
            v.iter().map(|x| x / s).collect()
        }
    };
    for _ in 0..10_000 {
        let n = rng.random_range(2..10);
        let (p, q, r) = (draw(&mut rng, n), draw(&mut rng, n), draw(&mut rng, n));
        let d = |a: &[f64], b: &[f64]| js_divergence(a, b).unwrap().sqrt();
        assert!(d(&p, r.as_slice()) <= d(&p, &q) + d(&q, &r) + 1e-9);
    }
}

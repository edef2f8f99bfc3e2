use std::path::{Path, PathBuf};
use std::process::Command;

use modmove::cli::{
    run, AnalysisDocument, BenchReport, SuggestionDocument, BENCH_CSV_HEADER, EXIT_IO, EXIT_OK,
    EXIT_PARSE, EXIT_USAGE, EXIT_VALIDATION,
};
use modmove::ingest::load_facts;
use modmove::metrics::full_report;
use modmove::proponent::{
    compute_thresholds, suggest_all, Combine, Criterion, SuggestContext, ThresholdSource,
};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn modmove(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("modmove").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn ok(args: &[&str]) -> String {
    let (code, out, err) = modmove(args);
    assert_eq!(code, EXIT_OK, "{args:?}: {err}");
    out
}

fn generate_into(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["generate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    ok(&args);
    path
}

#[test]
fn analyze_single_class_has_every_section() {
    let out = ok(&["analyze", "--facts", &fixture("minimal.json")]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in [
        "schema_version",
        "system",
        "fan_in",
        "fan_out",
        "similarity",
        "lcom",
        "lcom_ck",
        "cbo",
        "lcom_degenerate",
        "workload",
        "warnings",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let doc: AnalysisDocument = serde_json::from_str(&out).unwrap();
    // increment and reset share the one attribute
    assert_eq!(doc.similarity, [(0, 1, 1.0)]);
    assert_eq!(doc.lcom, [0.0]);
    assert_eq!(doc.cbo, [0]);
    assert_eq!(doc.workload.n_total, 2 * 2 + 1 + 2 * (2 + 1));

    let text = r#"{"schema_version": "1", "classes": [{"id": 0, "name": "Solo",
        "attributes": [{"id": 0, "name": "a"}], "methods": [{"id": 0, "name": "f", "accesses": [0]}]}]}"#;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("solo.json");
    std::fs::write(&path, text).unwrap();
    let doc: AnalysisDocument =
        serde_json::from_str(&ok(&["analyze", "--facts", path.to_str().unwrap()])).unwrap();
    assert!(doc.similarity.is_empty());
    assert_eq!((doc.lcom.len(), doc.cbo.len(), doc.fan_in.len()), (1, 1, 1));
}

#[test]
fn engines_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let facts = generate_into(
        dir.path(),
        "g.json",
        &["--methods", "150", "--classes", "12", "--seed", "7"],
    );
    let facts = facts.to_str().unwrap();
    let seq = ok(&["analyze", "--facts", facts]);
    for workers in ["1", "2", "5"] {
        let par = ok(&[
            "analyze",
            "--facts",
            facts,
            "--engine",
            "parallel",
            "--workers",
            workers,
        ]);
        assert_eq!(par, seq);
        let s = ok(&[
            "suggest",
            "--facts",
            facts,
            "--engine",
            "parallel",
            "--workers",
            workers,
        ]);
        assert_eq!(s, ok(&["suggest", "--facts", facts]));
    }
    assert_eq!(ok(&["analyze", "--facts", facts]), seq);
}

#[test]
fn round_trip_of_report_documents() {
    let analysis = ok(&["analyze", "--facts", &fixture("misplaced.json")]);
    let doc: AnalysisDocument = serde_json::from_str(&analysis).unwrap();
    assert_eq!(modmove::canonical::to_string(&doc).unwrap(), analysis);

    let suggestions = ok(&["suggest", "--facts", &fixture("misplaced.json")]);
    let doc: SuggestionDocument = serde_json::from_str(&suggestions).unwrap();
    assert_eq!(modmove::canonical::to_string(&doc).unwrap(), suggestions);
    assert_eq!(doc.suggestions[0].method_name, "formatAddress");
    assert_eq!(doc.suggestions[0].destination_name, "Address");
}

#[test]
fn cohesive_system_suggests_nothing() {
    let out = ok(&["suggest", "--facts", &fixture("cohesive.json")]);
    let doc: SuggestionDocument = serde_json::from_str(&out).unwrap();
    assert!(doc.suggestions.is_empty());
    assert_eq!(doc.criteria, Criterion::ALL);
}

#[test]
fn intersection_of_disjoint_criteria() {
    let facts = fixture("coupling.json");
    let out = ok(&[
        "suggest",
        "--facts",
        &facts,
        "--criteria",
        "cohesion,coupling",
        "--combine",
        "intersection",
    ]);
    let doc: SuggestionDocument = serde_json::from_str(&out).unwrap();
    assert!(doc.suggestions.is_empty());
    assert_eq!(doc.combine, Combine::Intersection);

    let out = ok(&["suggest", "--facts", &facts, "--criteria", "coupling"]);
    let doc: SuggestionDocument = serde_json::from_str(&out).unwrap();
    assert_eq!(doc.suggestions.len(), 1);
    assert_eq!(doc.suggestions[0].method_name, "render");
}

#[test]
fn cli_agrees_with_library() {
    let dir = tempfile::tempdir().unwrap();
    let facts = generate_into(
        dir.path(),
        "g.json",
        &["--methods", "90", "--classes", "9", "--seed", "3"],
    );
    let loaded = load_facts(&facts).unwrap();
    let report = full_report(&loaded.model, &loaded.deps).unwrap();
    let t = compute_thresholds(&report, ThresholdSource::Mean);
    let ctx = SuggestContext::new(&loaded.model, &loaded.deps, &report, t);
    let expected = suggest_all(&ctx, &Criterion::ALL, Combine::Union).unwrap();

    let out = ok(&["suggest", "--facts", facts.to_str().unwrap()]);
    let doc: SuggestionDocument = serde_json::from_str(&out).unwrap();
    let got: Vec<_> = doc
        .suggestions
        .iter()
        .map(|r| r.suggestion.clone())
        .collect();
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(&expected) {
        assert_eq!(
            (g.method, g.origin, g.destination),
            (e.method, e.origin, e.destination)
        );
        assert_eq!(g.criteria, e.criteria);
        assert_eq!(g.effect.cbo_dest_after, e.effect.cbo_dest_after);
        // JSON floats carry 12 significant digits
        assert!((g.effect.lcom_dest_after - e.effect.lcom_dest_after).abs() < 1e-11);
    }
    assert!((doc.thresholds.cbo - t.cbo).abs() <= 1e-11 * t.cbo.abs());
}

#[test]
fn explicit_thresholds_are_reported() {
    let out = ok(&[
        "suggest",
        "--facts",
        &fixture("misplaced.json"),
        "--threshold-similarity",
        "0.9",
        "--threshold-lcom",
        "0.1",
    ]);
    let doc: SuggestionDocument = serde_json::from_str(&out).unwrap();
    assert_eq!(doc.thresholds.similarity, 0.9);
    assert_eq!(doc.thresholds.lcom, 0.1);
    assert_eq!(doc.thresholds.cbo, 0.5);
    assert!(doc
        .suggestions
        .iter()
        .all(|s| s.suggestion.criteria != [Criterion::Similarity]));
}

#[test]
fn generate_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate_into(dir.path(), "a.json", &["--methods", "10", "--classes", "2"]);
    let b = generate_into(dir.path(), "b.json", &["--methods", "10", "--classes", "2"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let out = ok(&["validate", "--facts", a.to_str().unwrap()]);
    assert!(out.starts_with("valid: 2 classes, 10 methods"), "{out}");

    let doc: AnalysisDocument =
        serde_json::from_str(&ok(&["analyze", "--facts", a.to_str().unwrap()])).unwrap();
    assert_eq!(doc.fan_in.len(), 10);
    assert_eq!(doc.lcom.len(), 2);
    assert_eq!(doc.workload.n_total, 2 * 10 + 45 + 2 * 2 * 11);

    let c = generate_into(
        dir.path(),
        "c.json",
        &["--methods", "10", "--classes", "2", "--seed", "43"],
    );
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn bench_rows_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench.json");
    let (code, _, err) = modmove(&[
        "bench",
        "--methods",
        "40,80",
        "--repeats",
        "1",
        "--workers",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(err.contains("core(s)"));
    let report: BenchReport =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 4);
    for r in &report.rows {
        assert_eq!(r.c, r.m / 10);
        assert_eq!(
            r.n_total,
            2 * r.m + r.m * (r.m - 1) / 2 + 2 * r.c * (r.m + 1)
        );
        assert!(r.wall_seconds >= 0.0 && r.speedup > 0.0);
    }
    assert_eq!(report.rows[0].engine, "sequential");
    assert_eq!(report.rows[0].speedup, 1.0);
    assert_eq!(
        (report.rows[1].engine.as_str(), report.rows[1].workers),
        ("parallel", 2)
    );

    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(BENCH_CSV_HEADER));
    assert_eq!(lines.count(), 4);
}

#[test]
fn text_formats() {
    let out = ok(&[
        "analyze",
        "--facts",
        &fixture("misplaced.json"),
        "--format",
        "text",
    ]);
    assert!(out.contains("Order") && out.contains("Address"), "{out}");
    let out = ok(&[
        "suggest",
        "--facts",
        &fixture("misplaced.json"),
        "--format",
        "text",
    ]);
    assert!(out.contains("formatAddress"), "{out}");
    assert!(out.contains("mean"), "{out}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"schema_version\": \"1\",\n \"classes\": [{]}").unwrap();
    let broken = broken.to_str().unwrap();

    let (code, _, err) = modmove(&["analyze", "--facts", broken]);
    assert_eq!(code, EXIT_PARSE);
    assert!(err.contains("line 2"), "{err}");
    assert_eq!(modmove(&["validate", "--facts", broken]).0, EXIT_PARSE);

    let (code, _, err) = modmove(&["validate", "--facts", &fixture("dangling.json")]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("2 violation(s)"), "{err}");
    assert_eq!(
        modmove(&["analyze", "--facts", &fixture("dangling.json")]).0,
        EXIT_VALIDATION
    );

    assert_eq!(
        modmove(&["analyze", "--facts", "/nonexistent/facts.json"]).0,
        EXIT_IO
    );
    let unwritable = [
        "analyze",
        "--facts",
        &fixture("minimal.json"),
        "--out",
        "/nonexistent/dir/out.json",
    ];
    assert_eq!(modmove(&unwritable).0, EXIT_IO);

    let minimal = fixture("minimal.json");
    for bad in [
        vec!["analyze"],
        vec!["analyze", "--facts", &minimal, "--bogus"],
        vec![
            "analyze",
            "--facts",
            &minimal,
            "--engine",
            "parallel",
            "--workers",
            "0",
        ],
        vec!["suggest", "--facts", &minimal, "--criteria", "speed"],
        vec!["suggest", "--facts", &minimal, "--threshold-lcom", "-1"],
        vec!["generate", "--intra-bias", "2"],
        vec!["frobnicate"],
    ] {
        assert_eq!(modmove(&bad).0, EXIT_USAGE, "{bad:?}");
    }
    assert_eq!(modmove(&["--help"]).0, EXIT_OK);
    assert_eq!(modmove(&["--version"]).0, EXIT_OK);
}

#[test]
fn binary_reports_exit_status() {
    let bin = env!("CARGO_BIN_EXE_modmove");
    let out = Command::new(bin)
        .args(["analyze", "--facts", &fixture("minimal.json")])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(serde_json::from_slice::<AnalysisDocument>(&out.stdout).is_ok());

    let out = Command::new(bin)
        .args(["validate", "--facts", &fixture("dangling.json")])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_VALIDATION));
    assert!(!out.stderr.is_empty());
}

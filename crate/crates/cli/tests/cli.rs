use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_periodicity"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", stderr(&out));
    out
}

fn ingest_and_trace(dir: &Path, subject: &str, extra: &[&str]) -> PathBuf {
    let input = fixture(&format!("events_{subject}.csv"));
    let series = format!("{subject}.series.csv");
    let trace = format!("{subject}.trace.csv");
    ok(
        dir,
        &[
            "ingest",
            "--kind",
            "events",
            "--input",
            input.to_str().unwrap(),
            "--out",
            &series,
        ],
    );
    let mut args = vec!["intensity", "--in", &series, "--out", &trace];
    args.extend_from_slice(extra);
    ok(dir, &args);
    dir.join(trace)
}

#[test]
fn help_documents_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(dir.path(), &["intensity", "--help"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for needle in ["24h", "7d", "1h", "0.01h", "3h", "15m"] {
        assert!(text.contains(needle), "help lacks {needle}");
    }
}

#[test]
fn stride_longer_than_window_is_a_flag_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "intensity",
            "--in",
            "x.csv",
            "--out",
            "y.csv",
            "--window",
            "7d",
            "--stride",
            "8d",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error kind=InvalidSpec message="));
}

#[test]
fn malformed_duration_is_a_flag_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "intensity",
            "--in",
            "x.csv",
            "--out",
            "y.csv",
            "--stride",
            "1 fortnight",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["intensity", "--in", "nope.csv", "--out", "y.csv"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).starts_with("error kind=IoError"));
}

#[test]
fn malformed_events_report_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.csv"), "timestamp,stream_id\nnot-a-time,kitchen\n").unwrap();
    let out = run(
        dir.path(),
        &["ingest", "--kind", "events", "--input", "bad.csv", "--out", "s.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("kind=ParseError"), "{err}");
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn short_accelerometer_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = std::fs::read_to_string(fixture("accel_calf.csv"))
        .unwrap()
        .lines()
        .take(50)
        .map(|l| format!("{l}\n"))
        .collect();
    std::fs::write(dir.path().join("short.csv"), text).unwrap();
    let out = run(
        dir.path(),
        &["ingest", "--kind", "accel", "--input", "short.csv", "--out", "s.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kind=TooFewRows"));
}

#[test]
fn accelerometer_ingest_warns_about_clamped_cutoff() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("accel_calf.csv");
    let out = ok(
        dir.path(),
        &[
            "ingest",
            "--kind",
            "accel",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "c.csv",
        ],
    );
    let err = stderr(&out);
    assert!(err.contains("warning: upper cutoff 20 Hz"), "{err}");
    let series = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    // Five minutes of samples averaged per minute.
    assert_eq!(series.lines().filter(|l| l.starts_with("2022-")).count(), 5);
}

#[test]
fn inverted_cutoffs_are_a_flag_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("accel_calf.csv");
    let out = run(
        dir.path(),
        &[
            "ingest",
            "--kind",
            "accel",
            "--input",
            input.to_str().unwrap(),
            "--low",
            "3",
            "--high",
            "1",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("kind=InvalidCutoffs"));
}

#[test]
fn flags_override_config_and_preset() {
    let dir = tempfile::tempdir().unwrap();
    let conf = fixture("run.conf");
    let conf = conf.to_str().unwrap();
    let a = ingest_and_trace(
        dir.path(),
        "p01",
        &["--config", conf, "--preset", "vle", "--stride", "2h"],
    );
    let text = std::fs::read_to_string(a).unwrap();
    assert!(text.contains("# stride = 7200s"), "{text}");
    let b = ingest_and_trace(dir.path(), "p02", &["--config", conf, "--preset", "calf"]);
    let text = std::fs::read_to_string(b).unwrap();
    assert!(text.contains("# stride = 900s"));
}

#[test]
fn bad_config_is_a_flag_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.conf"), "stride = 8d\nwindow_length = 7d\n").unwrap();
    let out = run(
        dir.path(),
        &["intensity", "--in", "x.csv", "--out", "y.csv", "--config", "bad.conf"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error kind=ConfigError"));
}

#[test]
fn normalized_trace_spans_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let trace = ingest_and_trace(dir.path(), "p03", &["--normalize"]);
    let values: Vec<f64> = std::fs::read_to_string(trace)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("2022-"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(!values.is_empty());
    assert_eq!(values.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
    assert_eq!(values.iter().copied().fold(f64::NEG_INFINITY, f64::max), 1.0);
}

#[test]
fn cohort_commands_produce_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for s in ["p01", "p02", "p03", "p04"] {
        ingest_and_trace(d, s, &[]);
    }
    let traces = ["p01.trace.csv", "p02.trace.csv", "p03.trace.csv", "p04.trace.csv"];
    let mut args = vec!["stack", "--out", "stack.csv", "--top-line", "top.csv", "--trace"];
    args.extend(traces);
    ok(d, &args);
    let matrix = std::fs::read_to_string(d.join("stack.csv")).unwrap();
    assert!(matrix.contains("center_iso8601,p01,p02,p03,p04"));
    assert!(std::fs::read_to_string(d.join("top.csv"))
        .unwrap()
        .starts_with("center_iso8601,top_line"));

    ok(
        d,
        &[
            "annotate",
            "--trace",
            "p02.trace.csv",
            "--band-width",
            "3d",
            "--out",
            "bands.csv",
        ],
    );
    let bands = std::fs::read_to_string(d.join("bands.csv")).unwrap();
    let labels: Vec<&str> = bands.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["red", "green", "yellow"]);

    let mut args = vec![
        "stability",
        "--groups",
        "2",
        "--rng-seed",
        "9",
        "--out",
        "stab.csv",
        "--trace",
    ];
    args.extend(traces);
    ok(d, &args);
    let first = std::fs::read_to_string(d.join("stab.csv")).unwrap();
    ok(d, &args);
    assert_eq!(first, std::fs::read_to_string(d.join("stab.csv")).unwrap());
    assert_eq!(first.lines().count(), 3);

    ok(
        d,
        &[
            "render",
            "--kind",
            "line",
            "--in",
            "p02.trace.csv",
            "--bands",
            "bands.csv",
            "--out",
            "l.svg",
        ],
    );
    ok(
        d,
        &["render", "--kind", "stacked", "--in", "stack.csv", "--out", "s.svg"],
    );
    let svg = std::fs::read_to_string(d.join("l.svg")).unwrap();
    assert_eq!(svg.matches("class=\"band ").count(), 3);
    assert!(std::fs::read_to_string(d.join("s.svg"))
        .unwrap()
        .contains("class=\"top-line\""));
}

#[test]
fn stability_needs_enough_subjects() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ingest_and_trace(d, "p01", &[]);
    ingest_and_trace(d, "p02", &[]);
    let out = run(
        d,
        &[
            "stability",
            "--groups",
            "2",
            "--out",
            "s.csv",
            "--trace",
            "p01.trace.csv",
            "p02.trace.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kind=TooFewSubjects"));
}

#[test]
fn stack_rejects_mixed_strides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ingest_and_trace(d, "p01", &[]);
    ingest_and_trace(d, "p02", &["--stride", "3h"]);
    let out = run(
        d,
        &["stack", "--out", "m.csv", "--trace", "p01.trace.csv", "p02.trace.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("kind=StrideMismatch"));
}

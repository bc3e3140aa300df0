use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mdiqkd::io::{output::csv_header, OutputRow};
use mdiqkd::sweep::{evaluate_point, ArmSplit};

fn mdiqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdiqkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn point_row(args: &[&str]) -> OutputRow {
    let mut full = vec!["point"];
    full.extend_from_slice(args);
    let out = mdiqkd(&full);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), csv_header());
    OutputRow::parse_csv_line(lines.next().unwrap()).unwrap()
}

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn point_forced_values() {
    let row = point_row(&["--nth", "0", "--sigma", "0", "--L", "0"]);
    assert_eq!(row.get("skr"), Some(2.0));
    let row = point_row(&["--nth", "0", "--sigma", "0", "--L", "50"]);
    assert!((row.get("skr").unwrap() - 0.2).abs() < 1e-15);
}

#[test]
fn point_matches_library() {
    let row = point_row(&["--nth", "0.1", "--sigma", "0.3", "--L", "10"]);
    let lib =
        OutputRow::from(&evaluate_point(10.0, 0.1, 0.3, 0.2, 1.0, ArmSplit::Symmetric).unwrap());
    for (a, b) in row.0.iter().zip(lib.0.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }

    let row = point_row(&[
        "--nth",
        "0.01",
        "--sigma",
        "0.1",
        "--arm-split",
        "a=20,b=5",
        "--alpha",
        "0.25",
        "--f",
        "1.2",
    ]);
    let split = ArmSplit::Explicit {
        a_km: 20.0,
        b_km: 5.0,
    };
    let lib = OutputRow::from(&evaluate_point(25.0, 0.01, 0.1, 0.25, 1.2, split).unwrap());
    assert_eq!(row, lib);
}

#[test]
fn point_human_format() {
    let out = mdiqkd(&[
        "point", "--nth", "0", "--sigma", "0", "--L", "0", "--format", "human",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 19);
    assert!(text
        .lines()
        .any(|l| l.split_whitespace().collect::<Vec<_>>() == ["skr", "2"]));
}

#[test]
fn exit_codes() {
    let bad_flag = mdiqkd(&["point", "--bogus"]);
    assert_eq!(bad_flag.status.code(), Some(1));
    let bad_value = mdiqkd(&["point", "--nth", "-0.5", "--sigma", "0", "--L", "1"]);
    assert_eq!(bad_value.status.code(), Some(1));
    assert!(stderr(&bad_value).contains("n_th"));
    let missing = mdiqkd(&[
        "sweep",
        "--config",
        "/nonexistent/x.conf",
        "--out",
        "/tmp/unused.csv",
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("/nonexistent/x.conf"));
    assert_eq!(mdiqkd(&["--help"]).status.code(), Some(0));
}

#[test]
fn empty_distance_list_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.conf");
    fs::write(&cfg, "distances_km =\n").unwrap();
    let out_path = dir.path().join("out.csv");
    let out = mdiqkd(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("distances_km"));
    assert!(!out_path.exists());
}

#[test]
fn unwritable_output_is_io_error() {
    let cfg = presets().join("figure3.conf");
    let out = mdiqkd(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets().join("figure3.conf");
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let path = dir.path().join(format!("run{i}.csv"));
        let out = mdiqkd(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        outputs.push(fs::read(&path).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 1 + 301 * 4);
    assert!(dir.path().join("run0.csv.meta").exists());
}

#[test]
fn figure2_preset_curves_decrease_with_distance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets().join("figure2.conf");
    let path = dir.path().join("fig2.csv");
    let out = mdiqkd(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
        "--pivot",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    assert!(summary.contains("rows: 1505"));
    assert!(summary.contains("cutoff n_th=0 sigma_theta=0.1: none within 300 km"));

    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    let curves = lines.next().unwrap().split(',').count() - 1;
    assert_eq!(curves, 5);
    let table: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(table.len(), 301);
    for c in 1..=curves {
        for w in table.windows(2) {
            assert!(w[1][c] <= w[0][c], "curve {c} rises at L={}", w[1][0]);
        }
    }
}

#[test]
fn validate_passes_and_reports_gaps() {
    let out = mdiqkd(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("compact=2 definitional=0.75"));
    assert!(!text.contains("[FAIL]"));
}

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freud-zeros"))
        .args(args)
        .env("FREUD_ZEROS_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn degree_one_has_one_expected_zero() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["expected-zeros", "--lambda", "2", "--c", "0.5", "--n", "1"],
    );
    assert!(o.status.success());
    let row = stdout(&o)
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(String::from)
        .collect::<Vec<_>>();
    assert_eq!(row, ["1", "1.000000", "1.000000"]);
}

#[test]
fn expected_ratio_column_is_monotone() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["expected-zeros", "--n", "25,50,100,200", "--format", "csv"],
    );
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert!(w[1][2] < w[0][2]);
    }
    assert!((rows[3][2] - 1.0 / 3f64.sqrt()).abs() <= 0.05);
}

#[test]
fn invalid_parameters_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    for args in [
        &["expected-zeros", "--lambda", "1", "--n", "5"][..],
        &["expected-zeros", "--c", "-1", "--n", "5"],
        &["expected-zeros", "--n", "0"],
        &["mc", "--n", "10", "--sigma", "0"],
        &["mc", "--n", "10", "--format", "csv"],
        &["universality", "--n", "20", "--x", "100"],
        &["intensity", "--n", "5", "--interval", "2,1"],
        &["recurrence", "--lambda", "3", "--method", "closed-form", "--n-max", "4"],
        &["no-such-command"],
    ] {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn every_subcommand_has_help() {
    let dir = TempDir::new().unwrap();
    for cmd in [
        "expected-zeros",
        "intensity",
        "ullman",
        "recurrence",
        "mc",
        "universality",
        "zeros",
    ] {
        let o = run(dir.path(), &[cmd, "--help"]);
        assert!(o.status.success(), "{cmd}");
        assert!(stdout(&o).contains("Usage"));
    }
}

#[test]
fn mc_json_is_reproducible_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let base = [
        "mc", "--lambda", "2", "--c", "0.5", "--n", "50", "--dist", "gaussian", "--trials", "2000", "--seed", "7",
    ];
    let a = run(dir.path(), &base);
    let b = run(dir.path(), &base);
    let mut threaded = base.to_vec();
    threaded.extend(["--threads", "3"]);
    let c = run(dir.path(), &threaded);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["trials"], 2000);
}

#[test]
fn ullman_grid_has_semicircle_centre() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), &["ullman", "--lambda", "2", "--grid", "5"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[2][0], 0.0);
    assert!((rows[2][1] - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(rows[2][2], 0.5);
    assert_eq!((rows[0][2], rows[4][2]), (0.0, 1.0));
}

#[test]
fn universality_prediction_at_origin() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        &["universality", "--lambda", "2", "--c", "0.5", "--n", "200", "--x", "0"],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let header: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split_whitespace().collect();
    let col = header.iter().position(|h| *h == "pred_r11").unwrap();
    assert_eq!(row[col], "3.289868");
}

#[test]
fn csv_output_round_trips_doubles() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("profile.csv");
    let o = run(
        dir.path(),
        &[
            "intensity",
            "--n",
            "30",
            "--points",
            "11",
            "--output",
            out.to_str().unwrap(),
        ],
    );
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,rho\n"));
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), field);
        }
    }
}

#[test]
fn recurrence_cache_is_used_and_validated() {
    let dir = TempDir::new().unwrap();
    let args = ["recurrence", "--lambda", "4", "--c", "1", "--n-max", "40"];
    let first = run(dir.path(), &args);
    assert!(first.status.success());
    let files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(files.len(), 1);

    // a tampered entry whose key no longer matches is recomputed, not trusted
    let mut entry: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    entry["key"]["n_max"] = 39.into();
    entry["table"]["offdiag"][0] = 123.0.into();
    std::fs::write(&files[0], entry.to_string()).unwrap();
    let second = run(dir.path(), &args);
    assert_eq!(first.stdout, second.stdout);

    // garbage is ignored too
    std::fs::write(&files[0], "not json").unwrap();
    assert_eq!(run(dir.path(), &args).stdout, first.stdout);

    let other = TempDir::new().unwrap();
    let mut uncached = args.to_vec();
    uncached.push("--no-cache");
    assert_eq!(run(other.path(), &uncached).stdout, first.stdout);
    assert_eq!(std::fs::read_dir(other.path()).unwrap().count(), 0);
}

#[test]
fn zeros_command_is_seeded() {
    let dir = TempDir::new().unwrap();
    let args = ["zeros", "--n", "25", "--seed", "3"];
    let a = run(dir.path(), &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, run(dir.path(), &args).stdout);
    let rows = csv_rows(&stdout(&a));
    assert_eq!(rows.len(), 25);
    let json = run(dir.path(), &["zeros", "--n", "25", "--seed", "3", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["coefficients"]["coeffs"].as_array().unwrap().len(), 26);
}

#[test]
fn measure_study_writes_histogram() {
    let dir = TempDir::new().unwrap();
    let hist = dir.path().join("hist.csv");
    let o = run(
        dir.path(),
        &[
            "mc",
            "--n",
            "30",
            "--trials",
            "20",
            "--study",
            "measure",
            "--histogram",
            hist.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&hist).unwrap();
    assert!(text.starts_with("re_bin,im_bin,count\n"));
    let total: u64 = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert!(total > 0 && total <= 600);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["study"], "zero_measure");
}

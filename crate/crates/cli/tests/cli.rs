//! End-to-end tests of the `scs` binary: exit codes, output formats, the
//! JSON round trip, and ingestion of panels shaped like the real missing-data
//! use case (around a hundred arms, short horizon, per-arm sample sizes from
//! a single observation up to fully observed).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scs_cli::csv_io::ingest_csv;
use scs_cli::emit::{from_json_file, to_json_string, TraceDocument};

fn scs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scs"))
}

fn run(args: &[&str]) -> Output {
    scs().args(args).output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

const SMALL_CSV: &str = "t,arm,value\n\
    1,a,5.0\n1,b,1.0\n2,a,5.5\n2,b,0.5\n3,a,4.8\n3,b,0.9\n";

/// Synthetic panel shaped like a country-by-year table: 101 arms over 32
/// ticks with heterogeneous per-arm counts (arm i observed in the first
/// `(7i mod 32) + 1` ticks), so some arms have a single observation and some
/// are fully observed.
fn panel_csv() -> String {
    let mut out = String::from("t,arm,value\n");
    for arm in 0..101u64 {
        let t_i = (7 * arm) % 32 + 1;
        for t in 1..=t_i {
            let value = arm as f64 / 10.0 + ((t * 13 + arm) % 7) as f64;
            out.push_str(&format!("{t},region_{arm:03},{value}\n"));
        }
    }
    out
}

// -- exit codes --

#[test]
fn exit_zero_on_success() {
    let out = run(&[
        "compare-levels",
        "--k",
        "50",
        "--m",
        "3",
        "--selected-size",
        "10",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("3.54609929078e-4"), "{stdout}");
    assert!(stdout.contains("3.00000000000e-3"), "{stdout}");
    assert!(stdout.contains("1.00000000000e-2"), "{stdout}");
    assert!(stdout.contains("regime: interior"), "{stdout}");
    assert!(
        stdout.contains("ordering: screening < bonferroni < psi"),
        "{stdout}"
    );
}

#[test]
fn exit_one_on_validation_error() {
    let out = run(&["compare-levels", "--k", "3", "--m", "3"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_one_on_bad_flags() {
    let out = run(&["screen", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_two_on_missing_input() {
    let out = run(&["screen", "--input", "/nonexistent/data.csv", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_one_on_duplicate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(
        dir.path(),
        "dup.csv",
        "t,arm,value\n1,a,1\n2,a,2\n1,a,3\n2,b,1\n",
    );
    let out = run(&["screen", "--input", csv.to_str().unwrap(), "--m", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_of(&out);
    assert!(err.contains(":4:") && err.contains("duplicate"), "{err}");
}

#[test]
fn exit_one_on_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "empty.csv", "t,arm,value\n");
    let out = run(&["screen", "--input", csv.to_str().unwrap(), "--m", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("no arms"));
}

// -- screen --

#[test]
fn screen_emits_deterministic_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "screen",
            "--input",
            csv.to_str().unwrap(),
            "--m",
            "1",
            "--alpha",
            "0.2",
            "--constructor",
            "missing-data",
            "--sigma2",
            "1.0",
            "--lambda",
            "0.5",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success(), "{}", stderr_of(&res));
    }
    let a = fs::read(&out_a).unwrap();
    let b = fs::read(&out_b).unwrap();
    assert_eq!(a, b, "same input must emit identical bytes");
}

#[test]
fn trace_round_trips_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let out = dir.path().join("trace.json");
    let res = run(&[
        "screen",
        "--input",
        csv.to_str().unwrap(),
        "--m",
        "1",
        "--constructor",
        "missing-data",
        "--sigma2",
        "1.0",
        "--lambda",
        "0.5",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr_of(&res));

    let doc: TraceDocument = from_json_file(&out).unwrap();
    assert_eq!(doc.labels, vec!["a", "b"]);
    assert_eq!(doc.records.len(), 4); // time 0 through 3
    for record in &doc.records {
        assert_eq!(record.bounds.len(), 2);
        assert_eq!(record.survivors, vec![0, 1]);
    }
    // Emit the parsed document again: serialized precision is a fixed point.
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(to_json_string(&doc).unwrap(), text.trim_end());
}

#[test]
fn screen_csv_table_shape() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let res = run(&[
        "screen",
        "--input",
        csv.to_str().unwrap(),
        "--m",
        "1",
        "--format",
        "csv",
    ]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    let mut lines = stdout.lines();
    assert_eq!(
        lines.next().unwrap(),
        "T,arm,lower,upper,center,selected,threshold"
    );
    // 4 records (T=0..3) x 2 arms.
    assert_eq!(lines.filter(|l| !l.is_empty()).count(), 8);
    assert!(stdout.contains("0,a,-inf,inf,nan,1,-inf"));
}

#[test]
fn screen_cross_checks_arm_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let out = run(&[
        "screen",
        "--input",
        csv.to_str().unwrap(),
        "--m",
        "1",
        "--k",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("--k says 5"));
}

#[test]
fn screen_panel_with_missing_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "panel.csv", &panel_csv());
    let out_path = dir.path().join("panel.json");
    let res = run(&[
        "screen",
        "--input",
        csv.to_str().unwrap(),
        "--m",
        "3",
        "--alpha",
        "0.1",
        "--constructor",
        "missing-data",
        "--sigma2",
        "25.0",
        "--lambda",
        "0.15",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr_of(&res));
    let doc: TraceDocument = from_json_file(&out_path).unwrap();
    assert_eq!(doc.labels.len(), 101);
    assert_eq!(doc.records.len(), 33);
    let last = doc.records.last().unwrap();
    assert!(last.survivors.len() >= 3);
    // Arms observed only at early ticks still carry finite bounds later.
    let arm_one_obs = doc.labels.iter().position(|l| l == "region_000").unwrap();
    assert!(last.bounds[arm_one_obs].lower.is_finite());
    let parsed = ingest_csv(&csv).unwrap();
    assert_eq!(parsed.stream.k, 101);
    assert_eq!(parsed.stream.len(), 32);
}

// -- psi --

#[test]
fn psi_reports_adjusted_and_screening_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let res = run(&[
        "psi",
        "--input",
        csv.to_str().unwrap(),
        "--m",
        "1",
        "--alpha",
        "0.2",
        "--constructor",
        "missing-data",
        "--sigma2",
        "1.0",
        "--lambda",
        "0.5",
        "--psi-method",
        "psi",
    ]);
    assert!(res.status.success(), "{}", stderr_of(&res));
    let stdout = String::from_utf8_lossy(&res.stdout);
    let doc: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    // The gap is wide enough that arm b is screened out by T=3, so the
    // adjusted level is alpha |S| / (2k) = 0.2/4 = 0.05, below the screening
    // level 0.1: the reported interval is wider than the screening one.
    assert_eq!(doc["report"]["method"], "psi");
    let level = doc["report"]["level"].as_f64().unwrap();
    assert!((level - 0.05).abs() < 1e-12, "level {level}");
    let screening_level = doc["report"]["screening_level"].as_f64().unwrap();
    assert!((screening_level - 0.1).abs() < 1e-12);
    let entries = doc["report"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    let e = &entries[0];
    assert_eq!(e["arm"], 0);
    let adj_lo = e["adjusted"]["lower"].as_f64().unwrap();
    let scr_lo = e["screening"]["lower"].as_f64().unwrap();
    let adj_hi = e["adjusted"]["upper"].as_f64().unwrap();
    let scr_hi = e["screening"]["upper"].as_f64().unwrap();
    assert!(adj_lo <= scr_lo && scr_hi <= adj_hi);
}

// -- config files and environment --

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let cfg = write_file(
        dir.path(),
        "screen.toml",
        "m = 1\nalpha = 0.2\nconstructor = \"missing-data\"\nsigma2 = 1.0\nlambda = 0.5\n",
    );
    let res = run(&[
        "screen",
        "--input",
        csv.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", stderr_of(&res));
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&res.stdout)).unwrap();
    assert_eq!(doc["config"]["m"], 1);
    assert_eq!(doc["config"]["constructor"]["kind"], "missing-data");

    // An explicit flag beats the file.
    let res = run(&[
        "screen",
        "--input",
        csv.to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "0.9",
    ]);
    assert!(res.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&String::from_utf8_lossy(&res.stdout)).unwrap();
    let lambda = doc["config"]["constructor"]["lambda"].as_f64().unwrap();
    assert!((lambda - 0.9).abs() < 1e-12);
}

#[test]
fn relative_output_lands_in_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "in.csv", SMALL_CSV);
    let out_dir = dir.path().join("results");
    let res = scs()
        .args([
            "screen",
            "--input",
            csv.to_str().unwrap(),
            "--m",
            "1",
            "--output",
            "run.json",
        ])
        .env("SCS_OUTPUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert!(res.status.success(), "{}", stderr_of(&res));
    assert!(out_dir.join("run.json").exists());
}

// -- simulate --

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let args = |seed: &str| {
        vec![
            "simulate".to_owned(),
            "--k".into(),
            "10".into(),
            "--m".into(),
            "2".into(),
            "--reps".into(),
            "5".into(),
            "--checkpoints".into(),
            "20,50".into(),
            "--seed".into(),
            seed.to_owned(),
        ]
    };
    let a = scs().args(args("3")).output().unwrap();
    let b = scs().args(args("3")).output().unwrap();
    let c = scs().args(args("4")).output().unwrap();
    assert!(a.status.success(), "{}", stderr_of(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn simulate_csv_has_checkpoint_rows() {
    let out = run(&[
        "simulate",
        "--k",
        "8",
        "--m",
        "2",
        "--reps",
        "3",
        "--checkpoints",
        "10,30",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,"));
    assert!(lines[2].starts_with("30,"));
}

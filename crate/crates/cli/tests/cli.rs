use std::path::Path;
use std::process::{Command, Output};

fn lanedrift(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lanedrift"))
        .args(args)
        .current_dir(dir)
        .env_remove("LANEDRIFT_CONFIG")
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("run lanedrift")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = lanedrift(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Synthetic 50-minute tour and a model calibrated from it.
fn calibrated(dir: &Path) {
    ok(
        dir,
        &[
            "synth",
            "--minutes",
            "50",
            "--seed",
            "3",
            "--out",
            "tour.csv",
            "--model-out",
            "truth.json",
        ],
    );
    ok(
        dir,
        &["calibrate", "--input", "tour.csv", "--out", "model.json"],
    );
}

#[test]
fn generate_row_counts_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    calibrated(d);
    ok(
        d,
        &[
            "generate",
            "--model",
            "model.json",
            "--x0",
            "-0.1",
            "--duration",
            "3600",
            "--seed",
            "5",
            "--out",
            "a.csv",
        ],
    );
    ok(
        d,
        &[
            "generate",
            "--model",
            "model.json",
            "--x0",
            "-0.1",
            "--duration",
            "3600",
            "--seed",
            "5",
            "--out",
            "b.csv",
        ],
    );
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read_to_string(d.join("b.csv")).unwrap());
    assert_eq!(a.lines().count(), 18_001);
    assert_eq!(a.lines().next(), Some("t,x"));

    let short = ok(
        d,
        &[
            "generate",
            "--model",
            "model.json",
            "--x0",
            "0",
            "--duration",
            "10",
        ],
    );
    assert_eq!(String::from_utf8(short.stdout).unwrap().lines().count(), 51);
}

#[test]
fn calibration_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    calibrated(d);
    let first = std::fs::read(d.join("model.json")).unwrap();
    ok(
        d,
        &["calibrate", "--input", "tour.csv", "--out", "model.json"],
    );
    assert_eq!(first, std::fs::read(d.join("model.json")).unwrap());
}

#[test]
fn argument_schema_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    calibrated(d);
    let bad_x0 = lanedrift(
        d,
        &[
            "generate",
            "--model",
            "model.json",
            "--x0",
            "0.7",
            "--duration",
            "10",
        ],
    );
    assert_eq!(bad_x0.status.code(), Some(2));

    let bad_mode = lanedrift(
        d,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--input",
            "tour.csv",
            "--modes",
            "bogus",
            "--out",
            "r",
        ],
    );
    assert_eq!(bad_mode.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&bad_mode.stderr);
    assert!(stderr.contains("shift, coarse, fine, full"), "{stderr}");

    std::fs::write(
        d.join("bad.csv"),
        "t,dist_left,dist_right,v_lon\n0,1,x,100\n",
    )
    .unwrap();
    let schema = lanedrift(d, &["calibrate", "--input", "bad.csv", "--out", "m.json"]);
    assert_eq!(schema.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&schema.stderr).contains("row 2, column `dist_right`"));

    std::fs::write(d.join("empty.csv"), "t,dist_left,dist_right,v_lon\n").unwrap();
    let empty = lanedrift(d, &["calibrate", "--input", "empty.csv", "--out", "m.json"]);
    assert_eq!(empty.status.code(), Some(4));
    assert!(!d.join("m.json").exists());
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--minutes",
            "30",
            "--seed",
            "1",
            "--out",
            "tour.csv",
        ],
    );
    std::fs::write(d.join("cfg.toml"), "knot_count = 4\nguard_steps = 3\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lanedrift"))
        .args([
            "calibrate",
            "--input",
            "tour.csv",
            "--out",
            "model.json",
            "--guard-steps",
            "5",
        ])
        .current_dir(d)
        .env("LANEDRIFT_CONFIG", "cfg.toml")
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("\"knot_count\":4"), "{stderr}");
    assert!(stderr.contains("\"guard_steps\":5"), "{stderr}");

    std::fs::write(d.join("typo.toml"), "knots = 4\n").unwrap();
    let typo = lanedrift(
        d,
        &[
            "calibrate",
            "--config",
            "typo.toml",
            "--input",
            "tour.csv",
            "--out",
            "m.json",
        ],
    );
    assert_eq!(typo.status.code(), Some(2));
}

#[test]
fn evaluate_writes_every_mode() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    calibrated(d);
    ok(
        d,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--input",
            "tour.csv",
            "--seed",
            "1",
            "--out",
            "rep",
        ],
    );
    for mode in ["shift", "coarse", "fine", "full"] {
        let json = std::fs::read_to_string(d.join(format!("rep/{mode}.json"))).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["report"]["snippet_count"], 300);
        assert_eq!(v["config"]["n_c"], 20);
        let csv = std::fs::read_to_string(d.join(format!("rep/{mode}_summary.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 21);
    }
    let first = std::fs::read(d.join("rep/full.json")).unwrap();
    ok(
        d,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--input",
            "tour.csv",
            "--seed",
            "1",
            "--out",
            "rep",
        ],
    );
    assert_eq!(first, std::fs::read(d.join("rep/full.json")).unwrap());
}

#[test]
fn full_mode_on_the_calibration_tour() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    calibrated(d);
    ok(
        d,
        &[
            "evaluate",
            "--model",
            "model.json",
            "--input",
            "tour.csv",
            "--modes",
            "full",
            "--seed",
            "1",
            "--out",
            "rep",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("rep/full.json")).unwrap()).unwrap();
    let metrics = v["report"]["metrics"].as_array().unwrap();
    let agreeing = metrics.iter().filter(|m| m["rejected"] == false).count();
    let rejected: Vec<&str> = metrics
        .iter()
        .filter(|m| m["rejected"] == true)
        .map(|m| m["metric"].as_str().unwrap())
        .collect();
    assert!(
        agreeing >= 8,
        "{agreeing} of 10 metrics agree; rejected {rejected:?}"
    );
}

#[test]
fn zero_fine_data_passes_the_shift_test_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // identity chain, zero kernel: a constant tour on a state center
    ok(
        d,
        &[
            "synth",
            "--family",
            "identity",
            "--kernel",
            "zero",
            "--minutes",
            "5",
            "--out",
            "flat.csv",
            "--model-out",
            "flat.json",
        ],
    );
    ok(
        d,
        &[
            "evaluate",
            "--model",
            "flat.json",
            "--input",
            "flat.csv",
            "--modes",
            "shift",
            "--out",
            "rep",
        ],
    );
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("rep/shift.json")).unwrap()).unwrap();
    assert!(v["report"]["metrics"]
        .as_array()
        .unwrap()
        .iter()
        .all(|m| m["ks_distance"] == 0.0));
}

#[test]
fn bench_reports_best_of_reps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "synth",
            "--minutes",
            "1",
            "--out",
            "t.csv",
            "--model-out",
            "m.json",
        ],
    );
    let out = ok(
        d,
        &["bench", "--model", "m.json", "--steps", "1", "--reps", "5"],
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let full = v["full_seconds"].as_array().unwrap();
    assert_eq!(full.len(), 5);
    let min = full
        .iter()
        .map(|x| x.as_f64().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(v["full_best"].as_f64().unwrap(), min);
    assert!(v["speedup"].as_f64().unwrap() > 0.0);
}

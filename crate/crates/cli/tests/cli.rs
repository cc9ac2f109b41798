use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn chancomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chancomp"))
        .args(args)
        .env_remove("CHANCOMP_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).expect("manifest written");
    serde_json::from_str(&text).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).expect("column exists");
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn identity_channel_estimate_is_zero() {
    let out = tempfile::tempdir().unwrap();
    let o = out.path().to_str().unwrap();
    let r = chancomp(&[
        "complexity",
        "--channel",
        data("id2.json").to_str().unwrap(),
        "--resource",
        data("pauli1.json").to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        o,
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(out.path().join("complexity.csv")).unwrap();
    assert_eq!(column(&csv, "lower"), vec!["0.0000000000000000e0"]);
    assert_eq!(column(&csv, "upper"), vec!["0.0000000000000000e0"]);
    assert_eq!(column(&csv, "claim"), vec!["complexity-interval"]);
    let m = manifest(out.path());
    assert_eq!(m["status"], "ok");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
    assert!(m["versions"]["chancomp_core"].is_string());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let r = chancomp(&["complexity", "--seed", "1", "--frobnicate"]);
    assert_eq!(r.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&r.stderr).contains("Usage"));
}

#[test]
fn seed_is_mandatory() {
    let r = chancomp(&["group-stats", "--group", "z3"]);
    assert_eq!(r.status.code(), Some(64));
}

#[test]
fn missing_input_is_a_validation_error_with_manifest() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&[
        "diamond",
        "--channel",
        "does-not-exist.json",
        "--seed",
        "1",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(2));
    let m = manifest(out.path());
    assert_eq!(m["status"], "error");
    assert_eq!(m["exit_code"], 2);
}

#[test]
fn zero_threads_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&["group-stats", "--group", "z3", "--seed", "1", "--threads", "0", "--out", out.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn thread_count_falls_back_to_environment() {
    let out = tempfile::tempdir().unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_chancomp"))
        .args(["group-stats", "--group", "s3", "--seed", "1", "--out", out.path().to_str().unwrap()])
        .env("CHANCOMP_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(manifest(out.path())["threads"], 1);
    let csv = std::fs::read_to_string(out.path().join("group_stats.csv")).unwrap();
    assert_eq!(column(&csv, "count"), vec!["1", "2", "2", "1"]);
}

#[test]
fn diamond_of_depolarizing_against_identity() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&[
        "diamond",
        "--channel",
        data("depolarizing2.json").to_str().unwrap(),
        "--seed",
        "1",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.path().join("diamond.csv")).unwrap();
    let v: f64 = column(&csv, "value")[0].parse().unwrap();
    assert!((v - 1.5).abs() < 1e-6);
}

#[test]
fn trajectory_upper_stays_below_time_and_is_reproducible() {
    let run = |dir: &Path| {
        chancomp(&[
            "trajectory",
            "--semigroup",
            "pauli-mixture",
            "--grid",
            "auto",
            "--points",
            "5",
            "--seed",
            "3",
            "--out",
            dir.to_str().unwrap(),
            "--plot",
        ])
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()).status.code(), Some(0));
    assert_eq!(run(b.path()).status.code(), Some(0));
    let csv_a = std::fs::read(a.path().join("trajectory.csv")).unwrap();
    let csv_b = std::fs::read(b.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    let text = String::from_utf8(csv_a).unwrap();
    let times = column(&text, "time");
    let uppers = column(&text, "upper");
    for (t, u) in times.iter().zip(&uppers) {
        assert!(u.parse::<f64>().unwrap() <= t.parse::<f64>().unwrap() + 1e-6);
    }
    assert!(column(&text, "claim").iter().all(|c| c == "semigroup-upper-line"));
    assert!(a.path().join("trajectory.svg").exists());
}

#[test]
fn pauli_verification_passes() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&["verify", "pauli", "--qubits", "2", "--samples", "500", "--seed", "7", "--out", out.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.path().join("verify_pauli.csv")).unwrap();
    let lo: f64 = column(&csv, "min_ratio")[0].parse().unwrap();
    let hi: f64 = column(&csv, "max_ratio")[0].parse().unwrap();
    assert!(lo >= 0.25 - 1e-9 && hi <= 0.75 + 1e-9);
}

#[test]
fn word_length_verification_for_cyclic_group() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&["verify", "word-length", "--group", "z3", "--seed", "2", "--out", out.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.path().join("verify_word_length.csv")).unwrap();
    let mean: f64 = column(&csv, "mean_length")[0].parse().unwrap();
    assert!((mean - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn clifford_verification_passes() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&["verify", "clifford", "--qubits", "1", "--samples", "50", "--seed", "4", "--out", out.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn dephasing_return_time() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&["return-time", "--semigroup", "dephasing", "--seed", "1", "--out", out.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.path().join("return_time.csv")).unwrap();
    let t: f64 = column(&csv, "time")[0].parse().unwrap();
    assert!((t - 2f64.ln() / 2.0).abs() < 1e-3);
}

#[test]
fn bad_group_name_is_a_validation_error() {
    let out = tempfile::tempdir().unwrap();
    let r = chancomp(&["group-stats", "--group", "q8", "--seed", "1", "--out", out.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}

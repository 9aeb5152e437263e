use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn algdiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algdiv")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn diagnose_white_noise() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = algdiv(&["--out", out, "diagnose", "--model", "white", "--M", "8"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!(v["result"]["alpha"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["result"]["kappa"].as_f64().unwrap() - 9.0).abs() < 1e-9);
    let file = read_json(&dir.path().join("diagnose.json"));
    assert_eq!(file, v);
    assert_eq!(file["seed"], 0);
    assert_eq!(file["config"]["model"], "white");
    let csv = fs::read_to_string(dir.path().join("diagnose.csv")).unwrap();
    assert!(csv.starts_with("# seed=0\n# config={"));
    assert!(csv.contains("\nk,eigenvalue\n"));
}

#[test]
fn seqgevp_on_edge_list_file() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("k4.edges");
    fs::write(&edges, "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    let o = algdiv(&["--out", dir.path().to_str().unwrap(), "seqgevp", "--graph", edges.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["final_order"], 24);
    assert!(dir.path().join("seqgevp.csv").exists());
}

#[test]
fn config_tau_reaches_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# partial recovery\ngraph = C6\ntau = 0.05\nseed = 4\n").unwrap();
    let o = algdiv(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "seqgevp"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["result"]["tau"], 0.05);
    assert_eq!(v["result"]["final_order"], 6);
    assert_eq!(v["result"]["termination"], "rejection");
    assert_eq!(v["seed"], 4);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"seed": 1, "model": "ar1", "rho": 0.5, "M": 4}"#).unwrap();
    let o = algdiv(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "9",
        "diagnose",
        "--rho",
        "0.9",
    ]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["config"]["rho"], 0.9);
    assert_eq!(v["result"]["M"], 4);
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    fs::write(&cfg, "").unwrap();
    let o = algdiv(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "mc-pi"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["seed"], 0);
    assert_eq!(v["config"]["mode"], "stratified");
    assert!(v["result"]["abs_error"].as_f64().unwrap() < 1e-3);
}

#[test]
fn config_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "seed = 1\n\ntau = quick\n").unwrap();
    let o = algdiv(&["--config", cfg.to_str().unwrap(), "diagnose"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    fs::write(&cfg, "bogus = 1\n").unwrap();
    let o = algdiv(&["--config", cfg.to_str().unwrap(), "diagnose"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key 'bogus'"));

    let o = algdiv(&["--config", dir.path().join("missing.cfg").to_str().unwrap(), "diagnose"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(code(&algdiv(&["frobnicate"])), 2);
    assert_eq!(code(&algdiv(&[])), 2);
    assert_eq!(code(&algdiv(&["--help"])), 0);
    assert_eq!(code(&algdiv(&["experiment", "no-such-experiment"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&algdiv(&["--out", out, "estimate", "--group", "Z4x4"])), 2);
    assert_eq!(code(&algdiv(&["--out", out, "mc-pi", "--n-total", "100", "--strata", "64"])), 2);
    assert_eq!(code(&algdiv(&["--out", out, "--trials", "10", "equalize"])), 2);
    let listed = algdiv(&["--out", out, "experiment", "list"]);
    assert_eq!(code(&listed), 0);
    assert_eq!(String::from_utf8_lossy(&listed.stdout).lines().count(), 16);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = algdiv(&[
        "--out",
        dir.path().to_str().unwrap(),
        "diagnose",
        "--model",
        "tones",
        "--freqs",
        "3",
        "--amps",
        "0",
        "--noise-var",
        "0",
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "--out",
        out,
        "--seed",
        "11",
        "--M",
        "16",
        "--snr-db",
        "-3",
        "estimate",
        "--model",
        "tones",
        "--L",
        "4",
        "--fast-path",
    ];
    assert_eq!(code(&algdiv(&args)), 0);
    let json1 = fs::read(dir.path().join("estimate.json")).unwrap();
    let csv1 = fs::read(dir.path().join("estimate.csv")).unwrap();
    assert_eq!(code(&algdiv(&args)), 0);
    assert_eq!(json1, fs::read(dir.path().join("estimate.json")).unwrap());
    assert_eq!(csv1, fs::read(dir.path().join("estimate.csv")).unwrap());
    // Timings go to a separate log.
    assert_eq!(fs::read_to_string(dir.path().join("run.log")).unwrap().lines().count(), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = algdiv(&[
            "--out",
            dir.path().to_str().unwrap(),
            "--threads",
            threads,
            "--trials",
            "40",
            "experiment",
            "converse",
        ]);
        assert_eq!(code(&o), 0);
        let v = read_json(&dir.path().join("experiment-converse.json"));
        let csv = fs::read_to_string(dir.path().join("experiment-converse.csv")).unwrap();
        let body: Vec<String> = csv.lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
        (v["result"].clone(), body)
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn equalize_reports_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let o = algdiv(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--trials",
        "50",
        "equalize",
        "--cost",
        "cma",
        "--const",
        "qpsk",
        "--symbols",
        "8000",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert!((v["result"]["predicted_deg"].as_f64().unwrap() - 25.98).abs() < 0.01);
    let s = v["result"]["std_deg"].as_f64().unwrap();
    assert!(s > 15.0 && s < 35.0, "{s}");
}

#[test]
fn match_selects_the_cyclic_group_for_tones() {
    let dir = tempfile::tempdir().unwrap();
    let o = algdiv(&[
        "--out",
        dir.path().to_str().unwrap(),
        "--M",
        "32",
        "--snr-db",
        "20",
        "match",
        "--model",
        "tones",
        "--L",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["result"]["selected"], "Z32");
    let csv = fs::read_to_string(dir.path().join("match.csv")).unwrap();
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(csv.as_bytes());
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["rank", "label", "order", "dcv"]);
}

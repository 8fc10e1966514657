use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nilcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilcurv")).args(args).output().expect("binary runs")
}

fn tmp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nilcurv-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

const H3: &str = r#"{"name":"h3","dim":3,"brackets":[{"i":1,"j":2,"k":3,"c":"1"}]}"#;

#[test]
fn h3_ricci_spectrum_from_file() {
    let p = tmp("h3.json", H3);
    let v = json_of(&nilcurv(&["ric", p.to_str().unwrap(), "--json"]));
    let eig: Vec<f64> = serde_json::from_value(v["result"]["ricci"]["eigenvalues"].clone()).unwrap();
    for (a, b) in eig.iter().zip([-0.5, -0.5, 0.5]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(v["config"]["command"], "ric");
    assert_eq!(v["config"]["seed"], 42);
    assert!(v["result"]["trace"]["tol"].is_number());
}

#[test]
fn abelian_ricci_is_zero() {
    let v = json_of(&nilcurv(&["ric", "catalog:abelian:n=4", "--json"]));
    let eig: Vec<f64> = serde_json::from_value(v["result"]["ricci"]["eigenvalues"].clone()).unwrap();
    assert_eq!(eig, vec![0.0; 4]);
}

#[test]
fn malformed_json_exits_2_and_names_key() {
    let p = tmp("bad.json", r#"{"name":"x","dim":3,"brackets":[{"i":1,"j":2,"c":"1"}]}"#);
    let out = nilcurv(&["ric", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"k\""));

    let p = tmp("bad_metric.json", r#"{"gramm":[[1]]}"#);
    let out = nilcurv(&["ric", "catalog:heisenberg:m=1", "--metric", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gram"));
}

#[test]
fn non_spd_metric_is_an_input_error() {
    let p = tmp("nonspd.json", r#"{"gram":[[1,0,0],[0,-1,0],[0,0,1]]}"#);
    let out = nilcurv(&["ric", "catalog:heisenberg:m=1", "--metric", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = nilcurv(&["ric", "catalog:heisenberg:m=1", "--bogus"]);
    assert!(!out.status.success());
}

#[test]
fn failing_check_exits_1() {
    // [X1,X2] = X3, [X1,X3] = X2 is not nilpotent.
    let p = tmp(
        "nonnil.json",
        r#"{"name":"x","dim":3,"brackets":[{"i":1,"j":2,"k":3,"c":"1"},{"i":1,"j":3,"k":2,"c":"1"}]}"#,
    );
    assert_eq!(nilcurv(&["check", p.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(nilcurv(&["check", "catalog:filiform4"]).status.code(), Some(0));
}

#[test]
fn catalog_emits_loadable_json() {
    let dir = std::env::temp_dir().join(format!("nilcurv-emit-{}", std::process::id()));
    let v = json_of(&nilcurv(&["catalog", "--filter", "two-step", "--emit-json", dir.to_str().unwrap(), "--json"]));
    let entries = v["result"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        let file = e["file"].as_str().unwrap();
        let out = json_of(&nilcurv(&["check", file, "--json"]));
        assert_eq!(out["result"]["two_step"], true);
    }
}

#[test]
fn signsets_reports_labels_and_witnesses() {
    let v = json_of(&nilcurv(&["signsets", "catalog:heisenberg:m=1", "--plane", "1,0,0;0,1,0", "--json"]));
    assert!(v["result"]["labels"].as_array().is_some());
    let v = json_of(&nilcurv(&["signsets", "catalog:filiform4", "--vector", "1,0,0,0", "--json"]));
    assert_eq!(v["result"]["labels"][0], "outside");
    assert_eq!(v["result"]["witnesses"].as_array().unwrap().len(), 2);
}

#[test]
fn deform_writes_trace_csv() {
    let spec = tmp(
        "spec.json",
        r#"{"metric":{"gram":[[1,0,0],[0,1,0],[0,0,1]]},"lambdas":[1,-1,-1],"frame":[[0,0,1],[1,0,0],[0,1,0]]}"#,
    );
    let csv = spec.with_file_name("trace.csv");
    let v = json_of(&nilcurv(&[
        "deform",
        "catalog:heisenberg:m=1",
        "--spec",
        spec.to_str().unwrap(),
        "--trace-csv",
        csv.to_str().unwrap(),
        "--json",
    ]));
    assert!(v["result"]["limit_check"]["error"].as_f64().unwrap() < 1e-6);
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("t,lambda_max_t,proj_distance"));
}

#[test]
fn classify_and_maxmin_run() {
    let v = json_of(&nilcurv(&["classify", "catalog:filiform4", "--samples", "20", "--json"]));
    assert_eq!(v["result"]["lemma6"]["Ok"]["class"], "filiform4");
    let v = json_of(&nilcurv(&["maxmin", "catalog:abelian:n=3", "--json"]));
    assert_eq!(v["result"]["ricci_identically_zero"], true);
}

#[test]
fn json_output_is_reproducible_and_out_flag_writes_file() {
    let a = nilcurv(&["maxmin", "catalog:heisenberg:m=2", "--samples", "30", "--seed", "9", "--json"]);
    let b = nilcurv(&["maxmin", "catalog:heisenberg:m=2", "--samples", "30", "--seed", "9", "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let out = std::env::temp_dir().join(format!("nilcurv-out-{}.json", std::process::id()));
    let r = nilcurv(&["ric", "catalog:heisenberg:m=1", "--json", "--out", out.to_str().unwrap()]);
    assert!(r.status.success() && r.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert!(v["config"]["out"].as_str().is_some());
}

#[test]
fn verify_paper_subsets_and_seed_independent_verdicts() {
    let verdicts = |seed: &str| -> Vec<(u64, bool)> {
        let v = json_of(&nilcurv(&["verify-paper", "--only", "spectra,deform,5,8", "--seed", seed, "--json"]));
        v["result"]["criteria"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| (c["id"].as_u64().unwrap(), c["passed"].as_bool().unwrap()))
            .collect()
    };
    let a = verdicts("7");
    assert_eq!(a.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 8]);
    assert_eq!(a, verdicts("8"));
    let out = nilcurv(&["verify-paper", "--only", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

//! End-to-end CLI behavior: exit codes, report shape, and JSON round-trips.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("vlab-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, contents: &str) -> PathBuf {
    let p = tmp(name);
    std::fs::write(&p, contents).unwrap();
    p
}

const F_CONST2: &str = r#"{"kind":"step","pieces":[{"set":[[0.0,1.0]],"value":2.0}]}"#;
const P_TWO_PIECE: &str = r#"{"kind":"step","pieces":[{"set":[[0.0,0.5]],"value":1.0},{"set":[[0.5,1.0]],"value":2.0}]}"#;

#[test]
fn norm_exact_two_piece_case() {
    let f = write("f2.json", F_CONST2);
    let p = write("p12.json", P_TWO_PIECE);
    let out = run(&["norm", f.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("norm = 2"), "stdout: {text}");
}

#[test]
fn missing_file_is_input_error() {
    let out = run(&["norm", "/nonexistent/f.json", "/nonexistent/p.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_json_is_input_error() {
    let f = write("bad.json", "{not json");
    let p = write("p-ok.json", P_TWO_PIECE);
    let out = run(&["norm", f.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_exponent_is_input_error() {
    // exponent below 1 is rejected
    let f = write("f-ok.json", F_CONST2);
    let p = write(
        "p-low.json",
        r#"{"kind":"step","pieces":[{"set":[[0.0,1.0]],"value":0.5}]}"#,
    );
    let out = run(&["norm", f.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_corpus_name_is_input_error() {
    let out = run(&["corpus", "no-such-entry"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn series_verdicts_and_exit_codes() {
    // convergent: n^{-2}
    let conv = write("conv.json", r#"["pow","n",-2.0]"#);
    let out = run(&["series", conv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("CONVERGES"));

    // divergent: 1/n
    let div = write("div.json", r#"["pow","n",-1.0]"#);
    let out = run(&["series", div.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("DIVERGES"));

    // borderline: n^{-1} * ln(n+1) diverges but matches no certificate shape
    let unk = write(
        "unknown.json",
        r#"["mul",["pow","n",-1.2],["ln",["add","n",1.0]]]"#,
    );
    let out = run(&["series", unk.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    let code = out.status.code();
    assert!(
        code == Some(0) || code == Some(2),
        "exit {code:?}, stdout {text}"
    );
}

#[test]
fn series_certificate_roundtrip_recheck() {
    let conv = write("rt-terms.json", r#"["pow","n",-2.0]"#);
    let report = tmp("rt-report.json");
    let out = run(&[
        "series",
        conv.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(doc["schema_version"], 1);
    let cert = &doc["results"]["certificate"];
    assert!(!cert.is_null());
    // feed the serialized certificate back for re-validation
    let cert_file = write("rt-cert.json", &serde_json::to_string(cert).unwrap());
    let out = run(&[
        "series",
        conv.to_str().unwrap(),
        "--recheck",
        cert_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("valid"));
}

#[test]
fn dss_check_exit_codes_follow_verdict() {
    let p_gap = write(
        "p-gap.json",
        r#"{"kind":"step","pieces":[{"set":[[0.0,1.0]],"value":2.0}]}"#,
    );
    let q_one = write(
        "q-one.json",
        r#"{"kind":"step","pieces":[{"set":[[0.0,1.0]],"value":1.0}]}"#,
    );
    // uniform gap: DSS, exit 0
    let out = run(&[
        "dss-check",
        "--p",
        p_gap.to_str().unwrap(),
        "--q",
        q_one.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("DSS"));

    // identity inclusion: NOT_DSS, exit 1
    let out = run(&[
        "dss-check",
        "--p",
        q_one.to_str().unwrap(),
        "--q",
        q_one.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("NOT_DSS"));

    // q > p somewhere: the inclusion precondition fails, input error
    let out = run(&[
        "dss-check",
        "--p",
        q_one.to_str().unwrap(),
        "--q",
        p_gap.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dss_report_recheck_roundtrip() {
    let p_gap = write(
        "rr-p.json",
        r#"{"kind":"step","pieces":[{"set":[[0.0,1.0]],"value":2.0}]}"#,
    );
    let q_one = write(
        "rr-q.json",
        r#"{"kind":"step","pieces":[{"set":[[0.0,1.0]],"value":1.0}]}"#,
    );
    let report = tmp("rr-report.json");
    let out = run(&[
        "dss-check",
        "--p",
        p_gap.to_str().unwrap(),
        "--q",
        q_one.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["dss-recheck", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    // tampered certificate must be rejected
    let mut doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    doc["results"]["verdict"]["certificate"] =
        serde_json::json!({"kind": "uniform_gap", "delta": 100.0});
    let tampered = write("rr-tampered.json", &serde_json::to_string(&doc).unwrap());
    let out = run(&["dss-recheck", tampered.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn psi_and_example24_emit_csv() {
    let sets = write("csv-sets.json", r#"[[[0.1,0.3]],[[0.5,0.8]]]"#);
    let p = write("csv-p.json", P_TWO_PIECE);
    let csv = tmp("psi.csv");
    let out = run(&[
        "psi",
        sets.to_str().unwrap(),
        p.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("set,s,psi\n"));
    assert!(text.lines().count() > 100);

    let csv = tmp("e24.csv");
    let out = run(&["example24", "--kmax", "8", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("K,lower_bound\n"));
    assert_eq!(text.lines().count(), 3); // header + K=4, K=8
}

#[test]
fn timing_field_only_with_env_flag() {
    let f = write("t-f.json", F_CONST2);
    let p = write("t-p.json", P_TWO_PIECE);
    let report = tmp("t-report.json");
    run(&[
        "norm",
        f.to_str().unwrap(),
        p.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert!(doc.get("wall_ms").is_none());

    let out = Command::new(env!("CARGO_BIN_EXE_vlab"))
        .args([
            "norm",
            f.to_str().unwrap(),
            p.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ])
        .env("VLAB_TIMING", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert!(doc.get("wall_ms").is_some());
}

#[test]
fn report_digests_inputs() {
    let f = write("d-f.json", F_CONST2);
    let p = write("d-p.json", P_TWO_PIECE);
    let report = tmp("d-report.json");
    run(&[
        "modular",
        f.to_str().unwrap(),
        p.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    let inputs = doc["inputs"].as_object().unwrap();
    assert_eq!(inputs.len(), 2);
    for digest in inputs.values() {
        assert_eq!(digest.as_str().unwrap().len(), 64);
    }
    assert!((doc["results"]["modular"]["value"].as_f64().unwrap() - 3.0).abs() < 1e-12);
}

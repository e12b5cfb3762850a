use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn pwcert(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pwcert")).current_dir(dir).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

fn entries(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn sampling_certificate_for_a_covering_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["certify", "sampling", "--body", "lp:2:1", "--dim", "2", "--nodes", "lattice:diag:1.5,1.5"]);
    let doc = json(&out);
    // covering radius 1.5/√2 ≈ 1.06 < π/2
    assert_eq!(code, 0, "{out}");
    assert_eq!(doc["verdict"], "proved");
    assert_eq!(doc["exit_code"], 0);
    assert!(doc["result"]["constant"].as_f64().unwrap() > 1.0);
}

#[test]
fn sampling_refuted_at_the_critical_spacing() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["sampling", "certify", "--body", "box:1", "--nodes", "lattice:scaled:pi"]);
    assert_eq!(code, 1, "{out}");
    assert_eq!(json(&out)["verdict"], "refuted");
}

#[test]
fn tiling_lattice_decision() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) =
        pwcert(dir.path(), &["lattice", "decide", "--spectrum", "box:pi", "--nodes", "lattice:identity", "--dim", "2"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["command"], "lattice decide");
}

#[test]
fn ingham_kernel_dump_goes_only_where_asked() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["ingham", "kernel", "--r", "6.3", "--dump", "kernel.csv"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(entries(dir.path()), vec!["kernel.csv"]);
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,K,t,K_hat"));
    assert!(lines.count() > 10);
}

#[test]
fn no_kernel_at_or_below_pi_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["ingham", "kernel", "--r", "3"]);
    assert_eq!(code, 3);
    let doc = json(&out);
    assert_eq!(doc["error"]["kind"], "no_kernel");
    assert!(entries(dir.path()).is_empty());
}

#[test]
fn unknown_commands_report_usage() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["frobnicate"]);
    assert_eq!(code, 3);
    assert_eq!(json(&out)["error"]["kind"], "usage");
    let (code, out) = pwcert(dir.path(), &["sampling", "certify", "--body", "lp:0.5", "--nodes", "lattice:identity"]);
    assert_eq!(code, 3);
    assert!(json(&out)["error"]["message"].is_string());
}

#[test]
fn help_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
}

#[test]
fn replay_reproduces_a_recorded_run() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) =
        pwcert(dir.path(), &["perturb", "run", "--dim", "1", "--depth", "1", "--epsilon", "0.2", "--seed", "3", "--out", "run.json"]);
    assert_eq!(code, 0);
    let recorded = json(&std::fs::read_to_string(dir.path().join("run.json")).unwrap());
    assert_eq!(recorded["seeds"]["shifts"], 3);
    let (code, out) = pwcert(dir.path(), &["replay", "run.json"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(json(&out)["result"]["identical"], true);
}

#[test]
fn replay_flags_a_tampered_document() {
    let dir = tempfile::tempdir().unwrap();
    pwcert(dir.path(), &["ingham", "constant", "--r", "4", "--delta", "4.5", "--out", "c.json"]);
    let path = dir.path().join("c.json");
    let mut doc = json(&std::fs::read_to_string(&path).unwrap());
    doc["result"]["tampered"] = Value::Bool(true);
    std::fs::write(&path, doc.to_string()).unwrap();
    let (code, out) = pwcert(dir.path(), &["replay", "c.json"]);
    assert_eq!(code, 1, "{out}");
    assert_eq!(json(&out)["result"]["identical"], false);
}

#[test]
fn csv_format_for_tabular_commands() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["--format", "csv", "perturb", "omega", "--dim", "1", "--level", "1"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().next(), Some("set,level,translates"));
    assert_eq!(out.lines().count(), 4);
    let (code, out) = pwcert(dir.path(), &["--format", "csv", "ingham", "bessel", "--order", "0"]);
    assert_eq!(code, 3);
    assert_eq!(json(&out)["error"]["kind"], "invalid_spec");
}

#[test]
fn concentration_ratios_admit_the_gaussian_couple() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out) = pwcert(dir.path(), &["concentration", "witness", "--kind", "gaussian", "--dim", "2", "--c", "2"]);
    assert_eq!(code, 0, "{out}");
    let (code, _) = pwcert(dir.path(), &["concentration", "witness", "--kind", "gaussian", "--dim", "2", "--c", "0.3"]);
    assert_eq!(code, 1);
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    json(&std::fs::read_to_string(path).unwrap())
}

fn keys_match(doc: &Value, schema: &Value) {
    let required: Vec<&str> = schema["required"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    let mut have: Vec<&str> = doc.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    let mut want = required.clone();
    have.sort();
    want.sort();
    assert_eq!(have, want);
}

#[test]
fn documents_follow_the_shipped_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = pwcert(dir.path(), &["ingham", "bessel", "--order", "0"]);
    keys_match(&json(&out), &schema("result_document.schema.json"));
    let (_, out) = pwcert(dir.path(), &["ingham", "kernel", "--r", "2"]);
    keys_match(&json(&out), &schema("error_document.schema.json"));
    let (_, out) = pwcert(dir.path(), &["concentration", "certify", "--spectrum", "box:1", "--space", "ball:4", "--nodes", "lattice:scaled:60", "--witness", "gaussian:1"]);
    let doc = json(&out);
    assert_eq!(doc["verdict"], "proved", "{out}");
    keys_match(&doc["result"], &schema("certificate.schema.json"));
}

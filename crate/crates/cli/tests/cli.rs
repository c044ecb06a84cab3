use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    root().join("data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specker-kit"))
        .args(args)
        .env_remove("SPECKER_KIT_LOG")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn assert_schema(schema: &str, doc: &Value) {
    let path = root().join("schemas").join(format!("{schema}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema} schema violations: {errors:#?}");
}

/// Runs a command, checks its exit code and validates the report.
fn report(args: &[&str], code: i32) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(code), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&out);
    let schema = if code == 1 || code == 2 { "error" } else { args[0] };
    assert_schema(schema, &doc);
    doc
}

#[test]
fn check_reports_nc_violation_of_os_box() {
    let doc = report(&["check", "--input", &data("v11.json"), "--eta0", "1/2"], 0);
    assert_eq!(doc["status"], "ok");
    assert_eq!(doc["results"]["nc"][0]["violations"], serde_json::json!(["R3"]));
    assert_eq!(doc["results"]["r_values"]["R3"], "3/1");
    assert_eq!(doc["results"]["ks_member"], false);
}

#[test]
fn check_accepts_six_parameters_and_several_predictabilities() {
    let doc = report(&["check", "--input", &data("facet_point.json"), "--eta0", "0,1/2,1"], 0);
    assert_eq!(doc["results"]["ks_member"], true);
    assert_eq!(doc["inputs"]["eta0"], serde_json::json!(["0/1", "1/2", "1/1"]));
    for entry in doc["results"]["nc"].as_array().unwrap() {
        assert_eq!(entry["violations"], serde_json::json!([]));
    }
}

#[test]
fn vertices_in_id_order() {
    let doc = report(&["vertices"], 0);
    let list = doc["results"]["vertices"].as_array().unwrap();
    assert_eq!(list.len(), 12);
    for (k, v) in list.iter().enumerate() {
        assert_eq!(v["id"], k);
    }
    assert_eq!(list[5]["correlation"]["pairs"]["12"][2], "1/1");
    assert_eq!(list[11]["ks_violations"], serde_json::json!(["R3"]));
}

#[test]
fn fine_on_indeterministic_vertex_is_infeasible() {
    let doc = report(&["fine", "--input", &data("v8.json")], 3);
    assert_eq!(doc["status"], "infeasible");
    assert_eq!(doc["results"]["search"]["status"], "infeasible");
    assert!(doc["results"]["p000_interval"].is_null());
}

#[test]
fn fine_on_uniform_point_builds_a_model() {
    let doc = report(&["fine", "--input", &data("uniform.json")], 0);
    assert_eq!(doc["results"]["search"]["status"], "feasible");
    assert_eq!(doc["results"]["model"]["deterministic"], true);
    assert!(doc["results"]["p000_interval"]["lo"].is_string());
}

#[test]
fn fine_on_general_scenario() {
    let doc = report(&["fine", "--input", &data("four_cycle.json")], 3);
    assert!(doc["results"].get("p000_interval").is_none());
}

#[test]
fn decompose_and_relabel() {
    let doc = report(&["decompose", "--input", &data("v8.json")], 0);
    assert_eq!(doc["results"]["support"], serde_json::json!([{"vertex": 8, "weight": "1/1"}]));
    assert_eq!(doc["results"]["extremal"], true);

    let doc = report(&["relabel", "--input", &data("v8.json"), "--measurement", "M3"], 0);
    let v11: Value = serde_json::from_str(&std::fs::read_to_string(data("v11.json")).unwrap()).unwrap();
    for pair in ["12", "23", "13"] {
        let got: Vec<&str> = doc["results"]["correlation"]["pairs"][pair]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        let want: Vec<String> = v11["pairs"][pair]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| match v.as_str().unwrap() {
                "0" => "0/1".to_string(),
                s => s.to_string(),
            })
            .collect();
        assert_eq!(got, want);
    }
    assert_eq!(doc["results"]["r_after"]["R3"], "3/1");
}

#[test]
fn ontmax_values() {
    let doc = report(&["ontmax", "--eta", "1/2", "--inequality", "R3"], 0);
    assert_eq!(doc["results"]["maxima"][0]["value"], "5/2");
    assert_eq!(doc["results"]["maxima"][0]["maximizers"].as_array().unwrap().len(), 6);
    let doc = report(&["ontmax", "--mixed", "1/2,1/2,1/2"], 0);
    assert_eq!(doc["results"]["mixed_maxima"][3]["value"], "5/2");
    let doc = report(&["ontmax", "--model", &data("os_box_model.json")], 0);
    assert_eq!(doc["results"]["model"]["factorizable"], false);
    assert_eq!(doc["results"]["model"]["r_values"]["R3"], "3/1");
}

#[test]
fn quantum_scan_json_and_csv() {
    let args = ["quantum-scan", "--eta-grid", "0.5:0.8:0.3", "--state", "optimize", "--grid", "8"];
    let doc = report(&args, 0);
    let rows = doc["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["violated"], true);
    assert_eq!(rows[1]["feasible"], false);

    let doc = report(&["quantum-scan", "--directions", &data("trine.json"), "--eta-grid", "0.5:0.5:0.1", "--state", "bloch:0,0,0"], 0);
    assert_eq!(doc["results"]["rows"][0]["violated"], false);
    let default = report(&["quantum-scan", "--eta-grid", "0.5:0.5:0.1"], 0);
    assert_eq!(default["inputs"]["state"], doc["inputs"]["state"]);

    let out = run(&["quantum-scan", "--eta-grid", "0.5:0.5:0.1", "--grid", "4", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("eta,feasible,r3,bound,violated"));
    assert!(lines.next().unwrap().starts_with("0.5,true,"));
}

#[test]
fn sample_is_reproducible() {
    let a = run(&["sample", "--seed", "42", "--count", "5"]);
    let b = run(&["sample", "--seed", "42", "--count", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_schema("sample", &json(&a));
    let c = run(&["sample", "--seed", "43", "--count", "5"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn reports_are_byte_identical() {
    for args in [
        vec!["check", "--input", &data("uniform.json"), "--eta0", "1/3"],
        vec!["quantum-scan", "--eta-grid", "0.3:0.6:0.3", "--state", "optimize", "--grid", "6"],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout);
    }
}

#[test]
fn malformed_json_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"pairs\": {\"12\": [\"1/4\",\n  oops]}}").unwrap();
    let doc = report(&["check", "--input", path.to_str().unwrap()], 2);
    let msg = doc["error"]["message"].as_str().unwrap();
    assert!(msg.contains("line 2 column"), "{msg}");
}

#[test]
fn validation_failures_exit_2() {
    let doc = report(&["check", "--input", &data("disturbing.json")], 2);
    assert_eq!(doc["error"]["kind"], "validation");
    let doc = report(&["relabel", "--input", &data("v8.json"), "--measurement", "M4"], 2);
    assert_eq!(doc["status"], "invalid");
    let doc = report(&["ontmax"], 2);
    assert_eq!(doc["command"], "ontmax");
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("Usage"));
    assert!(stderr.contains("input-correlation"), "{stderr}");
    let out = run(&["check"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schemas/"));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn load(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn validator(name: &str) -> jsonschema::Validator {
    jsonschema::validator_for(&load(&root().join("schema").join(name))).unwrap()
}

fn errors(v: &jsonschema::Validator, doc: &Value) -> Vec<String> {
    v.iter_errors(doc).map(|e| format!("{}: {e}", e.instance_path())).collect()
}

#[test]
fn shipped_configs_satisfy_the_config_schema() {
    let v = validator("run_config.schema.json");
    let mut seen = 0;
    for entry in fs::read_dir(root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let doc = load(&path);
        assert!(errors(&v, &doc).is_empty(), "{}: {:?}", path.display(), errors(&v, &doc));
        massmeter::config::RunConfig::from_path(&path).unwrap();
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn config_schema_rejects_what_the_parser_rejects() {
    let v = validator("run_config.schema.json");
    for text in [
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute", "lenght": 1}}"#,
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "sideways"}}"#,
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"}, "solver": {"n": "big"}}"#,
        r#"{"solver": {"n": 8}}"#,
    ] {
        let doc: Value = serde_json::from_str(text).unwrap();
        assert!(!v.is_valid(&doc), "{text}");
        assert_eq!(massmeter::config::RunConfig::from_json_str(text).unwrap_err().exit_code(), 2);
    }
}

#[test]
fn defaults_serialize_to_a_valid_config() {
    let v = validator("run_config.schema.json");
    let cfg = massmeter::config::RunConfig::from_json_str(
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"}}"#,
    )
    .unwrap();
    let doc = serde_json::to_value(&cfg).unwrap();
    assert!(errors(&v, &doc).is_empty(), "{:?}", errors(&v, &doc));
}

#[test]
fn verify_report_round_trips_through_the_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_massmeter"))
        .args(["verify", "--config"])
        .arg(root().join("configs/acute_verify.json"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = validator("report.schema.json");
    let doc = load(&out.join("report.json"));
    assert!(errors(&v, &doc).is_empty(), "{:?}", errors(&v, &doc));

    let report: massmeter::cli::VerifyReport = serde_json::from_value(doc.clone()).unwrap();
    let again = serde_json::to_value(&report).unwrap();
    assert_eq!(again, doc);
    assert!(errors(&v, &again).is_empty());

    let mut broken = doc;
    broken["rules"][0]["pass"] = Value::from("yes");
    assert!(!v.is_valid(&broken));
}

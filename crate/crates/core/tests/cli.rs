use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use massmeter::cli::{OrdersReport, SlopeReport, VerifyReport};

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_massmeter"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    exe().args([cmd, "--config"]).arg(config).arg("--out").arg(out).output().unwrap()
}

fn data_rows(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header_cols = lines.next().unwrap().split(',').count();
    lines
        .map(|l| {
            let cols: Vec<String> = l.split(',').map(str::to_string).collect();
            assert_eq!(cols.len(), header_cols, "{l}");
            cols
        })
        .collect()
}

const PI_TRIANGLE: &str = r#"{
  "domain": {"l": 3.141592653589793, "a1": 0, "a2": 3.141592653589793, "orientation": "acute"},
  "solver": {"element_order": 2, "n": 24, "k": 1, "tol": 1e-10, "seed": 7, "threads": 1, "max_steps": 500}
}"#;

#[test]
fn solve_writes_one_row_per_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pi.json", PI_TRIANGLE);
    let out = dir.path().join("out");
    let o = run("solve", &cfg, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let header = fs::read_to_string(out.join("eigenvalues.csv")).unwrap();
    assert!(header.starts_with("mode,lambda,h,residual\n"));
    let rows = data_rows(&out.join("eigenvalues.csv"));
    assert_eq!(rows.len(), 1);
    let lambda: f64 = rows[0][1].parse().unwrap();
    assert!((lambda - 5.0).abs() < 1e-3);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let gap = write_config(
        dir.path(),
        "gap.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute", "epsilon": 2.5,
            "gtilde": {"sine_coefficients": [1]}}}"#,
    );
    let o = run("solve", &gap, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon exceeds slope gap"));

    let unknown = write_config(
        dir.path(),
        "unknown.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"}, "solver": {"nn": 3}}"#,
    );
    let o = run("verify", &unknown, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nn"));

    let two_levels = write_config(
        dir.path(),
        "levels.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"}, "experiment": {"levels": [8, 16]}}"#,
    );
    assert_eq!(run("converge", &two_levels, &out).status.code(), Some(2));

    let potential = write_config(
        dir.path(),
        "pot.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute", "gtilde": {"sine_coefficients": [1]},
            "wtilde": {"terms": [{"x_power": 1, "y_power": 0, "coefficient": 1}]}}}"#,
    );
    let o = run("verify", &potential, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("potential requires unperturbed triangle"));

    let missing = dir.path().join("nope.json");
    assert_eq!(run("solve", &missing, &out).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn numerical_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "cap.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"},
            "solver": {"element_order": 2, "n": 16, "k": 4, "tol": 1e-10, "seed": 7, "threads": 1, "max_steps": 4}}"#,
    );
    let o = run("solve", &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("did not converge"));
}

#[test]
fn verify_writes_all_tables_and_a_parsable_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "obtuse.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "obtuse"},
            "solver": {"element_order": 2, "n": 96, "k": 3, "tol": 1e-10, "seed": 7, "threads": 1, "max_steps": 500}}"#,
    );
    let out = dir.path().join("out");
    assert!(run("verify", &cfg, &out).status.success());
    let side = data_rows(&out.join("side_mass.csv"));
    assert_eq!(side.len(), 3 * 3);
    let a_rows: Vec<_> = side.iter().filter(|r| r[1] == "A").collect();
    assert!(a_rows.iter().all(|r| r[3].parse::<f64>().unwrap() == 2.0));
    assert_eq!(data_rows(&out.join("rellich.csv")).len(), 3);
    let ids = data_rows(&out.join("identities.csv"));
    assert_eq!(ids.len(), 9);
    assert!(ids.iter().any(|r| r[1] == "IAo") && ids.iter().any(|r| r[1] == "ICo"));

    let text = fs::read_to_string(out.join("report.json")).unwrap();
    let report: VerifyReport = serde_json::from_str(&text).unwrap();
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), raw);
    assert!(report.identity_max_residual < report.tolerances.identity_relative);
    let names: Vec<&str> = report.rules.iter().map(|r| r.name.as_str()).collect();
    assert!(names.contains(&"identity_max_residual") && names.contains(&"rellich_r0"));
    assert!(report.rules.iter().all(|r| r.tolerance > 0.0));
}

#[test]
fn seed_and_thread_overrides_keep_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pi.json", PI_TRIANGLE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run("solve", &cfg, &a).status.success());
    let o = exe()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&b)
        .args(["--threads", "2", "--seed", "11"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let la: f64 = data_rows(&a.join("eigenvalues.csv"))[0][1].parse().unwrap();
    let lb: f64 = data_rows(&b.join("eigenvalues.csv"))[0][1].parse().unwrap();
    assert!((la - lb).abs() < 1e-9 * la);
}

#[test]
fn sweep_table_shape_and_floor_limited_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "flat.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"},
            "solver": {"element_order": 2, "n": 12, "k": 2, "tol": 1e-10, "seed": 7, "threads": 1, "max_steps": 500},
            "experiment": {"epsilons": [0.0125, 0.025, 0.05, 0.1]},
            "output": {"directory": "unused", "formats": ["csv", "json", "svg"]}}"#,
    );
    let out = dir.path().join("out");
    assert!(run("sweep", &cfg, &out).status.success());
    assert_eq!(data_rows(&out.join("sweep.csv")).len(), 4 * 2 * 3);
    let slope: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("slope.json")).unwrap()).unwrap();
    assert_eq!(slope["status"], "floor-limited");
    let parsed: SlopeReport = serde_json::from_value(slope).unwrap();
    assert!(parsed.exponent.is_none() && !parsed.pass);
    assert!(fs::read_to_string(out.join("sweep.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn sine_sweep_reports_a_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sine.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute", "gtilde": {"sine_coefficients": [1]}},
            "solver": {"element_order": 2, "n": 48, "k": 5, "tol": 1e-10, "seed": 7, "threads": 1, "max_steps": 500},
            "output": {"directory": "unused", "formats": ["json"]}}"#,
    );
    let out = dir.path().join("out");
    assert!(run("sweep", &cfg, &out).status.success());
    assert!(!out.join("sweep.csv").exists());
    let slope: SlopeReport = serde_json::from_str(&fs::read_to_string(out.join("slope.json")).unwrap()).unwrap();
    assert!(slope.exponent.unwrap() >= 0.8, "{slope:?}");
    assert!(slope.c_prime_bound.unwrap().passed());
}

#[test]
fn converge_reports_one_order_per_quantity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "conv.json",
        r#"{"domain": {"l": 1, "a1": 1, "a2": 1, "orientation": "acute"},
            "solver": {"element_order": 2, "n": 96, "k": 3, "tol": 1e-10, "seed": 7, "threads": 1, "max_steps": 500},
            "experiment": {"levels": [24, 48, 96]}}"#,
    );
    let out = dir.path().join("out");
    assert!(run("converge", &cfg, &out).status.success());
    assert_eq!(data_rows(&out.join("convergence.csv")).len(), 3);
    let orders: OrdersReport = serde_json::from_str(&fs::read_to_string(out.join("orders.json")).unwrap()).unwrap();
    let keys: Vec<&str> = orders.orders.keys().map(String::as_str).collect();
    assert_eq!(keys, ["eigenvalue", "identity", "rellich_r0", "side_mass"]);
    assert!((orders.orders["eigenvalue"].fitted.unwrap() - 4.0).abs() < 0.5);
    let err = orders.extrapolated_side_mass_error.unwrap();
    assert!(err < 1e-3, "{err}");
}

use std::path::PathBuf;
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn cmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmap"))
        .args(args)
        .output()
        .expect("cmap runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn check_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let cfg = config("quadratic_n0.json");
    let run = cmap(&[
        "check",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["sweep"]["seed"], 20261019);
    assert_eq!(report["tolerances"]["metric_comparison"], 1e-6);
    assert!(report["checks"].as_array().unwrap().len() >= 10);
    assert_eq!(report["summary"]["status"], "pass");
}

#[test]
fn corrupted_prepotential_fails_homogeneity() {
    let run = cmap(&[
        "check",
        "--config",
        config("corrupted_quadratic_n0.json").to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert_eq!(json(&run)["summary"]["first_failure"], "homogeneity");
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"model\": ").unwrap();
    assert_eq!(
        cmap(&["check", "--config", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        cmap(&["check", "--config", "/nonexistent/config.json"]).status.code(),
        Some(2)
    );
    assert_eq!(cmap(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn eval_origin_matrix() {
    let cfg = config("quadratic_n0.json");
    let run = cmap(&[
        "eval",
        "--config",
        cfg.to_str().unwrap(),
        "--point",
        r#"{"phi":0,"sigma":0,"A":[0],"B":[0]}"#,
        "--format",
        "json",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let out = json(&run);
    assert_eq!(
        out["fs_metric"],
        serde_json::json!([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 4.0, 0.0],
            [0.0, 0.0, 0.0, 0.25]
        ])
    );
    assert_eq!(out["basis"], serde_json::json!(["phi", "sigma", "A1", "B1"]));
}

#[test]
fn eval_both_routes_reports_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("point.json");
    std::fs::write(
        &point,
        r#"{"phi":0.1,"sigma":-0.3,"A":[0.2,0.1],"B":[0.0,-0.4],"Z":[[0.2,-0.1]]}"#,
    )
    .unwrap();
    let cfg = config("quadratic_n1.json");
    let run = cmap(&[
        "eval",
        "--config",
        cfg.to_str().unwrap(),
        "--point",
        point.to_str().unwrap(),
        "--route",
        "both",
    ]);
    assert_eq!(run.status.code(), Some(0));
    let out = json(&run);
    assert!(out["comparison"]["max_rel_dev"].as_f64().unwrap() < 1e-6);
    assert_eq!(out["twistor"]["metric"].as_array().unwrap().len(), 8);
}

#[test]
fn eval_outside_domain_names_positivity() {
    let cfg = config("quadratic_n1.json");
    let run = cmap(&[
        "eval",
        "--config",
        cfg.to_str().unwrap(),
        "--point",
        r#"{"A":[0,0],"B":[0,0],"Z":[[1.5,0]]}"#,
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert_eq!(json(&run)["verdict"], "positivity");
    assert!(String::from_utf8_lossy(&run.stderr).contains("positivity"));
}

#[test]
fn eval_malformed_point_exits_two() {
    let cfg = config("quadratic_n0.json");
    let run = cmap(&["eval", "--config", cfg.to_str().unwrap(), "--point", r#"{"phi": }"#]);
    assert_eq!(run.status.code(), Some(2));
}

#[test]
fn shipped_model_configs_pass() {
    for name in ["quadratic_n1.json", "stu.json"] {
        let run = cmap(&["check", "--config", config(name).to_str().unwrap()]);
        assert_eq!(
            run.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
}

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn rfbroker(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfbroker"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

#[test]
fn rank_prints_table_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = rfbroker(&[
        "rank",
        "--catalog",
        fixture("example_catalog.json").to_str().unwrap(),
        "--request",
        fixture("example_request.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let stdout = text(&o.stdout);
    let rows: Vec<&str> = stdout.lines().filter(|l| l.starts_with("RF")).collect();
    let order: Vec<&str> = rows
        .iter()
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert_eq!(order, ["RF1", "RF2", "RF3", "RF5", "RF4"]);
    assert!(rows[4].ends_with("no"));
    assert!(rows[0].contains("0.5754"));
    assert_eq!(stdout.lines().last(), Some("threshold EU = 0.2291"));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["selected_provider"], "RF1");
}

#[test]
fn negative_sensitivity_exits_2_naming_attribute() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text_req = std::fs::read_to_string(fixture("example_request.json"))
        .unwrap()
        .replace("\"cost\": 9", "\"cost\": -3");
    std::fs::write(&bad, text_req).unwrap();
    let o = rfbroker(&[
        "rank",
        "--catalog",
        fixture("example_catalog.json").to_str().unwrap(),
        "--request",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("sensitivities.cost"), "{err}");
    assert!(!err.contains("panicked"));
}

#[test]
fn missing_catalog_exits_1() {
    let o = rfbroker(&[
        "rank",
        "--catalog",
        "/nonexistent/cat.json",
        "--request",
        fixture("example_request.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stderr).contains("/nonexistent/cat.json"));
}

#[test]
fn validate_exit_codes() {
    assert_eq!(
        rfbroker(&["validate", fixture("example_catalog.json").to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(
        rfbroker(&["validate", fixture("example_request.json").to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("cat.json");
    std::fs::write(
        &bad,
        std::fs::read_to_string(fixture("example_catalog.json"))
            .unwrap()
            .replacen("0.75", "1.2", 1),
    )
    .unwrap();
    let o = rfbroker(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(
        err.contains("RF1") && err.contains("qos_offering.elasticity"),
        "{err}"
    );

    std::fs::write(&bad, "{").unwrap();
    assert_eq!(
        rfbroker(&["validate", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        rfbroker(&["validate", "/nonexistent.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn normalize_raw_costs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("norm.json");
    let o = rfbroker(&[
        "normalize",
        "--catalog",
        fixture("raw_cost.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["mode"], "normalized");
    assert_eq!(doc["providers"][0]["qos_offering"]["cost"], 1.0);
    assert_eq!(doc["providers"][1]["qos_offering"]["cost"], 0.0);
    // the output is itself a valid catalog
    assert_eq!(
        rfbroker(&["validate", out.to_str().unwrap()]).status.code(),
        Some(0)
    );
}

#[test]
fn serve_with_unreadable_config_exits_1() {
    let o = rfbroker(&["serve", "--config", "/nonexistent/broker.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn serve_with_invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broker.toml");
    std::fs::write(
        &cfg,
        "data_dir = \"/tmp\"\nuser_token = \"\"\nmonitor_token = \"m\"\n",
    )
    .unwrap();
    assert_eq!(
        rfbroker(&["serve", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn json_format_goes_to_stdout() {
    let o = rfbroker(&[
        "rank",
        "--catalog",
        fixture("example_catalog.json").to_str().unwrap(),
        "--request",
        fixture("example_request.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ranking"]["entries"].as_array().unwrap().len(), 5);
}

use std::path::{Path, PathBuf};

use signet_cli::{load_config, parse_config, CliError};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

const MINIMAL: &str = r#"{
  "nodes": {"count": 2},
  "edges": [{"id": 1, "tail": 1, "head": 2, "fn": {"kind": "linear", "w": 1.0}}]
}"#;

#[test]
fn minimal_config_is_valid() {
    let cfg = parse_config(MINIMAL, Path::new(".")).unwrap();
    assert_eq!(cfg.network.node_count(), 2);
    assert_eq!(cfg.network.edge_count(), 1);
    assert!(cfg.initial_state.is_none());
}

#[test]
fn shipped_power_sign_network_parses() {
    let cfg = load_config(&configs().join("power_sign_f3.json")).unwrap();
    assert_eq!(cfg.network.node_count(), 11);
    assert_eq!(cfg.network.edge_count(), 14);
    let eq = cfg.eqfun.unwrap();
    assert_eq!((eq.p, eq.q, eq.exclude_edges), (0, 3, vec![13]));
    assert_eq!(cfg.initial_state.unwrap().len(), 11);
}

#[test]
fn every_shipped_config_loads() {
    let mut count = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 10);
}

fn expect_validation(text: &str, needle: &str) {
    match parse_config(text, Path::new(".")) {
        Err(CliError::Validation(msg)) => assert!(msg.contains(needle), "{msg}"),
        other => panic!("expected validation error, got {other:?}"),
    }
}

#[test]
fn node_out_of_range() {
    let text = r#"{
      "nodes": {"count": 11},
      "edges": [{"id": 1, "tail": 1, "head": 12, "fn": {"kind": "linear", "w": 1.0}}]
    }"#;
    expect_validation(text, "node 12 out of range");
}

#[test]
fn bad_parameters_and_dimensions() {
    expect_validation(
        r#"{"nodes": {"count": 2}, "edges": [{"id": 1, "tail": 1, "head": 2, "fn": {"kind": "power_sign", "w": 1, "alpha": 2}}]}"#,
        "alpha",
    );
    expect_validation(
        r#"{"nodes": {"count": 2}, "edges": [{"id": 1, "tail": 1, "head": 2, "fn": {"kind": "linear", "w": 1}}], "initial_state": [1, 2, 3]}"#,
        "initial_state",
    );
    expect_validation(
        r#"{"nodes": {"count": 3}, "edges": [{"id": 1, "tail": 1, "head": 2, "fn": {"kind": "linear", "w": 1}}]}"#,
        "connected",
    );
    expect_validation(
        r#"{"nodes": {"count": 2}, "edges": [{"id": 2, "tail": 1, "head": 2, "fn": {"kind": "linear", "w": 1}}]}"#,
        "id 2",
    );
}

#[test]
fn unknown_keys_are_parse_errors() {
    let text = r#"{"nodes": {"count": 2, "colour": "red"}, "edges": []}"#;
    assert!(matches!(
        parse_config(text, Path::new(".")),
        Err(CliError::Parse(_))
    ));
    let text = r#"{"nodes": {"count": 2}, "edges": [{"id": 1, "tail": 1, "head": 2, "fn": {"kind": "linear", "w": 1, "x": 0}}]}"#;
    assert!(matches!(
        parse_config(text, Path::new(".")),
        Err(CliError::Parse(_))
    ));
}

#[test]
fn malformed_json_reports_line() {
    let err =
        parse_config("{\n  \"nodes\": {\"count\": 2},\n  oops\n}", Path::new(".")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("line 3"), "{err}");
}

#[test]
fn node_dynamics_and_nested_functions() {
    let text = r#"{
      "nodes": {"count": 3, "dynamics": [
        {"node": 2, "kind": "sign_power", "c": 2.0, "beta": 0.5},
        {"node": 3, "kind": "saturating", "c": 1.0, "s": 4.0}
      ]},
      "edges": [
        {"id": 2, "tail": 2, "head": 3, "fn": {"kind": "negated", "inner": {"kind": "dead_zone", "w": 1, "band": 0.5}}},
        {"id": 1, "tail": 1, "head": 2, "fn": {"kind": "sum", "terms": [
          {"kind": "linear", "w": 0.5},
          {"kind": "table", "points": [[-1, -1], [0, 0], [1, 2]], "extrapolation": "hold"}
        ]}}
      ]
    }"#;
    let cfg = parse_config(text, Path::new(".")).unwrap();
    assert!(cfg.network.node_dynamics()[0].is_identity());
    assert!(!cfg.network.node_dynamics()[1].is_identity());
    let f = &cfg.network.edge_functions()[0];
    assert_eq!(f.eval(5.0), 2.5 + 2.0);
    assert_eq!(cfg.network.edge_functions()[1].eval(1.5), -1.0);
    assert_eq!(cfg.network.graph().edges()[1].tail, 1);
}

#[test]
fn missing_table_file_is_a_validation_error() {
    let text = r#"{"nodes": {"count": 2}, "edges": [{"id": 1, "tail": 1, "head": 2, "fn": {"kind": "table", "csv": "nope.csv"}}]}"#;
    expect_validation(text, "nope.csv");
}

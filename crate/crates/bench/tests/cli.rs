use std::path::PathBuf;
use std::process::{Command, Output};

fn regenloc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regenloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn five_node() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/five_node.json")
        .display()
        .to_string()
}

#[test]
fn solve_reports_method() {
    let out = regenloc(&["solve", "--method", "dwc", "--instance", &five_node()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["method"], "DWC");
    assert!(json["placement"].as_array().is_some());
}

#[test]
fn generate_then_solve_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let graph = dir.path().join("graph.json");
    let inst_s = inst.to_str().unwrap();
    let out = regenloc(&["generate", "--n", "10", "--seed", "3", "--out", inst_s]);
    assert!(out.status.success());
    for method in ["dwc", "rsb", "rdb", "ccg", "bdc", "iro", "hsl"] {
        let out = regenloc(&[
            "solve",
            "--method",
            method,
            "--instance",
            inst_s,
            "--dump-graph",
            graph.to_str().unwrap(),
        ]);
        let code = out.status.code().unwrap();
        assert!(
            code == 0 || code == 1,
            "{method}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        if code == 0 {
            let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
            assert_eq!(json["method"].as_str().unwrap(), method.to_uppercase());
            let g: serde_json::Value =
                serde_json::from_slice(&std::fs::read(&graph).unwrap()).unwrap();
            assert_eq!(g["n"], 10);
        }
    }
}

#[test]
fn experiment_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "custom", "n_values": [8, 10], "gamma_e": [1], "gamma_v": [1], "instances": 3, "methods": ["dwc", "rsb", "rdb"], "master_seed": 11}"#,
    )
    .unwrap();
    let out = regenloc(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let results = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 3 * 3);
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("results.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["scale"], 1.0);

    let out = regenloc(&[
        "profile",
        "--in",
        dir.path().join("results.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("solver,tau,k"));
    for line in text.lines().skip(1) {
        let k: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&k));
    }
}

#[test]
fn hsl_prints_a_trace() {
    let out = regenloc(&["hsl", "--instance", &five_node(), "--eta-d", "0.15"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,loss,placement,changed"));
    assert!(text.lines().count() >= 3);
}

#[test]
fn exit_codes() {
    assert_eq!(regenloc(&["solve", "--bogus"]).status.code(), Some(2));
    assert_eq!(regenloc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        regenloc(&["solve", "--method", "lp", "--instance", &five_node()])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"meta\": 3}").unwrap();
    assert_eq!(
        regenloc(&[
            "solve",
            "--method",
            "dwc",
            "--instance",
            bad.to_str().unwrap()
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        regenloc(&[
            "solve",
            "--method",
            "dwc",
            "--instance",
            "/nonexistent.json"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(regenloc(&["--help"]).status.code(), Some(0));
}

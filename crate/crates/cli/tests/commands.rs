use std::path::{Path, PathBuf};

use choquet_probit::config::RunConfig;
use choquet_probit::error::exit;
use choquet_probit::report::{AnalysisDocument, ResultDocument};
use serde_json::Value;

fn run(args: &[&str]) -> i32 {
    let mut full = vec!["choquet-probit"];
    full.extend_from_slice(args);
    choquet_probit::run(full)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A small configuration in `dir`: 150 individuals, 40 draws, 2 replications.
fn small_config(dir: &Path) -> PathBuf {
    let mut cfg = RunConfig::template().unwrap();
    cfg.optimizer.draws.n_draws = 40;
    cfg.data = Some(choquet_probit::config::DataSection {
        path: PathBuf::from("sim/dataset.csv"),
    });
    cfg.analyze.result = Some(PathBuf::from("est/result.json"));
    let dgp = cfg.dgp.as_mut().unwrap();
    dgp.n_individuals = 150;
    dgp.replications = 2;
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path
}

#[test]
fn init_writes_a_loadable_template_and_refuses_to_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    assert_eq!(run(&["init", "--config", s(&path)]), exit::OK);
    let cfg = RunConfig::load(&path).unwrap();
    assert_eq!(cfg.dgp.unwrap().n_individuals, 1500);
    assert_ne!(run(&["init", "--config", s(&path)]), exit::OK);
    assert_eq!(run(&["init", "--config", s(&path), "--force"]), exit::OK);
}

#[test]
fn pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = small_config(root);
    let cfg = s(&config);

    assert_eq!(run(&["simulate", "--config", cfg, "--out", s(&root.join("sim"))]), exit::OK);
    for f in ["dataset.csv", "truth.json", "metadata.json"] {
        assert!(root.join("sim").join(f).is_file(), "{f}");
    }

    let code = run(&["estimate", "--config", cfg, "--out", s(&root.join("est"))]);
    assert!(code == exit::OK || code == exit::NOT_CONVERGED, "{code}");
    let doc: ResultDocument =
        serde_json::from_str(&std::fs::read_to_string(root.join("est/result.json")).unwrap()).unwrap();
    assert_eq!(doc.parameters.len(), doc.estimate.theta.len());
    let shapley: f64 = doc.capacities[0].shapley.iter().sum();
    assert!((shapley - 1.0).abs() < 1e-6);
    assert!(std::fs::read_to_string(root.join("est/report.txt")).unwrap().contains("x1"));

    let code = run(&["analyze", "--config", cfg, "--data", s(&root.join("sim/dataset.csv")), "--out", s(&root.join("an"))]);
    assert_eq!(code, exit::OK);
    let an: AnalysisDocument =
        serde_json::from_str(&std::fs::read_to_string(root.join("an/analysis.json")).unwrap()).unwrap();
    assert_eq!(an.marginal_effects.len(), 1);
    assert!((an.shapley_sums[0] - 1.0).abs() < 1e-6);

    let code = run(&["montecarlo", "--config", cfg, "--out", s(&root.join("mc")), "--draws", "30"]);
    assert!(code == exit::OK || code == exit::NOT_CONVERGED, "{code}");
    let mc: Value = serde_json::from_str(&std::fs::read_to_string(root.join("mc/montecarlo.json")).unwrap()).unwrap();
    assert_eq!(mc["replications"], 2);
    assert!(root.join("mc/montecarlo.txt").is_file());
}

#[test]
fn labeled_capacity_json_keys_subsets() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = small_config(root);
    assert_eq!(run(&["simulate", "--config", s(&config), "--out", s(&root.join("sim"))]), exit::OK);
    let code = run(&["estimate", "--config", s(&config), "--out", s(&root.join("est")), "--draws", "20"]);
    assert!(code == exit::OK || code == exit::NOT_CONVERGED);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(root.join("est/result.json")).unwrap()).unwrap();
    let cap = v["capacities"][0]["capacity"].as_object().unwrap();
    assert_eq!(cap.len(), 16);
    assert_eq!(cap[""], 0.0);
    assert!((cap["1,2,3,4"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn config_errors_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let missing = root.join("nope.toml");
    assert_eq!(run(&["estimate", "--config", s(&missing)]), exit::CONFIG);
    let bad = root.join("bad.toml");
    std::fs::write(&bad, "[optimizer]\nmax_iterations = \"many\"\n").unwrap();
    assert_eq!(run(&["estimate", "--config", s(&bad)]), exit::CONFIG);
    let unknown = root.join("unknown.toml");
    std::fs::write(&unknown, "[error]\nkind = \"iid\"\nbogus = 1\n").unwrap();
    assert_eq!(run(&["estimate", "--config", s(&unknown)]), exit::CONFIG);
    let config = small_config(root);
    assert_eq!(run(&["--threads", "0", "estimate", "--config", s(&config)]), exit::CONFIG);
    assert_eq!(run(&["estimate", "--config", s(&config), "--draws", "0"]), exit::CONFIG);
    assert_eq!(run(&["frobnicate"]), exit::CONFIG);
}

#[test]
fn data_errors_exit_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = small_config(root);
    let bad = root.join("bad.csv");
    std::fs::write(&bad, "individual_id,task_id,alt_id,chosen,x1,x2,x3,x4\n1,1,1,0,1,2,3,4\n").unwrap();
    assert_eq!(run(&["estimate", "--config", s(&config), "--data", s(&bad)]), exit::DATA);
    let wrong_columns = root.join("cols.csv");
    std::fs::write(&wrong_columns, "individual_id,task_id,alt_id,chosen,y\n1,1,1,1,1\n1,1,2,0,2\n").unwrap();
    assert_eq!(run(&["estimate", "--config", s(&config), "--data", s(&wrong_columns)]), exit::DATA);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = small_config(root);
    let cfg = s(&config);
    assert_eq!(run(&["simulate", "--config", cfg, "--out", s(&root.join("sim"))]), exit::OK);
    for k in 0..2 {
        let est = root.join(format!("est{k}"));
        let mc = root.join(format!("mc{k}"));
        let e = run(&["estimate", "--config", cfg, "--out", s(&est), "--draws", "30"]);
        assert!(e == exit::OK || e == exit::NOT_CONVERGED);
        let m = run(&["montecarlo", "--config", cfg, "--out", s(&mc), "--draws", "20"]);
        assert!(m == exit::OK || m == exit::NOT_CONVERGED);
    }
    for f in ["est{}/result.json", "est{}/report.txt", "mc{}/montecarlo.json", "mc{}/montecarlo.txt"] {
        let a = std::fs::read(root.join(f.replace("{}", "0"))).unwrap();
        let b = std::fs::read(root.join(f.replace("{}", "1"))).unwrap();
        assert!(a == b, "{f} differs");
    }
    let sim_a = std::fs::read(root.join("sim/dataset.csv")).unwrap();
    assert_eq!(run(&["simulate", "--config", cfg, "--out", s(&root.join("sim2"))]), exit::OK);
    assert_eq!(sim_a, std::fs::read(root.join("sim2/dataset.csv")).unwrap());
}

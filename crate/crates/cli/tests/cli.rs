use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gbp_core::hardness::catalog;
use gbp_core::model::{Edge, Instance, SolutionFile};
use gbp_core::planar3::figure2_instance;
use tempfile::TempDir;

fn gbp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gbp")).args(args).output().expect("binary runs")
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_figure2_within_budget() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance());
    let out = gbp(&["solve", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("algorithm: deg4"));
    let exact = gbp(&["solve", "--input", &input, "--algo", "exact", "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&exact.stdout).unwrap();
    assert_eq!(report["report"]["algorithm"], "exact");
    assert!(report["report"]["cost"].as_u64().unwrap() <= 11);
}

#[test]
fn infeasible_instance_exits_one() {
    let dir = TempDir::new().unwrap();
    let path = Instance::new(4, vec![Edge::new(0, 1, 1), Edge::new(1, 2, 1), Edge::new(2, 3, 1)], vec![vec![0, 1, 2, 3]], None, None)
        .unwrap();
    let input = write_json(dir.path(), "path.json", &path);
    assert_eq!(gbp(&["solve", "--input", &input]).status.code(), Some(1));
    assert_eq!(gbp(&["preprocess", "--input", &input]).status.code(), Some(1));
}

#[test]
fn over_budget_exits_one() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance().with_budget(Some(2)));
    let out = gbp(&["solve", "--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("Exceeded"));
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\"vertices\": 2, \"edges\": [{\"u\": 0, \"v\": 5, \"cost\": 1}], \"habitats\": []}").unwrap();
    assert_eq!(gbp(&["solve", "--input", path.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(gbp(&["solve", "--input", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(gbp(&["solve", "--algo", "magic", "--input", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn inapplicable_algorithm_exits_three() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance());
    assert_eq!(gbp(&["solve", "--input", &input, "--algo", "deg3"]).status.code(), Some(3));
}

#[test]
fn cross_validate_runs() {
    assert_eq!(gbp(&["cross-validate", "--trials", "0"]).status.code(), Some(0));
    let out = gbp(&["cross-validate", "--regime", "deg4h4", "--trials", "5", "--seed", "9", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["agreed"], 5);
}

#[test]
fn gadget_generation_round_trip() {
    let dir = TempDir::new().unwrap();
    let k4 = catalog()[0].1.clone().with_k(Some(3));
    let vc = write_json(dir.path(), "k4.json", &k4);
    let inst = dir.path().join("g1.json");
    let map = dir.path().join("m1.json");
    let out = gbp(&[
        "generate", "--construction", "1", "--vc", &vc, "--output", inst.to_str().unwrap(), "--map", map.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let instance: Instance = serde_json::from_str(&fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(instance.vertex_count(), 26);
    assert_eq!(instance.budget(), Some(47));
    assert!(fs::read_to_string(&map).unwrap().contains("vertex_gadgets"));
    let sol = dir.path().join("sol.json");
    let solved = gbp(&["solve", "--input", inst.to_str().unwrap(), "--output", sol.to_str().unwrap()]);
    assert_eq!(solved.status.code(), Some(0));
    assert_eq!(gbp(&["verify", "--input", inst.to_str().unwrap(), "--solution", sol.to_str().unwrap()]).status.code(), Some(0));

    let planar = dir.path().join("g2.json");
    let out = gbp(&["generate", "--construction", "2", "--vc", &vc, "--output", planar.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let instance: Instance = serde_json::from_str(&fs::read_to_string(&planar).unwrap()).unwrap();
    assert!(instance.validate().unwrap().is_planar_embedded);
}

#[test]
fn verify_rejects_incomplete_solution() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance());
    let partial = SolutionFile { edges: vec![[0, 1]], cost: 0, feasible: false };
    let sol = write_json(dir.path(), "partial.json", &partial);
    assert_eq!(gbp(&["verify", "--input", &input, "--solution", &sol]).status.code(), Some(1));
    let unknown = SolutionFile { edges: vec![[2, 3]], cost: 0, feasible: false };
    let sol = write_json(dir.path(), "unknown.json", &unknown);
    assert_eq!(gbp(&["verify", "--input", &input, "--solution", &sol]).status.code(), Some(2));
}

#[test]
fn dot_export_marks_solution() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance());
    let sol = dir.path().join("sol.json");
    gbp(&["solve", "--input", &input, "--output", sol.to_str().unwrap()]);
    let solution: SolutionFile = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    let out = gbp(&["export-dot", "--input", &input, "--solution", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dot = stdout(&out);
    assert!(dot.starts_with("graph gbp {"));
    assert_eq!(dot.matches("style=bold").count(), solution.edges.len());
}

#[test]
fn preprocess_writes_ledger() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance());
    let ledger = dir.path().join("ledger.json");
    let out = gbp(&["preprocess", "--input", &input, "--ledger", ledger.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let reduced: Instance = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reduced.vertex_count(), 0);
    assert!(fs::read_to_string(&ledger).unwrap().contains("removed_components"));
}

#[test]
fn generation_and_solutions_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let mut runs = Vec::new();
    for i in 0..2 {
        let inst = dir.path().join(format!("i{i}.json"));
        let sol = dir.path().join(format!("s{i}.json"));
        gbp(&["generate", "--regime", "planar-h3", "--n", "14", "--r", "10", "--seed", "77", "--output", inst.to_str().unwrap()]);
        gbp(&["solve", "--input", inst.to_str().unwrap(), "--output", sol.to_str().unwrap()]);
        runs.push((fs::read(&inst).unwrap(), fs::read(&sol).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn analyze_reports_auto_choice() {
    let dir = TempDir::new().unwrap();
    let input = write_json(dir.path(), "fig2.json", &figure2_instance());
    let out = gbp(&["analyze", "--input", &input, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let a: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(a["auto"], "deg4");
}

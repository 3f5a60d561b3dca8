//! End-to-end tests of the `depolar` binary: spawn the real executable
//! against temp directories and check artifacts, exit codes and streams.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn depolar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depolar"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary spawns")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("stderr is utf-8")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).expect("artifact exists"))
        .expect("artifact is valid json")
}

const SMALL_GRAPH: &str = "
[input.synthetic]
nodes_per_side = 40
p_in = 0.1
p_out = 0.005
hub_count = 3
hub_in_degree_boost = 15
pool_size = 10
degree = { uniform = [4, 25] }
neutrality = \"uniform\"

[walk]
walks_per_side = 2000
hub_count_per_side = 3
";

fn write_config(dir: &Path, body: &str) {
    fs::write(dir.join("exp.toml"), body).expect("config writes");
}

#[test]
fn rwc_on_disconnected_graph_prints_one() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        "
[input.synthetic]
nodes_per_side = 40
p_in = 0.1
p_out = 0.0
hub_count = 3
hub_in_degree_boost = 15
pool_size = 5
",
    );
    let out = depolar(
        &["rwc", "--config", "exp.toml", "--out", "run", "--seed", "7", "--exact"],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("rwc = 1"), "stdout: {}", stdout(&out));
    let report = read_json(&tmp.path().join("run/rwc.json"));
    assert_eq!(report["mode"], "exact");
    assert_eq!(report["estimate"]["rwc"], 1.0);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), SMALL_GRAPH);
    for dir in ["a", "b"] {
        let out =
            depolar(&["rwc", "--config", "exp.toml", "--out", dir, "--seed", "3"], tmp.path());
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let first = fs::read(tmp.path().join("a/rwc.json")).unwrap();
    let second = fs::read(tmp.path().join("b/rwc.json")).unwrap();
    assert_eq!(first, second);
    // The manifests agree on every artifact hash.
    let hashes = |dir: &str| read_json(&tmp.path().join(dir).join("manifest.json"))["outputs"]
        .as_object()
        .expect("outputs is a map")
        .iter()
        .map(|(path, hash)| {
            let name = Path::new(path).file_name().unwrap().to_string_lossy().into_owned();
            (name, hash.as_str().unwrap().to_string())
        })
        .collect::<std::collections::BTreeMap<_, _>>();
    assert_eq!(hashes("a"), hashes("b"));
}

#[test]
fn exact_and_monte_carlo_agree_within_3_sigma() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), SMALL_GRAPH);
    let mc = depolar(&["rwc", "--config", "exp.toml", "--out", "mc", "--seed", "5"], tmp.path());
    let ex = depolar(
        &["rwc", "--config", "exp.toml", "--out", "ex", "--seed", "5", "--exact"],
        tmp.path(),
    );
    assert!(mc.status.success() && ex.status.success());
    let mc_json = read_json(&tmp.path().join("mc/rwc.json"));
    let ex_json = read_json(&tmp.path().join("ex/rwc.json"));
    let mc_rwc = mc_json["estimate"]["rwc"].as_f64().unwrap();
    let stderr_rwc = mc_json["estimate"]["stderr_rwc"].as_f64().unwrap();
    let ex_rwc = ex_json["estimate"]["rwc"].as_f64().unwrap();
    assert_eq!(ex_json["estimate"]["stderr_rwc"], 0.0);
    assert!(
        (mc_rwc - ex_rwc).abs() <= 3.0 * stderr_rwc,
        "monte carlo {mc_rwc} vs exact {ex_rwc} (3σ = {})",
        3.0 * stderr_rwc
    );
}

#[test]
fn select_with_oversized_k_warns_and_succeeds() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), SMALL_GRAPH);
    let out = depolar(
        &["select", "--config", "exp.toml", "--out", "run", "--seed", "3", "--exact", "--k", "12"],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("exceeds"), "stderr: {}", stderr(&out));
    let plan = read_json(&tmp.path().join("run/plan.json"));
    assert_eq!(plan["selected"].as_array().unwrap().len(), 10, "whole pool selected");
    assert_eq!(plan["truncated"], true);
    let csv = fs::read_to_string(tmp.path().join("run/plan.csv")).unwrap();
    assert!(csv.starts_with("i,node,delta_rwc,cumulative_rwc\n"));
    assert_eq!(csv.lines().count(), 11, "header plus one row per selected node");
}

#[test]
fn select_on_empty_pool_file_exits_2() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("edges.tsv"), "a\tb\nb\ta\nc\ta\n").unwrap();
    fs::write(tmp.path().join("partition.tsv"), "a\tX\nb\tY\nc\tX\n").unwrap();
    fs::write(tmp.path().join("pool.tsv"), "").unwrap();
    write_config(
        tmp.path(),
        "
[input.files]
edges = \"edges.tsv\"
partition = \"partition.tsv\"
pool = \"pool.tsv\"
",
    );
    let out = depolar(&["select", "--config", "exp.toml", "--out", "run"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("pool"), "stderr: {}", stderr(&out));
}

#[test]
fn simulate_filters_strategies_and_inserts_fraction_zero() {
    let tmp = TempDir::new().unwrap();
    write_config(
        tmp.path(),
        &format!("fractions = [0.5]\ntrials = 2\nk = 3\n{SMALL_GRAPH}"),
    );
    let out = depolar(
        &[
            "simulate",
            "--config",
            "exp.toml",
            "--out",
            "run",
            "--seed",
            "3",
            "--exact",
            "--strategies",
            "popular_only",
        ],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("inserting"), "stderr: {}", stderr(&out));

    let baseline = fs::read_to_string(tmp.path().join("run/baseline.csv")).unwrap();
    let mut lines = baseline.lines();
    assert_eq!(lines.next(), Some("strategy,k,rwc"));
    assert!(lines.clone().count() > 0);
    assert!(lines.all(|line| line.starts_with("popular_only,")), "unexpected rows: {baseline}");

    // The f = 0 row of the unfollow curve equals the plan's final
    // cumulative score bit-for-bit (cross-stage consistency).
    let plan = read_json(&tmp.path().join("run/plan.json"));
    let final_rwc = plan["cumulative_rwc"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    let unfollow = fs::read_to_string(tmp.path().join("run/unfollow.csv")).unwrap();
    let first_row = unfollow.lines().nth(1).expect("at least one data row");
    let fields: Vec<&str> = first_row.split(',').collect();
    assert_eq!(fields[0], "0");
    assert_eq!(fields[1].parse::<f64>().unwrap(), final_rwc);
}

#[test]
fn generate_is_seed_deterministic_and_loadable() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), SMALL_GRAPH);
    for dir in ["a", "b"] {
        let out =
            depolar(&["generate", "--config", "exp.toml", "--out", dir, "--seed", "9"], tmp.path());
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let other =
        depolar(&["generate", "--config", "exp.toml", "--out", "c", "--seed", "10"], tmp.path());
    assert!(other.status.success());

    let edges_a = fs::read(tmp.path().join("a/edges.tsv")).unwrap();
    assert_eq!(edges_a, fs::read(tmp.path().join("b/edges.tsv")).unwrap());
    assert_ne!(edges_a, fs::read(tmp.path().join("c/edges.tsv")).unwrap());

    // The generated artifacts load back through the files input path.
    write_config(
        tmp.path(),
        "
[input.files]
edges = \"a/edges.tsv\"
partition = \"a/partition.tsv\"
pool = \"a/pool.tsv\"
",
    );
    let out = depolar(
        &["select", "--config", "exp.toml", "--out", "run", "--exact", "--k", "2"],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", stderr(&out));
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), "walks = 10\n");
    let out = depolar(&["rwc", "--config", "exp.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("walks"), "stderr: {}", stderr(&out));
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let tmp = TempDir::new().unwrap();
    write_config(tmp.path(), SMALL_GRAPH);
    for (dir, threads) in [("t1", "1"), ("t2", "2")] {
        let out = depolar(
            &["rwc", "--config", "exp.toml", "--out", dir, "--seed", "4", "--threads", threads],
            tmp.path(),
        );
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    assert_eq!(
        fs::read(tmp.path().join("t1/rwc.json")).unwrap(),
        fs::read(tmp.path().join("t2/rwc.json")).unwrap()
    );
}

//! End-to-end tests of the `coarsenet` binary: exit codes, file formats,
//! and byte-for-byte reproducibility under a fixed seed.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coarsenet::graph::{parse_edge_list, write_edge_list, Graph, TerminalSet};
use coarsenet::synth;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_coarsenet")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_graph(dir: &Path, name: &str, g: &Graph) -> PathBuf {
    let path = dir.join(name);
    let mut bytes = Vec::new();
    write_edge_list(g, &mut bytes).unwrap();
    fs::write(&path, bytes).unwrap();
    path
}

fn write_terminals(dir: &Path, name: &str, t: &TerminalSet) -> PathBuf {
    let path = dir.join(name);
    let text: String = t.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&path, text).unwrap();
    path
}

fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
    let g = synth::connected_graph(100, 220, (0.5, 2.0), 17);
    let t = TerminalSet::from_iter(g.vertices().step_by(4));
    (write_graph(dir, "g.tsv", &g), write_terminals(dir, "t.txt", &t))
}

#[test]
fn coarsen_happy_path_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (input, terminals) = fixture(dir.path());
    let out1 = dir.path().join("h1.tsv");
    let rep1 = dir.path().join("r1.json");
    let deg1 = dir.path().join("d1.tsv");
    let status = run(&[
        "coarsen",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--method", "contract",
        "--delta", "inf",
        "--seed", "7",
        "--output", out1.to_str().unwrap(),
        "--report", rep1.to_str().unwrap(),
        "--orig-degrees-out", deg1.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0), "{}", stderr(&status));

    let h = parse_edge_list(fs::File::open(&out1).map(std::io::BufReader::new).unwrap()).unwrap();
    assert_eq!(h.num_vertices(), 25);

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&rep1).unwrap()).unwrap();
    assert_eq!(report["method"], "contract");
    assert_eq!(report["final_vertices"], 25);
    assert!(report["wall_time_ms"].is_null());

    let out2 = dir.path().join("h2.tsv");
    let rep2 = dir.path().join("r2.json");
    let status = run(&[
        "coarsen",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--method", "contract",
        "--delta", "inf",
        "--seed", "7",
        "--output", out2.to_str().unwrap(),
        "--report", rep2.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(0));
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
    assert_eq!(fs::read(&rep1).unwrap(), fs::read(&rep2).unwrap());
}

#[test]
fn coarsen_missing_input_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let (_, terminals) = fixture(dir.path());
    let missing = dir.path().join("nope.tsv");
    let out = run(&[
        "coarsen",
        "--input", missing.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--output", dir.path().join("h.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("nope.tsv"),
        "stderr must name the path: {}",
        stderr(&out)
    );
}

#[test]
fn coarsen_rejects_delta_zero_as_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let (input, terminals) = fixture(dir.path());
    let out = run(&[
        "coarsen",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--delta", "0",
        "--output", dir.path().join("h.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("h.tsv").exists(), "no partial output on usage errors");
}

#[test]
fn coarsen_rejects_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let (input, terminals) = fixture(dir.path());
    let out = run(&[
        "coarsen",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--method", "magic",
        "--output", dir.path().join("h.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_netmf_happy_path() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = fixture(dir.path());
    let out_path = dir.path().join("e.tsv");
    let out = run(&[
        "embed",
        "--input", input.to_str().unwrap(),
        "--mode", "netmf",
        "--window", "1",
        "--dim", "16",
        "--output", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# d=16\n"));
    let emb = coarsenet::embed::Embedding::read_tsv(text.as_bytes()).unwrap();
    assert_eq!(emb.len(), 100);
    assert_eq!(emb.dim(), 16);
}

#[test]
fn embed_dim_beyond_vertex_count_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = fixture(dir.path());
    let out = run(&[
        "embed",
        "--input", input.to_str().unwrap(),
        "--dim", "101",
        "--output", dir.path().join("e.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn embed_netmfsc_requires_orig_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let (input, _) = fixture(dir.path());
    let out = run(&[
        "embed",
        "--input", input.to_str().unwrap(),
        "--mode", "netmfsc",
        "--dim", "4",
        "--output", dir.path().join("e.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("orig-degrees"));
}

#[test]
fn coarsen_then_netmfsc_embed_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (input, terminals) = fixture(dir.path());
    let coarse = dir.path().join("h.tsv");
    let degrees = dir.path().join("d.tsv");
    let out = run(&[
        "coarsen",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--method", "schur",
        "--delta", "inf",
        "--theta", "0.5",
        "--output", coarse.to_str().unwrap(),
        "--orig-degrees-out", degrees.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&[
        "embed",
        "--input", coarse.to_str().unwrap(),
        "--mode", "netmfsc",
        "--window", "4",
        "--dim", "8",
        "--orig-degrees", degrees.to_str().unwrap(),
        "--output", dir.path().join("e.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn verify_schur_oracle_reports_pass() {
    let dir = tempfile::tempdir().unwrap();
    let jsonl = dir.path().join("v.jsonl");
    let out = run(&[
        "verify",
        "--check", "schur-oracle",
        "--n", "40",
        "--instances", "30",
        "--out", jsonl.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&jsonl).unwrap();
    let report: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(report["name"], "schur-oracle");
    assert_eq!(report["pass"], true);
    assert!(report["max_abs_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn verify_expectation_reports_pass() {
    let out = run(&[
        "verify",
        "--check", "expectation",
        "--n", "8",
        "--trials", "100000",
        "--seed", "1",
        "--instances", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let report: serde_json::Value = serde_json::from_str(stdout.lines().next().unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["rel_frobenius_error"].as_f64().unwrap() <= 0.02);
}

#[test]
fn verify_unknown_check_is_usage_error() {
    let out = run(&["verify", "--check", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown check"));
}

#[test]
fn eval_full_pipeline_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let g = synth::two_block_graph(60, 0.15, 0.02, 5);
    assert!(g.is_connected());
    let t = TerminalSet::from_iter(g.vertices().filter(|v| v % 2 == 0));
    let input = write_graph(dir.path(), "sbm.tsv", &g);
    let terminals = write_terminals(dir.path(), "t.txt", &t);
    let rep1 = dir.path().join("rep1.json");
    let preds = dir.path().join("preds.tsv");
    let splits = dir.path().join("split");
    let args = |report: &Path| {
        vec![
            "eval".to_string(),
            "--input".into(), input.to_str().unwrap().into(),
            "--terminals".into(), terminals.to_str().unwrap().into(),
            "--ratio".into(), "0.4".into(),
            "--method".into(), "contract".into(),
            "--delta".into(), "inf".into(),
            "--dim".into(), "16".into(),
            "--seed".into(), "3".into(),
            "--report".into(), report.to_str().unwrap().to_string(),
        ]
    };
    let mut full = args(&rep1);
    full.extend([
        "--predictions".into(), preds.to_str().unwrap().into(),
        "--splits-out".into(), splits.to_str().unwrap().into(),
    ]);
    let out = Command::new(bin()).args(&full).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&rep1).unwrap()).unwrap();
    let auc = report["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&auc), "auc = {auc}");
    let positives = report["positives"].as_u64().unwrap() as usize;
    assert!(positives > 0);

    let pred_lines = fs::read_to_string(&preds).unwrap().lines().count();
    assert_eq!(pred_lines, 2 * positives);
    assert!(dir.path().join("split.positives.tsv").exists());
    assert!(dir.path().join("split.negatives.tsv").exists());

    let rep2 = dir.path().join("rep2.json");
    let out = Command::new(bin()).args(args(&rep2)).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fs::read(&rep1).unwrap(), fs::read(&rep2).unwrap());
}

#[test]
fn eval_rejects_bad_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let (input, terminals) = fixture(dir.path());
    let out = run(&[
        "eval",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--ratio", "1.5",
        "--report", dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_tree_input_has_no_removable_edges() {
    let dir = tempfile::tempdir().unwrap();
    let g = synth::connected_graph(20, 0, (0.5, 2.0), 2); // spanning tree only
    let t = TerminalSet::from_iter(g.vertices());
    let input = write_graph(dir.path(), "tree.tsv", &g);
    let terminals = write_terminals(dir.path(), "t.txt", &t);
    let out = run(&[
        "eval",
        "--input", input.to_str().unwrap(),
        "--terminals", terminals.to_str().unwrap(),
        "--dim", "4",
        "--report", dir.path().join("r.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no removable edges"));
}

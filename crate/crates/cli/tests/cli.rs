use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tpuzzle_core::{build_instance, InstanceParams, PuzzleInstance};

fn tpuzzle(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tpuzzle")).current_dir(dir).args(args).output().expect("binary runs")
}

fn body(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Parses one numeric column of a written table.
fn column(path: &Path, name: &str) -> Vec<f64> {
    let text = body(path);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

#[test]
fn generate_writes_reloadable_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["generate", "--n", "10", "--beta", "0.2", "--seed", "7", "--out", "inst.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let loaded = PuzzleInstance::load(&dir.path().join("inst.json")).unwrap();
    let direct = build_instance(&InstanceParams::square(10, 0.2, 7), None).unwrap();
    assert_eq!(loaded, direct);
}

#[test]
fn missing_size_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["generate", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn s_star_override_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["generate", "--n", "5", "--s-star", "10110", "--out", "i.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let inst = PuzzleInstance::load(&dir.path().join("i.json")).unwrap();
    assert_eq!(inst.s_star.to_string(), "10110");
}

#[test]
fn solve_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (w, out) in [("1", "a"), ("2", "b")] {
        let o = tpuzzle(dir.path(), &["solve", "--sizes", "4,5", "--instances", "3", "--trials", "5", "--seed", "11", "--workers", w, "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["solve_runs.csv", "solve_summary.csv"] {
        assert_eq!(body(&dir.path().join("a").join(f)), body(&dir.path().join("b").join(f)));
    }
    let text = fs::read_to_string(dir.path().join("a/solve_summary.csv")).unwrap();
    assert!(text.starts_with("# tpuzzle "));
    assert!(text.contains("# config_sha256 ") && text.contains("# seed 11"));
    let summary = body(&dir.path().join("a/solve_summary.csv"));
    let methods: Vec<&str> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert!(methods.contains(&"hill") && methods.contains(&"random"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"sizes": [4], "instances": 5, "methods": ["hill"], "seed": 3}"#).unwrap();
    let o = tpuzzle(dir.path(), &["solve", "--config", "cfg.json", "--instances", "2", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("r/solve_summary.csv")).unwrap();
    assert!(text.contains("\"instances\":2") && text.contains("\"seed\":3"));
    assert_eq!(column(&dir.path().join("r/solve_summary.csv"), "runs"), vec![2.0]);
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cfg.json"), r#"{"sizez": [4]}"#).unwrap();
    let o = tpuzzle(dir.path(), &["solve", "--config", "cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stored_instance_is_solved_with_traces() {
    let dir = tempfile::tempdir().unwrap();
    tpuzzle(dir.path(), &["generate", "--n", "6", "--seed", "2", "--out", "i.json"]);
    let o = tpuzzle(dir.path(), &["solve", "--instance", "i.json", "--starts", "2", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let runs = body(&dir.path().join("r/solve_runs.csv"));
    assert!(runs.lines().skip(1).all(|l| l.ends_with(",true")));
    let loss = column(&dir.path().join("r/solve_traces.csv"), "current_loss");
    assert!(loss.iter().any(|&l| l < 1e-10));
}

#[test]
fn noiseless_sanity_row_always_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["noisy-solve", "--sizes", "5", "--sigmas", "0", "--runs", "4", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&dir.path().join("r/noisy_success.csv"), "success_rate"), vec![1.0]);
}

#[test]
fn landscape_refuses_large_maps() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["landscape", "--part", "heatmap", "--n", "11"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn qsvt_rows_match_dense_reference() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["qsvt-verify", "--betas", "0,0.5", "--degrees", "2,4", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("r/qsvt.csv");
    let (beta, d, dev) = (column(&path, "beta"), column(&path, "d"), column(&path, "deviation"));
    for i in 0..beta.len() {
        if beta[i] == 0.0 && d[i] == 2.0 {
            assert!(dev[i] <= 1e-10);
        }
        if beta[i] == 0.5 && d[i] == 4.0 {
            assert!(dev[i] <= 1e-4);
        }
    }
}

#[test]
fn oversized_grid_names_the_cap() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["largescale", "--rows", "7", "--cols", "7", "--depth", "14", "--instances", "1"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("24"));
}

#[test]
fn largescale_emits_reference_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = tpuzzle(dir.path(), &["largescale", "--rows", "2", "--cols", "2", "--depth", "3", "--instances", "2", "--out", "r"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = body(&dir.path().join("r/largescale_summary.csv"));
    assert!(summary.contains(",true,") && summary.contains(",false,"));
}

#[test]
fn plots_render_and_empty_tables_fail() {
    let dir = tempfile::tempdir().unwrap();
    tpuzzle(dir.path(), &["solve", "--sizes", "3,4", "--instances", "2", "--trials", "3", "--out", "r"]);
    let o = tpuzzle(dir.path(), &["plot", "r/solve_summary.csv", "--out", "p"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = fs::read_to_string(dir.path().join("p/solve_summary.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("n^2/2 - n/4") && svg.contains("stroke-dasharray"));

    fs::write(dir.path().join("empty.csv"), "beta,non_unimodal,non_separable,non_monotonic\n").unwrap();
    let o = tpuzzle(dir.path(), &["plot", "empty.csv"]);
    assert_ne!(o.status.code(), Some(0));
}

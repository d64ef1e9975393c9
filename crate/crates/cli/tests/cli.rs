use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Six nodes, arcs pointing toward node 0.
const FIXTURE: &str = "# fixture\n1 0 0.8\n2 0 0.6\n3 1 0.5\n4 1 0.9\n4 2 0.4\n5 2 0.7\n";

#[test]
fn gen_writes_k_out_lines_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for path in [&a, &b] {
        stdout(&tcim(&[
            "gen", "--n", "10", "--k-out", "2", "--seed", "5", "--out", path.to_str().unwrap(),
        ]));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 20);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn gen_weighted_ic_column_is_inverse_in_degree() {
    let out = stdout(&tcim(&["gen", "--n", "30", "--k-out", "3", "--seed", "1", "--weighted-ic"]));
    let rows: Vec<(u32, u32, f64)> = out
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    for &(_, v, p) in &rows {
        let indeg = rows.iter().filter(|r| r.1 == v).count();
        assert!((p - 1.0 / indeg as f64).abs() < 1e-12);
    }
}

#[test]
fn select_on_fixture_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let out = stdout(&tcim(&["select", "--graph", &g, "--k", "1", "--epsilon", "0.5", "--sims", "2000"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["seeds"].as_array().unwrap().len(), 1);
    assert!(v["lb_refined"].as_f64().unwrap() >= v["lb_estimate"].as_f64().unwrap());
    for key in ["theta", "spread_estimate", "spread_mc", "timings", "peak_memory_estimate"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
}

#[test]
fn select_is_deterministic_apart_from_timings() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let a = write(dir.path(), "a.txt", "3\n");
    let run = || {
        let out = stdout(&tcim(&[
            "select", "--graph", &g, "--k", "2", "--model", "wave", "--epsilon", "0.4", "--seed", "17",
            "--seed-a-file", &a, "--sims", "500",
        ]));
        let mut v: Value = serde_json::from_str(&out).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn select_rejects_k_above_eligible_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let a = write(dir.path(), "a.txt", "0 1 2\n");
    let out = tcim(&["select", "--graph", &g, "--k", "4", "--seed-a-file", &a]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("k = 4") && err.contains("S_A"), "{err}");
}

#[test]
fn usage_and_io_errors_have_distinct_codes() {
    let out = tcim(&["select", "--graph", "/nonexistent/graph.txt", "--k", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let out = tcim(&["select", "--graph", "x", "--k", "1", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "0 1 0.5\n1 2 1.5\n");
    let out = tcim(&["select", "--graph", &g, "--k", "1"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn baseline_singlediscount_is_deterministic_without_simulations() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let run = || {
        let out = stdout(&tcim(&[
            "baseline", "--graph", &g, "--algorithm", "singlediscount", "--k", "2", "--sims", "100",
        ]));
        serde_json::from_str::<Value>(&out).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a["seeds"], b["seeds"]);
    assert_eq!(a["simulations_used"], 0);
}

#[test]
fn celf_and_celfpp_agree_on_deterministic_graph() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "0 1 1\n1 2 1\n2 3 0\n3 4 1\n5 4 1\n5 6 1\n6 7 1\n8 0 1\n");
    let seeds = |alg: &str| {
        let out = stdout(&tcim(&[
            "baseline", "--graph", &g, "--algorithm", alg, "--k", "3", "--r", "5", "--seed", "4", "--sims", "10",
        ]));
        serde_json::from_str::<Value>(&out).unwrap()["seeds"].clone()
    };
    assert_eq!(seeds("celf"), seeds("celfpp"));
}

#[test]
fn baseline_prints_min_r_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let out = stdout(&tcim(&[
        "baseline", "--graph", &g, "--algorithm", "greedymc", "--k", "1", "--r", "20", "--sims", "10", "--print-min-r",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["min_r"].as_u64().unwrap() > 0);
}

#[test]
fn grid_writes_header_and_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let out = stdout(&tcim(&["grid", "--graph", &g, "--k", "1,2", "--epsilon", "0.5", "--sims", "200"]));
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "algorithm");
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    for row in &rows {
        let lbe: f64 = row[col("lb_estimate")].parse().unwrap();
        let lbr: f64 = row[col("lb_refined")].parse().unwrap();
        assert!(lbr >= lbe);
        assert!(row[col("error")].is_empty());
    }
}

#[test]
fn grid_records_failures_and_continues() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", FIXTURE);
    let out = stdout(&tcim(&[
        "grid", "--graph", &g, "--k", "1,9", "--epsilon", "0.5", "--algorithms", "tcim,singlediscount",
        "--sims", "100",
    ]));
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let err = headers.iter().position(|h| h == "error").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(rows.iter().filter(|r| !r[err].is_empty()).count(), 2);
}

#[test]
fn grid_runtime_falls_as_epsilon_grows() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    stdout(&tcim(&[
        "gen", "--n", "2000", "--k-out", "4", "--seed", "3", "--weighted-ic", "--out", g.to_str().unwrap(),
    ]));
    let out = stdout(&tcim(&[
        "grid", "--graph", g.to_str().unwrap(), "--k", "10", "--epsilon", "0.1,0.3,0.5", "--sims", "1",
    ]));
    let mut reader = csv::Reader::from_reader(out.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    let theta: Vec<u64> = rows.iter().map(|r| r[col("theta")].parse().unwrap()).collect();
    let secs: Vec<f64> = rows.iter().map(|r| r[col("wall_time_secs")].parse().unwrap()).collect();
    assert!(theta[0] > theta[1] && theta[1] > theta[2], "{theta:?}");
    assert!(secs[0] > secs[2], "{secs:?}");
}

#[test]
fn influence_matches_deterministic_spread() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.txt", "0 1 1\n1 2 1\n0 3 1\n");
    let b = write(dir.path(), "b.txt", "0\n");
    let out = stdout(&tcim(&["influence", "--graph", &g, "--seed-b-file", &b, "--sims", "10"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["spread_mc"].as_f64().unwrap(), 4.0);
}

#[test]
fn help_documents_output_fields() {
    let out = stdout(&tcim(&["select", "--help"]));
    for field in ["theta", "lb_estimate", "lb_refined", "spread_estimate", "spread_mc", "peak_memory_estimate"] {
        assert!(out.contains(field), "{field} undocumented");
    }
    let out = stdout(&tcim(&["grid", "--help"]));
    for field in ["seed_a_size", "wall_time_secs", "memory_estimate", "simulations_used", "error"] {
        assert!(out.contains(field), "{field} undocumented");
    }
}

use std::collections::BTreeSet;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use z2top::geometry::fixtures::{FANO_EQUATIONS, PG3_EQUATIONS};

fn z2top(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_z2top")).args(args).env("Z2TOP_NO_COLOR", "1").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(code(o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn geometry_dumps() {
    let g = json(&z2top(&["geometry", "--n", "3", "--format", "json"]));
    assert_eq!(g["schema_version"], 1);
    assert_eq!(g["points"].as_array().unwrap().len(), 7);
    assert_eq!(g["lines"].as_array().unwrap().len(), 7);

    let g = json(&z2top(&["geometry", "--n", "2"]));
    assert_eq!(g["points"].as_array().unwrap().len(), 3);
    assert_eq!(g["lines"].as_array().unwrap().len(), 1);

    let g = json(&z2top(&["geometry", "--n", "4"]));
    let hs = g["hyperplanes"].as_array().unwrap();
    assert_eq!(hs.len(), 15);
    assert!(hs.iter().all(|h| h["points"].as_array().unwrap().len() == 7));

    let dot = z2top(&["geometry", "--n", "3", "--format", "dot"]);
    let text = String::from_utf8(dot.stdout).unwrap();
    assert!(text.starts_with("graph pg2_2 {"));
    assert_eq!(text.matches(" -- ").count(), 21);
}

fn term_sets(lines: &str) -> Vec<BTreeSet<(usize, usize)>> {
    let sub = |s: &str| -> usize {
        s.chars().map(|c| char::from_digit(c as u32 - 0x2080, 10).unwrap()).collect::<String>().parse().unwrap()
    };
    lines
        .lines()
        .map(|l| {
            let rhs = l.split(" = ").nth(1).unwrap();
            rhs.split(" + ")
                .map(|t| {
                    let parts: Vec<&str> = t.split('ω').filter(|p| !p.is_empty()).collect();
                    let (j, k) = (sub(parts[0]), sub(parts[1]));
                    (j.min(k), j.max(k))
                })
                .collect()
        })
        .collect()
}

fn fixture_sets<const M: usize>(rows: &[[(usize, usize); M]]) -> Vec<BTreeSet<(usize, usize)>> {
    rows.iter().map(|r| r.iter().map(|&(j, k)| (j.min(k), j.max(k))).collect()).collect()
}

#[test]
fn equations_listing() {
    let o = z2top(&["equations", "--n", "2"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "dω₁/dt = ω₂ω₃\ndω₂/dt = ω₁ω₃\ndω₃/dt = ω₁ω₂\n");

    let o = z2top(&["equations", "--n", "3", "--labelling", "paper"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(term_sets(&text)[0], [(2, 7), (3, 6), (4, 5)].into_iter().collect());
    assert_eq!(term_sets(&text), fixture_sets(&FANO_EQUATIONS));

    let o = z2top(&["equations", "--n", "4", "--labelling", "paper"]);
    let sets = term_sets(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(sets.len(), 15);
    assert!(sets.iter().all(|s| s.len() == 7));
    assert_eq!(sets, fixture_sets(&PG3_EQUATIONS));

    let o = z2top(&["equations", "--n", "5", "--labelling", "paper"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = ["run", "--n", "3", "--seed", "42", "--format", "json"];
    let a = z2top(&args);
    let b = z2top(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["initial"]["seed"], 42);
    assert_eq!(v["termination"], "completed");
    assert_eq!(v["samples"].as_array().unwrap().len(), 101);
    assert_ne!(z2top(&["run", "--n", "3", "--seed", "43", "--format", "json"]).stdout, a.stdout);
}

#[test]
fn run_writes_trajectory_and_drift_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("traj.csv");
    let o = z2top(&["run", "--n", "2", "--omega0", "0.5,0,0", "--t-end", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,x_1,x_2,x_3\n0,0.5,0,0\n"));
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0.5,0,0")));
    let drift: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("traj.drift.json")).unwrap()).unwrap();
    assert_eq!(drift["schema_version"], 1);
    assert!(drift["entries"].as_array().unwrap().iter().all(|e| e["max_drift"] == 0.0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("max_drift=0.000e0"));
}

#[test]
fn exit_codes() {
    // Symmetric 3D orbit: poles at t = 1.
    let o = z2top(&["run", "--n", "2", "--omega0", "1,1,1", "--t-end", "2"]);
    assert_eq!(code(&o), 3);

    let o = z2top(&["run", "--n", "4", "--seed", "5", "--drift-threshold", "1e-15"]);
    assert_eq!(code(&o), 6);
    let o = z2top(&["run", "--n", "4", "--seed", "5", "--drift-threshold", "1e-6"]);
    assert_eq!(code(&o), 0);

    let o = z2top(&["reduce", "--n", "2", "--omega0", "1,0,0"]);
    assert_eq!(code(&o), 5);

    let o = z2top(&["run", "--n", "3", "--omega0", "1,2,3"]);
    assert_eq!(code(&o), 2);
    let o = z2top(&["run", "--n", "3", "--rel-tol", "0.5"]);
    assert_eq!(code(&o), 2);
    let o = z2top(&["run", "--n", "3", "--format", "dot"]);
    assert_eq!(code(&o), 2);
    let o = z2top(&["run"]);
    assert_eq!(code(&o), 2);
    let o = z2top(&["geometry", "--n", "1"]);
    assert_eq!(code(&o), 2);
    let o = z2top(&["run", "--n", "3", "--config", "/nonexistent/z2top.toml"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn failed_parses_leave_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = z2top(&["run", "--n", "3", "--t-end", "oops", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = z2top(&["run", "--n", "3", "--omega0", "1,2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

fn write(path: &Path, s: &str) {
    std::fs::write(path, s).unwrap();
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("z.toml");
    write(&cfg, "n = 2\nomega0 = [0.1, 0.2, 0.3]\nt-end = 0.5\nformat = \"json\"\n");
    let from_file = json(&z2top(&["run", "--config", cfg.to_str().unwrap()]));
    assert_eq!(from_file["n"], 2);
    assert_eq!(from_file["settings"]["t_end"], 0.5);

    let flagged = json(&z2top(&["run", "--config", cfg.to_str().unwrap(), "--t-end", "0.25"]));
    assert_eq!(flagged["settings"]["t_end"], 0.25);
    assert_eq!(flagged["initial"]["omega0"], from_file["initial"]["omega0"]);

    write(&cfg, "n = 2\nbogus = 1\n");
    assert_eq!(code(&z2top(&["run", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn reduce_reports_genus() {
    let o = z2top(&["reduce", "--n", "3", "--seed", "9", "--format", "text"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("reduce n=3 genus=9\n"), "{text}");

    let v = json(&z2top(&["reduce", "--n", "4", "--seed", "9"]));
    assert_eq!(v["genus"], 49);
    assert_eq!(v["schema_version"], 1);
    assert!(v["max_rel_err"].as_f64().unwrap() < 1e-6);
    assert_eq!(v["curve"]["sheets"], 8);
}

#[test]
fn zk_runs() {
    let v = json(&z2top(&["zk", "--k", "3", "--seed", "1", "--format", "json"]));
    assert_eq!(v["system"], "zk");
    assert_eq!(v["coords"], "zk");
    assert_eq!(v["initial"]["omega0"].as_array().unwrap().len(), 4);
    let o = z2top(&["zk", "--k", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn a_coordinates_run() {
    let v = json(&z2top(&["run", "--n", "3", "--seed", "2", "--coords", "a", "--format", "json"]));
    assert_eq!(v["coords"], "a");
    assert_eq!(v["termination"], "completed");
}

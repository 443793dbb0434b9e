use std::path::Path;
use std::process::{Command, Output};

use bosonlab::report::{read_csv, read_json_lines};

const SPIN_BOSON: &str = "\
[model]
epsilon = 1.0
delta = 0.5
alpha = 0.2
n_max = 4

[grid]
mass = 0.5
modes = 2
";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("run.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_bosonlab")).args(args).arg("--config").arg(&path).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn verify_passes_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), SPIN_BOSON, &["verify"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json_lines(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(r.cells.len(), 1);
    assert!(r.cells[0].check("pull_through").is_some());
}

#[test]
fn config_errors_exit_three_and_list_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "[model]\nn_max = -2\nshape = 1\n", &["verify"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("model.n_max") && err.contains("model.shape"), "{err}");
    assert!(o.stdout.is_empty());

    let o = run(dir.path(), SPIN_BOSON, &["verify", "--checks", "pull_through,bogus"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn failed_check_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SPIN_BOSON}[checks]\nmultiplicity_expected = 2\n");
    let o = run(dir.path(), &cfg, &["verify", "--checks", "multiplicity"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn solver_failure_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!("{SPIN_BOSON}[solver]\ndense_threshold = 1\nkrylov_dim = 3\nmax_restarts = 1\neigen_tol = 1e-15\n");
    let o = run(dir.path(), &cfg, &["solve"]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn build_and_spectrum_dump_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), SPIN_BOSON, &["build"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dim"], 30);
    assert_eq!(v["fock_dim"], 15);

    let o = run(dir.path(), SPIN_BOSON, &["spectrum", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let (header, rows) = read_csv(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(header, ["index", "energy"]);
    assert_eq!(rows.len(), 30);
    let e: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn sweep_writes_files_and_seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = format!("{SPIN_BOSON}[sweep.axes]\nalpha = [0.2, 0.1]\n[output]\nname = \"s\"\nformat = [\"json\", \"csv\"]\n");
    let o = run(dir.path(), &cfg, &["sweep", "--out", out.to_str().unwrap(), "--seed", "99", "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json_lines(&std::fs::read_to_string(out.join("s.jsonl")).unwrap()).unwrap();
    assert_eq!(r.cells.len(), 3);
    assert_eq!(r.provenance.seed, 99);
    assert!(out.join("s.csv").exists() && out.join("s_family.csv").exists());
}

#[test]
fn sweep_without_axes_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), SPIN_BOSON, &["sweep"]);
    assert_eq!(code(&o), 3);
}

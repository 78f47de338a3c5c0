use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bec")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    let text = format!(
        "output_dir = {:?}\n[parameters]\nn = 2\nalpha = 6.5\nbeta = 0.5\nkappa = 0.4\nlength = 1\n{body}",
        dir.join("out").display().to_string()
    );
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn check_reports_both_windows() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "");
    let o = bec(&["check", &cfg]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("n* = 1.536"), "{out}");
    assert!(out.contains("kappa bound = 0.5"));
    assert!(out.contains("blowup: admissible"));

    let bad = write_config(tmp.path(), "").replace("run.toml", "bad.toml");
    fs::write(&bad, fs::read_to_string(&cfg).unwrap().replace("kappa = 0.4", "kappa = 0.7")).unwrap();
    let o = bec(&["check", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NOT admissible"));
}

#[test]
fn unknown_key_fails_with_its_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\ncels = 8\n");
    let o = bec(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cels") && err.contains("line"), "{err}");
}

#[test]
fn run_writes_a_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[grid]\ncells = 32\n[time]\nt_end = 0.1\nsample_interval = 0.01\n");
    let o = bec(&["run", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("no blow-up event"), "{out}");
    let runs: Vec<_> = fs::read_dir(tmp.path().join("out")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    let dir = runs[0].as_ref().unwrap().path();
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn k_sweep_and_oracles_verbs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\ncells = 64\n[initial]\nkind = \"concentration_family\"\nk = 1\n\
         [initial.base]\nkind = \"constant\"\nvalue = 1.0\n[time]\nt_end = 1e-5\nsample_interval = 1e-6\n",
    );
    let o = bec(&["k-sweep", &cfg, "--k", "1,2,4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).matches("none").count(), 3);

    let o = bec(&["oracles", &cfg, "--count", "40"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("pointwise") && out.contains("fuzz.csv"), "{out}");
}

#[test]
fn bisect_reports_invalid_bracket() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "[grid]\ncells = 32\n[initial]\nkind = \"concentration_family\"\nk = 1\n\
         [initial.base]\nkind = \"constant\"\nvalue = 1.0\n[time]\nt_end = 1e-4\nsample_interval = 1e-5\n",
    );
    let o = bec(&["bisect", &cfg, "--k-low", "1", "--k-high", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bracket invalid"));
}

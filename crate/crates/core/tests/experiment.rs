use std::fs;

use bec_core::experiment::{
    bisect_blowup_threshold, parse_config, run_eps_study, run_k_sweep, run_single, RunConfig, EPS_CSV_HEADER,
};
use bec_core::Error;

fn config(dir: &std::path::Path, extra: &str) -> RunConfig {
    let text = format!(
        "output_dir = {:?}\n[parameters]\nn = 2\nalpha = 6.5\nbeta = 0.5\nkappa = 0.4\nlength = 1\n{extra}",
        dir.display().to_string()
    );
    parse_config(&text).unwrap()
}

const BUMP_SHORT: &str = "\n[grid]\ncells = 64\n\
    [initial]\nkind = \"bump\"\ncenter = 0.5\nwidth = 0.25\nheight = 0.5\nbase = 1.0\n\
    [time]\nt_end = 1e-4\nsample_interval = 1e-5\n";

#[test]
fn constant_run_writes_layout_and_stays_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "\n[grid]\ncells = 32\n[time]\nt_end = 0.5\nsample_interval = 0.05\n");
    let a = run_single(&cfg).unwrap();
    assert!(a.events.is_empty());
    assert_eq!(a.records.len(), 11);
    assert!(a.records.iter().all(|r| r.sup_norm == 1.0 && r.entropy_production == 0.0));
    for name in ["config", "trajectory.csv", "events.json", "summary.json"] {
        assert!(a.dir.join(name).is_file(), "{name}");
    }
    assert!(a.dir.join("snapshots").is_dir() && a.dir.join("oracles").is_dir());
    assert_eq!(a.snapshots.len(), 11);
    assert_eq!(fs::read_to_string(a.dir.join("config")).unwrap(), cfg.echo());
    assert_eq!(fs::read_to_string(a.dir.join("events.json")).unwrap().trim(), "[]");
    // the echo reproduces the run id
    let again = parse_config(&a.config_echo).unwrap();
    assert_eq!(bec_core::experiment::run_id(&again), a.summary.run_id);
}

#[test]
fn identical_configs_give_identical_trajectories() {
    let t1 = tempfile::tempdir().unwrap();
    let t2 = tempfile::tempdir().unwrap();
    let a = run_single(&config(t1.path(), BUMP_SHORT)).unwrap();
    let b = run_single(&config(t2.path(), BUMP_SHORT)).unwrap();
    let ca = fs::read(&a.trajectory_csv).unwrap();
    let cb = fs::read(&b.trajectory_csv).unwrap();
    assert_eq!(ca, cb);
    assert!(ca.len() > 200);
}

#[test]
fn eps_study_mass_is_epsilon_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), BUMP_SHORT);
    let study = run_eps_study(&cfg, &[1e-2, 1e-3]).unwrap();
    let masses: Vec<f64> = study
        .members
        .iter()
        .map(|m| {
            let recs = &m.result.as_ref().unwrap().records;
            (recs.last().unwrap().mass - recs[0].mass) / recs[0].mass
        })
        .collect();
    // relative drift of each member, hence the difference across epsilon
    assert!(masses.iter().all(|d| d.abs() < 1e-10), "{masses:?}");
    let csv = fs::read_to_string(&study.comparison_csv).unwrap();
    assert!(csv.starts_with(EPS_CSV_HEADER));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn k_sweep_moments_increase_and_failures_are_isolated() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = "\n[grid]\ncells = 64\n\
        [initial]\nkind = \"concentration_family\"\nk = 1\n[initial.base]\nkind = \"constant\"\nvalue = 1.0\n\
        [time]\nt_end = 1e-5\nsample_interval = 1e-6\n";
    let cfg = config(tmp.path(), extra);
    let sweep = run_k_sweep(&cfg, &[1, 2, 4, 8, 16]).unwrap();
    assert!(sweep.moments_increasing());
    assert!(sweep.rows.iter().all(|r| r.status == "ok" && r.blowup_time.is_none()));
    let table = fs::read_to_string(&sweep.table).unwrap();
    assert!(table.lines().skip(1).all(|l| l.split(',').nth(2) == Some("none")));

    // zero base data violates positivity: every member fails, the table is still written
    let broken = config(tmp.path(), &extra.replace("value = 1.0", "value = 0.0"));
    let sweep = run_k_sweep(&broken, &[1, 2]).unwrap();
    assert_eq!(sweep.rows.len(), 2);
    assert!(sweep.rows.iter().all(|r| r.status.contains("failed") && r.run_id.is_none()));
    assert!(sweep.moments_increasing());
    let table = fs::read_to_string(&sweep.table).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn degenerate_bracket_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = "\n[grid]\ncells = 32\n\
        [initial]\nkind = \"concentration_family\"\nk = 1\n[initial.base]\nkind = \"constant\"\nvalue = 1.0\n\
        [time]\nt_end = 1e-4\nsample_interval = 1e-5\n";
    let cfg = config(tmp.path(), extra);
    let err = bisect_blowup_threshold(&cfg, 1, 2).unwrap_err();
    assert!(matches!(err, Error::BracketInvalid { .. }));
    assert!(err.to_string().starts_with("bracket invalid"));
}

#[test]
fn bisection_brackets_the_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = "epsilon = 1e-7\n[grid]\ncells = 256\ngrading_exponent = 3\n\
        [initial]\nkind = \"concentration_family\"\nk = 1\n[initial.base]\nkind = \"constant\"\nvalue = 1.0\n\
        [time]\nt_end = 20\nsample_interval = 0.2\n";
    let cfg = config(tmp.path(), extra);
    let r = bisect_blowup_threshold(&cfg, 16, 64).unwrap();
    let t = |k| r.evaluations.iter().find(|(j, _)| *j == k).map(|(_, t)| *t);
    assert_eq!(t(r.k_star).flatten().is_some(), true);
    assert_eq!(t(r.k_star - 1), Some(None));
    assert!(r.m_estimate > 0.0 && r.b > 0.0 && r.d >= 0.0);
}

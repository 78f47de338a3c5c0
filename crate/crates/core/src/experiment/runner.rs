use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::diagnostics::oracles::{oracle_fuzz, FuzzSummary};
use crate::diagnostics::{moment_inequality_monitor, DiagnosticsRecord, MomentReport, MonitorSettings, CSV_HEADER};
use crate::error::{Error, Result};
use crate::mesh::{Field, Grid};
use crate::solver::{run, BlowupEvent, Discretization, NewtonSettings, RunSettings, Trajectory};

/// First 16 hex digits of the SHA-256 of the config echo.
pub fn run_id(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(cfg.echo().as_bytes());
    hex::encode(&digest[..8])
}

pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join(run_id(cfg))
}

/// Discretization, initial field and solver settings described by `cfg`.
pub fn prepare(cfg: &RunConfig) -> Result<(Discretization, Field, RunSettings)> {
    let grid = Grid::new(cfg.grid.cells, cfg.grid.grading_exponent, cfg.parameters.length)?;
    let u0 = cfg.initial.sample(&grid, &cfg.parameters)?;
    let disc = Discretization::new(cfg.parameters, grid)?.with_flux_form(cfg.solver.flux_form);
    let t = &cfg.time;
    let sup0 = u0.sup_norm();
    let mut s = RunSettings::new(t.t_end, t.sample_interval, sup0);
    s.dt_init = t.dt_init;
    s.dt_min = t.dt_min;
    s.dt_max = t.dt_max;
    s.step_tolerance = (t.step_tolerance > 0.0).then_some(t.step_tolerance);
    let th = &cfg.thresholds;
    if let Some(v) = th.supnorm_threshold {
        s.supnorm_threshold = v;
    }
    s.newton = NewtonSettings {
        tolerance: th.newton_tolerance,
        max_iterations: th.newton_max_iterations,
        positivity_floor: th.positivity_floor.unwrap_or(s.newton.positivity_floor),
        scheme: cfg.solver.scheme,
    };
    s.max_steps = th.max_steps;
    Ok((disc, u0, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub final_time: f64,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub event: Option<BlowupEvent>,
    /// Moment monitor over the last quarter of the run, when long enough.
    pub moment: Option<MomentReport>,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub config_echo: String,
    pub trajectory_csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub events: Vec<BlowupEvent>,
    pub oracle_reports: Vec<PathBuf>,
    pub records: Vec<DiagnosticsRecord>,
    pub initial: Field,
    pub summary: RunSummary,
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub(super) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn trajectory_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(200 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Moment monitor over the final quarter of a trajectory.
pub fn final_quartile_monitor(
    traj: &Trajectory,
    u0: &Field,
    disc: &Discretization,
    c3_multiple: f64,
) -> Option<MomentReport> {
    let t_last = traj.records.last()?.t;
    let settings = MonitorSettings {
        window: (0.75 * t_last, t_last),
        ..MonitorSettings::whole(c3_multiple)
    };
    moment_inequality_monitor(&traj.records, u0, disc, &settings).ok()
}

/// Runs one configuration and writes its directory:
/// `config`, `trajectory.csv`, `snapshots/NNNNNNNN.txt`, `events.json`,
/// `summary.json` and an empty `oracles/`.
pub fn run_single(cfg: &RunConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let (disc, u0, settings) = prepare(cfg)?;
    let traj = run(&disc, u0.clone(), &settings)?;

    let id = run_id(cfg);
    let dir = cfg.output_dir.join(&id);
    let snap_dir = dir.join("snapshots");
    let oracle_dir = dir.join("oracles");
    create_dir(&snap_dir)?;
    create_dir(&oracle_dir)?;

    let echo = cfg.echo();
    write(&dir.join("config"), &echo)?;
    let trajectory = dir.join("trajectory.csv");
    write(&trajectory, trajectory_csv(&traj.records))?;

    let centers = disc.grid().centers();
    let mut snapshots = Vec::with_capacity(traj.snapshots.len());
    for s in &traj.snapshots {
        let path = snap_dir.join(format!("{:08}.txt", s.step));
        let mut text = format!("# t = {:.16e}\n# x u\n", s.t);
        for (x, u) in centers.iter().zip(&s.values) {
            text.push_str(&format!("{x:.16e} {u:.16e}\n"));
        }
        write(&path, text)?;
        snapshots.push(path);
    }

    let events: Vec<BlowupEvent> = traj.event.into_iter().collect();
    write(&dir.join("events.json"), serde_json::to_string_pretty(&events)?)?;

    let summary = RunSummary {
        run_id: id,
        final_time: traj.final_state.t,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        event: traj.event,
        moment: final_quartile_monitor(&traj, &u0, &disc, cfg.study.c3_multiple),
    };
    write(&dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;

    Ok(RunArtifacts {
        dir,
        config_echo: echo,
        trajectory_csv: trajectory,
        snapshots,
        events,
        oracle_reports: Vec::new(),
        records: traj.records,
        initial: u0,
        summary,
    })
}

/// Fuzzes the interpolation inequalities with the `[oracles]` settings and
/// writes `oracles/fuzz.csv` and `oracles/summary.json` into the run directory.
pub fn run_oracles(cfg: &RunConfig) -> Result<(FuzzSummary, Vec<PathBuf>)> {
    let summary = oracle_fuzz(&cfg.parameters, &cfg.oracles)?;
    let dir = run_dir(cfg);
    let oracle_dir = dir.join("oracles");
    create_dir(&oracle_dir)?;
    write(&dir.join("config"), cfg.echo())?;
    let csv = oracle_dir.join("fuzz.csv");
    write(&csv, summary.to_csv())?;
    let json = oracle_dir.join("summary.json");
    write(&json, serde_json::to_string_pretty(&summary.lemmas)?)?;
    Ok((summary, vec![csv, json]))
}

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::runner::{create_dir, prepare, run_dir, run_single, RunArtifacts};
use crate::error::{Error, Result};
use crate::initdata::log_deficit;
use crate::mesh::exact_cell_weights;
use crate::solver::run;

/// Outcome of one sweep member; failures are recorded, never propagated.
#[derive(Debug)]
pub struct Member<K> {
    pub key: K,
    pub result: Result<RunArtifacts>,
}

fn status<T>(r: &Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("\"failed: {}\"", e.to_string().replace('"', "'")),
    }
}

fn write_table(cfg: &RunConfig, name: &str, text: &str) -> Result<PathBuf> {
    let dir = run_dir(cfg);
    create_dir(&dir)?;
    let config = dir.join("config");
    fs::write(&config, cfg.echo()).map_err(|e| Error::io(&config, e))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub const EPS_CSV_HEADER: &str = "epsilon,status,t_final,mass,energy,entropy,moment_y,sup_norm,event,run_id";

#[derive(Debug)]
pub struct EpsStudy {
    pub members: Vec<Member<f64>>,
    pub comparison_csv: PathBuf,
}

/// One single run per epsilon (in parallel) plus `eps_study.csv` comparing
/// the final-time functionals, written to the study's own directory.
pub fn run_eps_study(cfg: &RunConfig, eps_list: &[f64]) -> Result<EpsStudy> {
    cfg.validate()?;
    let members: Vec<Member<f64>> = eps_list
        .par_iter()
        .map(|&eps| Member {
            key: eps,
            result: run_single(&cfg.with_epsilon(eps)),
        })
        .collect();
    let mut csv = format!("{EPS_CSV_HEADER}\n");
    for m in &members {
        match &m.result {
            Ok(a) => {
                let r = a.records.last().expect("a run records its initial state");
                let _ = writeln!(
                    csv,
                    "{:.16e},ok,{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                    m.key,
                    r.t,
                    r.mass,
                    r.energy,
                    r.entropy,
                    r.moment_y,
                    r.sup_norm,
                    a.summary.event.is_some(),
                    a.summary.run_id
                );
            }
            Err(_) => {
                let _ = writeln!(csv, "{:.16e},{},,,,,,,,", m.key, status(&m.result));
            }
        }
    }
    let comparison_csv = write_table(cfg, "eps_study.csv", &csv)?;
    Ok(EpsStudy { members, comparison_csv })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSweepRow {
    pub k: u64,
    /// `int x^{beta-kappa} u_0k`.
    pub initial_moment: f64,
    pub blowup_time: Option<f64>,
    pub status: String,
    pub run_id: Option<String>,
}

#[derive(Debug)]
pub struct KSweep {
    pub rows: Vec<KSweepRow>,
    pub table: PathBuf,
}

impl KSweep {
    pub fn moments_increasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].initial_moment > w[0].initial_moment)
    }
}

pub const K_SWEEP_HEADER: &str = "k,initial_moment,blowup_time,status,run_id";

fn initial_moment(cfg: &RunConfig) -> Result<f64> {
    let (disc, u0, _) = prepare(cfg)?;
    Ok(disc.moment_weights().iter().zip(u0.values()).map(|(w, u)| w * u).sum())
}

/// Runs the concentration family for every `k` (in parallel) and writes
/// `k_sweep.csv` with the initial moment and blow-up time, or `none`.
pub fn run_k_sweep(cfg: &RunConfig, k_list: &[u64]) -> Result<KSweep> {
    cfg.validate()?;
    let mut ks = k_list.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let rows: Vec<KSweepRow> = ks
        .par_iter()
        .map(|&k| {
            let member = cfg.with_k(k);
            let moment = member.as_ref().map_err(|e| e.to_string()).and_then(|c| initial_moment(c).map_err(|e| e.to_string()));
            let result = member.and_then(|c| run_single(&c));
            KSweepRow {
                k,
                initial_moment: moment.unwrap_or(f64::NAN),
                blowup_time: result.as_ref().ok().and_then(|a| a.summary.event.map(|e| e.t_event)),
                status: status(&result),
                run_id: result.as_ref().ok().map(|a| a.summary.run_id.clone()),
            }
        })
        .collect();
    let mut csv = format!("{K_SWEEP_HEADER}\n");
    for r in &rows {
        let t = r.blowup_time.map_or_else(|| "none".to_string(), |t| format!("{t:.16e}"));
        let _ = writeln!(
            csv,
            "{},{:.16e},{},{},{}",
            r.k,
            r.initial_moment,
            t,
            r.status,
            r.run_id.as_deref().unwrap_or("")
        );
    }
    let table = write_table(cfg, "k_sweep.csv", &csv)?;
    Ok(KSweep { rows, table })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionReport {
    /// Smallest index whose run produced an event; `k_star - 1` did not.
    pub k_star: u64,
    /// `int x^{beta-kappa} u_0k*`, the empirical stand-in for the threshold.
    pub m_estimate: f64,
    /// `int x^beta u_0k*`.
    pub b: f64,
    /// `int x^beta ln_+(1/u_0k*)`.
    pub d: f64,
    /// Every `(k, event time)` evaluated, in order.
    pub evaluations: Vec<(u64, Option<f64>)>,
}

fn event_time(cfg: &RunConfig, k: u64) -> Result<Option<f64>> {
    let member = cfg.with_k(k)?;
    let (disc, u0, settings) = prepare(&member)?;
    Ok(run(&disc, u0, &settings)?.event.map(|e| e.t_event))
}

/// Integer bisection of the concentration index between a bracket whose
/// lower end completes and whose upper end blows up within the horizon.
///
/// Only `k` varies, so the result is a one-dimensional slice of the
/// threshold, which in general depends on the mass, the log deficit and
/// the horizon as well.
pub fn bisect_blowup_threshold(cfg: &RunConfig, k_low: u64, k_high: u64) -> Result<BisectionReport> {
    cfg.validate()?;
    if k_low == 0 || k_low >= k_high {
        return Err(Error::InvalidArgument(format!("need 1 <= k_low < k_high, got {k_low}, {k_high}")));
    }
    let (lo_t, hi_t) = rayon::join(|| event_time(cfg, k_low), || event_time(cfg, k_high));
    let (lo_t, hi_t) = (lo_t?, hi_t?);
    let mut evaluations = vec![(k_low, lo_t), (k_high, hi_t)];
    if lo_t.is_some() || hi_t.is_none() {
        return Err(Error::BracketInvalid {
            k_low,
            k_high,
            low_blows_up: lo_t.is_some(),
            high_blows_up: hi_t.is_some(),
        });
    }
    let (mut lo, mut hi) = (k_low, k_high);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let t = event_time(cfg, mid)?;
        evaluations.push((mid, t));
        if t.is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let member = cfg.with_k(hi)?;
    let (disc, u0, _) = prepare(&member)?;
    let grid = disc.grid();
    let b = exact_cell_weights(grid, cfg.parameters.beta, 0.0)?
        .iter()
        .zip(u0.values())
        .map(|(w, u)| w * u)
        .sum();
    let report = BisectionReport {
        k_star: hi,
        m_estimate: disc.moment_weights().iter().zip(u0.values()).map(|(w, u)| w * u).sum(),
        b,
        d: log_deficit(grid, u0.values(), cfg.parameters.beta)?,
        evaluations,
    };
    write_table(cfg, "bisect.json", &serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

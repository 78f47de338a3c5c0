//! Configuration documents, run orchestration and on-disk artifacts.
//!
//! Every run lives in `<output_dir>/<run-id>/`, where the run id hashes the
//! resolved config echo. Sweeps run their members in parallel; each member
//! writes only its own directory, and a failing member is reported in the
//! sweep table instead of aborting its siblings.

mod config;
mod runner;
mod studies;

pub use config::{parse_config, parse_document, GridSpec, Mode, RunConfig, SolverSpec, StudySpec, Thresholds, TimeSpec};
pub use runner::{
    final_quartile_monitor, prepare, run_dir, run_id, run_oracles, run_single, trajectory_csv, RunArtifacts,
    RunSummary,
};
pub use studies::{
    bisect_blowup_threshold, run_eps_study, run_k_sweep, BisectionReport, EpsStudy, KSweep, KSweepRow, Member,
    EPS_CSV_HEADER, K_SWEEP_HEADER,
};

use crate::error::Result;

/// What [`execute`] produced for the config's mode.
#[derive(Debug)]
pub enum Outcome {
    Single(RunArtifacts),
    EpsStudy(EpsStudy),
    KSweep(KSweep),
    Bisection(BisectionReport),
}

/// Dispatches on `cfg.mode`, taking study lists and brackets from `[study]`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    Ok(match cfg.mode {
        Mode::Single => Outcome::Single(run_single(cfg)?),
        Mode::EpsStudy => Outcome::EpsStudy(run_eps_study(cfg, &cfg.study.eps_list)?),
        Mode::KSweep => Outcome::KSweep(run_k_sweep(cfg, &cfg.study.k_list)?),
        Mode::MBisect => Outcome::Bisection(bisect_blowup_threshold(cfg, cfg.study.k_low, cfg.study.k_high)?),
    })
}

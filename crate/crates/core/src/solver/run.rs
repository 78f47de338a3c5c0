use serde::{Deserialize, Serialize};

use super::scheme::Discretization;
use super::step::{NewtonSettings, State, StepFailure};
use crate::diagnostics::{record, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::mesh::Field;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub sample_interval: f64,
    /// Step-doubling tolerance on `|u_full - u_half| / sup u`; `None` accepts
    /// every step Newton can complete.
    pub step_tolerance: Option<f64>,
    pub growth: f64,
    pub supnorm_threshold: f64,
    pub newton: NewtonSettings,
    /// Stop cleanly after this many accepted steps.
    pub max_steps: Option<u64>,
}

impl RunSettings {
    /// Defaults scaled to the horizon and the initial data: `dt_min = 1e-12 T`,
    /// threshold `1e4 sup u0`, floor `1e-12 sup u0`.
    pub fn new(t_end: f64, sample_interval: f64, initial_sup: f64) -> Self {
        RunSettings {
            t_end,
            dt_init: 1e-6 * t_end,
            dt_min: 1e-12 * t_end,
            dt_max: sample_interval,
            sample_interval,
            step_tolerance: Some(1e-3),
            growth: 1.2,
            supnorm_threshold: 1e4 * initial_sup,
            newton: NewtonSettings {
                positivity_floor: 1e-12 * initial_sup,
                ..NewtonSettings::default()
            },
            max_steps: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("t_end", self.t_end),
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
            ("sample_interval", self.sample_interval),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if self.growth < 1.0 {
            return Err(Error::InvalidArgument("step growth factor must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupTrigger {
    SupnormExceeded,
    DtUnderflow,
    NewtonDivergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupEvent {
    pub detected: bool,
    pub t_event: f64,
    pub trigger: BlowupTrigger,
    pub sup_norm_at_event: f64,
    /// Center of the cell holding the maximum at the event.
    pub argmax_x: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: u64,
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<Snapshot>,
    pub event: Option<BlowupEvent>,
    pub final_state: State,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
}

enum Attempt {
    Accepted(State),
    Rejected(Option<StepFailure>),
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn attempt(disc: &Discretization, state: &State, h: f64, s: &RunSettings) -> Attempt {
    let full = match disc.implicit_step(state, h, &s.newton) {
        Ok((next, _)) => next,
        Err(r) => return Attempt::Rejected(Some(r.failure)),
    };
    let Some(tol) = s.step_tolerance else {
        return Attempt::Accepted(full);
    };
    let half = match disc
        .implicit_step(state, 0.5 * h, &s.newton)
        .and_then(|(mid, _)| disc.implicit_step(&mid, 0.5 * h, &s.newton))
    {
        Ok((next, _)) => next,
        Err(r) => return Attempt::Rejected(Some(r.failure)),
    };
    let err = sup_diff(full.u.values(), half.u.values()) / half.u.sup_norm();
    if err > tol {
        return Attempt::Rejected(None);
    }
    Attempt::Accepted(State {
        step_count: state.step_count + 1,
        ..half
    })
}

fn event(disc: &Discretization, u: &Field, t: f64, trigger: BlowupTrigger) -> BlowupEvent {
    let i = u.argmax();
    let x = disc.grid().centers()[i];
    log::info!(
        "blow-up event {trigger:?} at t = {t:e}: sup u = {:e} in cell {i} (x = {x:e})",
        u.sup_norm()
    );
    BlowupEvent {
        detected: true,
        t_event: t,
        trigger,
        sup_norm_at_event: u.sup_norm(),
        argmax_x: x,
    }
}

/// Advances `u0` to `t_end` with adaptive implicit steps, sampling diagnostics
/// and snapshots every `sample_interval`, or stops at the first blow-up event.
pub fn run(disc: &Discretization, u0: Field, settings: &RunSettings) -> Result<Trajectory> {
    settings.validate()?;
    if u0.len() != disc.cells() {
        return Err(Error::InvalidArgument(format!(
            "initial field has {} cells, grid has {}",
            u0.len(),
            disc.cells()
        )));
    }
    let floor = settings.newton.positivity_floor;
    if let Some((i, v)) = u0.values().iter().enumerate().find(|(_, v)| **v < floor || **v <= 0.0) {
        return Err(Error::PositivityViolation {
            cell: i,
            value: *v,
            floor,
        });
    }
    let t0 = u0.time();
    let mut state = State::new(u0, settings.dt_init);
    let mut records = vec![record(disc, &state.u, 0.0, floor)];
    let mut snapshots = vec![Snapshot {
        step: 0,
        t: t0,
        values: state.u.values().to_vec(),
    }];
    let mut ev = None;
    let (mut accepted, mut rejected) = (0u64, 0u64);
    let mut dt = settings.dt_init.min(settings.dt_max);
    let mut sample_index = 1u64;
    let t_end = t0 + settings.t_end;
    let next_sample = |k: u64| (t0 + k as f64 * settings.sample_interval).min(t_end);

    while state.t < t_end {
        if settings.max_steps.is_some_and(|m| accepted >= m) {
            break;
        }
        let target = next_sample(sample_index);
        // a step that would land within rounding of the sample is stretched onto it
        let clipped = target - state.t <= dt * (1.0 + 1e-9);
        let h = if clipped { target - state.t } else { dt };
        match attempt(disc, &state, h, settings) {
            Attempt::Accepted(mut next) => {
                accepted += 1;
                if clipped {
                    next.t = target;
                    next.u = next.u.with_time(target);
                } else {
                    dt = (dt * settings.growth).min(settings.dt_max);
                }
                next.dt = h;
                state = next;
                let sup = state.u.sup_norm();
                if sup > settings.supnorm_threshold {
                    records.push(record(disc, &state.u, h, floor));
                    snapshots.push(Snapshot {
                        step: state.step_count,
                        t: state.t,
                        values: state.u.values().to_vec(),
                    });
                    ev = Some(event(disc, &state.u, state.t, BlowupTrigger::SupnormExceeded));
                    break;
                }
                if clipped {
                    records.push(record(disc, &state.u, h, floor));
                    snapshots.push(Snapshot {
                        step: state.step_count,
                        t: state.t,
                        values: state.u.values().to_vec(),
                    });
                    sample_index += 1;
                }
            }
            Attempt::Rejected(failure) => {
                rejected += 1;
                dt = 0.5 * h;
                log::debug!("step of {h:e} at t = {:e} rejected ({failure:?})", state.t);
                if dt < settings.dt_min {
                    let trigger = match failure {
                        Some(StepFailure::NewtonDivergence) => BlowupTrigger::NewtonDivergence,
                        _ => BlowupTrigger::DtUnderflow,
                    };
                    records.push(record(disc, &state.u, h, floor));
                    ev = Some(event(disc, &state.u, state.t, trigger));
                    break;
                }
            }
        }
    }
    Ok(Trajectory {
        records,
        snapshots,
        event: ev,
        final_state: state,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

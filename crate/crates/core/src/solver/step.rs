use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::scheme::Discretization;
use crate::error::Error;
use crate::mesh::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    ImplicitEuler,
    Trapezoidal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Relative residual tolerance; the absolute one is `tolerance * (1 + sup|u|)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Absolute lower bound every accepted state must respect.
    pub positivity_floor: f64,
    pub scheme: TimeScheme,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        NewtonSettings {
            tolerance: 1e-10,
            max_iterations: 30,
            positivity_floor: 0.0,
            scheme: TimeScheme::ImplicitEuler,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub t: f64,
    pub dt: f64,
    pub step_count: u64,
}

impl State {
    pub fn new(u: Field, dt: f64) -> Self {
        let t = u.time();
        State {
            u,
            t,
            dt,
            step_count: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub newton_iterations: usize,
    pub residual: f64,
    pub dt_next: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    NewtonDivergence,
    Positivity { cell: usize, value: f64 },
    Singular { row: usize },
}

/// A rejected step; the input state is untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRejection {
    pub outcome: StepOutcome,
    pub failure: StepFailure,
    pub floor: f64,
}

impl From<StepRejection> for Error {
    fn from(r: StepRejection) -> Self {
        match r.failure {
            StepFailure::NewtonDivergence => Error::NewtonDivergence {
                iterations: r.outcome.newton_iterations,
                residual: r.outcome.residual,
            },
            StepFailure::Positivity { cell, value } => Error::PositivityViolation {
                cell,
                value,
                floor: r.floor,
            },
            StepFailure::Singular { row } => Error::SingularMatrix(row),
        }
    }
}

const BAND: usize = 2;
const MIN_DAMPING: f64 = 1.0 / 1024.0;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl Discretization {
    /// Residual `u - base - theta rhs(u)` together with `rhs(u)`.
    fn residual(&self, u: &[f64], base: &[f64], theta: f64) -> (Vec<f64>, Vec<f64>) {
        let r = self.rhs(u);
        let res = u
            .iter()
            .zip(base)
            .zip(&r)
            .map(|((u, b), r)| u - b - theta * r)
            .collect();
        (res, r)
    }

    /// `I - theta d(rhs)/du`, by forward differences over five interleaved
    /// column groups (the stencil couples cells at most two apart).
    fn jacobian(&self, u: &[f64], r0: &[f64], theta: f64) -> BandMatrix {
        let n = u.len();
        let mut jac = BandMatrix::zeros(n, BAND, BAND);
        for i in 0..n {
            jac.set(i, i, 1.0);
        }
        let colors = 2 * BAND + 1;
        let mut up = u.to_vec();
        for c in 0..colors {
            let cols: Vec<usize> = (c..n).step_by(colors).collect();
            let mut steps = Vec::with_capacity(cols.len());
            for &j in &cols {
                let h = 1.5e-8 * u[j].abs().max(f64::MIN_POSITIVE);
                up[j] = u[j] + h;
                steps.push(up[j] - u[j]);
            }
            let rp = self.rhs(&up);
            for (&j, &h) in cols.iter().zip(&steps) {
                for i in j.saturating_sub(BAND)..=(j + BAND).min(n - 1) {
                    jac.add(i, j, -theta * (rp[i] - r0[i]) / h);
                }
                up[j] = u[j];
            }
        }
        jac
    }

    /// One implicit step of size `dt` from `state`.
    ///
    /// The Newton iterate only serves to evaluate the flux: the new state is
    /// `u_old + dt rhs(u*)` (or its trapezoidal analogue), so mass is conserved
    /// to round-off no matter where Newton stopped.
    pub fn implicit_step(
        &self,
        state: &State,
        dt: f64,
        settings: &NewtonSettings,
    ) -> std::result::Result<(State, StepOutcome), StepRejection> {
        let old = state.u.values();
        let (base, theta) = match settings.scheme {
            TimeScheme::ImplicitEuler => (old.to_vec(), dt),
            TimeScheme::Trapezoidal => {
                let r = self.rhs(old);
                let b: Vec<f64> = old.iter().zip(&r).map(|(u, r)| u + 0.5 * dt * r).collect();
                (b, 0.5 * dt)
            }
        };
        let tol = settings.tolerance * (1.0 + max_abs(old));
        let reject = |failure, iterations, residual| StepRejection {
            outcome: StepOutcome {
                accepted: false,
                newton_iterations: iterations,
                residual,
                dt_next: 0.5 * dt,
            },
            failure,
            floor: settings.positivity_floor,
        };

        let mut u = old.to_vec();
        let (mut res, mut r) = self.residual(&u, &base, theta);
        let mut norm = max_abs(&res);
        let mut iterations = 0;
        while !(norm <= tol) {
            if iterations == settings.max_iterations || !norm.is_finite() {
                return Err(reject(StepFailure::NewtonDivergence, iterations, norm));
            }
            let jac = self.jacobian(&u, &r, theta);
            let neg: Vec<f64> = res.iter().map(|v| -v).collect();
            let delta = jac
                .solve(&neg)
                .map_err(|e| match e {
                    Error::SingularMatrix(row) => reject(StepFailure::Singular { row }, iterations, norm),
                    _ => reject(StepFailure::NewtonDivergence, iterations, norm),
                })?;
            // Near round-off the residual of a stiff step can stagnate above
            // `tol`; a correction below `tol` means the iterate is converged.
            if max_abs(&delta) <= tol {
                let cand: Vec<f64> = u.iter().zip(&delta).map(|(u, d)| u + d).collect();
                if cand.iter().all(|v| *v > 0.0) {
                    let (cres, cr) = self.residual(&cand, &base, theta);
                    r = cr;
                    norm = max_abs(&cres).min(max_abs(&delta));
                    iterations += 1;
                    break;
                }
            }
            let mut lambda = 1.0;
            loop {
                let cand: Vec<f64> = u.iter().zip(&delta).map(|(u, d)| u + lambda * d).collect();
                if cand.iter().all(|v| *v > 0.0 && v.is_finite()) {
                    let (cres, cr) = self.residual(&cand, &base, theta);
                    let cnorm = max_abs(&cres);
                    if cnorm <= tol || cnorm < (1.0 - 1e-4 * lambda) * norm {
                        u = cand;
                        res = cres;
                        r = cr;
                        norm = cnorm;
                        break;
                    }
                }
                lambda *= 0.5;
                if lambda < MIN_DAMPING {
                    return Err(reject(StepFailure::NewtonDivergence, iterations + 1, norm));
                }
            }
            iterations += 1;
        }

        let new: Vec<f64> = base.iter().zip(&r).map(|(b, r)| b + theta * r).collect();
        if let Some((cell, &value)) = new
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= settings.positivity_floor) || **v <= 0.0)
        {
            return Err(reject(StepFailure::Positivity { cell, value }, iterations, norm));
        }
        let t = state.t + dt;
        let field = Field::new(new, t).map_err(|_| {
            reject(
                StepFailure::Positivity {
                    cell: 0,
                    value: f64::NAN,
                },
                iterations,
                norm,
            )
        })?;
        Ok((
            State {
                u: field,
                t,
                dt,
                step_count: state.step_count + 1,
            },
            StepOutcome {
                accepted: true,
                newton_iterations: iterations,
                residual: norm,
                dt_next: dt,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Grid;
    use crate::paramspace::ModelParameters;

    fn setup(cells: usize) -> Discretization {
        let p = ModelParameters::physical();
        let grid = Grid::new(cells, 2.0, 1.0).unwrap();
        Discretization::new(p, grid).unwrap()
    }

    fn perturbed(d: &Discretization, amp: f64) -> Field {
        let v = d
            .grid()
            .centers()
            .iter()
            .map(|x| 1.0 + amp * (std::f64::consts::PI * x).cos())
            .collect();
        Field::new(v, 0.0).unwrap()
    }

    #[test]
    fn constant_is_fixed_point_for_any_dt() {
        let d = setup(64);
        let s = State::new(Field::constant(2.5, 64).unwrap(), 1.0);
        for dt in [1e-8, 1.0, 1e6] {
            let (next, out) = d.implicit_step(&s, dt, &NewtonSettings::default()).unwrap();
            assert!(out.accepted);
            assert!(out.newton_iterations <= 1);
            assert_eq!(next.u.values(), s.u.values());
            assert_eq!(next.t, dt);
        }
    }

    #[test]
    fn perturbation_conserves_mass() {
        let d = setup(128);
        let s = State::new(perturbed(&d, 0.2), 1e-4);
        let m0 = d.mass(s.u.values());
        let (next, out) = d.implicit_step(&s, 1e-4, &NewtonSettings::default()).unwrap();
        assert!(out.newton_iterations >= 1);
        let m1 = d.mass(next.u.values());
        assert!(((m1 - m0) / m0).abs() < 1e-12, "{m0} {m1}");
        assert!(next.u.values() != s.u.values());
    }

    #[test]
    fn trapezoidal_agrees_with_euler_for_small_steps() {
        let d = setup(64);
        let s = State::new(perturbed(&d, 0.1), 1e-9);
        let ie = d.implicit_step(&s, 1e-9, &NewtonSettings::default()).unwrap().0;
        let tr = NewtonSettings {
            scheme: TimeScheme::Trapezoidal,
            ..NewtonSettings::default()
        };
        let tz = d.implicit_step(&s, 1e-9, &tr).unwrap().0;
        let diff = ie
            .u
            .values()
            .iter()
            .zip(tz.u.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let change = ie
            .u
            .values()
            .iter()
            .zip(s.u.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 0.1 * change, "{diff} vs {change}");
    }

    #[test]
    fn huge_step_is_rejected_without_touching_state() {
        let d = setup(128);
        let v: Vec<f64> = d
            .grid()
            .centers()
            .iter()
            .map(|x| 1e-3 + 50.0 * (-((x - 0.02) / 0.01).powi(2)).exp())
            .collect();
        let s = State::new(Field::new(v, 0.0).unwrap(), 1.0);
        let before = s.clone();
        let settings = NewtonSettings {
            positivity_floor: 1e-12 * s.u.sup_norm(),
            max_iterations: 5,
            ..NewtonSettings::default()
        };
        match d.implicit_step(&s, 1e6, &settings) {
            Err(rej) => {
                assert!(!rej.outcome.accepted);
                assert_eq!(rej.outcome.dt_next, 5e5);
                let e: Error = rej.into();
                assert!(matches!(
                    e,
                    Error::NewtonDivergence { .. } | Error::PositivityViolation { .. } | Error::SingularMatrix(_)
                ));
            }
            Ok(_) => panic!("expected rejection"),
        }
        assert_eq!(s, before);
    }
}

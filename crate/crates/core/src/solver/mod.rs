//! Time integration of the regularized problem.
//!
//! Spatial part: cell-centered finite volumes on a graded grid,
//!
//! ```text
//! m_i du_i/dt = F_{i+1/2} - F_{i-1/2},   F = (J_{i+1} - J_i) / (x_{i+1} - x_i),
//! ```
//!
//! with `m_i = (x_i + eps)^beta dx_i`, `F = 0` on both end faces, and
//! `J = g_eps u^{n+2} (1/u)_xx` (identical to `-g u^n u_xx + 2 g u^{n-1} u_x^2`).
//! The flux-difference form conserves `sum m_i u_i` exactly, and with the
//! quotient form of `J` the semi-discrete entropy `-sum m_i ln u_i` decays at
//! the rate `sum g u^{n+2} (D2(1/u))^2`; implicit Euler inherits both.

mod banded;
mod run;
mod scheme;
mod step;

pub use banded::BandMatrix;
pub use run::{run, BlowupEvent, BlowupTrigger, RunSettings, Snapshot, Trajectory};
pub use scheme::{Discretization, FluxForm};
pub use step::{NewtonSettings, State, StepFailure, StepOutcome, StepRejection, TimeScheme};

//! Functionals along trajectories, the nonlinear Gronwall predictor, the
//! moment-growth monitor, and numeric probes of the weighted interpolation
//! inequalities.

mod gronwall;
mod moment;
pub mod oracles;
mod record;

pub use gronwall::{gronwall_bound, gronwall_ode_oracle, GronwallInputs};
pub use moment::{moment_inequality_monitor, MomentReport, MonitorSettings};
pub use record::{entropy_production_density, record, DiagnosticsRecord, CSV_HEADER};

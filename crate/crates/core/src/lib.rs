//! Numerical simulator for the degenerate fourth-order parabolic model of
//! Bose-Einstein condensation,
//!
//! ```text
//! u_t = x^{-beta} ( x^alpha u^{n+2} (1/u)_xx )_xx   on (0, L),
//! ```
//!
//! advanced through its regularized family with weights `g_eps = z_eps^alpha`
//! and `(x + eps)^{-beta}`.
//!
//! The crate is organised bottom-up:
//!
//! * [`paramspace`]: model parameters, the critical exponent `n*`, and the
//!   admissibility windows for local existence and finite-time blow-up.
//! * [`mesh`]: graded grids, the regularized weight family, weighted
//!   quadrature and finite-difference operators.
//! * [`initdata`]: smooth bumps, the concentration family
//!   `u0 + k^theta phi(k x)` and the regularization of rough initial data.
//! * [`solver`]: the mass-conservative, entropy-dissipative implicit
//!   finite-volume scheme with adaptive stepping and blow-up detection.
//! * [`diagnostics`]: mass, energy, entropy, entropy production, the moment
//!   `y(t)`, the nonlinear Gronwall predictor, and numeric oracles for the
//!   weighted interpolation inequalities.
//! * [`experiment`]: configuration documents, run orchestration (single runs,
//!   epsilon studies, k sweeps, threshold bisection) and persistence.

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod initdata;
pub mod mesh;
pub mod paramspace;
pub mod solver;

pub use error::{Error, Result};
pub use mesh::{Field, Grid, WeightProfiles};
pub use paramspace::{AdmissibilityMode, AdmissibilityReport, ModelParameters};

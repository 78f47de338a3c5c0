//! Spatial discretization: graded grids, the regularized weight family,
//! weighted quadrature and nonuniform finite-difference operators.

mod field;
mod grid;
mod ops;
pub mod quadrature;
mod weights;

pub use field::Field;
pub use grid::{build_grid, graded_faces, Grid};
pub use ops::DiffOps;
pub use quadrature::{cell_weights, exact_cell_weights, weighted_integral};
pub use weights::{g_eps, ramp, z_eps, zeta_eps, WeightProfiles};

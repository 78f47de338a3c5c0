use std::path::PathBuf;

use thiserror::Error;

use crate::paramspace::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid needs at least 8 cells, got {0}")]
    TooFewCells(usize),

    #[error("parameters are not admissible: {}", format_violations(.0))]
    Inadmissible(Vec<Violation>),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("step produced u = {value:e} below the positivity floor {floor:e} in cell {cell}")]
    PositivityViolation { cell: usize, value: f64, floor: f64 },

    #[error("singular Jacobian at row {0}")]
    SingularMatrix(usize),

    #[error("mollifier cannot reach the L2 tolerance: achieved {achieved:e}, required {required:e}")]
    MollifierTolerance { achieved: f64, required: f64 },

    #[error("window has {0} samples, at least 10 are required")]
    WindowTooShort(usize),

    #[error(
        "bracket invalid: need completion at k={k_low} and blow-up at k={k_high}, \
         got blow-up = {low_blows_up} and {high_blows_up}"
    )]
    BracketInvalid {
        k_low: u64,
        k_high: u64,
        low_blows_up: bool,
        high_blows_up: bool,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

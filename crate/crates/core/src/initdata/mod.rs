//! Initial data: smooth bumps, tabulated profiles, the concentration family
//! `u0 + k^theta phi(k x)`, and the regularization of rough data.

mod regularize;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{Field, Grid};
use crate::paramspace::ModelParameters;

pub use regularize::{regularize_initial_data, Regularization, RegularizationSchedule, RegularizedMember};

/// `height exp(1 - 1/(1 - s^2))` with `s = (x - center)/width` inside the
/// support, zero outside. Smooth, compactly supported, peak `height` at `center`.
pub fn standard_bump(x: f64, center: f64, width: f64, height: f64) -> f64 {
    let s = (x - center) / width;
    if s.abs() >= 1.0 {
        0.0
    } else {
        height * (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub height: f64,
}

impl Bump {
    /// The canonical profile on `(L/4, 3L/4)` with unit height.
    pub fn canonical(length: f64) -> Self {
        Bump {
            center: 0.5 * length,
            width: 0.25 * length,
            height: 1.0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        standard_bump(x, self.center, self.width, self.height)
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.width, self.center + self.width)
    }

    pub fn validate(&self, length: f64) -> Result<()> {
        let (a, b) = self.support();
        if !(self.width > 0.0) || !(self.height >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "bump needs width > 0 and height >= 0, got width {} height {}",
                self.width, self.height
            )));
        }
        if a <= 0.0 || b >= length {
            return Err(Error::InvalidArgument(format!(
                "bump support [{a}, {b}] must lie inside (0, {length})"
            )));
        }
        Ok(())
    }
}

/// Admissible window `(beta + 1 - kappa, beta + 1)` for the concentration exponent.
pub fn theta_window(params: &ModelParameters) -> (f64, f64) {
    (params.beta + 1.0 - params.kappa, params.beta + 1.0)
}

pub fn default_theta(params: &ModelParameters) -> f64 {
    let (lo, hi) = theta_window(params);
    0.5 * (lo + hi)
}

fn check_theta(theta: f64, params: &ModelParameters, lp_exponent: Option<f64>) -> Result<()> {
    let (lo, hi) = theta_window(params);
    if !(theta > lo && theta < hi) {
        return Err(Error::InvalidArgument(format!(
            "theta = {theta} outside the window ({lo}, {hi})"
        )));
    }
    if let Some(p) = lp_exponent {
        if !(p * theta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "L^{p} target needs p theta < 1, got {}",
                p * theta
            )));
        }
    }
    Ok(())
}

/// `u0k(x) = u0(x) + k^theta phi(k x)` sampled at the centers of `grid`.
///
/// Logs a warning when fewer than eight cells resolve the support of `phi(k .)`.
pub fn concentration_family(
    base: &[f64],
    grid: &Grid,
    params: &ModelParameters,
    k: u64,
    theta: f64,
    phi: &Bump,
) -> Result<Field> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be a positive integer".into()));
    }
    if base.len() != grid.cells() {
        return Err(Error::InvalidArgument(format!(
            "base profile has {} values for {} cells",
            base.len(),
            grid.cells()
        )));
    }
    check_theta(theta, params, None)?;
    phi.validate(grid.length())?;
    let kf = k as f64;
    let (a, b) = phi.support();
    let resolved = grid.cells_in(a / kf, b / kf);
    if resolved < 8 {
        log::warn!("k = {k}: only {resolved} cells resolve the support of phi(k x)");
    }
    let amp = kf.powf(theta);
    let values = base
        .iter()
        .zip(grid.centers())
        .map(|(u, x)| u + amp * phi.eval(kf * x))
        .collect();
    Field::new(values, 0.0)
}

/// Initial-condition descriptor, as written in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `base + standard_bump(x; center, width, height)`.
    Bump {
        center: f64,
        width: f64,
        height: f64,
        #[serde(default)]
        base: f64,
    },
    ConcentrationFamily {
        base: Box<Profile>,
        k: u64,
        /// Defaults to the midpoint of the admissible window.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        /// Defaults to [`Bump::canonical`].
        #[serde(default, skip_serializing_if = "Option::is_none")]
        phi: Option<Bump>,
    },
    /// Two-column text file `x u`, linearly interpolated onto the grid.
    CustomTable {
        path: PathBuf,
    },
}

impl Profile {
    pub fn sample(&self, grid: &Grid, params: &ModelParameters) -> Result<Field> {
        match self {
            Profile::Constant { value } => Field::constant(*value, grid.cells()),
            Profile::Bump {
                center,
                width,
                height,
                base,
            } => {
                let b = Bump {
                    center: *center,
                    width: *width,
                    height: *height,
                };
                b.validate(grid.length())?;
                Field::new(grid.centers().iter().map(|x| base + b.eval(*x)).collect(), 0.0)
            }
            Profile::ConcentrationFamily { base, k, theta, phi } => {
                let u0 = base.sample(grid, params)?;
                let theta = theta.unwrap_or_else(|| default_theta(params));
                let phi = phi.unwrap_or_else(|| Bump::canonical(grid.length()));
                concentration_family(u0.values(), grid, params, *k, theta, &phi)
            }
            Profile::CustomTable { path } => {
                let (xs, us) = read_table(path)?;
                Field::new(
                    grid.centers().iter().map(|x| interpolate(&xs, &us, *x)).collect(),
                    0.0,
                )
            }
        }
    }

    /// The same descriptor with the concentration index replaced.
    pub fn with_k(&self, k: u64) -> Result<Profile> {
        match self {
            Profile::ConcentrationFamily { base, theta, phi, .. } => Ok(Profile::ConcentrationFamily {
                base: base.clone(),
                k,
                theta: *theta,
                phi: *phi,
            }),
            _ => Err(Error::InvalidArgument(
                "only concentration_family profiles have a k".into(),
            )),
        }
    }
}

/// Reads whitespace- or comma-separated `x u` pairs; `#` starts a comment.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                Error::Config(format!("{}:{}: cannot parse {s:?}", path.display(), lineno + 1))
            })
        };
        if cols.len() != 2 {
            return Err(Error::Config(format!(
                "{}:{}: expected two columns, found {}",
                path.display(),
                lineno + 1,
                cols.len()
            )));
        }
        let (x, u) = (parse(cols[0])?, parse(cols[1])?);
        if let Some(prev) = xs.last() {
            if x <= *prev {
                return Err(Error::Config(format!(
                    "{}:{}: x values must increase",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        xs.push(x);
        us.push(u);
    }
    if xs.is_empty() {
        return Err(Error::Config(format!("{}: empty table", path.display())));
    }
    Ok((xs, us))
}

/// Piecewise-linear interpolation, constant beyond the end points.
pub fn interpolate(xs: &[f64], us: &[f64], x: f64) -> f64 {
    let j = xs.partition_point(|v| *v <= x);
    if j == 0 {
        us[0]
    } else if j == xs.len() {
        us[xs.len() - 1]
    } else {
        let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        us[j - 1] + t * (us[j] - us[j - 1])
    }
}

/// `int x^beta ln_+(1/u) dx` by exact cell weights.
pub fn log_deficit(grid: &Grid, values: &[f64], beta: f64) -> Result<f64> {
    let w = crate::mesh::exact_cell_weights(grid, beta, 0.0)?;
    Ok(w.iter()
        .zip(values)
        .map(|(w, u)| if *u <= 0.0 { f64::INFINITY } else { w * (1.0 / u).ln().max(0.0) })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::exact_cell_weights;
    use crate::mesh::quadrature::adaptive_simpson;

    #[test]
    fn bump_values() {
        assert_eq!(standard_bump(0.5, 0.5, 0.25, 2.0), 2.0);
        assert_eq!(standard_bump(0.75, 0.5, 0.25, 2.0), 0.0);
        assert_eq!(standard_bump(0.25, 0.5, 0.25, 2.0), 0.0);
        assert!(standard_bump(0.7, 0.5, 0.25, 2.0) > 0.0);
    }

    #[test]
    fn bump_integral() {
        // int_{-1}^{1} exp(-1/(1-s^2)) ds = 0.443994... (independent Simpson
        // reference); the bump carries an extra factor e so its peak is `height`.
        let core = adaptive_simpson(
            &|s: f64| if s.abs() < 1.0 { (-1.0 / (1.0 - s * s)).exp() } else { 0.0 },
            -1.0,
            1.0,
            1e-13,
        );
        assert!((core - 0.443994).abs() < 1e-6, "{core}");
        let (h, w) = (3.0, 0.2);
        let i = adaptive_simpson(&|x| standard_bump(x, 0.5, w, h), 0.3, 0.7, 1e-13);
        assert!(i > 0.4 * h * w);
        assert!((i - std::f64::consts::E * core * h * w).abs() < 1e-10);
    }

    #[test]
    fn bump_support_validation() {
        assert!(Bump { center: 0.1, width: 0.1, height: 1.0 }.validate(1.0).is_err());
        assert!(Bump { center: 0.9, width: 0.1, height: 1.0 }.validate(1.0).is_err());
        assert!(Bump::canonical(2.0).validate(2.0).is_ok());
    }

    fn physical() -> ModelParameters {
        ModelParameters::physical()
    }

    #[test]
    fn theta_window_and_default() {
        let p = physical();
        assert!((default_theta(&p) - 1.3).abs() < 1e-15);
        let g = Grid::new(64, 2.0, 1.0).unwrap();
        let base = vec![1.0; 64];
        let phi = Bump::canonical(1.0);
        assert!(concentration_family(&base, &g, &p, 2, 1.1, &phi).is_err());
        assert!(concentration_family(&base, &g, &p, 2, 1.5, &phi).is_err());
        assert!(concentration_family(&base, &g, &p, 0, 1.3, &phi).is_err());
        assert!(check_theta(1.3, &p, Some(0.5)).is_ok());
        assert!(check_theta(1.3, &p, Some(0.8)).is_err());
    }

    #[test]
    fn k_one_is_unscaled() {
        let p = physical();
        let g = Grid::new(64, 2.0, 1.0).unwrap();
        let base: Vec<f64> = g.centers().iter().map(|x| 1.0 + x).collect();
        let phi = Bump::canonical(1.0);
        let f = concentration_family(&base, &g, &p, 1, 1.3, &phi).unwrap();
        for ((v, b), x) in f.values().iter().zip(&base).zip(g.centers()) {
            assert_eq!(*v, b + phi.eval(*x));
        }
    }

    #[test]
    fn added_mass_scaling_identity() {
        // int x^beta k^theta phi(kx) dx = k^{theta-beta-1} int y^beta phi(y) dy
        let p = physical();
        let phi = Bump::canonical(1.0);
        let reference = adaptive_simpson(&|y: f64| y.powf(p.beta) * phi.eval(y), 0.25, 0.75, 1e-14);
        let g = Grid::new(4096, 2.0, 1.0).unwrap();
        let w = exact_cell_weights(&g, p.beta, 0.0).unwrap();
        for k in [2u64, 8] {
            let f = concentration_family(&vec![0.0; 4096], &g, &p, k, 1.3, &phi).unwrap();
            let m: f64 = w.iter().zip(f.values()).map(|(w, u)| w * u).sum();
            let want = (k as f64).powf(1.3 - p.beta - 1.0) * reference;
            assert!((m - want).abs() < 1e-4 * want, "k={k}: {m} {want}");
        }
    }

    #[test]
    fn log_deficit_shrinks_and_converges() {
        // phi >= 0 only raises u, so the deficit of u0k never exceeds that of u0
        let p = physical();
        let g = Grid::new(1024, 2.0, 1.0).unwrap();
        let base: Vec<f64> = g.centers().iter().map(|x| 0.2 + 0.5 * x).collect();
        let d0 = log_deficit(&g, &base, p.beta).unwrap();
        let phi = Bump::canonical(1.0);
        let mut last = 0.0;
        for k in [1u64, 4, 16, 64] {
            let f = concentration_family(&base, &g, &p, k, 1.3, &phi).unwrap();
            let d = log_deficit(&g, f.values(), p.beta).unwrap();
            assert!(d <= d0);
            last = d;
        }
        assert!((d0 - last) / d0 < 0.01);
    }

    #[test]
    fn profile_toml_round_trip() {
        let text = r#"
kind = "concentration_family"
k = 8
[base]
kind = "constant"
value = 1.0
"#;
        let prof: Profile = toml::from_str(text).unwrap();
        assert_eq!(
            prof,
            Profile::ConcentrationFamily {
                base: Box::new(Profile::Constant { value: 1.0 }),
                k: 8,
                theta: None,
                phi: None
            }
        );
        let bad = "kind = \"constant\"\nvalue = 1.0\nvalu = 2.0\n";
        assert!(toml::from_str::<Profile>(bad).is_err());
        let g = Grid::new(32, 2.0, 1.0).unwrap();
        let f = prof.sample(&g, &physical()).unwrap();
        assert!(f.sup_norm() > 1.0);
        assert_eq!(prof.with_k(3).unwrap().with_k(8).unwrap(), prof);
        assert!(Profile::Constant { value: 1.0 }.with_k(2).is_err());
    }

    #[test]
    fn custom_table_interpolates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u0.txt");
        std::fs::write(&path, "# x u\n0.0 1.0\n0.5, 2.0\n1.0 2.0\n").unwrap();
        let g = Grid::uniform(8, 1.0).unwrap();
        let f = Profile::CustomTable { path: path.clone() }.sample(&g, &physical()).unwrap();
        assert!((f.values()[0] - (1.0 + 2.0 * 0.0625)).abs() < 1e-15);
        assert_eq!(f.values()[7], 2.0);
        std::fs::write(&path, "0.0 1.0\n0.0 2.0\n").unwrap();
        assert!(read_table(&path).is_err());
        std::fs::write(&path, "0.0 1.0 3.0\n").unwrap();
        assert!(read_table(&path).is_err());
        assert!(read_table(&dir.path().join("missing")).is_err());
    }
}

use serde::{Deserialize, Serialize};

use super::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::mesh::Field;
use crate::solver::Discretization;

/// Knobs of [`moment_inequality_monitor`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorSettings {
    /// Time window `[start, end]` of samples to fit.
    pub window: (f64, f64),
    /// `C3 B` is taken as this multiple of the initial mass.
    pub c3_multiple: f64,
    /// Slack subtracted from the right-hand side.
    pub offset: f64,
}

impl MonitorSettings {
    pub fn whole(c3_multiple: f64) -> Self {
        MonitorSettings {
            window: (f64::NEG_INFINITY, f64::INFINITY),
            c3_multiple,
            offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// `int_0^{L/4} x^{beta-kappa} u0`.
    pub a_hat: f64,
    pub c3b_hat: f64,
    /// Least-squares `C2` of `y(t) - y(t0) ~ C2 int (y - C3B)_+^{n+1}`, clamped at 0.
    pub c2_hat: f64,
    pub satisfied: bool,
    /// `y` nondecreasing over the window.
    pub monotone: bool,
    /// Mean second divided difference of `y` is positive.
    pub convex: bool,
    pub samples: usize,
}

/// Probes the growth structure `y(t) >= y(t0) + C2 int (y - C3 B)_+^{n+1} - offset`
/// of the moment along a sampled trajectory. The constants are empirical
/// stand-ins; only the flags are meaningful.
pub fn moment_inequality_monitor(
    records: &[DiagnosticsRecord],
    u0: &Field,
    disc: &Discretization,
    settings: &MonitorSettings,
) -> Result<MomentReport> {
    let (lo, hi) = settings.window;
    let w: Vec<&DiagnosticsRecord> = records.iter().filter(|r| r.t >= lo && r.t <= hi).collect();
    if w.len() < 10 {
        return Err(Error::WindowTooShort(w.len()));
    }
    let quarter = 0.25 * disc.grid().length();
    let a_hat = disc
        .moment_weights()
        .iter()
        .zip(u0.values())
        .zip(disc.grid().centers())
        .filter(|(_, x)| **x < quarter)
        .map(|((m, u), _)| m * u)
        .sum();
    let c3b = settings.c3_multiple * disc.mass(u0.values());
    let power = disc.params().n + 1.0;

    let y0 = w[0].moment_y;
    let lhs: Vec<f64> = w.iter().map(|r| r.moment_y - y0).collect();
    let mut integral = vec![0.0; w.len()];
    for k in 1..w.len() {
        let f = |r: &DiagnosticsRecord| (r.moment_y - c3b).max(0.0).powf(power);
        integral[k] = integral[k - 1] + 0.5 * (w[k].t - w[k - 1].t) * (f(w[k]) + f(w[k - 1]));
    }
    let sii: f64 = integral.iter().map(|i| i * i).sum();
    let sli: f64 = lhs.iter().zip(&integral).map(|(l, i)| l * i).sum();
    let c2_hat = if sii > 0.0 { (sli / sii).max(0.0) } else { 0.0 };
    let tol = 1e-12 * (1.0 + y0.abs());
    let satisfied = lhs
        .iter()
        .zip(&integral)
        .all(|(l, i)| *l >= c2_hat * i - settings.offset - tol);

    let monotone = w.windows(2).all(|p| p[1].moment_y >= p[0].moment_y);
    let second: Vec<f64> = w
        .windows(3)
        .map(|p| {
            let s1 = (p[1].moment_y - p[0].moment_y) / (p[1].t - p[0].t);
            let s2 = (p[2].moment_y - p[1].moment_y) / (p[2].t - p[1].t);
            2.0 * (s2 - s1) / (p[2].t - p[0].t)
        })
        .collect();
    let convex = second.iter().sum::<f64>() / second.len() as f64 > 0.0;
    Ok(MomentReport {
        a_hat,
        c3b_hat: c3b,
        c2_hat,
        satisfied,
        monotone,
        convex,
        samples: w.len(),
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Data of the comparison inequality `y(t) >= a + b int_0^t (y - d)_+^m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallInputs {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub m: f64,
}

impl GronwallInputs {
    pub fn validate(&self) -> Result<()> {
        let GronwallInputs { a, b, d, m } = *self;
        if !(a > 0.0 && b > 0.0 && d >= 0.0 && m > 1.0) || ![a, b, d, m].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need a > 0, b > 0, d >= 0, m > 1; got a={a}, b={b}, d={d}, m={m}"
            )));
        }
        if !(a > 2.0 * d) {
            return Err(Error::InvalidArgument(format!(
                "need a > 2d, got a={a}, d={d}"
            )));
        }
        Ok(())
    }
}

/// Upper bound `2^m / ((m-1) b a^{m-1})` on the lifetime of any `y` obeying the inequality.
pub fn gronwall_bound(g: &GronwallInputs) -> Result<f64> {
    g.validate()?;
    Ok(2f64.powf(g.m) / ((g.m - 1.0) * g.b * g.a.powf(g.m - 1.0)))
}

const ESCAPE: f64 = 1e12;

/// Integrates `z' = 2^{-m} b z^m`, `z(0) = a`, with classical RK4 and returns
/// the time at which `z` first exceeds `1e12`.
///
/// Each step is `dt` times the local time scale `z / z'`, so the relative
/// accuracy is uniform along the growing solution.
pub fn gronwall_ode_oracle(g: &GronwallInputs, dt: f64) -> Result<f64> {
    g.validate()?;
    if !(dt > 0.0 && dt < 1.0) {
        return Err(Error::InvalidArgument(format!("relative step must lie in (0, 1), got {dt}")));
    }
    let k = 2f64.powf(-g.m) * g.b;
    let f = |z: f64| k * z.powf(g.m);
    let (mut t, mut z) = (0.0, g.a);
    while z <= ESCAPE {
        let h = dt * z / f(z);
        let k1 = f(z);
        let k2 = f(z + 0.5 * h * k1);
        let k3 = f(z + 0.5 * h * k2);
        let k4 = f(z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        if !z.is_finite() {
            break;
        }
    }
    Ok(t)
}

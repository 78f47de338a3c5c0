//! The regularized weight family `g_eps = z_eps^alpha`, where
//! `z_eps(x) = eps + int_0^x zeta_eps`, and `zeta_eps` is a smooth cutoff that
//! vanishes at both ends and equals one on `[eps^2, L - eps^2]`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::quadrature::adaptive_simpson;

fn q(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth step `h(t) = q(t) / (q(t) + q(1 - t))` with `q(t) = exp(-1/t)`.
///
/// `h = 0` for `t <= 0`, `h = 1` for `t >= 1`, and `h(t) + h(1 - t) = 1`.
pub fn ramp(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = q(t);
        a / (a + q(1.0 - t))
    }
}

const TABLE_INTERVALS: usize = 1 << 16;

/// Cumulative integral `H(t) = int_0^t h` tabulated on `[0, 1]`.
fn ramp_integral_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let dt = 1.0 / TABLE_INTERVALS as f64;
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(TABLE_INTERVALS + 1);
        out.push(0.0);
        for k in 0..TABLE_INTERVALS {
            let a = k as f64 * dt;
            acc += adaptive_simpson(&ramp, a, a + dt, 1e-16);
            out.push(acc);
        }
        // H(1) = 1/2 by the symmetry of h; remove the residual quadrature error.
        let scale = 0.5 / acc;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    })
}

fn ramp_integral(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 0.5 + (t - 1.0);
    }
    let table = ramp_integral_table();
    let s = t * TABLE_INTERVALS as f64;
    let k = (s.floor() as usize).min(TABLE_INTERVALS - 1);
    let frac = s - k as f64;
    table[k] + frac * (table[k + 1] - table[k])
}

/// `zeta_eps(x)` on `[0, L]`.
pub fn zeta_eps(x: f64, epsilon: f64, length: f64) -> f64 {
    if x <= 0.0 || x >= length {
        return 0.0;
    }
    let w = epsilon * epsilon;
    if w == 0.0 {
        return 1.0;
    }
    if x < w {
        ramp(x / w)
    } else if x > length - w {
        ramp((length - x) / w)
    } else {
        1.0
    }
}

/// `z_eps(x) = eps + int_0^x zeta_eps`; exact on the linear part, tabulated
/// quadrature on the two transition bands.
pub fn z_eps(x: f64, epsilon: f64, length: f64) -> f64 {
    let w = epsilon * epsilon;
    let x = x.clamp(0.0, length);
    if w == 0.0 {
        return x;
    }
    if x < w {
        epsilon + w * ramp_integral(x / w)
    } else if x <= length - w {
        epsilon + 0.5 * w + (x - w)
    } else {
        epsilon + 0.5 * w + (length - 2.0 * w) + w * (0.5 - ramp_integral((length - x) / w))
    }
}

pub fn g_eps(x: f64, epsilon: f64, alpha: f64, length: f64) -> f64 {
    z_eps(x, epsilon, length).powf(alpha)
}

/// Regularized weights for one `(eps, alpha, L)`; cheap to copy, pure to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfiles {
    pub epsilon: f64,
    pub alpha: f64,
    pub length: f64,
}

impl WeightProfiles {
    pub fn new(epsilon: f64, alpha: f64, length: f64) -> Self {
        WeightProfiles {
            epsilon,
            alpha,
            length,
        }
    }

    /// Width of each transition band of `zeta_eps`.
    pub fn zeta_width(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    pub fn zeta(&self, x: f64) -> f64 {
        zeta_eps(x, self.epsilon, self.length)
    }

    pub fn z(&self, x: f64) -> f64 {
        z_eps(x, self.epsilon, self.length)
    }

    pub fn g(&self, x: f64) -> f64 {
        self.z(x).powf(self.alpha)
    }

    /// `g_eps'(x) = alpha z^{alpha-1} zeta`.
    pub fn gx(&self, x: f64) -> f64 {
        self.alpha * self.z(x).powf(self.alpha - 1.0) * self.zeta(x)
    }

    pub fn g_at(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|x| self.g(*x)).collect()
    }
}

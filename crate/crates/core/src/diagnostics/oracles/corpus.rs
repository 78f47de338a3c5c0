//! Nonnegative, piecewise-C¹ test functions on `[0, L]` with exact
//! derivatives, and a seeded generator for fuzz corpora.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initdata::Bump;
use crate::mesh::{Field, Grid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// Linear interpolation of `values` at increasing `knots` covering `[0, L]`.
    PiecewiseLinear { knots: Vec<f64>, values: Vec<f64> },
    /// `base + sum of bumps`; bumps may stick out of the domain.
    BumpSum { base: f64, bumps: Vec<Bump> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Positive,
    TouchingZero,
    Smooth,
    /// `c + k^theta phi(k x)` with the canonical bump `phi`.
    Concentrated,
}

impl CorpusKind {
    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::Positive => "positive",
            CorpusKind::TouchingZero => "touching_zero",
            CorpusKind::Smooth => "smooth",
            CorpusKind::Concentrated => "concentrated",
        }
    }
}

/// `d/dx` of a bump: `phi * (-2 s / (1 - s^2)^2) / w`.
fn bump_derivative(b: &Bump, x: f64) -> f64 {
    let s = (x - b.center) / b.width;
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - s * s;
    b.eval(x) * (-2.0 * s / (q * q)) / b.width
}

impl TestFunction {
    pub fn piecewise_linear(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "need at least two knots with one value each, got {} knots and {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("knots must increase strictly".into()));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("values must be finite and nonnegative".into()));
        }
        Ok(TestFunction::PiecewiseLinear { knots, values })
    }

    pub fn constant(value: f64, length: f64) -> Self {
        TestFunction::PiecewiseLinear {
            knots: vec![0.0, length],
            values: vec![value, value],
        }
    }

    fn segment(knots: &[f64], x: f64) -> usize {
        let k = knots.partition_point(|t| *t <= x);
        k.clamp(1, knots.len() - 1) - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::PiecewiseLinear { knots, values } => {
                let i = Self::segment(knots, x);
                let t = (x - knots[i]) / (knots[i + 1] - knots[i]);
                (values[i] + t * (values[i + 1] - values[i])).max(0.0)
            }
            TestFunction::BumpSum { base, bumps } => base + bumps.iter().map(|b| b.eval(x)).sum::<f64>(),
        }
    }

    /// One-sided (from the right at knots) derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            TestFunction::PiecewiseLinear { knots, values } => {
                let i = Self::segment(knots, x);
                (values[i + 1] - values[i]) / (knots[i + 1] - knots[i])
            }
            TestFunction::BumpSum { bumps, .. } => bumps.iter().map(|b| bump_derivative(b, x)).sum(),
        }
    }

    /// Points in `[a, b]` where the function may fail to be smooth, including `a` and `b`.
    pub fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![a, b];
        match self {
            TestFunction::PiecewiseLinear { knots, .. } => pts.extend(knots.iter().copied()),
            TestFunction::BumpSum { bumps, .. } => {
                for bump in bumps {
                    let (l, r) = bump.support();
                    pts.extend([l, bump.center, r]);
                }
            }
        }
        pts.retain(|p| *p >= a && *p <= b);
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|p, q| (*p - *q).abs() <= 1e-14 * (1.0 + q.abs()));
        pts
    }

    /// Whether the function vanishes identically on `[p, q]`, and at which
    /// end it reaches zero linearly (only possible for piecewise-linear data).
    pub(super) fn zero_structure(&self, p: f64, q: f64) -> (bool, Option<f64>) {
        match self {
            TestFunction::PiecewiseLinear { .. } => {
                let (up, uq) = (self.eval(p), self.eval(q));
                match (up == 0.0, uq == 0.0) {
                    (true, true) => (true, None),
                    (true, false) => (false, Some(p)),
                    (false, true) => (false, Some(q)),
                    _ => (false, None),
                }
            }
            TestFunction::BumpSum { .. } => (false, None),
        }
    }

    pub fn sample(&self, grid: &Grid) -> Result<Field> {
        Field::new(grid.centers().iter().map(|x| self.eval(*x)).collect(), 0.0)
    }
}

/// `base + k^theta phi(k x)` as a test function, `phi` the canonical bump of `[0, L]`.
pub fn concentrated(base: f64, k: f64, theta: f64, length: f64) -> TestFunction {
    let phi = Bump::canonical(length);
    TestFunction::BumpSum {
        base,
        bumps: vec![Bump {
            center: phi.center / k,
            width: phi.width / k,
            height: k.powf(theta) * phi.height,
        }],
    }
}

/// Draws `count` functions on `[0, length]`, cycling through the four kinds;
/// concentrated members use the exponent `theta`.
pub fn generate_corpus(count: usize, length: f64, theta: f64, seed: u64) -> Vec<(CorpusKind, TestFunction)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [
        CorpusKind::Positive,
        CorpusKind::TouchingZero,
        CorpusKind::Smooth,
        CorpusKind::Concentrated,
    ];
    (0..count)
        .map(|i| {
            let kind = kinds[i % kinds.len()];
            (kind, draw(&mut rng, kind, length, theta))
        })
        .collect()
}

fn draw(rng: &mut ChaCha8Rng, kind: CorpusKind, length: f64, theta: f64) -> TestFunction {
    let magnitude = |rng: &mut ChaCha8Rng| 10f64.powf(rng.gen_range(-1.0..1.0));
    match kind {
        CorpusKind::Positive | CorpusKind::TouchingZero => {
            let interior = rng.gen_range(1..=10);
            let mut knots: Vec<f64> = (0..interior).map(|_| rng.gen_range(0.01..0.99) * length).collect();
            knots.extend([0.0, length]);
            knots.sort_by(f64::total_cmp);
            knots.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * length);
            let mut values: Vec<f64> = knots.iter().map(|_| magnitude(rng)).collect();
            if kind == CorpusKind::TouchingZero {
                for v in values.iter_mut() {
                    if rng.gen_bool(0.4) {
                        *v = 0.0;
                    }
                }
                let keep = rng.gen_range(0..values.len());
                if values.iter().all(|v| *v == 0.0) {
                    values[keep] = 1.0;
                }
            }
            TestFunction::PiecewiseLinear { knots, values }
        }
        CorpusKind::Smooth => {
            let base = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0.0..1.0) };
            let bumps = (0..rng.gen_range(1..=4))
                .map(|_| Bump {
                    center: rng.gen_range(0.0..1.0) * length,
                    width: rng.gen_range(0.02..0.4) * length,
                    height: magnitude(rng),
                })
                .collect();
            TestFunction::BumpSum { base, bumps }
        }
        CorpusKind::Concentrated => {
            let k = rng.gen_range(1..=64) as f64;
            concentrated(rng.gen_range(0.0..2.0), k, theta, length)
        }
    }
}

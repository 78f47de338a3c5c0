//! Model parameters and the admissibility windows of the existence and
//! blow-up theory.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(n, alpha, beta, gamma, kappa, L, eps)` of the regularized problem.
///
/// `gamma` is only needed for the existence theory and for the regularization
/// of rough initial data, so it is optional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParameters {
    pub n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: Option<f64>,
    pub kappa: f64,
    pub length: f64,
    pub epsilon: f64,
}

impl ModelParameters {
    /// `n = 2`, `alpha = 13/2`, `beta = 1/2` with `kappa = 0.4`, `gamma = 0`,
    /// `L = 1` and `eps = 1e-3`.
    pub fn physical() -> Self {
        ModelParameters {
            n: 2.0,
            alpha: 6.5,
            beta: 0.5,
            gamma: Some(0.0),
            kappa: 0.4,
            length: 1.0,
            epsilon: 1e-3,
        }
    }

    /// Upper bound `min{1, sqrt(L/2)}` for the regularization parameter.
    pub fn epsilon_max(&self) -> f64 {
        (self.length / 2.0).sqrt().min(1.0)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }
}

/// The cubic `n^3 + 5 n^2 + 16 n - 40` whose positive root is `n*`.
pub fn nstar_polynomial(n: f64) -> f64 {
    ((n + 5.0) * n + 16.0) * n - 40.0
}

/// Unique positive root `n* = 1.5361...` of `n^3 + 5n^2 + 16n - 40`.
///
/// Bisection on `[1, 2]` run until the bracket can no longer shrink in
/// floating point; the result is the same on every platform.
pub fn compute_nstar() -> f64 {
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 {
            break;
        }
        if nstar_polynomial(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if nstar_polynomial(lo).abs() <= nstar_polynomial(hi).abs() {
        lo
    } else {
        hi
    }
}

/// `min{(alpha-3)/2, alpha-n-4, beta+1, (-alpha+(n+1)beta+n+4)/n}`.
pub fn kappa_upper_bound(p: &ModelParameters) -> Result<f64> {
    if p.n == 0.0 {
        return Err(Error::InvalidArgument(
            "kappa bound is undefined for n = 0".into(),
        ));
    }
    let (n, a, b) = (p.n, p.alpha, p.beta);
    let terms = [
        (a - 3.0) / 2.0,
        a - n - 4.0,
        b + 1.0,
        (-a + (n + 1.0) * b + n + 4.0) / n,
    ];
    Ok(terms.into_iter().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityMode {
    Existence,
    Blowup,
}

/// Named parameter constraints. `Display` gives the identifier used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    LengthPositive,
    EpsilonNonnegative,
    EpsilonBelowMax,
    NAboveNstar,
    NBelowThree,
    AlphaAboveThree,
    AlphaAboveNPlusFour,
    BetaAboveMinusOne,
    BetaAboveBlowupLower,
    BetaAtMostUpper,
    GammaPresent,
    GammaAboveLower,
    GammaBelowOne,
    KappaPositive,
    KappaBelowMax,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Constraint::LengthPositive => "L>0",
            Constraint::EpsilonNonnegative => "epsilon>=0",
            Constraint::EpsilonBelowMax => "epsilon<min(1,sqrt(L/2))",
            Constraint::NAboveNstar => "n>n*",
            Constraint::NBelowThree => "n<3",
            Constraint::AlphaAboveThree => "alpha>3",
            Constraint::AlphaAboveNPlusFour => "alpha>n+4",
            Constraint::BetaAboveMinusOne => "beta>-1",
            Constraint::BetaAboveBlowupLower => "beta>(alpha-n-4)/(n+1)",
            Constraint::BetaAtMostUpper => "beta<=(alpha-n-3)/n",
            Constraint::GammaPresent => "gamma given",
            Constraint::GammaAboveLower => "gamma>5-alpha+beta",
            Constraint::GammaBelowOne => "gamma<1",
            Constraint::KappaPositive => "kappa>0",
            Constraint::KappaBelowMax => "kappa<kappa_max",
        };
        f.write_str(s)
    }
}

/// A failed constraint together with the offending value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated (value {})", self.constraint, self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub mode: AdmissibilityMode,
    pub existence_ok: bool,
    pub blowup_ok: bool,
    /// Only populated in blow-up mode (and only when `n != 0`).
    pub kappa_max: Option<f64>,
    /// Violations of the constraints of the requested mode.
    pub violated: Vec<Violation>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.violated.is_empty()
    }

    pub fn violates(&self, c: Constraint) -> bool {
        self.violated.iter().any(|v| v.constraint == c)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn require(&mut self, ok: bool, constraint: Constraint, value: f64) {
        if !ok {
            self.0.push(Violation { constraint, value });
        }
    }
}

fn common_violations(p: &ModelParameters, c: &mut Checker) {
    c.require(p.length > 0.0, Constraint::LengthPositive, p.length);
    c.require(p.epsilon >= 0.0, Constraint::EpsilonNonnegative, p.epsilon);
    if p.length > 0.0 {
        c.require(
            p.epsilon < p.epsilon_max(),
            Constraint::EpsilonBelowMax,
            p.epsilon,
        );
    }
}

fn gamma_violations(p: &ModelParameters, gamma: f64, c: &mut Checker) {
    c.require(
        gamma > 5.0 - p.alpha + p.beta,
        Constraint::GammaAboveLower,
        gamma,
    );
    c.require(gamma < 1.0, Constraint::GammaBelowOne, gamma);
}

fn beta_upper(p: &ModelParameters) -> f64 {
    (p.alpha - p.n - 3.0) / p.n
}

fn existence_violations(p: &ModelParameters) -> Vec<Violation> {
    let mut c = Checker(Vec::new());
    common_violations(p, &mut c);
    c.require(p.n > compute_nstar(), Constraint::NAboveNstar, p.n);
    c.require(p.n < 3.0, Constraint::NBelowThree, p.n);
    c.require(p.alpha > 3.0, Constraint::AlphaAboveThree, p.alpha);
    c.require(p.beta > -1.0, Constraint::BetaAboveMinusOne, p.beta);
    if p.n != 0.0 {
        c.require(p.beta <= beta_upper(p), Constraint::BetaAtMostUpper, p.beta);
    }
    match p.gamma {
        Some(g) => gamma_violations(p, g, &mut c),
        None => c.require(false, Constraint::GammaPresent, f64::NAN),
    }
    c.0
}

fn blowup_violations(p: &ModelParameters) -> (Vec<Violation>, Option<f64>) {
    let mut c = Checker(Vec::new());
    common_violations(p, &mut c);
    c.require(p.n > compute_nstar(), Constraint::NAboveNstar, p.n);
    c.require(p.n < 3.0, Constraint::NBelowThree, p.n);
    c.require(
        p.alpha > p.n + 4.0,
        Constraint::AlphaAboveNPlusFour,
        p.alpha,
    );
    c.require(
        p.beta > (p.alpha - p.n - 4.0) / (p.n + 1.0),
        Constraint::BetaAboveBlowupLower,
        p.beta,
    );
    if p.n != 0.0 {
        c.require(p.beta <= beta_upper(p), Constraint::BetaAtMostUpper, p.beta);
    }
    c.require(p.kappa > 0.0, Constraint::KappaPositive, p.kappa);
    let kappa_max = kappa_upper_bound(p).ok();
    if let Some(km) = kappa_max {
        c.require(p.kappa < km, Constraint::KappaBelowMax, p.kappa);
    }
    if let Some(g) = p.gamma {
        gamma_violations(p, g, &mut c);
    }
    (c.0, kappa_max)
}

/// Checks every constraint of `mode` and reports all violations at once.
///
/// Both `existence_ok` and `blowup_ok` are always evaluated; `violated` lists
/// the failures of the requested mode only.
pub fn check_admissibility(p: &ModelParameters, mode: AdmissibilityMode) -> AdmissibilityReport {
    let existence = existence_violations(p);
    let (blowup, kappa_max) = blowup_violations(p);
    let existence_ok = existence.is_empty();
    let blowup_ok = blowup.is_empty();
    let (violated, kappa_max) = match mode {
        AdmissibilityMode::Existence => (existence, None),
        AdmissibilityMode::Blowup => (blowup, kappa_max),
    };
    AdmissibilityReport {
        mode,
        existence_ok,
        blowup_ok,
        kappa_max,
        violated,
    }
}

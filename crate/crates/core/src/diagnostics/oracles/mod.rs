//! Numeric probes of the weighted interpolation inequalities.
//!
//! Each oracle evaluates both sides of an inequality for one function and
//! reports the smallest constant that makes it hold ("needed constant").
//! The inequalities are theorems, so across a corpus the needed constants
//! must stay bounded; a blow-up of the corpus maximum under quadrature
//! refinement, or a violation of the constant-free first inequality, points
//! at a quadrature bug rather than at the mathematics.

mod corpus;

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initdata::default_theta;
use crate::mesh::quadrature::{composite_gauss, exact_cell_weights, power_integral};
use crate::mesh::Grid;
use crate::paramspace::ModelParameters;

pub use corpus::{concentrated, generate_corpus, CorpusKind, TestFunction};

const GAUSS_ORDER: usize = 8;

/// `int_a^b x^w u^p |u_x|^q` over `{u > 0}`.
#[derive(Debug, Clone, Copy)]
struct Term {
    w: f64,
    p: f64,
    q: f64,
}

impl Term {
    fn density(&self, f: &TestFunction, x: f64) -> f64 {
        let u = f.eval(x);
        if u <= 0.0 {
            return 0.0;
        }
        // log form so that u^{-k} |u_x|^q near a smooth zero cannot produce inf * 0
        let mut e = self.p * u.ln();
        if self.w != 0.0 {
            e += self.w * x.ln();
        }
        if self.q != 0.0 {
            e += self.q * f.derivative(x).abs().ln();
        }
        e.exp()
    }
}

/// Gauss on `[a, b]`. With `toward = Some((end, e))` the integrand behaves like
/// `|x - end|^e` there, and the substitution `x = end +- l s^q` with
/// `q (e + 1)` an integer turns that into a polynomial factor.
fn gauss_toward(g: &dyn Fn(f64) -> f64, a: f64, b: f64, toward: Option<(f64, f64)>, panels: usize) -> f64 {
    let len = b - a;
    match toward {
        Some((end, e)) if e.fract() != 0.0 => {
            let q = (4.0 * (e + 1.0)).ceil() / (e + 1.0);
            let sign = if end == a { 1.0 } else { -1.0 };
            composite_gauss(
                |s: f64| {
                    if s <= 0.0 {
                        return 0.0;
                    }
                    let x = end + sign * len * s.powf(q);
                    g(x) * len * q * s.powf(q - 1.0)
                },
                0.0,
                1.0,
                panels,
                GAUSS_ORDER,
            )
        }
        _ => composite_gauss(g, a, b, panels, GAUSS_ORDER),
    }
}

fn integrate(f: &TestFunction, t: Term, a: f64, b: f64, panels: usize) -> f64 {
    let pts = f.breakpoints(a, b);
    let g = |x: f64| t.density(f, x);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (vanishes, zero_end) = f.zero_structure(lo, hi);
        if vanishes {
            continue;
        }
        // power-law behaviour of the density at each end of the piece
        let mut left = if lo == 0.0 { t.w } else { 0.0 };
        let mut right = 0.0;
        if zero_end == Some(lo) {
            left += t.p;
        } else if zero_end == Some(hi) {
            right += t.p;
        }
        if left <= -1.0 || right <= -1.0 {
            return f64::INFINITY;
        }
        let mid = 0.5 * (lo + hi);
        total += gauss_toward(&g, lo, mid, Some((lo, left)), panels)
            + gauss_toward(&g, mid, hi, Some((hi, right)), panels);
    }
    total
}

/// Smallest `C` with `lhs <= C rhs`; zero when the left side vanishes.
fn needed(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if rhs.is_infinite() {
        0.0
    } else {
        lhs / rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma99Report {
    /// Candidate point attaining the smallest value in `(L/2, L)`.
    pub x0: f64,
    pub value: f64,
    /// `C int x^beta u` with `C = (int_{L/2}^L x^beta)^{-1}`.
    pub bound: f64,
    pub ok: bool,
}

/// Looks for a center `x0` in `(L/2, L)` with `u(x0) <= C int x^beta u`,
/// the integral taken with exact cell weights of the piecewise-constant
/// interpretation of `u`.
///
/// On a grid with a face at `L/2` (e.g. uniform with an even cell count) the
/// discrete statement is itself a theorem.
pub fn oracle_lemma99(grid: &Grid, u: &[f64], beta: f64) -> Result<Lemma99Report> {
    if u.len() != grid.cells() {
        return Err(Error::InvalidArgument(format!(
            "{} samples for {} cells",
            u.len(),
            grid.cells()
        )));
    }
    if u.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument("samples must be nonnegative".into()));
    }
    let l = grid.length();
    let (i0, value) = grid
        .centers()
        .iter()
        .zip(u)
        .enumerate()
        .filter(|(_, (x, _))| **x > 0.5 * l && **x < l)
        .map(|(i, (_, v))| (i, *v))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::TooFewCells(grid.cells()))?;
    let bound = match exact_cell_weights(grid, beta, 0.0) {
        Ok(w) => w.iter().zip(u).map(|(w, v)| w * v).sum::<f64>() / power_integral(0.5 * l, l, beta, 0.0),
        // x^beta is not integrable at the origin: the right side is infinite unless u vanishes there
        Err(_) if u[0] > 0.0 => f64::INFINITY,
        Err(_) => return Err(Error::InvalidArgument(format!("weight x^{beta} is not integrable"))),
    };
    Ok(Lemma99Report {
        x0: grid.centers()[i0],
        value,
        bound,
        ok: value <= bound * (1.0 + 1e-12),
    })
}

/// Both sides of one inequality with the constant divided out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub lhs: f64,
    /// The gradient integral entering the right side.
    pub gradient: f64,
    /// Right side without its constant.
    pub rhs: f64,
    pub needed_c: f64,
    pub ok: bool,
}

impl OracleReport {
    fn new(lhs: f64, gradient: f64, rhs: f64, needed_c: f64) -> Self {
        OracleReport {
            lhs,
            gradient,
            rhs,
            needed_c,
            ok: needed_c.is_finite() && needed_c >= 0.0,
        }
    }
}

pub fn lemma50_admissible(p: &ModelParameters) -> bool {
    let bound = (p.alpha - 3.0)
        .min(p.beta + 1.0)
        .min((-p.alpha + (p.n + 1.0) * p.beta + p.n + 4.0) / p.n);
    p.n > -1.0 && p.kappa < bound
}

/// `int x^{beta-kappa} u <= C (int x^beta u + (int x^{alpha-kappa-2} u^{n-1} u_x^2)^{1/(n+1)})`.
pub fn oracle_lemma50(u: &TestFunction, params: &ModelParameters, panels: usize) -> Result<OracleReport> {
    if !lemma50_admissible(params) {
        return Err(Error::InvalidArgument(format!(
            "kappa = {} violates the moment interpolation window",
            params.kappa
        )));
    }
    let (n, l) = (params.n, params.length);
    let lhs = integrate(u, Term { w: params.beta - params.kappa, p: 1.0, q: 0.0 }, 0.0, l, panels);
    let mass = integrate(u, Term { w: params.beta, p: 1.0, q: 0.0 }, 0.0, l, panels);
    let grad = integrate(
        u,
        Term { w: params.alpha - params.kappa - 2.0, p: n - 1.0, q: 2.0 },
        0.0,
        l,
        panels,
    );
    let rhs = mass + grad.powf(1.0 / (n + 1.0));
    Ok(OracleReport::new(lhs, grad, rhs, needed(lhs, rhs)))
}

/// `int x^{alpha-4} u^n <= eta int x^alpha u^{n-4} u_x^4 + C(eta) (int x^beta u)^n`;
/// the reported gradient is the full `eta` term.
pub fn oracle_lemma20(u: &TestFunction, params: &ModelParameters, eta: f64, panels: usize) -> Result<OracleReport> {
    let (n, a, b) = (params.n, params.alpha, params.beta);
    if !(n > 1.0 && a > 3.0 && b > -1.0) || b > (a - n - 3.0) / n {
        return Err(Error::InvalidArgument(format!(
            "beta = {b} exceeds (alpha - n - 3)/n = {} or n, alpha, beta out of range",
            (a - n - 3.0) / n
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    let l = params.length;
    let lhs = integrate(u, Term { w: a - 4.0, p: n, q: 0.0 }, 0.0, l, panels);
    let grad = eta * integrate(u, Term { w: a, p: n - 4.0, q: 4.0 }, 0.0, l, panels);
    let mass = integrate(u, Term { w: b, p: 1.0, q: 0.0 }, 0.0, l, panels);
    let rhs = mass.powf(n);
    let excess = if grad.is_infinite() { 0.0 } else { (lhs - grad).max(0.0) };
    Ok(OracleReport::new(lhs, grad, rhs, needed(excess, rhs)))
}

/// `int u^p <= C ((int u)^{(n+3p)/(n+3)} (int u^{n-4} u_x^4)^{(p-1)/(n+3)} + (int u)^p)` on `omega`.
pub fn oracle_lemma51(u: &TestFunction, n: f64, p: f64, omega: (f64, f64), panels: usize) -> Result<OracleReport> {
    if !(n > 0.0 && p > 1.0) {
        return Err(Error::InvalidArgument(format!("need n > 0 and p > 1, got n = {n}, p = {p}")));
    }
    let (a, b) = omega;
    if !(b > a) {
        return Err(Error::InvalidArgument(format!("empty subinterval ({a}, {b})")));
    }
    let lhs = integrate(u, Term { w: 0.0, p, q: 0.0 }, a, b, panels);
    let m = integrate(u, Term { w: 0.0, p: 1.0, q: 0.0 }, a, b, panels);
    let grad = integrate(u, Term { w: 0.0, p: n - 4.0, q: 4.0 }, a, b, panels);
    let rhs = m.powf((n + 3.0 * p) / (n + 3.0)) * grad.powf((p - 1.0) / (n + 3.0)) + m.powf(p);
    Ok(OracleReport::new(lhs, grad, rhs, needed(lhs, rhs)))
}

/// Settings of [`oracle_fuzz`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuzzSettings {
    pub count: usize,
    pub seed: u64,
    /// Gauss panels per smooth piece; the refinement check doubles this.
    pub panels: usize,
    /// Uniform cells used to sample functions for the first inequality (even).
    pub cells: usize,
    pub eta: f64,
    pub p: f64,
    /// Subinterval as fractions of `L`.
    pub omega: (f64, f64),
}

impl Default for FuzzSettings {
    fn default() -> Self {
        FuzzSettings {
            count: 1000,
            seed: 20_240_601,
            panels: 8,
            cells: 256,
            eta: 1.0,
            p: 2.0,
            omega: (0.1, 0.9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lemma {
    Pointwise,
    Moment,
    Weighted,
    Subinterval,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [Lemma::Pointwise, Lemma::Moment, Lemma::Weighted, Lemma::Subinterval];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::Pointwise => "pointwise",
            Lemma::Moment => "moment",
            Lemma::Weighted => "weighted",
            Lemma::Subinterval => "subinterval",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzRow {
    pub function: usize,
    pub kind: CorpusKind,
    pub lemma: Lemma,
    pub lhs: f64,
    pub rhs: f64,
    pub needed_c: f64,
    /// Needed constant with doubled resolution.
    pub needed_c_refined: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub lemma: Lemma,
    pub violations: usize,
    pub max_needed: f64,
    pub max_needed_refined: f64,
    /// All constants finite and the corpus maximum stable under refinement within 2%.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub rows: Vec<FuzzRow>,
    pub lemmas: Vec<LemmaSummary>,
}

pub const FUZZ_CSV_HEADER: &str = "function,kind,lemma,lhs,rhs,needed_c,needed_c_refined,ok";

impl FuzzSummary {
    pub fn lemma(&self, lemma: Lemma) -> &LemmaSummary {
        self.lemmas.iter().find(|s| s.lemma == lemma).expect("every lemma is summarized")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(FUZZ_CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.function,
                r.kind.name(),
                r.lemma.name(),
                r.lhs,
                r.rhs,
                r.needed_c,
                r.needed_c_refined,
                r.ok
            );
        }
        out
    }
}

fn rows_for(
    index: usize,
    kind: CorpusKind,
    f: &TestFunction,
    params: &ModelParameters,
    s: &FuzzSettings,
) -> Result<Vec<FuzzRow>> {
    let l = params.length;
    let row = |lemma, coarse: OracleReport, fine: OracleReport| FuzzRow {
        function: index,
        kind,
        lemma,
        lhs: coarse.lhs,
        rhs: coarse.rhs,
        needed_c: coarse.needed_c,
        needed_c_refined: fine.needed_c,
        ok: coarse.ok && fine.ok,
    };
    let pointwise = |cells| -> Result<Lemma99Report> {
        let grid = Grid::uniform(cells, l)?;
        oracle_lemma99(&grid, f.sample(&grid)?.values(), params.beta)
    };
    let (p0, p1) = (pointwise(s.cells)?, pointwise(2 * s.cells)?);
    let ratio = |r: &Lemma99Report| if r.bound > 0.0 { r.value / r.bound } else { 0.0 };
    let omega = (s.omega.0 * l, s.omega.1 * l);
    let fine = 2 * s.panels;
    Ok(vec![
        FuzzRow {
            function: index,
            kind,
            lemma: Lemma::Pointwise,
            lhs: p0.value,
            rhs: p0.bound,
            needed_c: ratio(&p0),
            needed_c_refined: ratio(&p1),
            ok: p0.ok && p1.ok,
        },
        row(
            Lemma::Moment,
            oracle_lemma50(f, params, s.panels)?,
            oracle_lemma50(f, params, fine)?,
        ),
        row(
            Lemma::Weighted,
            oracle_lemma20(f, params, s.eta, s.panels)?,
            oracle_lemma20(f, params, s.eta, fine)?,
        ),
        row(
            Lemma::Subinterval,
            oracle_lemma51(f, params.n, s.p, omega, s.panels)?,
            oracle_lemma51(f, params.n, s.p, omega, fine)?,
        ),
    ])
}

/// Runs all four oracles over a seeded corpus, in parallel.
///
/// For the pointwise inequality `needed_c` is `u(x0) / (C int x^beta u)`,
/// which must not exceed one.
pub fn oracle_fuzz(params: &ModelParameters, settings: &FuzzSettings) -> Result<FuzzSummary> {
    if settings.cells % 2 != 0 || settings.cells < 2 || settings.panels == 0 {
        return Err(Error::InvalidArgument(format!(
            "fuzzing needs an even cell count and at least one panel, got {} cells, {} panels",
            settings.cells, settings.panels
        )));
    }
    let corpus = generate_corpus(settings.count, params.length, default_theta(params), settings.seed);
    let rows: Vec<FuzzRow> = corpus
        .par_iter()
        .enumerate()
        .map(|(i, (kind, f))| rows_for(i, *kind, f, params, settings))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let lemmas = Lemma::ALL
        .iter()
        .map(|&lemma| {
            let mine = rows.iter().filter(|r| r.lemma == lemma);
            let violations = mine.clone().filter(|r| !r.ok).count();
            let max_needed = mine.clone().map(|r| r.needed_c).fold(0.0, f64::max);
            let max_needed_refined = mine.map(|r| r.needed_c_refined).fold(0.0, f64::max);
            let stable = (max_needed - max_needed_refined).abs() <= 0.02 * max_needed_refined.max(max_needed);
            LemmaSummary {
                lemma,
                violations,
                max_needed,
                max_needed_refined,
                bounded: violations == 0 && max_needed.is_finite() && stable,
            }
        })
        .collect();
    Ok(FuzzSummary { rows, lemmas })
}

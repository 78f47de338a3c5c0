//! Run configuration documents.
//!
//! The document is TOML. Every table is strict: an unknown key is a hard
//! error naming the key and its position. After parsing, defaults that only
//! depend on other config values are filled in, and [`RunConfig::echo`]
//! writes the resolved document back out with round-trip-exact floats. The
//! echo is what gets hashed into the run id, so two documents that resolve
//! to the same run share a directory.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::oracles::FuzzSettings;
use crate::error::{Error, Result};
use crate::initdata::{Bump, Profile};
use crate::paramspace::{check_admissibility, AdmissibilityMode, ModelParameters};
use crate::solver::{FluxForm, TimeScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Single,
    EpsStudy,
    KSweep,
    MBisect,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::EpsStudy => "eps_study",
            Mode::KSweep => "k_sweep",
            Mode::MBisect => "m_bisect",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cells: usize,
    pub grading_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub sample_interval: f64,
    /// Step-doubling tolerance; zero turns error control off.
    pub step_tolerance: f64,
}

/// Thresholds left at `None` scale with the initial data when the run starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub supnorm_threshold: Option<f64>,
    pub newton_tolerance: f64,
    pub newton_max_iterations: usize,
    pub positivity_floor: Option<f64>,
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverSpec {
    pub flux_form: FluxForm,
    pub scheme: TimeScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySpec {
    pub eps_list: Vec<f64>,
    pub k_list: Vec<u64>,
    pub k_low: u64,
    pub k_high: u64,
    /// Multiple of the initial mass used as `C3 B` by the moment monitor.
    pub c3_multiple: f64,
}

impl Default for StudySpec {
    fn default() -> Self {
        StudySpec {
            eps_list: vec![1e-2, 1e-3],
            k_list: vec![1, 2, 4, 8, 16],
            k_low: 1,
            k_high: 128,
            c3_multiple: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub output_dir: PathBuf,
    pub admissibility: AdmissibilityMode,
    pub parameters: ModelParameters,
    pub grid: GridSpec,
    pub initial: Profile,
    pub time: TimeSpec,
    pub thresholds: Thresholds,
    pub solver: SolverSpec,
    pub study: StudySpec,
    pub oracles: FuzzSettings,
}

// ---------------------------------------------------------------------------
// Raw document

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    mode: Option<Mode>,
    output_dir: Option<PathBuf>,
    admissibility: Option<AdmissibilityMode>,
    parameters: RawParameters,
    grid: Option<RawGrid>,
    initial: Option<Profile>,
    time: Option<RawTime>,
    thresholds: Option<RawThresholds>,
    solver: Option<RawSolver>,
    study: Option<RawStudy>,
    oracles: Option<RawOracles>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameters {
    n: f64,
    alpha: f64,
    beta: f64,
    kappa: f64,
    length: f64,
    epsilon: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    cells: Option<usize>,
    grading_exponent: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
    dt_init: Option<f64>,
    dt_min: Option<f64>,
    dt_max: Option<f64>,
    sample_interval: Option<f64>,
    step_tolerance: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    supnorm_threshold: Option<f64>,
    newton_tolerance: Option<f64>,
    newton_max_iterations: Option<usize>,
    positivity_floor: Option<f64>,
    max_steps: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    flux_form: Option<FluxForm>,
    scheme: Option<TimeScheme>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawStudy {
    eps_list: Option<Vec<f64>>,
    k_list: Option<Vec<u64>>,
    k_low: Option<u64>,
    k_high: Option<u64>,
    c3_multiple: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOracles {
    count: Option<usize>,
    seed: Option<u64>,
    panels: Option<usize>,
    cells: Option<usize>,
    eta: Option<f64>,
    p: Option<f64>,
    omega: Option<(f64, f64)>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parses and resolves a configuration document, then checks admissibility.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg = parse_document(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Parses and resolves without any range or admissibility checks.
pub fn parse_document(text: &str) -> Result<RunConfig> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| {
        let msg = e.message().trim().to_string();
        match e.span() {
            Some(span) => {
                let (line, col) = line_col(text, span.start);
                Error::Config(format!("line {line}, column {col}: {msg}"))
            }
            None => Error::Config(msg),
        }
    })?;
    Ok(resolve(raw))
}

fn resolve(raw: RawDoc) -> RunConfig {
    let p = raw.parameters;
    let parameters = ModelParameters {
        n: p.n,
        alpha: p.alpha,
        beta: p.beta,
        gamma: p.gamma,
        kappa: p.kappa,
        length: p.length,
        epsilon: p.epsilon.unwrap_or(1e-3),
    };
    let g = raw.grid.unwrap_or_default();
    let grid = GridSpec {
        cells: g.cells.unwrap_or(256),
        grading_exponent: g.grading_exponent.unwrap_or(2.0),
    };
    let t = raw.time.unwrap_or_default();
    let t_end = t.t_end.unwrap_or(1.0);
    let sample_interval = t.sample_interval.unwrap_or(t_end / 100.0);
    let time = TimeSpec {
        t_end,
        dt_init: t.dt_init.unwrap_or(1e-6 * t_end),
        dt_min: t.dt_min.unwrap_or(1e-12 * t_end),
        dt_max: t.dt_max.unwrap_or(sample_interval),
        sample_interval,
        step_tolerance: t.step_tolerance.unwrap_or(1e-3),
    };
    let th = raw.thresholds.unwrap_or_default();
    let thresholds = Thresholds {
        supnorm_threshold: th.supnorm_threshold,
        newton_tolerance: th.newton_tolerance.unwrap_or(1e-10),
        newton_max_iterations: th.newton_max_iterations.unwrap_or(30),
        positivity_floor: th.positivity_floor,
        max_steps: th.max_steps,
    };
    let s = raw.solver.unwrap_or_default();
    let solver = SolverSpec {
        flux_form: s.flux_form.unwrap_or_default(),
        scheme: s.scheme.unwrap_or_default(),
    };
    let st = raw.study.unwrap_or_default();
    let d = StudySpec::default();
    let study = StudySpec {
        eps_list: st.eps_list.unwrap_or(d.eps_list),
        k_list: st.k_list.unwrap_or(d.k_list),
        k_low: st.k_low.unwrap_or(d.k_low),
        k_high: st.k_high.unwrap_or(d.k_high),
        c3_multiple: st.c3_multiple.unwrap_or(d.c3_multiple),
    };
    let o = raw.oracles.unwrap_or_default();
    let od = FuzzSettings::default();
    let oracles = FuzzSettings {
        count: o.count.unwrap_or(od.count),
        seed: o.seed.unwrap_or(od.seed),
        panels: o.panels.unwrap_or(od.panels),
        cells: o.cells.unwrap_or(od.cells),
        eta: o.eta.unwrap_or(od.eta),
        p: o.p.unwrap_or(od.p),
        omega: o.omega.unwrap_or(od.omega),
    };
    RunConfig {
        mode: raw.mode.unwrap_or_default(),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("runs")),
        admissibility: raw.admissibility.unwrap_or(AdmissibilityMode::Blowup),
        parameters,
        grid,
        initial: raw.initial.unwrap_or(Profile::Constant { value: 1.0 }),
        time,
        thresholds,
        solver,
        study,
        oracles,
    }
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    let items: Vec<String> = xs.iter().map(f).collect();
    format!("[{}]", items.join(", "))
}

fn write_profile(out: &mut String, table: &str, profile: &Profile) {
    let _ = writeln!(out, "\n[{table}]");
    match profile {
        Profile::Constant { value } => {
            let _ = writeln!(out, "kind = \"constant\"\nvalue = {}", fmt_f(*value));
        }
        Profile::Bump { center, width, height, base } => {
            let _ = writeln!(
                out,
                "kind = \"bump\"\ncenter = {}\nwidth = {}\nheight = {}\nbase = {}",
                fmt_f(*center),
                fmt_f(*width),
                fmt_f(*height),
                fmt_f(*base)
            );
        }
        Profile::ConcentrationFamily { base, k, theta, phi } => {
            let _ = writeln!(out, "kind = \"concentration_family\"\nk = {k}");
            if let Some(theta) = theta {
                let _ = writeln!(out, "theta = {}", fmt_f(*theta));
            }
            write_profile(out, &format!("{table}.base"), base);
            if let Some(Bump { center, width, height }) = phi {
                let _ = writeln!(
                    out,
                    "\n[{table}.phi]\ncenter = {}\nwidth = {}\nheight = {}",
                    fmt_f(*center),
                    fmt_f(*width),
                    fmt_f(*height)
                );
            }
        }
        Profile::CustomTable { path } => {
            let _ = writeln!(out, "kind = \"custom_table\"\npath = {:?}", path.display().to_string());
        }
    }
}

impl RunConfig {
    /// The fully resolved document. Parsing the echo gives back an equal
    /// config, and echoing that gives back the same bytes.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let p = &self.parameters;
        let _ = writeln!(out, "mode = \"{}\"", self.mode.name());
        let _ = writeln!(out, "output_dir = {:?}", self.output_dir.display().to_string());
        let adm = match self.admissibility {
            AdmissibilityMode::Existence => "existence",
            AdmissibilityMode::Blowup => "blowup",
        };
        let _ = writeln!(out, "admissibility = \"{adm}\"");

        let _ = writeln!(out, "\n[parameters]");
        for (k, v) in [
            ("n", p.n),
            ("alpha", p.alpha),
            ("beta", p.beta),
            ("kappa", p.kappa),
            ("length", p.length),
            ("epsilon", p.epsilon),
        ] {
            let _ = writeln!(out, "{k} = {}", fmt_f(v));
        }
        if let Some(g) = p.gamma {
            let _ = writeln!(out, "gamma = {}", fmt_f(g));
        }

        let _ = writeln!(
            out,
            "\n[grid]\ncells = {}\ngrading_exponent = {}",
            self.grid.cells,
            fmt_f(self.grid.grading_exponent)
        );

        write_profile(&mut out, "initial", &self.initial);

        let t = &self.time;
        let _ = writeln!(out, "\n[time]");
        for (k, v) in [
            ("t_end", t.t_end),
            ("dt_init", t.dt_init),
            ("dt_min", t.dt_min),
            ("dt_max", t.dt_max),
            ("sample_interval", t.sample_interval),
            ("step_tolerance", t.step_tolerance),
        ] {
            let _ = writeln!(out, "{k} = {}", fmt_f(v));
        }

        let th = &self.thresholds;
        let _ = writeln!(out, "\n[thresholds]");
        if let Some(v) = th.supnorm_threshold {
            let _ = writeln!(out, "supnorm_threshold = {}", fmt_f(v));
        }
        let _ = writeln!(out, "newton_tolerance = {}", fmt_f(th.newton_tolerance));
        let _ = writeln!(out, "newton_max_iterations = {}", th.newton_max_iterations);
        if let Some(v) = th.positivity_floor {
            let _ = writeln!(out, "positivity_floor = {}", fmt_f(v));
        }
        if let Some(v) = th.max_steps {
            let _ = writeln!(out, "max_steps = {v}");
        }

        let flux = match self.solver.flux_form {
            FluxForm::Product => "product",
            FluxForm::EntropyConsistent => "entropy_consistent",
        };
        let scheme = match self.solver.scheme {
            TimeScheme::ImplicitEuler => "implicit_euler",
            TimeScheme::Trapezoidal => "trapezoidal",
        };
        let _ = writeln!(out, "\n[solver]\nflux_form = \"{flux}\"\nscheme = \"{scheme}\"");

        let s = &self.study;
        let _ = writeln!(
            out,
            "\n[study]\neps_list = {}\nk_list = {}\nk_low = {}\nk_high = {}\nc3_multiple = {}",
            fmt_list(&s.eps_list, |v| fmt_f(*v)),
            fmt_list(&s.k_list, |v| v.to_string()),
            s.k_low,
            s.k_high,
            fmt_f(s.c3_multiple)
        );

        let o = &self.oracles;
        let _ = writeln!(
            out,
            "\n[oracles]\ncount = {}\nseed = {}\npanels = {}\ncells = {}\neta = {}\np = {}\nomega = [{}, {}]",
            o.count,
            o.seed,
            o.panels,
            o.cells,
            fmt_f(o.eta),
            fmt_f(o.p),
            fmt_f(o.omega.0),
            fmt_f(o.omega.1)
        );
        out
    }

    /// Structural checks plus the admissibility windows of the requested mode.
    pub fn validate(&self) -> Result<()> {
        let report = check_admissibility(&self.parameters, self.admissibility);
        if !report.violated.is_empty() {
            return Err(Error::Inadmissible(report.violated));
        }
        if self.grid.cells < 4 {
            return Err(Error::TooFewCells(self.grid.cells));
        }
        if !(self.grid.grading_exponent >= 1.0) {
            return Err(Error::Config(format!(
                "grading_exponent must be >= 1, got {}",
                self.grid.grading_exponent
            )));
        }
        let t = &self.time;
        for (k, v) in [
            ("t_end", t.t_end),
            ("dt_init", t.dt_init),
            ("dt_min", t.dt_min),
            ("dt_max", t.dt_max),
            ("sample_interval", t.sample_interval),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("time.{k} must be positive and finite, got {v}")));
            }
        }
        if !(t.step_tolerance >= 0.0) {
            return Err(Error::Config(format!(
                "time.step_tolerance must be >= 0, got {}",
                t.step_tolerance
            )));
        }
        if t.dt_min > t.dt_init {
            return Err(Error::Config("time.dt_min exceeds time.dt_init".into()));
        }
        if !(self.thresholds.newton_tolerance > 0.0) {
            return Err(Error::Config("thresholds.newton_tolerance must be positive".into()));
        }
        if self.study.eps_list.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("study.eps_list entries must be positive".into()));
        }
        if self.study.k_list.contains(&0) || self.study.k_low == 0 {
            return Err(Error::Config("concentration indices start at 1".into()));
        }
        Ok(())
    }

    /// The same config as a single run with `epsilon` replaced.
    pub fn with_epsilon(&self, epsilon: f64) -> RunConfig {
        let mut c = self.clone();
        c.mode = Mode::Single;
        c.parameters.epsilon = epsilon;
        c
    }

    /// The same config as a single run of concentration index `k`.
    pub fn with_k(&self, k: u64) -> Result<RunConfig> {
        let mut c = self.clone();
        c.mode = Mode::Single;
        c.initial = self.initial.with_k(k)?;
        Ok(c)
    }
}

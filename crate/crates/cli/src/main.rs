use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bec_core::diagnostics::oracles::Lemma;
use bec_core::experiment::{
    bisect_blowup_threshold, parse_config, parse_document, run_eps_study, run_k_sweep, run_oracles, run_single,
    RunConfig,
};
use bec_core::paramspace::{check_admissibility, compute_nstar, kappa_upper_bound, AdmissibilityReport};
use bec_core::AdmissibilityMode;
use clap::{Args, Parser, Subcommand};

/// Simulator for the degenerate fourth-order condensation model.
#[derive(Parser)]
#[command(name = "bec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration document (TOML).
    config: PathBuf,
    /// Overrides `output_dir` of the document.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Report parameter admissibility for local existence and blow-up.
    Check {
        config: PathBuf,
    },
    /// Run a single simulation.
    Run(Common),
    /// Repeat the run for several regularization parameters.
    EpsStudy {
        #[command(flatten)]
        common: Common,
        /// Comma-separated epsilons; defaults to `study.eps_list`.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Run the concentration family for several k.
    KSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated indices; defaults to `study.k_list`.
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<u64>>,
    },
    /// Bisect the smallest concentration index that blows up within the horizon.
    Bisect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k_low: Option<u64>,
        #[arg(long)]
        k_high: Option<u64>,
    },
    /// Fuzz the weighted interpolation inequalities.
    Oracles {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(common: &Common) -> Result<RunConfig> {
    let text = read(&common.config)?;
    let mut cfg = parse_config(&text).with_context(|| format!("in {}", common.config.display()))?;
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn print_report(r: &AdmissibilityReport) {
    let mode = match r.mode {
        AdmissibilityMode::Existence => "existence",
        AdmissibilityMode::Blowup => "blowup",
    };
    println!("{mode}: {}", if r.passed() { "admissible" } else { "NOT admissible" });
    for v in &r.violated {
        println!("  {v}");
    }
}

fn check(path: &Path) -> Result<bool> {
    let cfg = parse_document(&read(path)?)?;
    let p = &cfg.parameters;
    println!("n* = {:.10}", compute_nstar());
    match kappa_upper_bound(p) {
        Ok(k) => println!("kappa bound = {k}, kappa = {}", p.kappa),
        Err(e) => println!("kappa bound undefined: {e}"),
    }
    let existence = check_admissibility(p, AdmissibilityMode::Existence);
    let blowup = check_admissibility(p, AdmissibilityMode::Blowup);
    print_report(&existence);
    print_report(&blowup);
    let requested = if cfg.admissibility == AdmissibilityMode::Existence { &existence } else { &blowup };
    Ok(requested.passed())
}

fn fmt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "none".into(), |t| format!("{t:.6e}"))
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Check { config } => check(&config),
        Command::Run(common) => {
            let cfg = load(&common)?;
            let a = run_single(&cfg)?;
            let s = &a.summary;
            println!("run {} -> {}", s.run_id, a.dir.display());
            println!(
                "t = {:.6e}, {} accepted / {} rejected steps",
                s.final_time, s.accepted_steps, s.rejected_steps
            );
            match &s.event {
                Some(e) => println!(
                    "blow-up event ({:?}) at t = {:.6e}: sup u = {:.6e} at x = {:.6e}",
                    e.trigger, e.t_event, e.sup_norm_at_event, e.argmax_x
                ),
                None => println!("no blow-up event"),
            }
            Ok(true)
        }
        Command::EpsStudy { common, eps } => {
            let cfg = load(&common)?;
            let list = eps.unwrap_or_else(|| cfg.study.eps_list.clone());
            let study = run_eps_study(&cfg, &list)?;
            print!("{}", read(&study.comparison_csv)?);
            Ok(study.members.iter().all(|m| m.result.is_ok()))
        }
        Command::KSweep { common, k } => {
            let cfg = load(&common)?;
            let list = k.unwrap_or_else(|| cfg.study.k_list.clone());
            let sweep = run_k_sweep(&cfg, &list)?;
            println!("{:>8} {:>24} {:>14}  status", "k", "initial moment", "blow-up time");
            for r in &sweep.rows {
                println!("{:>8} {:>24.16e} {:>14}  {}", r.k, r.initial_moment, fmt_time(r.blowup_time), r.status);
            }
            println!("table: {}", sweep.table.display());
            Ok(sweep.rows.iter().all(|r| r.status == "ok"))
        }
        Command::Bisect { common, k_low, k_high } => {
            let cfg = load(&common)?;
            let r = bisect_blowup_threshold(
                &cfg,
                k_low.unwrap_or(cfg.study.k_low),
                k_high.unwrap_or(cfg.study.k_high),
            )?;
            println!("{:>8} {:>14}", "k", "blow-up time");
            for (k, t) in &r.evaluations {
                println!("{k:>8} {:>14}", fmt_time(*t));
            }
            println!("k* = {}", r.k_star);
            println!("M estimate  int x^(beta-kappa) u0 = {:.16e}", r.m_estimate);
            println!("B           int x^beta u0         = {:.16e}", r.b);
            println!("D           int x^beta ln+(1/u0)  = {:.16e}", r.d);
            Ok(true)
        }
        Command::Oracles { common, count, seed } => {
            let mut cfg = load(&common)?;
            if let Some(c) = count {
                cfg.oracles.count = c;
            }
            if let Some(s) = seed {
                cfg.oracles.seed = s;
            }
            let (summary, paths) = run_oracles(&cfg)?;
            println!("{:<12} {:>10} {:>14} {:>14}  bounded", "inequality", "violations", "max needed C", "refined");
            for l in Lemma::ALL {
                let s = summary.lemma(l);
                println!(
                    "{:<12} {:>10} {:>14.6e} {:>14.6e}  {}",
                    l.name(),
                    s.violations,
                    s.max_needed,
                    s.max_needed_refined,
                    s.bounded
                );
            }
            for p in paths {
                println!("wrote {}", p.display());
            }
            Ok(summary.lemmas.iter().all(|s| s.bounded))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

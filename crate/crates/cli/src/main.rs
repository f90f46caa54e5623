//! `tnc`: calibrate, solve and sweep the ride-hailing market model from a
//! TOML config, and run the simulation checks behind the pickup-time law.

mod config;
mod run;
mod table;
mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tnc_core::calibrate_report;

use config::{Config, ConfigError};
use run::Plan;
use table::{fmt_g, write_csv, Row};

const WORKERS_VAR: &str = "TNC_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "tnc", version, about = "Ride-hailing market equilibrium and regulation solver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solve one scenario point (`scenario.value`).
    Solve { config: PathBuf },
    /// Solve every point of `scenario.start..=scenario.stop` and write CSV.
    Sweep { config: PathBuf },
    /// Print the parameters calibrated from `[observation]`.
    Calibrate { config: PathBuf },
    /// Run a simulation check; exits 1 if any line fails.
    Validate {
        #[arg(value_enum)]
        kind: validate::Check,
        /// Monte-Carlo trials per fleet size.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum)]
        region: Option<validate::Shape>,
    },
}

enum Failure {
    Config(String),
    Solver(String),
    Validation,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn init_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("{WORKERS_VAR}={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("worker pool: {e}")))
}

fn emit(rows: &[Row], path: Option<&Path>) -> Result<(), Failure> {
    let io_err = |e: csv::Error| Failure::Config(format!("writing csv: {e}"));
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
            }
            let f = File::create(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            write_csv(BufWriter::new(f), rows).map_err(io_err)
        }
        None => write_csv(io::stdout().lock(), rows).map_err(io_err),
    }
}

fn solve(path: &Path) -> Result<(), Failure> {
    let cfg = Config::load(path)?;
    let value = cfg.solve_value()?;
    let plan = Plan::from_config(&cfg)?;
    let row = plan.row(value);
    let s = match &row.result {
        Ok(s) => s.clone(),
        Err(e) => return Err(Failure::Solver(format!("{} at {}: {e}", plan.kind.as_str(), fmt_g(row.param_value)))),
    };
    let o = &s.outcome;
    let mut out = io::stdout().lock();
    let lines = [
        ("scenario", plan.kind.as_str().to_string()),
        ("param_value", fmt_g(row.param_value)),
        ("regime", s.regime.as_str().to_string()),
        ("p_f", fmt_g(s.prices.p_f)),
        ("p_d", fmt_g(s.prices.p_d)),
        ("p_c", fmt_g(s.prices.p_c)),
        ("rides_per_min", fmt_g(o.lambda)),
        ("drivers", fmt_g(o.n)),
        ("idle_drivers", fmt_g(o.n_idle)),
        ("pickup_min", fmt_g(o.t_w)),
        ("total_cost", fmt_g(o.cost)),
        ("wage_hr", fmt_g(o.wage_per_hr)),
        ("occupancy", fmt_g(o.occupancy)),
        ("commission_rate", fmt_g(o.commission_rate)),
        ("profit_hr", fmt_g(o.profit_per_hr)),
        ("converged", s.diagnostics.converged.to_string()),
        ("max_residual", fmt_g(s.diagnostics.max_residual)),
    ];
    for (k, v) in lines {
        let _ = writeln!(out, "{k:<16} {v}");
    }
    for n in &s.diagnostics.notes {
        let _ = writeln!(out, "note             {n}");
    }
    if let Some(p) = &cfg.output.path {
        emit(std::slice::from_ref(&row), Some(p))?;
    }
    Ok(())
}

fn sweep(path: &Path) -> Result<(), Failure> {
    let cfg = Config::load(path)?;
    let values = cfg.sweep_values()?;
    let plan = Plan::from_config(&cfg)?;
    let rows = plan.sweep(&values);
    emit(&rows, cfg.output.path.as_deref())?;
    if let Some(p) = &cfg.output.path {
        eprintln!("wrote {} rows to {}", rows.len(), p.display());
    }
    for line in plan.summary(&rows) {
        eprintln!("{line}");
    }
    Ok(())
}

fn calibrate(path: &Path) -> Result<(), Failure> {
    let cfg = Config::load(path)?;
    let Some(obs) = &cfg.observation else {
        return Err(Failure::Config("calibrate needs an [observation] section".into()));
    };
    let r = calibrate_report(obs).map_err(|e| Failure::Config(format!("[observation]: {e}")))?;
    let p = &r.params;
    println!("[params]");
    for (k, v) in [
        ("lambda0", p.lambda0),
        ("n0", p.n0),
        ("alpha", p.alpha),
        ("beta", p.beta),
        ("mu", p.mu),
        ("m", p.m),
        ("e_p", p.e_p),
        ("e_d", p.e_d),
    ] {
        println!("{k} = {}", fmt_g(v));
    }
    println!("# max relative residual {:.3e}", r.residuals.max_abs());
    if let Some(w) = tnc_core::feasibility_check(p).warning() {
        println!("# warning: {w}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_workers().and_then(|()| match &cli.cmd {
        Cmd::Solve { config } => solve(config),
        Cmd::Sweep { config } => sweep(config),
        Cmd::Calibrate { config } => calibrate(config),
        Cmd::Validate { kind, trials, seed, region } => match validate::run(*kind, *trials, *seed, *region) {
            Ok(lines) => {
                for l in &lines {
                    println!("{}", l.render());
                }
                if lines.iter().all(|l| l.pass) {
                    Ok(())
                } else {
                    Err(Failure::Validation)
                }
            }
            Err(e) => Err(Failure::Config(e.to_string())),
        },
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver error: {msg}");
            ExitCode::from(3)
        }
    }
}

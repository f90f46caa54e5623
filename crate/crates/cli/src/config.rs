use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use tnc_core::optimizer::GridSpec;
use tnc_core::{calibrate, ModelParams, Observation, SolverConfig};

/// Bad input: unreadable file, parse failure or inconsistent sections.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Swept parameter is the potential ride rate λ₀.
    Unregulated,
    /// Hourly wage floor.
    WageFloor,
    /// Driver cap.
    Cap,
    /// Per-trip surcharge.
    Congestion,
    /// Subsidy budget [$/min].
    Subsidy,
    /// Vehicle cost [$/hr].
    Amod,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::Unregulated => "unregulated",
            Kind::WageFloor => "wage_floor",
            Kind::Cap => "cap",
            Kind::Congestion => "congestion",
            Kind::Subsidy => "subsidy",
            Kind::Amod => "amod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    #[default]
    Foc,
    BruteForce,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: Kind,
    pub value: Option<f64>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Solver {
    pub tol: f64,
    pub max_iter: usize,
    pub bracket_points: usize,
    /// Cross-check every point against a coarse grid.
    pub verify: bool,
    pub method: SolveMethod,
    pub grid: GridSpec,
}

impl Default for Solver {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            bracket_points: d.bracket_points,
            verify: false,
            method: SolveMethod::Foc,
            grid: GridSpec::default(),
        }
    }
}

impl Solver {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            bracket_points: self.bracket_points,
            oracle_check: self.verify,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub params: Option<ModelParams>,
    pub observation: Option<Observation>,
    pub scenario: Option<Scenario>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub output: Output,
}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        match (&cfg.params, &cfg.observation) {
            (Some(_), Some(_)) => return Err(bad("give either [params] or [observation], not both")),
            (None, None) => return Err(bad("missing [params] or [observation]")),
            _ => {}
        }
        let s = &cfg.solver;
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(bad(format!("solver.tol = {} must lie in (0, 1)", s.tol)));
        }
        if s.max_iter == 0 || s.bracket_points < 2 {
            return Err(bad("solver.max_iter must be positive and solver.bracket_points at least 2"));
        }
        s.grid.validate().map_err(|e| bad(format!("solver.grid: {e}")))?;
        Ok(cfg)
    }

    /// Model parameters, calibrating first if an observation was given.
    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        match (&self.params, &self.observation) {
            (Some(p), _) => {
                p.validate().map_err(|e| bad(format!("[params]: {e}")))?;
                Ok(*p)
            }
            (None, Some(o)) => calibrate(o).map_err(|e| bad(format!("[observation]: {e}"))),
            (None, None) => unreachable!("checked in parse"),
        }
    }

    pub fn scenario(&self) -> Result<&Scenario, ConfigError> {
        self.scenario.as_ref().ok_or_else(|| bad("missing [scenario]"))
    }

    /// Sweep points in order.
    pub fn sweep_values(&self) -> Result<Vec<f64>, ConfigError> {
        let sc = self.scenario()?;
        let (Some(start), Some(stop), Some(steps)) = (sc.start, sc.stop, sc.steps) else {
            return Err(bad("sweep needs scenario.start, scenario.stop and scenario.steps"));
        };
        if !(start.is_finite() && stop.is_finite() && start < stop) {
            return Err(bad(format!("scenario.start = {start} must be below scenario.stop = {stop}")));
        }
        if steps < 2 {
            return Err(bad(format!("scenario.steps = {steps} must be at least 2")));
        }
        Ok(tnc_core::numerics::lin_grid(start, stop, steps))
    }

    /// Scenario value for a single solve. Unregulated runs may omit it.
    pub fn solve_value(&self) -> Result<Option<f64>, ConfigError> {
        let sc = self.scenario()?;
        match (sc.kind, sc.value) {
            (_, Some(v)) if !v.is_finite() => Err(bad(format!("scenario.value = {v} is not finite"))),
            (Kind::Unregulated, v) => Ok(v),
            (_, Some(v)) => Ok(Some(v)),
            (k, None) => Err(bad(format!("scenario.value is required for kind `{}`", k.as_str()))),
        }
    }
}

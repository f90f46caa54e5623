use rayon::prelude::*;
use tnc_core::optimizer::{
    brute_force, regime_boundaries, solve_amod, solve_cap, solve_congestion, solve_subsidy_budget, solve_unregulated,
    solve_wage_floor, GridSpec,
};
use tnc_core::{ModelParams, Regulation, Result, Solution, SolverConfig};

use crate::config::{Config, Kind, SolveMethod};
use crate::table::{fmt_g, Row};

/// Everything needed to solve one scenario point.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub kind: Kind,
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub method: SolveMethod,
    pub grid: GridSpec,
}

impl Plan {
    pub fn from_config(cfg: &Config) -> std::result::Result<Self, crate::config::ConfigError> {
        Ok(Self {
            kind: cfg.scenario()?.kind,
            params: cfg.model_params()?,
            solver: cfg.solver.config(),
            method: cfg.solver.method,
            grid: cfg.solver.grid,
        })
    }

    /// Solves at `value`; `None` is only meaningful for unregulated runs.
    pub fn solve(&self, value: Option<f64>) -> Result<Solution> {
        let p = match (self.kind, value) {
            (Kind::Unregulated, Some(l0)) => ModelParams { lambda0: l0, ..self.params },
            _ => self.params,
        };
        p.validate()?;
        let v = value.unwrap_or(f64::NAN);
        if self.method == SolveMethod::BruteForce {
            return brute_force(&p, self.regulation(&p, v)?, self.grid, &self.solver);
        }
        let cfg = &self.solver;
        match self.kind {
            Kind::Unregulated => solve_unregulated(&p, cfg),
            Kind::WageFloor => solve_wage_floor(&p, v, cfg),
            Kind::Cap => solve_cap(&p, v, cfg),
            Kind::Congestion => solve_congestion(&p, v, cfg),
            Kind::Subsidy => solve_subsidy_budget(&p, v, cfg).map(|s| s.solution),
            Kind::Amod => solve_amod(&p, v, cfg),
        }
    }

    fn regulation(&self, p: &ModelParams, v: f64) -> Result<Regulation> {
        Ok(match self.kind {
            Kind::Unregulated => Regulation::Unregulated,
            Kind::WageFloor => Regulation::WageFloor { w_floor: v },
            Kind::Cap => Regulation::Cap { n_cap: v },
            Kind::Congestion => Regulation::CongestionTax { p_c: v },
            Kind::Subsidy => {
                let quiet = SolverConfig { oracle_check: false, ..self.solver };
                let max_profit = solve_unregulated(p, &quiet)?.outcome.profit_per_min;
                Regulation::Subsidy { reservation_revenue: max_profit - v }
            }
            Kind::Amod => Regulation::Amod { c_av: v },
        })
    }

    pub fn row(&self, value: Option<f64>) -> Row {
        let param_value = value.unwrap_or(self.params.lambda0);
        Row { scenario: self.kind.as_str(), param_value, result: self.solve(value) }
    }

    /// One row per value, in input order whatever the completion order.
    pub fn sweep(&self, values: &[f64]) -> Vec<Row> {
        values.par_iter().map(|&v| self.row(Some(v))).collect()
    }

    /// Human-readable digest written after a sweep.
    pub fn summary(&self, rows: &[Row]) -> Vec<String> {
        let failed = rows.iter().filter(|r| r.result.is_err()).count();
        let unconverged = rows.iter().filter(|r| matches!(&r.result, Ok(s) if !s.diagnostics.converged)).count();
        let mut out = vec![format!(
            "{}: {} points, {} solved, {} not converged, {} failed",
            self.kind.as_str(),
            rows.len(),
            rows.len() - failed,
            unconverged,
            failed
        )];
        let mut runs: Vec<(String, f64, f64)> = Vec::new();
        for r in rows {
            let tag = match &r.result {
                Ok(s) => s.regime.as_str().to_string(),
                Err(e) => e.kind().to_string(),
            };
            match runs.last_mut() {
                Some((t, _, hi)) if *t == tag => *hi = r.param_value,
                _ => runs.push((tag, r.param_value, r.param_value)),
            }
        }
        for (tag, lo, hi) in runs {
            out.push(format!("  {} .. {}: {tag}", fmt_g(lo), fmt_g(hi)));
        }
        if self.kind == Kind::WageFloor {
            match regime_boundaries(&self.params, &SolverConfig { oracle_check: false, ..self.solver }) {
                Ok(b) => out.push(format!(
                    "regime boundaries [$/hr]: unregulated wage {:.4}, rationing from {:.4}, zero profit at {:.4}",
                    b.w_tilde, b.w_regime3, b.w_zero_profit
                )),
                Err(e) => out.push(format!("regime boundaries unavailable: {e}")),
            }
        }
        out
    }
}

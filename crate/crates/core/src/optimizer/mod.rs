//! Profit-maximizing (or ride-maximizing) platform prices under each
//! regulation, plus the grid oracle used to verify them.

mod amod;
mod brute;
mod cap;
mod subsidy;
mod unregulated;
mod wage_floor;

pub use amod::solve_amod;
pub use brute::{brute_force, GridSpec};
pub use cap::solve_cap;
pub use subsidy::{solve_subsidy, solve_subsidy_budget, SubsidySolution};
pub use unregulated::{solve_congestion, solve_unregulated};
pub use wage_floor::{
    fleet_cost_subproblem, regime_boundaries, solve_wage_floor, solve_wage_floor_allow_loss, FleetCostOptimum,
    RegimeBoundaries,
};

use crate::model::{ModelParams, Regulation, Solution};
use crate::numerics::{brent_root, SolverConfig};

/// Idle fleet at the profit-optimal fleet size for ride rate `lambda` when
/// wages follow the supply curve: `(u + λ/μ)·u^{3/2} = α·M·N₀e_d·λ/(4β)`.
pub(crate) fn idle_at_optimal_fleet(lambda: f64, params: &ModelParams) -> f64 {
    let rhs = params.alpha * params.m * params.supply_slope() * lambda / (4.0 * params.beta);
    let load = lambda / params.mu;
    let hi = rhs.powf(0.4).min((rhs / load).powf(2.0 / 3.0));
    let f = |u: f64| (u + load) * u * u.sqrt() - rhs;
    if f(hi) <= 0.0 {
        return hi;
    }
    brent_root(f, 0.0, hi, 1e-15 * hi, 200).map(|r| r.x).unwrap_or(hi)
}

/// Cross-checks an optimizer result against a coarse grid optimum; a grid
/// point strictly better than the solution clears `converged`.
pub(crate) fn verify_against_grid(
    sol: &mut Solution,
    params: &ModelParams,
    regulation: Regulation,
    cfg: &SolverConfig,
) {
    if !cfg.oracle_check {
        return;
    }
    let grid = match brute_force(params, regulation, GridSpec::coarse(), cfg) {
        Ok(g) => g,
        Err(e) => {
            sol.diagnostics.notes.push(format!("grid check skipped: {e}"));
            return;
        }
    };
    let objective = |s: &Solution| match regulation {
        Regulation::Subsidy { .. } => s.outcome.lambda,
        _ => s.outcome.profit_per_min,
    };
    let (mine, theirs) = (objective(sol), objective(&grid));
    if theirs > mine + 1e-6 * mine.abs() + 1e-9 {
        sol.diagnostics.converged = false;
        sol.diagnostics.notes.push(format!("grid check found better objective {theirs} than {mine}"));
    }
}

use crate::equilibrium::MIN_RIDE_FRACTION;
use crate::error::{Error, Result};
use crate::model::{Diagnostics, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution};
use crate::numerics::{lin_grid, rel_gap, scan_roots, SolverConfig};

use super::{solve_unregulated, verify_against_grid};

/// Fare satisfying the fare condition at a binding cap.
fn capped_fare(lambda: f64, n_cap: f64, params: &ModelParams) -> f64 {
    let idle = n_cap - lambda / params.mu;
    params.alpha * params.m * lambda / (2.0 * params.beta * params.mu * idle * idle.sqrt())
        + lambda / (params.lambda0 * params.e_p * params.beta)
}

/// Profit maximum with at most `n_cap` active drivers.
pub fn solve_cap(params: &ModelParams, n_cap: f64, cfg: &SolverConfig) -> Result<Solution> {
    Regulation::Cap { n_cap }.validate()?;
    let base = solve_unregulated(params, &SolverConfig { oracle_check: false, ..*cfg })?;
    if base.outcome.n <= n_cap {
        let mut sol = base;
        sol.regime = Regime::CapInactive;
        return Ok(sol);
    }
    if n_cap > params.n0 {
        return Err(Error::Infeasible(format!("cap {n_cap} exceeds the driver pool")));
    }
    let (alpha, m, beta, mu) = (params.alpha, params.m, params.beta, params.mu);
    let s = params.supply_slope();
    let lo = MIN_RIDE_FRACTION * params.lambda0;
    let hi = params.lambda0.min(mu * n_cap) * (1.0 - 1e-12);
    if !(hi > lo) {
        return Err(Error::Infeasible(format!("cap {n_cap} admits no rides")));
    }
    let gap = |lambda: f64| {
        let idle = n_cap - lambda / mu;
        let cost = alpha * m / idle.sqrt() + beta * capped_fare(lambda, n_cap, params);
        lambda - params.demand_rate(cost)
    };
    let roots = scan_roots(gap, |k| lin_grid(lo, hi, k), cfg.bracket_points, 1e-15, cfg.max_iter);
    let profit_at = |lambda: f64| lambda * capped_fare(lambda, n_cap, params) - n_cap * n_cap / s;
    let (root, _) = roots
        .into_iter()
        .max_by(|a, b| profit_at(a.0.x).total_cmp(&profit_at(b.0.x)))
        .ok_or(Error::Infeasible(format!("no interior equilibrium under cap {n_cap}")))?;
    let lambda = root.x;
    let p_f = capped_fare(lambda, n_cap, params);
    let p_d = n_cap * n_cap / (s * lambda);
    let prices = Prices::new(p_f, p_d);
    let outcome = MarketOutcome::from_state(lambda, n_cap, &prices, params)?;
    if !(outcome.profit_per_min > 0.0) {
        return Err(Error::Infeasible(format!("cap {n_cap} leaves profit {} $/hr", outcome.profit_per_hr)));
    }
    let idle = outcome.n_idle;
    let l0ep = params.lambda0 * params.e_p;
    let foc = rel_gap(l0ep * beta * mu * p_f, l0ep * alpha * m * lambda / (2.0 * idle * idle.sqrt()) + lambda * mu);
    let (rd, rs) = crate::equilibrium::equilibrium_residual(&outcome, &prices, params);
    let residual = foc.abs().max(rd.abs() / lambda).max(rs.abs() / n_cap);
    let diagnostics = Diagnostics::new(Method::Foc, residual, root.iterations, cfg.tol);
    let mut sol = Solution { prices, outcome, regime: Regime::CapBinding, diagnostics };
    verify_against_grid(&mut sol, params, Regulation::Cap { n_cap }, cfg);
    Ok(sol)
}

//! Ride maximization subject to a minimum platform revenue.
//!
//! For a fixed ride rate the best fleet is the same one the unregulated
//! platform would choose, so the highest attainable profit `Π(λ)` is a
//! scalar function. Beyond the unregulated ride rate it falls, and the
//! answer is the largest `λ` with `Π(λ) = R`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Diagnostics, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution};
use crate::numerics::{brent_root, lin_grid, rel_gap, SolverConfig};

use super::{idle_at_optimal_fleet, solve_unregulated, verify_against_grid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsidySolution {
    pub solution: Solution,
    /// Fare reduction relative to the unregulated fare, `p̃_f − p_f`.
    pub rider_subsidy: f64,
    /// Payment increase relative to the unregulated payment, `p_d − p̃_d`.
    pub driver_subsidy: f64,
    /// `p_f − p̃_f`: the fare change measured from the unregulated fare.
    pub eps_f: f64,
    /// `p̃_d − p_d`: the payment change measured toward the unregulated payment.
    pub eps_d: f64,
    /// `Π̃ − R` [$/min].
    pub budget: f64,
}

struct Candidate {
    lambda: f64,
    n: f64,
    p_f: f64,
    p_d: f64,
    profit: f64,
}

fn best_fleet_at(lambda: f64, params: &ModelParams) -> Candidate {
    let idle = idle_at_optimal_fleet(lambda, params);
    let n = idle + lambda / params.mu;
    let cost = (1.0 - lambda / params.lambda0) / params.e_p;
    let p_f = (cost - params.alpha * params.m / idle.sqrt()) / params.beta;
    let p_d = n * n / (params.supply_slope() * lambda);
    Candidate { lambda, n, p_f, p_d, profit: lambda * (p_f - p_d) }
}

/// Ride-maximizing prices when the platform keeps at least
/// `reservation_revenue` per minute.
pub fn solve_subsidy(params: &ModelParams, reservation_revenue: f64, cfg: &SolverConfig) -> Result<SubsidySolution> {
    Regulation::Subsidy { reservation_revenue }.validate()?;
    let base = solve_unregulated(params, &SolverConfig { oracle_check: false, ..*cfg })?;
    let max_profit = base.outcome.profit_per_min;
    let slack = 1e-12 * max_profit.abs();
    if reservation_revenue > max_profit + slack {
        return Err(Error::InfeasibleRevenue { requested: reservation_revenue, max: max_profit });
    }
    let tilde = base.prices;
    if reservation_revenue >= max_profit - slack {
        return Ok(SubsidySolution {
            solution: base,
            rider_subsidy: 0.0,
            driver_subsidy: 0.0,
            eps_f: 0.0,
            eps_d: 0.0,
            budget: 0.0,
        });
    }

    let lambda_tilde = base.outcome.lambda;
    let hi = params.lambda0 * (1.0 - 1e-12);
    let shortfall = |l: f64| best_fleet_at(l, params).profit - reservation_revenue;
    let grid = lin_grid(lambda_tilde, hi, cfg.bracket_points.max(16));
    let upper = grid
        .windows(2)
        .find(|w| shortfall(w[1]) < 0.0)
        .map(|w| (w[0], w[1]))
        .ok_or(Error::Infeasible(format!("revenue {reservation_revenue} met at every ride rate")))?;
    let root = brent_root(shortfall, upper.0, upper.1, 1e-15 * upper.1, cfg.max_iter)?;
    let cand = best_fleet_at(root.x, params);
    if cand.n > params.n0 {
        return Err(Error::Infeasible(format!(
            "revenue {reservation_revenue} requires {} drivers, beyond the pool",
            cand.n
        )));
    }
    let prices = Prices::new(cand.p_f, cand.p_d);
    let outcome = MarketOutcome::from_state(cand.lambda, cand.n, &prices, params)?;
    let (rd, rs) = crate::equilibrium::equilibrium_residual(&outcome, &prices, params);
    let fleet = {
        let u = outcome.n_idle;
        rel_gap(
            cand.n * u * u.sqrt(),
            params.alpha * params.m * params.supply_slope() * cand.lambda / (4.0 * params.beta),
        )
    };
    let revenue = rel_gap(cand.profit, reservation_revenue);
    let residual = fleet
        .abs()
        .max((rd / cand.lambda).abs())
        .max((rs / cand.n).abs())
        .max(if reservation_revenue.abs() > 1e-9 { revenue.abs() } else { (cand.profit / max_profit).abs() });
    let mut diagnostics = Diagnostics::new(Method::Foc, residual, root.iterations, cfg.tol);
    if cand.p_f < 0.0 {
        diagnostics.notes.push(format!("fare {} below zero", cand.p_f));
    }
    let mut solution = Solution { prices, outcome, regime: Regime::RevenueConstraintBinding, diagnostics };
    verify_against_grid(&mut solution, params, Regulation::Subsidy { reservation_revenue }, cfg);
    Ok(SubsidySolution {
        rider_subsidy: tilde.p_f - prices.p_f,
        driver_subsidy: prices.p_d - tilde.p_d,
        eps_f: prices.p_f - tilde.p_f,
        eps_d: tilde.p_d - prices.p_d,
        budget: max_profit - reservation_revenue,
        solution,
    })
}

/// As [`solve_subsidy`] with the budget `B = Π̃ − R` [$/min] as input.
pub fn solve_subsidy_budget(params: &ModelParams, budget: f64, cfg: &SolverConfig) -> Result<SubsidySolution> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(Error::InvalidParameter { name: "budget", value: budget });
    }
    let r = max_profit(params, cfg)? - budget;
    let mut out = solve_subsidy(params, r, cfg)?;
    out.budget = budget;
    Ok(out)
}

fn max_profit(params: &ModelParams, cfg: &SolverConfig) -> Result<f64> {
    Ok(solve_unregulated(params, &SolverConfig { oracle_check: false, ..*cfg })?.outcome.profit_per_min)
}

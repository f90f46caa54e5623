//! Passenger/driver fixed point for given prices, and the inverse map from
//! a (total cost, wage) pair to the prices that support it.

use crate::error::{Error, Result};
use crate::model::{MarketOutcome, ModelParams, Prices};
use crate::numerics::{brent_root, log_grid, sign_changes, SolverConfig};

/// Rides below this fraction of potential demand count as the trivial state.
pub const MIN_RIDE_FRACTION: f64 = 1e-6;

/// Passenger total cost and driver wage [$/min].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwPoint {
    pub c: f64,
    pub w: f64,
}

/// Maps `(c, w)` to the prices that make it an equilibrium, with surcharge 0.
pub fn outcome_from_cw(pt: CwPoint, params: &ModelParams) -> Result<(Prices, MarketOutcome)> {
    outcome_from_cw_with_surcharge(pt, 0.0, params)
}

/// As [`outcome_from_cw`] with an exogenous per-trip surcharge folded into
/// the cost. The fare may come back negative; callers decide.
pub fn outcome_from_cw_with_surcharge(pt: CwPoint, p_c: f64, params: &ModelParams) -> Result<(Prices, MarketOutcome)> {
    if !(pt.c >= 0.0 && pt.c < params.choke_cost()) {
        return Err(Error::InvalidInput(format!("total cost {} outside [0, 1/e_p)", pt.c)));
    }
    if !(pt.w > 0.0) {
        return Err(Error::InvalidInput(format!("wage {} must be positive", pt.w)));
    }
    let lambda = params.demand_rate(pt.c);
    let n = params.driver_supply(pt.w);
    let n_idle = n - lambda / params.mu;
    if !(n_idle > 0.0) {
        return Err(Error::QueueUnstable { n_idle });
    }
    let t_w = params.m / n_idle.sqrt();
    let p_f = (pt.c - params.alpha * t_w) / params.beta - p_c;
    let p_d = pt.w * n / lambda;
    let prices = Prices { p_f, p_d, p_c };
    let mut outcome = MarketOutcome::from_state(lambda, n, &prices, params)?;
    outcome.cost = pt.c;
    Ok((prices, outcome))
}

/// Signed residuals `(λ − D(λ, N), N − S(λ, N))` of the demand and supply conditions.
pub fn equilibrium_residual(outcome: &MarketOutcome, prices: &Prices, params: &ModelParams) -> (f64, f64) {
    let (lambda, n) = (outcome.lambda, outcome.n);
    let t_w = params.wait_or_inf(n - lambda / params.mu);
    let demand = params.demand_rate(params.alpha * t_w + params.beta * (prices.p_f + prices.p_c));
    let supply = params.driver_supply(lambda * prices.p_d / n);
    (lambda - demand, n - supply)
}

/// Ride rate that clears passenger demand for a fixed fleet `n`.
///
/// The residual is strictly decreasing on `(0, min(λ₀, μN))`, so the root is unique.
pub fn rides_for_fleet(n: f64, prices: &Prices, params: &ModelParams, max_iter: usize) -> Result<f64> {
    let fare_cost = params.beta * (prices.p_f + prices.p_c);
    let gap = |lambda: f64| {
        let t_w = params.wait_or_inf(n - lambda / params.mu);
        params.demand_rate(params.alpha * t_w + fare_cost) - lambda
    };
    let at_zero = gap(0.0);
    if at_zero <= 0.0 {
        return Ok(0.0);
    }
    let hi = params.lambda0.min(params.mu * n);
    let at_hi = gap(hi);
    if at_hi >= 0.0 {
        return Ok(hi);
    }
    brent_root(gap, 0.0, hi, 1e-15 * hi, max_iter).map(|r| r.x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub outcome: MarketOutcome,
    /// Sign changes of the supply residual seen along the fleet scan.
    pub candidate_roots: usize,
    pub iterations: usize,
}

pub fn solve_equilibrium(prices: &Prices, params: &ModelParams, cfg: &SolverConfig) -> Result<MarketOutcome> {
    solve_equilibrium_report(prices, params, cfg).map(|r| r.outcome)
}

/// Nested solve: rides given fleet by Brent, then fleet by a scan for the
/// largest sign change of the supply residual followed by Brent.
pub fn solve_equilibrium_report(
    prices: &Prices,
    params: &ModelParams,
    cfg: &SolverConfig,
) -> Result<EquilibriumReport> {
    params.validate()?;
    if !(prices.p_f >= 0.0 && prices.p_d >= 0.0 && prices.p_c >= 0.0) {
        return Err(Error::InvalidInput(format!("prices must be non-negative: {prices:?}")));
    }
    let lambda_min = MIN_RIDE_FRACTION * params.lambda0;
    let mut inner_fail = None;
    let mut supply_gap = |n: f64| match rides_for_fleet(n, prices, params, cfg.max_iter) {
        Ok(lambda) => n - params.driver_supply(lambda * prices.p_d / n),
        Err(e) => {
            inner_fail = Some(e);
            f64::NAN
        }
    };

    let top = params.n0;
    let top_gap = supply_gap(top);
    let mut iterations = 0;
    let mut candidate_roots;
    let n_star = if top_gap <= 0.0 {
        // supply saturated at the whole pool
        candidate_roots = 1;
        top
    } else {
        let mut grid_n = cfg.bracket_points.max(16);
        let mut bracket = None;
        candidate_roots = 0;
        for _ in 0..3 {
            let grid = log_grid(top * 1e-9, top, grid_n);
            let brackets = sign_changes(&mut supply_gap, &grid);
            candidate_roots = brackets.len();
            if let Some(b) = brackets.last() {
                bracket = Some(*b);
                break;
            }
            grid_n *= 4;
        }
        let b = bracket.ok_or(Error::NoInteriorEquilibrium)?;
        let root = brent_root(&mut supply_gap, b.lo, b.hi, 1e-15 * b.hi, cfg.max_iter)?;
        iterations = root.iterations;
        root.x
    };
    if let Some(e) = inner_fail {
        return Err(e);
    }
    let lambda = rides_for_fleet(n_star, prices, params, cfg.max_iter)?;
    if lambda <= lambda_min {
        return Err(Error::NoInteriorEquilibrium);
    }
    let outcome = MarketOutcome::from_state(lambda, n_star, prices, params)?;
    let (rd, rs) = equilibrium_residual(&outcome, prices, params);
    let scaled = (rd.abs() / lambda.max(1.0)).max(rs.abs() / n_star.max(1.0));
    if !(scaled < cfg.tol) {
        return Err(Error::NonConvergence { iterations, best_residual: scaled });
    }
    Ok(EquilibriumReport { outcome, candidate_roots, iterations })
}

//! Fleet-owned autonomous vehicles: the platform pays `c_av` per vehicle
//! hour and no driver pool constrains the fleet.
//!
//! Profit is `λ·p_f − c_av·N`. Solved directly in (fare, fleet)
//! coordinates: for each fleet size the fare condition `λ + p_f·∂λ/∂p_f = 0`
//! is solved with rides from the demand fixed point, then the fleet
//! condition `p_f·∂λ/∂N = c_av` picks the fleet.

use crate::equilibrium::rides_for_fleet;
use crate::error::{Error, Result};
use crate::model::{
    Diagnostics, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution, MINUTES_PER_HOUR,
};
use crate::numerics::{brent_root, lin_grid, log_grid, rel_gap, sign_changes, Crossing, SolverConfig};

use super::verify_against_grid;

#[derive(Debug, Clone, Copy)]
struct FareChoice {
    p_f: f64,
    lambda: f64,
}

/// Derivatives of the ride rate with respect to fare and fleet at a demand fixed point.
fn ride_sensitivities(lambda: f64, n: f64, params: &ModelParams) -> (f64, f64) {
    let idle = n - lambda / params.mu;
    let pull = params.lambda0 * params.e_p * params.alpha * params.m / (2.0 * idle * idle.sqrt());
    let denom = 1.0 + pull / params.mu;
    (-params.lambda0 * params.e_p * params.beta / denom, pull / denom)
}

fn rides(p_f: f64, n: f64, params: &ModelParams, max_iter: usize) -> f64 {
    rides_for_fleet(n, &Prices::new(p_f, 0.0), params, max_iter).unwrap_or(f64::NAN)
}

fn best_fare(n: f64, params: &ModelParams, cfg: &SolverConfig) -> Option<FareChoice> {
    let p_max = (params.choke_cost() - params.alpha * params.m / n.sqrt()) / params.beta;
    if !(p_max > 0.0) {
        return None;
    }
    let marginal = |p_f: f64| {
        let lambda = rides(p_f, n, params, cfg.max_iter);
        if !(lambda > 0.0) {
            return f64::NAN;
        }
        lambda + p_f * ride_sensitivities(lambda, n, params).0
    };
    let grid = lin_grid(0.0, p_max * (1.0 - 1e-9), 48);
    sign_changes(marginal, &grid)
        .into_iter()
        .filter(|b| b.crossing == Crossing::Falling)
        .filter_map(|b| brent_root(marginal, b.lo, b.hi, 1e-15 * p_max, cfg.max_iter).ok())
        .map(|r| FareChoice { p_f: r.x, lambda: rides(r.x, n, params, cfg.max_iter) })
        .max_by(|a, b| (a.lambda * a.p_f).total_cmp(&(b.lambda * b.p_f)))
}

/// Profit maximum for a fleet costing `c_av` per vehicle hour.
pub fn solve_amod(params: &ModelParams, c_av: f64, cfg: &SolverConfig) -> Result<Solution> {
    params.validate()?;
    Regulation::Amod { c_av }.validate()?;
    let w = c_av / MINUTES_PER_HOUR;
    // fleet below which riders decline even at zero fare
    let n_lo = (params.alpha * params.m * params.e_p).powi(2) * (1.0 + 1e-9);
    let fleet_gap = |n: f64| match best_fare(n, params, cfg) {
        Some(fc) => fc.p_f * ride_sensitivities(fc.lambda, n, params).1 - w,
        None => f64::NAN,
    };
    let mut n_hi = 2.0 * (params.n0 + params.lambda0 / params.mu);
    let mut tries = 0;
    while !(fleet_gap(n_hi) < 0.0) {
        n_hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::NoPositiveProfit { profit: f64::INFINITY });
        }
    }
    let grid = log_grid(n_lo, n_hi, cfg.bracket_points.max(16));
    let profit_at = |n: f64| best_fare(n, params, cfg).map(|fc| fc.lambda * fc.p_f - w * n);
    let best = sign_changes(fleet_gap, &grid)
        .into_iter()
        .filter(|b| b.crossing == Crossing::Falling)
        .filter_map(|b| brent_root(fleet_gap, b.lo, b.hi, 1e-15 * b.hi, cfg.max_iter).ok())
        .filter_map(|r| profit_at(r.x).map(|p| (r, p)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let (root, profit) = best.ok_or(Error::NoPositiveProfit { profit: 0.0 })?;
    if !(profit > 0.0) {
        return Err(Error::NoPositiveProfit { profit: profit * MINUTES_PER_HOUR });
    }
    let n = root.x;
    let fare = best_fare(n, params, cfg).ok_or(Error::NoPositiveProfit { profit: 0.0 })?;
    let prices = Prices::new(fare.p_f, w * n / fare.lambda);
    let outcome = MarketOutcome::from_state(fare.lambda, n, &prices, params)?;
    let (d_fare, d_fleet) = ride_sensitivities(fare.lambda, n, params);
    let (rd, _) = crate::equilibrium::equilibrium_residual(&outcome, &prices, params);
    let residual = rel_gap(fare.lambda, -fare.p_f * d_fare)
        .abs()
        .max(rel_gap(fare.p_f * d_fleet, w).abs())
        .max((rd / fare.lambda).abs());
    let diagnostics = Diagnostics::new(Method::Foc, residual, root.iterations, cfg.tol);
    let mut sol = Solution { prices, outcome, regime: Regime::FleetCostOptimum, diagnostics };
    verify_against_grid(&mut sol, params, Regulation::Amod { c_av }, cfg);
    Ok(sol)
}

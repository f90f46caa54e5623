use crate::equilibrium::MIN_RIDE_FRACTION;
use crate::error::{Error, Result};
use crate::model::{
    feasibility_check, Diagnostics, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution,
};
use crate::numerics::{log_grid, rel_gap, scan_roots, SolverConfig};

use super::{idle_at_optimal_fleet, verify_against_grid};

/// Candidate optimum parametrized by the ride rate: fleet from the fleet
/// condition, fare from the fare condition, payment from the supply curve.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ReducedPoint {
    pub lambda: f64,
    pub n: f64,
    pub n_idle: f64,
    pub p_f: f64,
    pub p_d: f64,
}

impl ReducedPoint {
    pub fn at(lambda: f64, params: &ModelParams) -> Self {
        let n_idle = idle_at_optimal_fleet(lambda, params);
        let n = n_idle + lambda / params.mu;
        let s = params.supply_slope();
        Self {
            lambda,
            n,
            n_idle,
            p_f: lambda / (params.lambda0 * params.e_p * params.beta) + 2.0 * n / (params.mu * s),
            p_d: n * n / (s * lambda),
        }
    }

    pub fn demand_gap(&self, p_c: f64, params: &ModelParams) -> f64 {
        let cost = params.alpha * params.m / self.n_idle.sqrt() + params.beta * (self.p_f + p_c);
        self.lambda - params.demand_rate(cost)
    }

    pub fn profit(&self) -> f64 {
        self.lambda * (self.p_f - self.p_d)
    }
}

/// Largest relative residual of the demand, supply, fare and fleet conditions.
pub(crate) fn reduced_residual(lambda: f64, n: f64, p_f: f64, p_d: f64, p_c: f64, params: &ModelParams) -> f64 {
    let s = params.supply_slope();
    let (a, m, b, mu) = (params.alpha, params.m, params.beta, params.mu);
    let (l0, ep) = (params.lambda0, params.e_p);
    let u = n - lambda / mu;
    let demand = params.demand_rate(a * m / u.sqrt() + b * (p_f + p_c));
    let sp = (s * p_d * lambda).sqrt();
    let fare_lhs = 0.25 * l0 * ep * a * m * p_f * (s * lambda / p_d).sqrt();
    let fare_rhs = lambda * (sp - lambda / mu).powf(1.5) + a * m * ep * l0 * lambda / (2.0 * mu);
    let fleet_lhs = b * (p_d / lambda).sqrt() * (sp - lambda / mu).powf(1.5);
    let fleet_rhs = 0.25 * a * m * s.sqrt();
    let split_lhs = p_f * l0 * ep * b * s.sqrt();
    let split_rhs = s.sqrt() * lambda + 2.0 * (lambda * p_d).sqrt() * ep * l0 * b / mu;
    [
        rel_gap(lambda, demand),
        rel_gap(n, params.driver_supply(lambda * p_d / n)),
        rel_gap(fare_lhs, fare_rhs),
        rel_gap(fleet_lhs, fleet_rhs),
        rel_gap(split_lhs, split_rhs),
    ]
    .into_iter()
    .fold(0.0, |acc, r| acc.max(r.abs()))
}

pub(crate) struct ReducedOptimum {
    pub point: ReducedPoint,
    pub iterations: usize,
    pub roots: usize,
}

/// Scalar solve of the reduced first-order system in the ride rate.
pub(crate) fn reduced_optimum(params: &ModelParams, p_c: f64, cfg: &SolverConfig) -> Result<ReducedOptimum> {
    params.validate()?;
    let lo = MIN_RIDE_FRACTION * params.lambda0;
    let hi = params.lambda0 * (1.0 - 1e-12);
    let roots = scan_roots(
        |l| ReducedPoint::at(l, params).demand_gap(p_c, params),
        |n| log_grid(lo, hi, n),
        cfg.bracket_points,
        1e-15,
        cfg.max_iter,
    );
    let count = roots.len();
    let best = roots
        .into_iter()
        .map(|(r, _)| (ReducedPoint::at(r.x, params), r.iterations))
        .filter(|(pt, _)| pt.p_f >= 0.0 && pt.n <= params.n0 && pt.n_idle > 0.0)
        .max_by(|a, b| a.0.profit().total_cmp(&b.0.profit()));
    match best {
        Some((point, iterations)) if point.profit() > 0.0 => Ok(ReducedOptimum { point, iterations, roots: count }),
        Some((point, _)) => Err(Error::NoPositiveProfit { profit: point.profit() }),
        None => Err(Error::NoPositiveProfit { profit: 0.0 }),
    }
}

fn finish(opt: ReducedOptimum, p_c: f64, regime: Regime, params: &ModelParams, cfg: &SolverConfig) -> Result<Solution> {
    let pt = opt.point;
    let prices = Prices { p_f: pt.p_f, p_d: pt.p_d, p_c };
    let outcome = MarketOutcome::from_state(pt.lambda, pt.n, &prices, params)?;
    let residual = reduced_residual(pt.lambda, pt.n, pt.p_f, pt.p_d, p_c, params);
    let mut diagnostics = Diagnostics::new(Method::Foc, residual, opt.iterations, cfg.tol);
    if opt.roots > 1 {
        diagnostics.notes.push(format!("{} stationary ride rates; kept the most profitable", opt.roots));
    }
    if let Some(w) = feasibility_check(params).warning() {
        diagnostics.notes.push(w);
    }
    Ok(Solution { prices, outcome, regime, diagnostics })
}

/// Unregulated profit maximum.
pub fn solve_unregulated(params: &ModelParams, cfg: &SolverConfig) -> Result<Solution> {
    let opt = reduced_optimum(params, 0.0, cfg)?;
    let mut sol = finish(opt, 0.0, Regime::UnregulatedOptimum, params, cfg)?;
    verify_against_grid(&mut sol, params, Regulation::Unregulated, cfg);
    Ok(sol)
}

/// Profit maximum with an exogenous per-trip surcharge paid by riders to the city.
pub fn solve_congestion(params: &ModelParams, p_c: f64, cfg: &SolverConfig) -> Result<Solution> {
    Regulation::CongestionTax { p_c }.validate()?;
    if p_c == 0.0 {
        return solve_unregulated(params, cfg);
    }
    let opt = reduced_optimum(params, p_c, cfg)?;
    let mut sol = finish(opt, p_c, Regime::SurchargeApplied, params, cfg)?;
    verify_against_grid(&mut sol, params, Regulation::CongestionTax { p_c }, cfg);
    Ok(sol)
}

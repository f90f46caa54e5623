//! Wage floor by case analysis on two relaxed problems.
//!
//! P1 pays the supply-curve wage bill `N²/(N₀e_d)`, i.e. the unregulated
//! problem. P2 pays the floor `w` per driver-minute with no supply limit.
//! Comparing the two at their optima separates three regimes:
//!
//! * floor below the unregulated wage: P1 wins and the floor is slack;
//! * P2's fleet is smaller than the supply at `w`: the platform rations
//!   entry and pays exactly the floor;
//! * otherwise both bind: the fleet is pinned at `N₀F_d(w)` and only the
//!   total cost remains free.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    Diagnostics, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution, MINUTES_PER_HOUR,
};
use crate::numerics::{brent_root, log_grid, rel_gap, scan_roots, Crossing, SolverConfig};

use super::{solve_unregulated, verify_against_grid};

/// Optimum of `λ·p_f − w·N` when every vehicle-minute costs `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FleetCostOptimum {
    pub lambda: f64,
    pub n: f64,
    pub n_idle: f64,
    pub cost: f64,
    pub p_f: f64,
    pub profit_per_min: f64,
    /// Relative residual of the ride-rate stationarity condition.
    pub residual: f64,
}

impl FleetCostOptimum {
    pub fn prices(&self, wage_per_min: f64) -> Prices {
        Prices::new(self.p_f, wage_per_min * self.n / self.lambda)
    }
}

/// Fixed-wage subproblem in closed form along the ride rate.
///
/// For a given ride rate the optimal idle fleet is `(λαM/(2βw))^{2/3}`, so
/// profit is a function of `λ` alone whose derivative `A − Bλ − Cλ^{-1/3}`
/// is concave. The local maximum is its upper root. Returns `None` when
/// that derivative never turns positive, i.e. no interior maximum exists.
pub(crate) fn fleet_cost_optimum(params: &ModelParams, w: f64, max_iter: usize) -> Option<FleetCostOptimum> {
    let (l0, ep, beta, mu) = (params.lambda0, params.e_p, params.beta, params.mu);
    let k = (params.alpha * params.m / (2.0 * beta * w)).powf(2.0 / 3.0);
    let a = 1.0 / (ep * beta) - w / mu;
    let b = 2.0 / (l0 * ep * beta);
    let c = 2.0 * w * k;
    let slope = |l: f64| a - b * l - c / l.cbrt();
    let peak = (c / (3.0 * b)).powf(0.75).min(l0);
    if !(slope(peak) > 0.0) {
        return None;
    }
    let root = brent_root(slope, peak, l0, 1e-15 * l0, max_iter).ok()?;
    let lambda = root.x;
    let n_idle = k * lambda.powf(2.0 / 3.0);
    let cost = (1.0 - lambda / l0) / ep;
    let p_f = (cost - params.alpha * params.m / n_idle.sqrt()) / beta;
    let n = lambda / mu + n_idle;
    Some(FleetCostOptimum {
        lambda,
        n,
        n_idle,
        cost,
        p_f,
        profit_per_min: lambda * p_f - w * n,
        residual: (root.fx / a.abs().max(b * lambda)).abs(),
    })
}

/// Public entry for the fixed-wage subproblem with the wage in $/hr.
pub fn fleet_cost_subproblem(params: &ModelParams, wage_per_hr: f64, cfg: &SolverConfig) -> Result<FleetCostOptimum> {
    params.validate()?;
    Regulation::WageFloor { w_floor: wage_per_hr }.validate()?;
    fleet_cost_optimum(params, wage_per_hr / MINUTES_PER_HOUR, cfg.max_iter)
        .ok_or(Error::NoPositiveProfit { profit: 0.0 })
}

struct PinnedFleet {
    lambda: f64,
    cost: f64,
    n_idle: f64,
    residual: f64,
    iterations: usize,
}

/// Both constraints bind: the fleet is fixed at `n` and the platform picks
/// the total cost where `dΠ/dc = 0`.
fn pinned_fleet_optimum(params: &ModelParams, n: f64, w: f64, cfg: &SolverConfig) -> Option<PinnedFleet> {
    let (l0, ep, beta, mu) = (params.lambda0, params.e_p, params.beta, params.mu);
    let (alpha, m) = (params.alpha, params.m);
    let c_hi = params.choke_cost();
    let c_lo = ((1.0 - mu * n / l0) / ep).max(0.0);
    let terms = |c: f64| {
        let lambda = params.demand_rate(c);
        let n_idle = n - lambda / mu;
        let t_w = m / n_idle.sqrt();
        let lost = l0 * ep * (c - alpha * t_w) / beta;
        let gained = lambda * (1.0 + alpha * m * l0 * ep / (2.0 * mu * n_idle * n_idle.sqrt())) / beta;
        (gained, lost, lambda, n_idle)
    };
    let stationarity = |c: f64| {
        let (g, l, _, idle) = terms(c);
        if idle > 0.0 {
            g - l
        } else {
            f64::NAN
        }
    };
    let span = c_hi - c_lo;
    let roots = scan_roots(
        stationarity,
        |k| log_grid(1e-13, 1.0 - 1e-13, k).into_iter().map(|s| c_lo + s * span).collect(),
        cfg.bracket_points,
        1e-16,
        cfg.max_iter,
    );
    roots
        .into_iter()
        .filter(|(_, cross)| *cross == Crossing::Falling)
        .map(|(r, _)| {
            let (g, l, lambda, n_idle) = terms(r.x);
            let p_f = (r.x - alpha * m / n_idle.sqrt()) / beta;
            let profit = lambda * p_f - w * n;
            (PinnedFleet { lambda, cost: r.x, n_idle, residual: rel_gap(g, l).abs(), iterations: r.iterations }, profit)
        })
        .filter(|(p, _)| p.lambda > 0.0 && p.n_idle > 0.0)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(p, _)| p)
}

fn case_analysis(params: &ModelParams, w_hr: f64, base: &Solution, cfg: &SolverConfig) -> Result<Solution> {
    let w = w_hr / MINUTES_PER_HOUR;
    let w_tilde = base.outcome.wage_per_min;
    if w < w_tilde * (1.0 - 1e-12) {
        let mut sol = base.clone();
        sol.regime = Regime::FloorInactive;
        return Ok(sol);
    }
    let s = params.supply_slope();
    if let Some(p2) = fleet_cost_optimum(params, w, cfg.max_iter) {
        if p2.n < s * w * (1.0 - 1e-12) && p2.n <= params.n0 {
            let prices = p2.prices(w);
            let outcome = MarketOutcome::from_state(p2.lambda, p2.n, &prices, params)?;
            let mut diagnostics = Diagnostics::new(Method::CaseAnalysis, p2.residual, 0, cfg.tol);
            diagnostics.notes.push(format!("fleet {:.6} below supply {:.6} at the floor", p2.n, s * w));
            return Ok(Solution { prices, outcome, regime: Regime::FloorOnlyActive, diagnostics });
        }
    }
    let n = params.driver_supply(w);
    let pinned = pinned_fleet_optimum(params, n, w, cfg)
        .ok_or(Error::Infeasible(format!("no interior total cost at pinned fleet {n} for wage floor {w_hr} $/hr")))?;
    let p_f = (pinned.cost - params.alpha * params.m / pinned.n_idle.sqrt()) / params.beta;
    let prices = Prices::new(p_f, w * n / pinned.lambda);
    let outcome = MarketOutcome::from_state(pinned.lambda, n, &prices, params)?;
    let (rd, rs) = crate::equilibrium::equilibrium_residual(&outcome, &prices, params);
    let residual = pinned.residual.max(rd.abs() / pinned.lambda).max(rs.abs() / n);
    let diagnostics = Diagnostics::new(Method::CaseAnalysis, residual, pinned.iterations, cfg.tol);
    Ok(Solution { prices, outcome, regime: Regime::BothConstraintsActive, diagnostics })
}

fn unregulated_base(params: &ModelParams, cfg: &SolverConfig) -> Result<Solution> {
    solve_unregulated(params, &SolverConfig { oracle_check: false, ..*cfg })
}

/// Wage-floor optimum that reports loss-making states instead of failing.
pub fn solve_wage_floor_allow_loss(params: &ModelParams, w_floor: f64, cfg: &SolverConfig) -> Result<Solution> {
    Regulation::WageFloor { w_floor }.validate()?;
    let base = unregulated_base(params, cfg)?;
    case_analysis(params, w_floor, &base, cfg)
}

/// Profit maximum when hourly driver earnings must reach `w_floor` [$/hr].
pub fn solve_wage_floor(params: &ModelParams, w_floor: f64, cfg: &SolverConfig) -> Result<Solution> {
    let mut sol = solve_wage_floor_allow_loss(params, w_floor, cfg)?;
    if !(sol.outcome.profit_per_min > 0.0) {
        return Err(Error::NoPositiveProfit { profit: sol.outcome.profit_per_hr });
    }
    verify_against_grid(&mut sol, params, Regulation::WageFloor { w_floor }, cfg);
    Ok(sol)
}

/// Hourly wage floors separating the regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeBoundaries {
    /// Unregulated wage; floors below it are slack.
    pub w_tilde: f64,
    /// Lowest floor at which the platform rations driver entry.
    pub w_regime3: f64,
    /// Floor at which the optimal profit reaches zero.
    pub w_zero_profit: f64,
}

fn first_sign_flip<F>(mut f: F, start: f64, step: f64, max_steps: usize, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut prev = start;
    let f0 = f(start);
    for k in 1..=max_steps {
        let x = start + step * k as f64;
        let fx = f(x);
        if fx.is_nan() {
            continue;
        }
        if (fx < 0.0) != (f0 < 0.0) {
            return brent_root(&mut f, prev, x, 1e-12 * x, max_iter).map(|r| r.x);
        }
        prev = x;
    }
    Err(Error::Infeasible(format!("no sign change within {max_steps} steps of {start}")))
}

pub fn regime_boundaries(params: &ModelParams, cfg: &SolverConfig) -> Result<RegimeBoundaries> {
    let base = unregulated_base(params, cfg)?;
    let w_tilde = base.outcome.wage_per_min;
    let s = params.supply_slope();
    let step = 0.01 * w_tilde;
    let rationing_gap = |w: f64| match fleet_cost_optimum(params, w, cfg.max_iter) {
        Some(p2) => p2.n - s * w,
        None => -s * w,
    };
    let w3 = first_sign_flip(rationing_gap, w_tilde * (1.0 + 1e-9), step, 2000, cfg.max_iter)?;
    let quiet = SolverConfig { oracle_check: false, ..*cfg };
    let profit = |w: f64| match case_analysis(params, w * MINUTES_PER_HOUR, &base, &quiet) {
        Ok(sol) => sol.outcome.profit_per_min,
        Err(_) => f64::NAN,
    };
    let w0 = first_sign_flip(profit, w_tilde, step, 2000, cfg.max_iter)?;
    Ok(RegimeBoundaries {
        w_tilde: w_tilde * MINUTES_PER_HOUR,
        w_regime3: w3 * MINUTES_PER_HOUR,
        w_zero_profit: w0 * MINUTES_PER_HOUR,
    })
}

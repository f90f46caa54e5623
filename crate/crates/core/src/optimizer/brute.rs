//! Exhaustive grid search over (total cost, fleet size) with zoom-in
//! refinement. Uses only the primitive formulas, never a first-order
//! condition.

use rayon::prelude::*;

use crate::equilibrium::MIN_RIDE_FRACTION;
use crate::error::{Error, Result};
use crate::model::{
    Diagnostics, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution, MINUTES_PER_HOUR,
};
use crate::numerics::SolverConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Points along total passenger cost.
    pub c_steps: usize,
    /// Points along the second axis (fleet size).
    pub w_steps: usize,
    pub refinement_rounds: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { c_steps: 400, w_steps: 400, refinement_rounds: 3 }
    }
}

impl GridSpec {
    pub(crate) fn coarse() -> Self {
        Self { c_steps: 100, w_steps: 100, refinement_rounds: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_steps < 50 || self.w_steps < 50 {
            return Err(Error::InvalidInput(format!(
                "grid needs at least 50 steps per axis, got {}x{}",
                self.c_steps, self.w_steps
            )));
        }
        if self.refinement_rounds < 1 {
            return Err(Error::InvalidInput("grid needs at least one refinement round".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    objective: f64,
    profit: f64,
    c: f64,
    n: f64,
}

struct Surface<'a> {
    params: &'a ModelParams,
    regulation: Regulation,
    n_max: f64,
}

impl Surface<'_> {
    fn evaluate(&self, c: f64, n: f64) -> Option<Eval> {
        let p = self.params;
        let lambda = p.demand_rate(c);
        if lambda <= MIN_RIDE_FRACTION * p.lambda0 || n > self.n_max || n <= 0.0 {
            return None;
        }
        let idle = n - lambda / p.mu;
        if idle <= 0.0 {
            return None;
        }
        let surcharge = match self.regulation {
            Regulation::CongestionTax { p_c } => p_c,
            _ => 0.0,
        };
        let p_f = (c - p.alpha * p.m / idle.sqrt()) / p.beta - surcharge;
        if p_f < 0.0 {
            return None;
        }
        let bill = n * n / p.supply_slope();
        let wage_bill = match self.regulation {
            Regulation::WageFloor { w_floor } => bill.max(w_floor / MINUTES_PER_HOUR * n),
            Regulation::Amod { c_av } => c_av / MINUTES_PER_HOUR * n,
            _ => bill,
        };
        let profit = lambda * p_f - wage_bill;
        let objective = match self.regulation {
            Regulation::Subsidy { reservation_revenue } => {
                if profit < reservation_revenue {
                    return None;
                }
                lambda
            }
            _ => profit,
        };
        Some(Eval { objective, profit, c, n })
    }
}

fn better(a: &Eval, b: &Eval) -> bool {
    a.objective > b.objective || (a.objective == b.objective && a.profit > b.profit)
}

fn axis(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    let step = (hi - lo) / (k - 1) as f64;
    (0..k).map(|i| lo + step * i as f64).collect()
}

/// Best grid point of the regulation's objective with `method = BruteForce`.
pub fn brute_force(
    params: &ModelParams,
    regulation: Regulation,
    grid: GridSpec,
    cfg: &SolverConfig,
) -> Result<Solution> {
    params.validate()?;
    regulation.validate()?;
    grid.validate()?;
    let n_max = match regulation {
        Regulation::Cap { n_cap } => n_cap.min(params.n0),
        Regulation::Amod { .. } => params.n0 + params.lambda0 / params.mu,
        _ => params.n0,
    };
    let surface = Surface { params, regulation, n_max };
    // below this cost demand exceeds what even the largest fleet can carry
    let c_floor = ((1.0 - params.mu * n_max / params.lambda0) / params.e_p).max(0.0);
    let (mut c_lo, mut c_hi) = (c_floor, params.choke_cost());
    let (mut n_lo, mut n_hi) = (0.0, n_max);
    let mut best: Option<Eval> = None;
    for _ in 0..=grid.refinement_rounds {
        let cs = axis(c_lo, c_hi, grid.c_steps);
        let ns = axis(n_lo, n_hi, grid.w_steps);
        let rows: Vec<Option<Eval>> = cs
            .par_iter()
            .map(|&c| {
                let mut row: Option<Eval> = None;
                for &n in &ns {
                    if let Some(e) = surface.evaluate(c, n) {
                        if row.as_ref().is_none_or(|r| better(&e, r)) {
                            row = Some(e);
                        }
                    }
                }
                row
            })
            .collect();
        for e in rows.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| better(&e, b)) {
                best = Some(e);
            }
        }
        let Some(b) = best else { break };
        let dc = 2.0 * (c_hi - c_lo) / (grid.c_steps - 1) as f64;
        let dn = 2.0 * (n_hi - n_lo) / (grid.w_steps - 1) as f64;
        c_lo = (b.c - dc).max(c_floor);
        c_hi = (b.c + dc).min(params.choke_cost());
        n_lo = (b.n - dn).max(0.0);
        n_hi = (b.n + dn).min(n_max);
    }
    let b = best.ok_or(Error::NoInteriorEquilibrium)?;
    let lambda = params.demand_rate(b.c);
    let idle = b.n - lambda / params.mu;
    let surcharge = match regulation {
        Regulation::CongestionTax { p_c } => p_c,
        _ => 0.0,
    };
    let p_f = (b.c - params.alpha * params.m / idle.sqrt()) / params.beta - surcharge;
    let p_d = (lambda * p_f - b.profit) / lambda;
    let prices = Prices { p_f, p_d, p_c: surcharge };
    let outcome = MarketOutcome::from_state(lambda, b.n, &prices, params)?;
    let s = params.supply_slope();
    let regime = match regulation {
        Regulation::Unregulated => Regime::UnregulatedOptimum,
        Regulation::WageFloor { w_floor } => {
            let w = w_floor / MINUTES_PER_HOUR;
            let dn = (n_hi - n_lo).max(1e-9 * b.n);
            if b.n / s > w {
                Regime::FloorInactive
            } else if (b.n - s * w).abs() <= dn {
                Regime::BothConstraintsActive
            } else {
                Regime::FloorOnlyActive
            }
        }
        Regulation::Cap { n_cap } => {
            if n_cap - b.n <= (n_hi - n_lo).max(1e-9 * n_cap) {
                Regime::CapBinding
            } else {
                Regime::CapInactive
            }
        }
        Regulation::CongestionTax { .. } => Regime::SurchargeApplied,
        Regulation::Subsidy { .. } => Regime::RevenueConstraintBinding,
        Regulation::Amod { .. } => Regime::FleetCostOptimum,
    };
    let mut diagnostics = Diagnostics::new(Method::BruteForce, 0.0, grid.refinement_rounds + 1, cfg.tol);
    diagnostics.notes.push(format!(
        "final cell {:.3e} in cost, {:.3e} in fleet",
        (c_hi - c_lo) / (grid.c_steps - 1) as f64,
        (n_hi - n_lo) / (grid.w_steps - 1) as f64
    ));
    Ok(Solution { prices, outcome, regime, diagnostics })
}

//! Model parameters, prices, primitive formulas and the solution record
//! shared by every solver.
//!
//! Everything is per minute internally: arrival rates in rides/min, wages
//! in $/min. Hourly figures exist only as reporting fields.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MINUTES_PER_HOUR: f64 = 60.0;

/// Exogenous parameters of the uniform reservation-cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Potential passenger arrival rate [rides/min].
    pub lambda0: f64,
    /// Potential driver pool [drivers].
    pub n0: f64,
    /// Money value of waiting [$/min].
    pub alpha: f64,
    /// Fare sensitivity.
    pub beta: f64,
    /// Inverse mean trip duration [1/min].
    pub mu: f64,
    /// Pickup-time constant [min·√vehicles].
    pub m: f64,
    /// Slope of the passenger reservation-cost CDF [1/$].
    pub e_p: f64,
    /// Slope of the driver reservation-wage CDF [1/($/min)].
    pub e_d: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lambda0", self.lambda0),
            ("n0", self.n0),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("mu", self.mu),
            ("m", self.m),
            ("e_p", self.e_p),
            ("e_d", self.e_d),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// N₀·e_d: drivers supplied per $/min of wage below saturation.
    pub fn supply_slope(&self) -> f64 {
        self.n0 * self.e_d
    }

    /// Total cost at which every potential passenger declines.
    pub fn choke_cost(&self) -> f64 {
        1.0 / self.e_p
    }

    /// Wage at which the whole driver pool participates [$/min].
    pub fn saturation_wage(&self) -> f64 {
        1.0 / self.e_d
    }

    pub fn passenger_cdf(&self, cost: f64) -> f64 {
        (self.e_p * cost).clamp(0.0, 1.0)
    }

    pub fn driver_cdf(&self, wage_per_min: f64) -> f64 {
        (self.e_d * wage_per_min).clamp(0.0, 1.0)
    }

    pub fn demand_rate(&self, cost: f64) -> f64 {
        self.lambda0 * (1.0 - self.passenger_cdf(cost))
    }

    pub fn driver_supply(&self, wage_per_min: f64) -> f64 {
        self.n0 * self.driver_cdf(wage_per_min)
    }

    /// Pickup time for a given idle fleet; infinite once the queue is unstable.
    pub(crate) fn wait_or_inf(&self, n_idle: f64) -> f64 {
        if n_idle > 0.0 {
            self.m / n_idle.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Expected pickup time `M/√n_idle` [min].
pub fn pickup_time(n_idle: f64, m: f64) -> Result<f64> {
    if !(n_idle > 0.0) {
        return Err(Error::QueueUnstable { n_idle });
    }
    Ok(m / n_idle.sqrt())
}

/// Generalized trip cost: waiting plus fare plus surcharge.
pub fn travel_cost(t_w: f64, p_f: f64, p_c: f64, params: &ModelParams) -> f64 {
    params.alpha * t_w + params.beta * (p_f + p_c)
}

pub fn demand_rate(cost: f64, params: &ModelParams) -> f64 {
    params.demand_rate(cost)
}

/// `N − N₀·F_d(λ·p_d/N)`; zero at a supply equilibrium.
pub fn supply_residual(n: f64, lambda: f64, p_d: f64, params: &ModelParams) -> f64 {
    n - params.driver_supply(lambda * p_d / n)
}

/// Result of the stability and saturation test on the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    /// Both margins positive.
    pub feasible: bool,
    /// `N₀ − λ₀/μ`.
    pub stability_margin: f64,
    /// `1 − e_p·α·M/√(N₀ − λ₀/μ)`; `-inf` when the stability margin is not positive.
    pub saturation_margin: f64,
    /// Some positive-ride equilibrium exists, i.e. `e_p·α·M/√N₀ < 1`.
    pub interior_equilibrium: bool,
}

impl Feasibility {
    /// Set when the strict test fails but positive-ride equilibria still exist.
    pub fn warning(&self) -> Option<String> {
        if self.feasible || !self.interior_equilibrium {
            return None;
        }
        Some(format!(
            "potential demand exceeds fleet capacity (N0 - lambda0/mu = {:.4}); \
             interior equilibria exist only below full demand",
            self.stability_margin
        ))
    }
}

pub fn feasibility_check(params: &ModelParams) -> Feasibility {
    let stability_margin = params.n0 - params.lambda0 / params.mu;
    let saturation_margin = if stability_margin > 0.0 {
        1.0 - params.e_p * params.alpha * params.m / stability_margin.sqrt()
    } else {
        f64::NEG_INFINITY
    };
    Feasibility {
        feasible: stability_margin > 0.0 && saturation_margin > 0.0,
        stability_margin,
        saturation_margin,
        interior_equilibrium: params.e_p * params.alpha * params.m / params.n0.sqrt() < 1.0,
    }
}

/// Fare, driver payment per trip and exogenous surcharge [$/trip].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prices {
    pub p_f: f64,
    pub p_d: f64,
    #[serde(default)]
    pub p_c: f64,
}

impl Prices {
    pub fn new(p_f: f64, p_d: f64) -> Self {
        Self { p_f, p_d, p_c: 0.0 }
    }

    pub fn with_surcharge(self, p_c: f64) -> Self {
        Self { p_c, ..self }
    }
}

/// Endogenous quantities of one market state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketOutcome {
    pub lambda: f64,
    pub n: f64,
    pub n_idle: f64,
    pub t_w: f64,
    pub cost: f64,
    pub wage_per_min: f64,
    pub wage_per_hr: f64,
    pub occupancy: f64,
    pub profit_per_min: f64,
    pub profit_per_hr: f64,
    pub commission_rate: f64,
}

impl MarketOutcome {
    /// Derives every reported quantity from ride rate, fleet and prices.
    ///
    /// The driver pool bound `N ≤ N₀` is not enforced here: fleet-owned
    /// vehicles are not drawn from the pool.
    pub fn from_state(lambda: f64, n: f64, prices: &Prices, params: &ModelParams) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("ride rate {lambda} must be positive")));
        }
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidInput(format!("fleet size {n} must be positive")));
        }
        let n_idle = n - lambda / params.mu;
        let t_w = pickup_time(n_idle, params.m)?;
        let wage_per_min = lambda * prices.p_d / n;
        let profit_per_min = lambda * (prices.p_f - prices.p_d);
        Ok(Self {
            lambda,
            n,
            n_idle,
            t_w,
            cost: travel_cost(t_w, prices.p_f, prices.p_c, params),
            wage_per_min,
            wage_per_hr: MINUTES_PER_HOUR * wage_per_min,
            occupancy: lambda / (params.mu * n),
            profit_per_min,
            profit_per_hr: MINUTES_PER_HOUR * profit_per_min,
            commission_rate: (prices.p_f - prices.p_d) / prices.p_f,
        })
    }
}

/// A regulatory intervention. Wage and fleet cost are hourly, as quoted
/// by regulators; the solvers convert.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regulation {
    Unregulated,
    WageFloor {
        w_floor: f64,
    },
    Cap {
        n_cap: f64,
    },
    CongestionTax {
        p_c: f64,
    },
    /// Revenue the platform must retain [$/min]; negative values are a subsidy.
    Subsidy {
        reservation_revenue: f64,
    },
    Amod {
        c_av: f64,
    },
}

impl Regulation {
    pub fn validate(&self) -> Result<()> {
        let (name, value, strict) = match *self {
            Regulation::Unregulated => return Ok(()),
            Regulation::WageFloor { w_floor } => ("w_floor", w_floor, true),
            Regulation::Cap { n_cap } => ("n_cap", n_cap, true),
            Regulation::CongestionTax { p_c } => ("p_c", p_c, false),
            Regulation::Subsidy { reservation_revenue } => {
                if reservation_revenue.is_finite() {
                    return Ok(());
                }
                ("reservation_revenue", reservation_revenue, false)
            }
            Regulation::Amod { c_av } => ("c_av", c_av, true),
        };
        let ok = value.is_finite() && if strict { value > 0.0 } else { value >= 0.0 };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name, value })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    UnregulatedOptimum,
    FloorInactive,
    BothConstraintsActive,
    FloorOnlyActive,
    CapInactive,
    CapBinding,
    SurchargeApplied,
    RevenueConstraintBinding,
    FleetCostOptimum,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::UnregulatedOptimum => "unregulated_optimum",
            Regime::FloorInactive => "floor_inactive",
            Regime::BothConstraintsActive => "both_constraints_active",
            Regime::FloorOnlyActive => "floor_only_active",
            Regime::CapInactive => "cap_inactive",
            Regime::CapBinding => "cap_binding",
            Regime::SurchargeApplied => "surcharge_applied",
            Regime::RevenueConstraintBinding => "revenue_constraint_binding",
            Regime::FleetCostOptimum => "fleet_cost_optimum",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Foc,
    BruteForce,
    CaseAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub method: Method,
    pub max_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub notes: Vec<String>,
}

impl Diagnostics {
    pub(crate) fn new(method: Method, max_residual: f64, iterations: usize, tol: f64) -> Self {
        Self {
            method,
            max_residual,
            iterations,
            converged: max_residual.is_finite() && max_residual < tol,
            notes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub prices: Prices,
    pub outcome: MarketOutcome,
    pub regime: Regime,
    pub diagnostics: Diagnostics,
}

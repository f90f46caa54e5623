//! Recovers model parameters from one observed market snapshot so the
//! snapshot is the unregulated optimum.
//!
//! Only `N₀·e_d` and the demand slope are identified; `β = 1` and
//! `e_d = 1` are fixed. With those, the four optimality and equilibrium
//! conditions are solved in closed form:
//!
//! ```text
//! μ  = 1/trip_minutes
//! M  = pickup·√(N − λ/μ)
//! N₀ = N²/(λ·p_d)                     (supply at equality)
//! α  = 4β·√(p_d/λ)·(N − λ/μ)^{3/2}/(M·√N₀)   (fleet condition)
//! k  = e_p·λ₀ = √N₀·λ/(β(p_f√N₀ − 2√(λp_d)/μ))  (fare condition)
//! λ₀ = λ + k·c,  e_p = k/λ₀           (demand)
//! ```
//! where `c = α·pickup + β·p_f` is the observed total trip cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::rel_gap;

/// Observed market snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Observation {
    /// Active drivers.
    pub n_obs: f64,
    /// Ride requests per minute.
    pub lambda_obs: f64,
    pub trip_minutes: f64,
    pub pickup_minutes: f64,
    /// Fare per trip [$].
    pub p_f_obs: f64,
    /// Driver payment per trip [$].
    pub p_d_obs: f64,
}

impl Observation {
    /// Manhattan core snapshot used throughout the examples and tests.
    pub fn nyc() -> Self {
        Self { n_obs: 5089.0, lambda_obs: 187.0, trip_minutes: 16.3, pickup_minutes: 5.0, p_f_obs: 17.0, p_d_obs: 10.2 }
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("n_obs", self.n_obs),
            ("lambda_obs", self.lambda_obs),
            ("trip_minutes", self.trip_minutes),
            ("pickup_minutes", self.pickup_minutes),
            ("p_f_obs", self.p_f_obs),
            ("p_d_obs", self.p_d_obs),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// Relative residuals of the four calibration conditions at the snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationResiduals {
    pub fare_condition: f64,
    pub fleet_condition: f64,
    pub demand: f64,
    pub supply: f64,
}

impl CalibrationResiduals {
    pub fn max_abs(&self) -> f64 {
        [self.fare_condition, self.fleet_condition, self.demand, self.supply]
            .into_iter()
            .fold(0.0, |a, r| a.max(r.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub params: ModelParams,
    pub residuals: CalibrationResiduals,
}

pub fn calibrate(obs: &Observation) -> Result<ModelParams> {
    calibrate_report(obs).map(|r| r.params)
}

pub fn calibrate_report(obs: &Observation) -> Result<CalibrationReport> {
    obs.validate()?;
    let (n, lambda, p_f, p_d) = (obs.n_obs, obs.lambda_obs, obs.p_f_obs, obs.p_d_obs);
    let beta = 1.0;
    let e_d = 1.0;
    let mu = 1.0 / obs.trip_minutes;
    let idle = n - lambda / mu;
    if !(idle > 0.0) {
        return Err(Error::CalibrationInfeasible {
            equation: "pickup-time law",
            reason: format!("{n} drivers leave no idle vehicles at {} busy", lambda / mu),
        });
    }
    let m = obs.pickup_minutes * idle.sqrt();
    let n0 = n * n / (lambda * p_d);
    let s = n0 * e_d;
    let alpha = 4.0 * beta * (p_d / lambda).sqrt() * idle * idle.sqrt() / (m * s.sqrt());
    let denom = p_f * s.sqrt() - 2.0 * (lambda * p_d).sqrt() / mu;
    if !(denom > 0.0) {
        return Err(Error::CalibrationInfeasible {
            equation: "fare condition",
            reason: format!(
                "fare {p_f} too low to cover the fleet's marginal cost; demand slope would be non-positive"
            ),
        });
    }
    let slope = s.sqrt() * lambda / (beta * denom);
    let cost = alpha * obs.pickup_minutes + beta * p_f;
    let lambda0 = lambda + slope * cost;
    let e_p = slope / lambda0;
    let params = ModelParams { lambda0, n0, alpha, beta, mu, m, e_p, e_d };
    params.validate().map_err(|e| Error::CalibrationInfeasible { equation: "demand", reason: e.to_string() })?;
    let residuals = residuals_at(obs, &params);
    Ok(CalibrationReport { params, residuals })
}

fn residuals_at(obs: &Observation, p: &ModelParams) -> CalibrationResiduals {
    let (n, lambda, p_f, p_d) = (obs.n_obs, obs.lambda_obs, obs.p_f_obs, obs.p_d_obs);
    let s = p.supply_slope();
    let sp = (s * p_d * lambda).sqrt();
    let busy = lambda / p.mu;
    let fare_lhs = 0.25 * p.lambda0 * p.e_p * p.alpha * p.m * p_f * (s * lambda / p_d).sqrt();
    let fare_rhs = lambda * (sp - busy).powf(1.5) + p.alpha * p.m * p.e_p * p.lambda0 * lambda / (2.0 * p.mu);
    let fleet_lhs = p.beta * (p_d / lambda).sqrt() * (sp - busy).powf(1.5);
    let fleet_rhs = 0.25 * p.alpha * p.m * s.sqrt();
    let t_w = p.m / (n - busy).sqrt();
    let demand = p.demand_rate(p.alpha * t_w + p.beta * p_f);
    CalibrationResiduals {
        fare_condition: rel_gap(fare_lhs, fare_rhs),
        fleet_condition: rel_gap(fleet_lhs, fleet_rhs),
        demand: rel_gap(lambda, demand),
        supply: rel_gap(n, p.driver_supply(lambda * p_d / n)),
    }
}

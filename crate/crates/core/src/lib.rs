//! Ride-hailing market model: equilibrium, platform pricing under
//! regulation, calibration, competition and spatial validation.
//!
//! All rates are per minute and all money is in dollars. Wages and
//! profits are reported both per minute and per hour; regulation inputs
//! (wage floors, fleet costs) are given per hour.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod competition;
pub mod equilibrium;
pub mod error;
pub mod model;
pub mod numerics;
pub mod optimizer;
pub mod spatial;

pub use calibration::{calibrate, calibrate_report, Observation};
pub use equilibrium::{solve_equilibrium, CwPoint};
pub use error::{Error, Result};
pub use model::{
    feasibility_check, MarketOutcome, Method, ModelParams, Prices, Regime, Regulation, Solution, MINUTES_PER_HOUR,
};
pub use numerics::SolverConfig;

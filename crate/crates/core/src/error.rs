use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("queue unstable: idle vehicle count {n_idle} is not positive")]
    QueueUnstable { n_idle: f64 },

    #[error("no sign change of residual on [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("no interior equilibrium with positive ride volume")]
    NoInteriorEquilibrium,

    #[error("no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NonConvergence { iterations: usize, best_residual: f64 },

    #[error("no price pair yields positive profit (best {profit})")]
    NoPositiveProfit { profit: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("reservation revenue {requested} exceeds maximum attainable profit {max}")]
    InfeasibleRevenue { requested: f64, max: f64 },

    #[error("no interior best response with positive profit")]
    NoInteriorBestResponse,

    #[error("calibration infeasible at {equation}: {reason}")]
    CalibrationInfeasible { equation: &'static str, reason: String },

    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short snake_case tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::InvalidInput(_) => "invalid_input",
            Error::QueueUnstable { .. } => "queue_unstable",
            Error::NoBracket { .. } => "no_bracket",
            Error::NoInteriorEquilibrium => "no_interior_equilibrium",
            Error::NonConvergence { .. } => "non_convergence",
            Error::NoPositiveProfit { .. } => "no_positive_profit",
            Error::Infeasible(_) => "infeasible",
            Error::InfeasibleRevenue { .. } => "infeasible_revenue",
            Error::NoInteriorBestResponse => "no_interior_best_response",
            Error::CalibrationInfeasible { .. } => "calibration_infeasible",
            Error::DegenerateRegion(_) => "degenerate_region",
        }
    }
}

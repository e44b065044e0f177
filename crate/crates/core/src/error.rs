use thiserror::Error;

/// Errors raised by parameter validation, numeric routines and file parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rho = {0} outside the open interval (0, 1); the equilibrium density is not integrable there")]
    RhoOutOfRange(f64),
    #[error("horizon T = {0} must be positive and finite")]
    NonPositiveHorizon(f64),
    #[error("strategy {value} outside [0, {horizon}]")]
    StrategyOutOfRange { value: f64, horizon: f64 },
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("quadrature did not converge: residual estimate {residual:e} after {panels} panels")]
    QuadratureNonConvergence { residual: f64, panels: usize },
    #[error("invalid quadrature spec: {0}")]
    InvalidQuadrature(String),
    #[error("player {0} has no neighbours")]
    IsolatedPlayer(usize),
    #[error("player index {index} out of range for {n} players")]
    PlayerOutOfRange { index: usize, n: usize },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid revision policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid strategy list: {0}")]
    InvalidStrategies(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

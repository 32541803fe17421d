use thiserror::Error;

use crate::config::ConfigError;
use crate::grid::Channel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate denominator in {what}: |value| = {value:e} is below {epsilon:e}")]
    DegenerateDenominator {
        what: &'static str,
        value: f64,
        epsilon: f64,
    },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("objective is unbounded: {0}")]
    Unbounded(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time step too large: {quantity} = {value:.3e} exceeds {limit}")]
    StepTooLarge {
        quantity: &'static str,
        value: f64,
        limit: f64,
    },

    #[error("no convergence after {iterations} iterations (last energy rate {last_rate:.3e} rad/s per s, tolerance {tol:.3e})")]
    NoConvergence {
        iterations: usize,
        last_rate: f64,
        tol: f64,
    },

    #[error("timeout: norm² = {norm_sq:.6} still above 1/e at t_max = {t_max:.3e} s")]
    Timeout { t_max: f64, norm_sq: f64 },

    #[error("jump from empty channel {0:?}")]
    EmptyChannel(Channel),

    #[error("grid mismatch: state has {state} points, grid has {grid}")]
    GridMismatch { state: usize, grid: usize },

    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl Error {
    /// True for failures caused by bad user input rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidGrid(_) | Error::DegenerateInput(_) | Error::Unbounded(_)
        )
    }
}

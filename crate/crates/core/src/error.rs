use thiserror::Error;

/// Errors raised by the solvers and evaluators in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("{name} = {value} is outside the domain ({domain})")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: &'static str },

    #[error("eigenvalue search exhausted: found {found} of {wanted} below mu = {window}")]
    BracketExhausted {
        found: usize,
        wanted: usize,
        window: f64,
    },

    #[error("solution is degenerate within tolerance: min |mu_k| = {min_abs_mu:e} < {tolerance:e}")]
    Degenerate { min_abs_mu: f64, tolerance: f64 },

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },

    #[error("continuation step collapsed below {min_step:e} after {points} points")]
    StepCollapse { min_step: f64, points: usize },

    #[error("quadrature did not converge on [{lo}, {hi}]")]
    Quadrature { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

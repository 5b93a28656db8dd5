use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("t = {t} lies outside the domain ({lo}, {hi})")]
    Domain { t: f64, lo: f64, hi: f64 },
    #[error("non-finite value of {what} at t = {t}")]
    NonFinite { what: String, t: f64 },
    #[error("quadrature on [{a}, {b}] did not converge (error estimate {err:e})")]
    Quadrature { a: f64, b: f64, err: f64 },
    #[error("integrator failure at t = {t}: {reason}")]
    Integrator { t: f64, reason: String },
    #[error("coefficient {name} has the wrong sign at t = {t}")]
    CoefficientSign { name: String, t: f64 },
    #[error("function {what} comes too close to zero near t = {t}")]
    NearZero { what: String, t: f64 },
    #[error("degenerate boundary system: det = {det:e}, norm = {norm:e}")]
    Degenerate { det: f64, norm: f64 },
    #[error("t = {t} is outside the trajectory span [{lo}, {hi}]")]
    OutOfSpan { t: f64, lo: f64, hi: f64 },
    #[error("target {target} is not reachable inside the domain")]
    Unreachable { target: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

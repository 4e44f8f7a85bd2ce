//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // ---- parsing ----
    #[error("syntax error at offset {position}: {message}")]
    SyntaxError { position: usize, message: String },
    #[error("exponent at offset {position} must be an integer literal")]
    NonIntegerExponent { position: usize },

    // ---- expressions and evaluation ----
    #[error("symbol `{0}` is not bound")]
    UnboundSymbol(String),
    #[error("division by zero at p = {p}, q = {q}")]
    DivisionByZero { p: f64, q: f64 },
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("`{0}` is a reserved variable and cannot be bound")]
    ReservedSymbol(String),

    // ---- divergence analysis ----
    #[error("scaled integrand vanishes on the sampling grid; scaling exponent undefined")]
    DegenerateScaling,

    // ---- quadrature ----
    #[error("tolerance {tol:e} unreachable after {subdivisions} subdivisions (error estimate {error:e})")]
    MaxSubdivisions {
        tol: f64,
        subdivisions: usize,
        error: f64,
    },
    #[error("integrand is singular inside the integration interval near p = {0}")]
    PoleOnInterval(f64),
    #[error("integral does not converge: tail estimate {tail:e} stays above tolerance {tol:e}")]
    NonConvergent { tail: f64, tol: f64 },

    // ---- regularization and finite parts ----
    #[error("integrand has a pole on the integration domain at p = {0}")]
    SingularOnDomain(f64),
    #[error("regulator not usable here: {0}")]
    InvalidRegulator(String),
    #[error("subtraction order {got} is below the superficial degree of divergence {required}")]
    InsufficientOrder { required: i64, got: u32 },
    #[error("regulator-scale schedule exhausted at scale {scale:e} (last step {last_step:e})")]
    SlowConvergence { scale: f64, last_step: f64 },
    #[error("{first} and {second} disagree at q = {q}: discrepancy {discrepancy:e}")]
    RegulatorDisagreement {
        q: f64,
        first: String,
        second: String,
        discrepancy: f64,
    },

    // ---- renormalization ----
    #[error("|g_R * delta| = {0} exceeds 0.5; first-order running is meaningless")]
    PerturbativityWarning(f64),

    // ---- configuration ----
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

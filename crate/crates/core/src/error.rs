use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The integrator gave up before reaching the end of the interval.
    #[error("integration failed at r = {r:e} after {steps} steps: {reason}")]
    IntegrationFailure {
        r: f64,
        steps: usize,
        reason: String,
    },

    /// The right-hand side produced a NaN or infinity.
    #[error("non-finite right-hand side at r = {r:e}")]
    NonFinite { r: f64 },

    /// A shot from d = 1 sits on the constant solution and has no phase.
    #[error("degenerate shot: d = 1 is the constant solution (rho = 0)")]
    DegenerateShot,

    /// The trajectory came too close to (1, 0) to keep the phase resolved.
    #[error("near-constant shot: rho^2 fell below the floor at r = {r:e} (d = {d})")]
    NearConstantShot { d: f64, r: f64 },

    /// A bracketing search ran out of range.
    #[error("search failed: {0}")]
    SearchFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

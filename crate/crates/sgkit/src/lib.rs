//! Numerical toolkit for non-uniform small-gain analysis of interconnections
//! between a contracting subsystem and an unstable "wandering" subsystem.
//!
//! The toolkit certifies trapping regions around weak (Milnor-style)
//! attractors, evaluates closed-form small-gain constants, simulates the
//! coupled dynamics with a fixed-step integrator, and runs adaptive
//! parameter identifiers whose exploratory dynamics are Poisson stable.
//!
//! Modules:
//!
//! - [`gains`] — algebra of comparison functions (class K / KL), factored
//!   contraction envelopes, and the factorization structure of the
//!   wandering-output bound.
//! - [`smallgain`] — constructive dwell-time schedules, trapping-region and
//!   existence checks, the optimized small-gain constant, and the admissible
//!   adaptation-gain bound for identifiers.
//! - [`dynsim`] — fixed-step RK4 simulation of interconnections, set
//!   distances, sandwich verification of the wandering bound, hitting-time
//!   diagnostics, and steady-state characteristic estimation.
//! - [`observer`] — adaptive identifiers built from exploratory dynamics
//!   (hyperbolic pair / torus oscillators), plus two end-to-end reference
//!   problems: scalar parameter identification through a sinusoidal
//!   nonlinearity, and joint state/parameter reconstruction for a
//!   Hindmarsh–Rose-type neuron model.

pub mod dynsim;
pub mod gains;
pub mod observer;
pub mod smallgain;

/// Errors produced by the toolkit.
///
/// The variants separate caller mistakes (`Domain`, `Config`) from numerical
/// failures discovered at run time (`Evaluation`, `Integration`), violations
/// of structural assumptions (`Invariant`), and diagnostics that refuse to
/// produce a misleading answer (`Diagnostic`).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural assumption (monotonicity, conservation, normalization)
    /// failed while evaluating user-supplied data.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// A function evaluation returned a non-finite or otherwise unusable
    /// value.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    /// Inconsistent or incomplete configuration of a model or scenario.
    #[error("configuration error: {0}")]
    Config(String),

    /// The integrator could not continue (non-finite right-hand side).
    #[error("integration error at t = {t}: {message}")]
    Integration {
        /// Time at which integration failed.
        t: f64,
        /// Description of the failure.
        message: String,
    },

    /// A diagnostic precondition failed, so the requested analysis would be
    /// meaningless.
    #[error("diagnostic error: {0}")]
    Diagnostic(String),

    /// An iterative optimizer exhausted its iteration budget.
    #[error(
        "optimizer did not converge within {iterations} iterations; \
         best value {best} at d = {d}, kappa = {kappa}"
    )]
    OptimizerNonConvergence {
        /// Iterations performed before giving up.
        iterations: usize,
        /// Best objective value found so far.
        best: f64,
        /// Contraction-budget coordinate of the best point.
        d: f64,
        /// Level-ratio coordinate of the best point.
        kappa: f64,
    },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

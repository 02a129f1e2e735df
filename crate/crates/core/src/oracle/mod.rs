//! Finite-dimensional ground truth for the engine: exact multivariate
//! Gaussian integrals, seeded Monte Carlo estimates and the verification runner.

pub mod analytic;
pub mod mc;
pub mod random;
pub mod verify;

use thiserror::Error;

pub use analytic::{analytic_finite_integral, assemble, gaussian_integral, GaussianProblem};
pub use mc::{mc_gaussian, mc_integral, mc_probability_moment, McEstimate, GENERATOR_ID, MC_CHUNK};
pub use random::random_bindings;
pub use verify::{run_case, BindingSource, ReportConfig, ReportRow, VerificationCase, VerificationReport};

use crate::engine::EngineError;
use crate::kernelalg::KernelError;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("no Gaussian envelope: the real part of the quadratic form is not positive definite")]
    EnvelopeFailure,
    #[error("form not supported by the oracle: {0}")]
    UnsupportedForm(String),
    #[error("moment order {0} exceeds the variance guard (at most 4)")]
    VarianceGuard(u32),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

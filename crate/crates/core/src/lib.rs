//! Closed-form Gaussian functional integrals over an abstract functional
//! integration measure, with the would-be infinities carried as symbolic
//! cardinal tags, plus finite-dimensional oracles that check every result.
//!
//! Modules, bottom-up:
//! - [`cardinal`]: exact arithmetic on `Omega`/`Lambda` powers and the `Lambda` limit.
//! - [`wick`]: pairing combinatorics, contraction graphs, measure and probability moments.
//! - [`kernelalg`]: discretized kernels, the diamond contraction, spectral functions.
//! - [`engine`]: integrand DSL, canonical quadratic forms, the closed-form catalog.
//! - [`oracle`]: analytic and Monte Carlo finite-dimensional ground truth.

pub mod cardinal;
pub mod engine;
pub mod exact;
pub mod kernelalg;
pub mod oracle;
pub mod wick;

pub use cardinal::{CardinalScalar, LambdaRational, LimitResult, OmegaLinear, Tag};
pub use engine::{ClosedForm, IntegrandAst, QuadraticForm};
pub use kernelalg::{DiscreteKernel, FieldVector, QuadratureGrid, SpectralDecomposition};
pub use oracle::{VerificationCase, VerificationReport};
pub use wick::{ContractionGraph, MomentTensor, OmegaPolynomial, Pairing};

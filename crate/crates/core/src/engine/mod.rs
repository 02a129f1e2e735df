//! Symbolic Gaussian functional integrals: DSL, canonical forms, closed forms,
//! the moment-series route and numeric instantiation.

pub mod canonical;
pub mod catalog;
pub mod closed;
pub mod dsl;
pub mod ir;
pub mod numeric;
pub mod series;
pub mod square;

use thiserror::Error;

pub use canonical::{canonicalize, canonicalize_with, Canonicalized, Flavor, QuadraticForm};
pub use catalog::{catalog, catalog_case, CatalogCase};
pub use closed::{evaluate, Assumption, ClosedForm, Substitution};
pub use dsl::{parse, IntegrandAst, MeasureFlavor};
pub use ir::{Bilinear, Exponent, Kernel, KernelProps, PropTable, Side, VecAtom, VecExpr};
pub use numeric::{exponent_value, instantiate_closed_form, kernel_value, vector_value, Bindings};
pub use series::{evaluate_via_series, evaluate_via_series_traced, SeriesEvaluation};
pub use square::{square_trick_expand, SquareTrickTrace};

use crate::cardinal::CardinalError;
use crate::kernelalg::KernelError;
use crate::wick::WickError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unknown token '{token}' at {line}:{column}")]
    UnknownToken { line: usize, column: usize, token: String },
    #[error("integrand is not Gaussian: term '{term}' has degree {degree} in the integration variable")]
    NotGaussian { degree: usize, term: String },
    #[error("mixed real/complex flavor: {0}")]
    MixedFlavor(String),
    #[error("symbol used in incompatible roles: {0}")]
    SymbolRole(String),
    #[error("unsupported integrand: {0}")]
    Unsupported(String),
    #[error("kernel not supported on this path: {0}")]
    UnsupportedKernel(String),
    #[error("no binding for '{0}'")]
    MissingBinding(String),
    #[error("assumption does not hold: {0}")]
    AssumptionUnsatisfied(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Cardinal(#[from] CardinalError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Wick(#[from] WickError),
}

impl EngineError {
    /// Errors caused by the integrand itself rather than by the input text.
    pub fn is_semantic(&self) -> bool {
        matches!(
            self,
            EngineError::NotGaussian { .. }
                | EngineError::MixedFlavor(_)
                | EngineError::AssumptionUnsatisfied(_)
                | EngineError::UnsupportedKernel(_)
        )
    }
}

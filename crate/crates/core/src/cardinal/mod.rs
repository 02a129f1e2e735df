//! Exact arithmetic for the cardinal tags `Omega` (degrees of freedom of the
//! index space) and `Lambda` (the `1/eps` of the Gaussian delta representation).
//!
//! The two tags are independent symbols: nothing ever cancels an `Omega`
//! against a `Lambda`. `pi` is kept as a symbolic base so that prefactors such
//! as `pi^(Omega/2)` cancel exactly in ratios.

mod omega;
mod poly;
mod scalar;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use omega::OmegaLinear;
pub use poly::{LambdaRational, Polynomial};
pub use scalar::{sum_pochhammer_series, Base, CardinalScalar, LimitResult};
pub use text::{lambda_poly, parse_cardinal, parse_lambda_rational, parse_omega_linear};

pub(crate) use scalar::fmt_exponent;

/// A symbolic infinity carried through a calculation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    Omega,
    Lambda,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::Omega => "Omega",
            Tag::Lambda => "Lambda",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CardinalError {
    #[error("zero base raised to a non-positive power")]
    ZeroBase,
    #[error("Lambda is still present; take the Lambda limit first")]
    ResidualLambda,
    #[error("zero denominator in a rational function of Lambda")]
    ZeroDenominator,
    #[error("exponent ({lhs})*({rhs}) is not linear in Omega")]
    NonLinearExponent { lhs: String, rhs: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at offset {position}: {message}")]
    Parse { position: usize, message: String },
}

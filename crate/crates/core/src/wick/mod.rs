//! Wick-pairing combinatorics for the moments of the functional integration
//! measure, and the moments of the normalized Gaussian probability functional.

mod carleman;
mod graph;
mod moments;
mod pairing;
mod polynomial;

use thiserror::Error;

pub use carleman::{carleman_check, CarlemanReport};
pub use graph::ContractionGraph;
pub use moments::{
    measure_moment, measure_moment_with_cap, probability_moment, s_polynomial, s_polynomial_bruteforce,
    t_reduction, t_reduction_bruteforce, MomentTensor, BRUTEFORCE_S_CAP,
};
pub use pairing::{count_pairings, enumerate_pairings, enumerate_pairings_with_cap, Pairing, DEFAULT_PAIRING_CAP};
pub use polynomial::OmegaPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WickError {
    #[error("pairings need an even, positive number of items (got {0})")]
    OddOrder(u32),
    #[error("order {requested} exceeds the enumeration cap {cap}")]
    CapExceeded { requested: u32, cap: u32 },
    #[error("integrated vertex {vertex} has degree {degree}, expected 2")]
    DegreeMismatch { vertex: u32, degree: usize },
    #[error("edge ({0}, {1}) references an undeclared vertex")]
    UnknownVertex(u32, u32),
}

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use super::graph::ContractionGraph;
use super::pairing::{enumerate_pairings_with_cap, Pairing, DEFAULT_PAIRING_CAP};
use super::polynomial::OmegaPolynomial;
use super::WickError;
use crate::cardinal::{lambda_poly, CardinalScalar, OmegaLinear};
use crate::exact::rat;

/// Largest `N` accepted by [`s_polynomial_bruteforce`] (945 pairings).
pub const BRUTEFORCE_S_CAP: u32 = 5;

/// `prod_{m=0}^{N-1} (Omega + 2m)`; `S_0 = 1`.
pub fn s_polynomial(n: u32) -> OmegaPolynomial {
    (0..n).fold(OmegaPolynomial::one(), |acc, m| &acc * &OmegaPolynomial::omega_plus(2 * m as i64))
}

/// Sums `Omega^loops` over every pairing of `2N` wave vectors contracted
/// against the base identity kernels `1(k_{2n-1}, k_{2n})`, all vectors integrated.
pub fn s_polynomial_bruteforce(n: u32) -> Result<OmegaPolynomial, WickError> {
    if n > BRUTEFORCE_S_CAP {
        return Err(WickError::CapExceeded { requested: 2 * n, cap: 2 * BRUTEFORCE_S_CAP });
    }
    if n == 0 {
        return Ok(OmegaPolynomial::one());
    }
    let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
    for p in enumerate_pairings_with_cap(2 * n, 2 * BRUTEFORCE_S_CAP)? {
        let edges = p.pairs().iter().copied().chain((1..=n).map(|m| (2 * m - 1, 2 * m)));
        let g = ContractionGraph::new(1..=2 * n, edges, 1..=2 * n)?;
        let (loops, _) = g.contract()?;
        *counts.entry(loops).or_insert(0) += 1;
    }
    Ok(OmegaPolynomial::from_terms(counts.into_iter().map(|(k, c)| (k, BigRational::from_integer(c.into())))))
}

/// Scalar relating `T_{2N,2R}` to `T_{0,2R}`: `prod_{m=R+1}^{N+R} (Omega + 2m - 2)`.
pub fn t_reduction(n: u32, r: u32) -> OmegaPolynomial {
    (r + 1..=n + r).fold(OmegaPolynomial::one(), |acc, m| &acc * &OmegaPolynomial::omega_plus(2 * m as i64 - 2))
}

/// Contracts the first `2N` of `2N+2R` wave vectors for every pairing and groups
/// the resulting `Omega^loops` by the residual pairing of the last `2R`
/// vectors (relabelled `1..2R`).
pub fn t_reduction_bruteforce(n: u32, r: u32) -> Result<Vec<(Pairing, OmegaPolynomial)>, WickError> {
    let total = 2 * (n + r);
    let mut grouped: BTreeMap<Pairing, BTreeMap<u32, u64>> = BTreeMap::new();
    let pairings = if total == 0 { vec![Pairing::empty()] } else { enumerate_pairings_with_cap(total, DEFAULT_PAIRING_CAP)? };
    for p in pairings {
        let edges = p.pairs().iter().copied().chain((1..=n).map(|m| (2 * m - 1, 2 * m)));
        let g = ContractionGraph::new(1..=total, edges, 1..=2 * n)?;
        let (loops, residual) = g.contract()?;
        let relabelled = Pairing::new(residual.edges().iter().map(|&(a, b)| (a - 2 * n, b - 2 * n)))
            .expect("residual of a full pairing is a pairing of the external vectors");
        *grouped.entry(relabelled).or_default().entry(loops).or_insert(0) += 1;
    }
    Ok(grouped
        .into_iter()
        .map(|(p, counts)| {
            let poly = OmegaPolynomial::from_terms(counts.into_iter().map(|(k, c)| (k, BigRational::from_integer(c.into()))));
            (p, poly)
        })
        .collect())
}

/// Symbolic moment `M_m = (2 pi Lambda)^(Omega/2) Lambda^n * sum over pairings of prod 1(k_r, k_s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentTensor {
    pub order: u32,
    pub prefactor: CardinalScalar,
    pub terms: Vec<Pairing>,
}

impl MomentTensor {
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The prefactor in the factored form `(2*pi*Lambda)^(Omega/2) * Lambda^n`.
    pub fn prefactor_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        match self.order / 2 {
            0 => "(2*pi*Lambda)^(Omega/2)".into(),
            1 => "(2*pi*Lambda)^(Omega/2) * Lambda".into(),
            n => format!("(2*pi*Lambda)^(Omega/2) * Lambda^{n}"),
        }
    }

    /// One `1(k_r,k_s)` product per pairing.
    pub fn term_texts(&self) -> Vec<String> {
        self.terms
            .iter()
            .map(|p| {
                if p.is_empty() {
                    "1".to_string()
                } else {
                    p.pairs().iter().map(|(a, b)| format!("1(k{a},k{b})")).collect::<Vec<_>>().join("*")
                }
            })
            .collect()
    }
}

impl fmt::Display for MomentTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "M_{} = 0", self.order);
        }
        write!(f, "M_{} = {} * [{}]", self.order, self.prefactor_text(), self.term_texts().join(" + "))
    }
}

#[derive(Serialize)]
struct MomentTensorJson<'a> {
    order: u32,
    prefactor: String,
    prefactor_canonical: String,
    pairings: &'a [Pairing],
    terms: Vec<String>,
}

impl Serialize for MomentTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MomentTensorJson {
            order: self.order,
            prefactor: self.prefactor_text(),
            prefactor_canonical: self.prefactor.to_string(),
            pairings: &self.terms,
            terms: self.term_texts(),
        }
        .serialize(s)
    }
}

/// `(2 pi Lambda)^(Omega/2) Lambda^n`.
fn moment_prefactor(n: u32) -> CardinalScalar {
    let half_omega = OmegaLinear::omega(rat(1, 2));
    CardinalScalar::power(&lambda_poly(&[0, 2]), &half_omega)
        .mul(&CardinalScalar::pi_pow(half_omega))
        .mul(&CardinalScalar::lambda_pow(OmegaLinear::integer(n as i64)))
}

pub fn measure_moment(order: u32) -> Result<MomentTensor, WickError> {
    measure_moment_with_cap(order, DEFAULT_PAIRING_CAP)
}

pub fn measure_moment_with_cap(order: u32, cap: u32) -> Result<MomentTensor, WickError> {
    if order % 2 == 1 {
        return Ok(MomentTensor { order, prefactor: CardinalScalar::zero(), terms: Vec::new() });
    }
    let terms = if order == 0 { vec![Pairing::empty()] } else { enumerate_pairings_with_cap(order, cap)? };
    Ok(MomentTensor { order, prefactor: moment_prefactor(order / 2), terms })
}

/// `m_{2n}[f] = rho(2n) / 2^n * |f|^{2n}`.
pub fn probability_moment(n: u32, f_norm: f64) -> f64 {
    let f2 = f_norm * f_norm;
    (1..=n).fold(1.0, |acc, r| acc * (2 * r - 1) as f64 / 2.0 * f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_polynomial_small_cases() {
        assert_eq!(s_polynomial(0), OmegaPolynomial::one());
        assert_eq!(s_polynomial(1).to_string(), "Omega");
        assert_eq!(s_polynomial(2).to_string(), "Omega^2 + 2*Omega");
        assert_eq!(s_polynomial(3).to_string(), "Omega^3 + 6*Omega^2 + 8*Omega");
    }

    #[test]
    fn bruteforce_agrees_with_product_form() {
        assert_eq!(s_polynomial_bruteforce(1).unwrap().to_string(), "Omega");
        assert_eq!(s_polynomial_bruteforce(2).unwrap().to_string(), "Omega^2 + 2*Omega");
        assert_eq!(s_polynomial_bruteforce(3).unwrap().to_string(), "Omega^3 + 6*Omega^2 + 8*Omega");
        assert!(matches!(s_polynomial_bruteforce(6), Err(WickError::CapExceeded { .. })));
    }

    #[test]
    fn recurrence_holds() {
        for n in 1..=8 {
            let lhs = s_polynomial(n);
            let rhs = &OmegaPolynomial::omega_plus(2 * n as i64 - 2) * &s_polynomial(n - 1);
            assert_eq!(lhs, rhs, "N = {n}");
        }
    }

    #[test]
    fn t_reduction_spot_checks() {
        assert_eq!(t_reduction(1, 0), OmegaPolynomial::omega_plus(0));
        assert_eq!(t_reduction(1, 1), OmegaPolynomial::omega_plus(2));
        assert_eq!(t_reduction(2, 0), s_polynomial(2));
        let brute = t_reduction_bruteforce(1, 1).unwrap();
        assert_eq!(brute.len(), 1);
        assert_eq!(brute[0].0.to_string(), "{(1,2)}");
        assert_eq!(brute[0].1, OmegaPolynomial::omega_plus(2));
    }

    #[test]
    fn moments_of_the_measure() {
        let m3 = measure_moment(3).unwrap();
        assert!(m3.is_zero());
        let m2 = measure_moment(2).unwrap();
        assert_eq!(m2.terms.len(), 1);
        assert_eq!(m2.term_texts(), ["1(k1,k2)"]);
        assert_eq!(m2.prefactor, crate::cardinal::parse_cardinal("(2*pi*Lambda)^(Omega/2) * Lambda").unwrap());
        let m4 = measure_moment(4).unwrap();
        assert_eq!(m4.terms.len(), 3);
        assert_eq!(m4.prefactor_text(), "(2*pi*Lambda)^(Omega/2) * Lambda^2");
        assert_eq!(crate::cardinal::parse_cardinal(&m4.prefactor_text()).unwrap(), m4.prefactor);
        let m0 = measure_moment(0).unwrap();
        assert_eq!(m0.terms.len(), 1);
    }

    #[test]
    fn probability_moments() {
        assert_eq!(probability_moment(0, 3.0), 1.0);
        assert_eq!(probability_moment(1, 1.0), 0.5);
        assert_eq!(probability_moment(2, 1.0), 0.75);
        assert_eq!(probability_moment(1, 2.0), 2.0);
    }
}

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::exact::{fmt_rat, Rational};

/// Polynomial in the cardinal tag `Omega` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OmegaPolynomial {
    coefficients: BTreeMap<u32, Rational>,
}

impl OmegaPolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_terms([(0, c)])
    }

    /// `Omega^k`.
    pub fn omega_pow(k: u32) -> Self {
        Self::from_terms([(k, Rational::one())])
    }

    /// `Omega + c`.
    pub fn omega_plus(c: i64) -> Self {
        Self::from_terms([(1, Rational::one()), (0, Rational::from_integer(BigInt::from(c)))])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        let mut coefficients: BTreeMap<u32, Rational> = BTreeMap::new();
        for (k, c) in terms {
            *coefficients.entry(k).or_insert_with(Rational::zero) += c;
        }
        coefficients.retain(|_, c| !c.is_zero());
        Self { coefficients }
    }

    pub fn coefficients(&self) -> &BTreeMap<u32, Rational> {
        &self.coefficients
    }

    pub fn coefficient(&self, k: u32) -> Rational {
        self.coefficients.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.coefficients.keys().next_back().copied().unwrap_or(0)
    }

    pub fn eval(&self, omega: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for k in (0..=self.degree()).rev() {
            acc = acc * omega + self.coefficient(k);
        }
        acc
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.coefficients.iter().map(|(&k, v)| (k, v * c)))
    }
}

impl Add for &OmegaPolynomial {
    type Output = OmegaPolynomial;
    fn add(self, rhs: &OmegaPolynomial) -> OmegaPolynomial {
        OmegaPolynomial::from_terms(self.coefficients.iter().chain(&rhs.coefficients).map(|(&k, v)| (k, v.clone())))
    }
}

impl Mul for &OmegaPolynomial {
    type Output = OmegaPolynomial;
    fn mul(self, rhs: &OmegaPolynomial) -> OmegaPolynomial {
        let mut terms = Vec::new();
        for (&i, a) in &self.coefficients {
            for (&j, b) in &rhs.coefficients {
                terms.push((i + j, a * b));
            }
        }
        OmegaPolynomial::from_terms(terms)
    }
}

/// Highest degree first: `Omega^3 + 6*Omega^2 + 8*Omega`.
impl fmt::Display for OmegaPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (&k, c)) in self.coefficients.iter().rev().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            let unit = mag.is_one();
            match k {
                0 => f.write_str(&fmt_rat(&mag))?,
                _ => {
                    if !unit {
                        write!(f, "{}*", fmt_rat(&mag))?;
                    }
                    f.write_str("Omega")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Serialize for OmegaPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn renders_descending() {
        let p = OmegaPolynomial::from_terms([(3, int(1)), (2, int(6)), (1, int(8))]);
        assert_eq!(p.to_string(), "Omega^3 + 6*Omega^2 + 8*Omega");
        let q = OmegaPolynomial::from_terms([(1, rat(-1, 2)), (0, int(3))]);
        assert_eq!(q.to_string(), "-1/2*Omega + 3");
        assert_eq!(OmegaPolynomial::one().to_string(), "1");
        assert_eq!(OmegaPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn arithmetic() {
        let p = &OmegaPolynomial::omega_plus(0) * &OmegaPolynomial::omega_plus(2);
        assert_eq!(p, OmegaPolynomial::from_terms([(2, int(1)), (1, int(2))]));
        assert_eq!(p.eval(&int(3)), int(15));
        let s = &p + &p.scale(&int(-1));
        assert!(s.is_zero());
    }
}

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::exact::{fmt_rat, int, Rational};

/// An exponent `a*Omega + b` with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OmegaLinear {
    pub omega_coeff: Rational,
    pub const_coeff: Rational,
}

impl OmegaLinear {
    pub fn new(omega_coeff: Rational, const_coeff: Rational) -> Self {
        Self { omega_coeff, const_coeff }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn constant(c: Rational) -> Self {
        Self { omega_coeff: Rational::zero(), const_coeff: c }
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(int(n))
    }

    /// `c * Omega`.
    pub fn omega(c: Rational) -> Self {
        Self { omega_coeff: c, const_coeff: Rational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.omega_coeff.is_zero() && self.const_coeff.is_zero()
    }

    pub fn is_constant(&self) -> bool {
        self.omega_coeff.is_zero()
    }

    pub fn depends_on_omega(&self) -> bool {
        !self.omega_coeff.is_zero()
    }

    /// Integer value when the exponent is a constant integer.
    pub fn as_integer(&self) -> Option<i64> {
        use num_traits::ToPrimitive;
        if self.is_constant() && self.const_coeff.is_integer() {
            self.const_coeff.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self {
            omega_coeff: &self.omega_coeff * k,
            const_coeff: &self.const_coeff * k,
        }
    }

    /// Value at `Omega := omega`.
    pub fn at(&self, omega: &Rational) -> Rational {
        &self.omega_coeff * omega + &self.const_coeff
    }

    /// Splits off the integer part of the constant so the remainder lies in `[0, 1)`.
    pub fn split_integer_part(&self) -> (i64, OmegaLinear) {
        use num_traits::ToPrimitive;
        let floor = self.const_coeff.floor();
        let n = floor.to_integer().to_i64().expect("exponent integer part fits in i64");
        (n, OmegaLinear::new(self.omega_coeff.clone(), &self.const_coeff - floor))
    }

    /// Product of two linear forms; `None` when both depend on Omega.
    pub fn checked_mul(&self, other: &OmegaLinear) -> Option<OmegaLinear> {
        if self.is_constant() {
            Some(other.scale(&self.const_coeff))
        } else if other.is_constant() {
            Some(self.scale(&other.const_coeff))
        } else {
            None
        }
    }
}

impl Add for OmegaLinear {
    type Output = OmegaLinear;
    fn add(self, rhs: OmegaLinear) -> OmegaLinear {
        OmegaLinear::new(self.omega_coeff + rhs.omega_coeff, self.const_coeff + rhs.const_coeff)
    }
}

impl<'a> Add<&'a OmegaLinear> for &'a OmegaLinear {
    type Output = OmegaLinear;
    fn add(self, rhs: &OmegaLinear) -> OmegaLinear {
        OmegaLinear::new(&self.omega_coeff + &rhs.omega_coeff, &self.const_coeff + &rhs.const_coeff)
    }
}

impl Sub for OmegaLinear {
    type Output = OmegaLinear;
    fn sub(self, rhs: OmegaLinear) -> OmegaLinear {
        self + (-rhs)
    }
}

impl Neg for OmegaLinear {
    type Output = OmegaLinear;
    fn neg(self) -> OmegaLinear {
        OmegaLinear::new(-self.omega_coeff, -self.const_coeff)
    }
}

impl Neg for &OmegaLinear {
    type Output = OmegaLinear;
    fn neg(self) -> OmegaLinear {
        -(self.clone())
    }
}

impl Mul<&Rational> for &OmegaLinear {
    type Output = OmegaLinear;
    fn mul(self, rhs: &Rational) -> OmegaLinear {
        self.scale(rhs)
    }
}

/// Renders `Omega/2`, `-Omega/2+1`, `2*Omega`, `3/4`.
impl fmt::Display for OmegaLinear {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.omega_coeff;
        let b = &self.const_coeff;
        if a.is_zero() {
            return f.write_str(&fmt_rat(b));
        }
        let mut s = String::new();
        let mag = a.abs();
        if a.is_negative() {
            s.push('-');
        }
        if mag.numer().is_one() {
            s.push_str("Omega");
        } else {
            s.push_str(&mag.numer().to_string());
            s.push_str("*Omega");
        }
        if !mag.denom().is_one() {
            s.push('/');
            s.push_str(&mag.denom().to_string());
        }
        if !b.is_zero() {
            if b.is_positive() {
                s.push('+');
            }
            s.push_str(&fmt_rat(b));
        }
        f.write_str(&s)
    }
}

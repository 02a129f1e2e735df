use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::CardinalError;
use crate::exact::{cmp_crat, cone, crat, czero, fmt_crat, is_one, CRational, Rational};

/// Dense polynomial in Lambda with exact complex rational coefficients,
/// lowest degree first, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<CRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<CRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: CRational) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(cone())
    }

    /// `c * Lambda^k`.
    pub fn monomial(c: CRational, k: usize) -> Self {
        let mut coeffs = vec![czero(); k];
        coeffs.push(c);
        Self::new(coeffs)
    }

    pub fn lambda() -> Self {
        Self::monomial(cone(), 1)
    }

    pub fn coeffs(&self) -> &[CRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> CRational {
        self.coeffs.last().cloned().unwrap_or_else(czero)
    }

    pub fn coeff(&self, k: usize) -> CRational {
        self.coeffs.get(k).cloned().unwrap_or_else(czero)
    }

    /// Multiplicity of the root at zero.
    pub fn lowest_degree(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn scale(&self, c: &CRational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Drops the factor `Lambda^k`.
    pub fn shift_down(&self, k: usize) -> Self {
        Self::new(self.coeffs[k.min(self.coeffs.len())..].to_vec())
    }

    pub fn eval(&self, x: &CRational) -> CRational {
        self.coeffs.iter().rev().fold(czero(), |acc, c| acc * x + c)
    }

    /// Polynomial long division: `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dlead = divisor.leading();
        let dd = divisor.degree();
        if self.is_zero() || self.degree() < dd {
            return (Polynomial::zero(), self.clone());
        }
        let mut quot = vec![czero(); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone() / dlead.clone();
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] = rem[k + j].clone() - &c * dc;
                }
            }
            quot[k] = c;
        }
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Polynomial) -> Polynomial {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            let lead = a.leading();
            a.scale(&(cone() / lead))
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg_real = c.im.is_zero() && c.re < Rational::zero();
            let body = if neg_real { fmt_crat(&-c.clone()) } else { fmt_crat(c) };
            if first {
                if neg_real {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg_real { "-" } else { "+" })?;
            }
            first = false;
            let unit = is_one(&if neg_real { -c.clone() } else { c.clone() });
            match k {
                0 => f.write_str(&body)?,
                _ => {
                    if !unit {
                        write!(f, "{body}*")?;
                    }
                    f.write_str("Lambda")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f)
    }
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.coeffs.len().cmp(&other.coeffs.len()).then_with(|| {
            for (a, b) in self.coeffs.iter().zip(&other.coeffs).rev() {
                let o = cmp_crat(a, b);
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![czero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

/// Rational function of Lambda, kept reduced with a monic denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LambdaRational {
    numerator: Polynomial,
    denominator: Polynomial,
}

impl LambdaRational {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self, CardinalError> {
        if denominator.is_zero() {
            return Err(CardinalError::ZeroDenominator);
        }
        if numerator.is_zero() {
            return Ok(Self { numerator, denominator: Polynomial::one() });
        }
        let g = numerator.gcd(&denominator);
        let (num, _) = numerator.div_rem(&g);
        let (den, _) = denominator.div_rem(&g);
        let lead = den.leading();
        let inv = cone() / lead;
        Ok(Self { numerator: num.scale(&inv), denominator: den.scale(&inv) })
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        Self { numerator: p, denominator: Polynomial::one() }
    }

    pub fn constant(c: CRational) -> Self {
        Self::from_polynomial(Polynomial::constant(c))
    }

    pub fn rational(q: Rational) -> Self {
        Self::constant(crat(q))
    }

    pub fn zero() -> Self {
        Self::from_polynomial(Polynomial::zero())
    }

    pub fn one() -> Self {
        Self::constant(cone())
    }

    pub fn lambda() -> Self {
        Self::from_polynomial(Polynomial::lambda())
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.denominator.is_constant() && self.numerator == Polynomial::one()
    }

    /// Constant value when free of Lambda.
    pub fn as_constant(&self) -> Option<CRational> {
        if self.numerator.is_constant() && self.denominator.is_constant() {
            Some(self.numerator.coeff(0) / self.denominator.coeff(0))
        } else {
            None
        }
    }

    pub fn recip(&self) -> Result<Self, CardinalError> {
        Self::new(self.denominator.clone(), self.numerator.clone())
    }

    /// Value of the limit `Lambda -> infinity`; fails when the function grows.
    pub fn limit_at_infinity(&self) -> Result<CRational, CardinalError> {
        if self.numerator.is_zero() {
            return Ok(czero());
        }
        let dn = self.numerator.degree();
        let dd = self.denominator.degree();
        match dn.cmp(&dd) {
            Ordering::Less => Ok(czero()),
            Ordering::Equal => Ok(self.numerator.leading() / self.denominator.leading()),
            Ordering::Greater => Err(CardinalError::Unsupported(format!(
                "rational function {self} diverges as Lambda grows"
            ))),
        }
    }
}

impl Add for &LambdaRational {
    type Output = LambdaRational;
    fn add(self, rhs: &LambdaRational) -> LambdaRational {
        let num = &(&self.numerator * &rhs.denominator) + &(&rhs.numerator * &self.denominator);
        LambdaRational::new(num, &self.denominator * &rhs.denominator).expect("nonzero denominators")
    }
}

impl Sub for &LambdaRational {
    type Output = LambdaRational;
    fn sub(self, rhs: &LambdaRational) -> LambdaRational {
        self + &(-rhs)
    }
}

impl Mul for &LambdaRational {
    type Output = LambdaRational;
    fn mul(self, rhs: &LambdaRational) -> LambdaRational {
        LambdaRational::new(&self.numerator * &rhs.numerator, &self.denominator * &rhs.denominator)
            .expect("nonzero denominators")
    }
}

impl Neg for &LambdaRational {
    type Output = LambdaRational;
    fn neg(self) -> LambdaRational {
        LambdaRational { numerator: -&self.numerator, denominator: self.denominator.clone() }
    }
}

/// Display scales numerator and denominator so that the denominator has unit
/// constant term where possible (`(1/2*Lambda)/(1+2*Lambda)`).
impl fmt::Display for LambdaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.is_constant() {
            let p = self.numerator.scale(&(cone() / self.denominator.coeff(0)));
            return if p.is_constant() { write!(f, "{p}") } else { write!(f, "({p})") };
        }
        let c0 = self.denominator.coeff(0);
        let s = if c0.is_zero() { self.denominator.leading() } else { c0 };
        let inv = cone() / s;
        let num = self.numerator.scale(&inv);
        let den = self.denominator.scale(&inv);
        if num.is_constant() && !num.coeff(0).re.is_zero() && num.coeff(0).im.is_zero() {
            write!(f, "{num}/({den})")
        } else {
            write!(f, "({num})/({den})")
        }
    }
}

impl Ord for LambdaRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.denominator
            .cmp(&other.denominator)
            .then_with(|| self.numerator.cmp(&other.numerator))
    }
}

impl PartialOrd for LambdaRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Zero for LambdaRational {
    fn zero() -> Self {
        LambdaRational::zero()
    }
    fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl Add for LambdaRational {
    type Output = LambdaRational;
    fn add(self, rhs: LambdaRational) -> LambdaRational {
        &self + &rhs
    }
}

impl One for LambdaRational {
    fn one() -> Self {
        LambdaRational::one()
    }
}

impl Mul for LambdaRational {
    type Output = LambdaRational;
    fn mul(self, rhs: LambdaRational) -> LambdaRational {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cint, int, rat};

    fn poly(cs: &[i64]) -> Polynomial {
        Polynomial::new(cs.iter().map(|&c| cint(c)).collect())
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        // (1+L)(2+L) and (1+L)(3+L)
        let a = &poly(&[1, 1]) * &poly(&[2, 1]);
        let b = &poly(&[1, 1]) * &poly(&[3, 1]);
        assert_eq!(a.gcd(&b), poly(&[1, 1]));
    }

    #[test]
    fn rational_functions_reduce() {
        let r = LambdaRational::new(&poly(&[1, 1]) * &poly(&[0, 2]), &poly(&[1, 1]) * &poly(&[4])).unwrap();
        assert_eq!(r.numerator(), &poly(&[0, 1]).scale(&crat(rat(1, 2))));
        assert_eq!(r.denominator(), &Polynomial::one());
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert_eq!(
            LambdaRational::new(Polynomial::one(), Polynomial::zero()),
            Err(CardinalError::ZeroDenominator)
        );
    }

    #[test]
    fn limit_at_infinity_keeps_leading_ratio() {
        // (1/2 L)/(1+2L) -> 1/4
        let r = LambdaRational::new(poly(&[0, 1]).scale(&crat(rat(1, 2))), poly(&[1, 2])).unwrap();
        assert_eq!(r.limit_at_infinity().unwrap(), crat(rat(1, 4)));
        assert_eq!(r.to_string(), "(1/2*Lambda)/(1+2*Lambda)");
        let grows = LambdaRational::from_polynomial(poly(&[0, 0, 1]));
        assert!(grows.limit_at_infinity().is_err());
        assert_eq!(LambdaRational::rational(int(3)).limit_at_infinity().unwrap(), cint(3));
    }

    #[test]
    fn polynomial_rendering() {
        assert_eq!(poly(&[1, 2]).to_string(), "1+2*Lambda");
        assert_eq!(poly(&[-1, 0, -3]).to_string(), "-1-3*Lambda^2");
        assert_eq!(poly(&[0, 1]).to_string(), "Lambda");
    }
}

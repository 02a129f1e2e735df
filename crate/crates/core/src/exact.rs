//! Exact rational and complex-rational helpers shared by the symbolic modules.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Rational = BigRational;
/// Exact complex rational number `re + im*i`.
pub type CRational = Complex<BigRational>;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn crat(re: Rational) -> CRational {
    Complex::new(re, Rational::zero())
}

pub fn cint(n: i64) -> CRational {
    crat(int(n))
}

pub fn cone() -> CRational {
    Complex::new(Rational::one(), Rational::zero())
}

pub fn czero() -> CRational {
    Complex::new(Rational::zero(), Rational::zero())
}

pub fn imag_unit() -> CRational {
    Complex::new(Rational::zero(), Rational::one())
}

pub fn is_real(c: &CRational) -> bool {
    c.im.is_zero()
}

pub fn is_one(c: &CRational) -> bool {
    c.im.is_zero() && c.re.is_one()
}

pub fn to_f64(q: &Rational) -> f64 {
    // BigRational::to_f64 rounds correctly for the magnitudes used here.
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

pub fn to_c64(c: &CRational) -> Complex<f64> {
    Complex::new(to_f64(&c.re), to_f64(&c.im))
}

/// Exact integer power of a complex rational (negative powers invert).
pub fn cpow(base: &CRational, exp: i64) -> CRational {
    let mut acc = cone();
    for _ in 0..exp.unsigned_abs() {
        acc *= base.clone();
    }
    if exp < 0 {
        cone() / acc
    } else {
        acc
    }
}

/// Total order on complex rationals: by real part, then imaginary part.
pub fn cmp_crat(a: &CRational, b: &CRational) -> Ordering {
    a.re.cmp(&b.re).then_with(|| a.im.cmp(&b.im))
}

/// Renders a rational as `n` or `n/d`.
pub fn fmt_rat(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Renders a complex rational. Real values render bare (`-3/4`); values with an
/// imaginary part render parenthesized (`(1+2*i)`, `(-1/2*i)`).
pub fn fmt_crat(c: &CRational) -> String {
    if c.im.is_zero() {
        return fmt_rat(&c.re);
    }
    let mut s = String::from("(");
    if !c.re.is_zero() {
        s.push_str(&fmt_rat(&c.re));
        if c.im.is_positive() {
            s.push('+');
        }
    }
    if c.im.is_one() {
        s.push('i');
    } else if (-c.im.clone()).is_one() {
        s.push_str("-i");
    } else {
        let _ = write!(s, "{}*i", fmt_rat(&c.im));
    }
    s.push(')');
    s
}

/// Parses a decimal literal such as `12`, `0.25` or `3.` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    Some(BigRational::new(numer, denom))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_complex_rationals() {
        assert_eq!(fmt_crat(&crat(rat(-3, 4))), "-3/4");
        assert_eq!(fmt_crat(&Complex::new(int(1), int(2))), "(1+2*i)");
        assert_eq!(fmt_crat(&Complex::new(int(0), rat(-1, 2))), "(-1/2*i)");
        assert_eq!(fmt_crat(&imag_unit()), "(i)");
        assert_eq!(fmt_crat(&Complex::new(int(2), int(-1))), "(2-i)");
    }

    #[test]
    fn parses_decimals() {
        assert_eq!(parse_decimal("0.25"), Some(rat(1, 4)));
        assert_eq!(parse_decimal("12"), Some(int(12)));
        assert_eq!(parse_decimal("."), None);
        assert_eq!(parse_decimal("1e3"), None);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(cpow(&cint(2), -3), crat(rat(1, 8)));
        assert_eq!(cpow(&imag_unit(), 2), cint(-1));
    }
}

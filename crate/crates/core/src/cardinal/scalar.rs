use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::omega::OmegaLinear;
use super::poly::{LambdaRational, Polynomial};
use super::{CardinalError, Tag};
use crate::exact::{cmp_crat, cone, cpow, crat, czero, fmt_crat, is_one, to_c64, to_f64, CRational, Rational};

/// An atomic base of a cardinal power. Every `LambdaRational` base is split into
/// these atoms so that equal bases always merge.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Base {
    /// Positive integer greater than one: a prime, or a cofactor left unfactored.
    Prime(BigUint),
    /// A constant that is not a positive real rational.
    Const(CRational),
    Pi,
    Lambda,
    /// Polynomial `r(Lambda)` with `r(0) = 1` and degree at least one.
    Poly(Polynomial),
    /// The zero base, only kept when raised to a non-positive exponent.
    Zero,
}

impl Base {
    fn rank(&self) -> u8 {
        match self {
            Base::Prime(_) => 0,
            Base::Const(_) => 1,
            Base::Pi => 2,
            Base::Lambda => 3,
            Base::Poly(_) => 4,
            Base::Zero => 5,
        }
    }

    pub fn depends_on_lambda(&self) -> bool {
        matches!(self, Base::Lambda | Base::Poly(_))
    }

    fn is_numeric_constant(&self) -> bool {
        matches!(self, Base::Prime(_) | Base::Const(_))
    }

    fn as_constant(&self) -> Option<CRational> {
        match self {
            Base::Prime(p) => Some(crat(Rational::from_integer(BigInt::from(p.clone())))),
            Base::Const(c) => Some(c.clone()),
            _ => None,
        }
    }
}

impl Ord for Base {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank()).then_with(|| match (self, other) {
            (Base::Prime(a), Base::Prime(b)) => a.cmp(b),
            (Base::Const(a), Base::Const(b)) => cmp_crat(a, b),
            (Base::Poly(a), Base::Poly(b)) => a.cmp(b),
            _ => Ordering::Equal,
        })
    }
}

impl PartialOrd for Base {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Base::Prime(p) => write!(f, "{p}"),
            Base::Const(c) if c.im.is_zero() => write!(f, "({})", fmt_crat(c)),
            Base::Const(c) => f.write_str(&fmt_crat(c)),
            Base::Pi => f.write_str("pi"),
            Base::Lambda => f.write_str("Lambda"),
            Base::Poly(p) => write!(f, "({p})"),
            Base::Zero => f.write_str("0"),
        }
    }
}

/// Finite complex coefficient times a product of cardinal powers `base^(a*Omega+b)`.
///
/// Normal form: factors sorted by base, bases unique, no zero exponents, and
/// numeric-constant bases carry only the fractional part of their exponent's
/// constant (integer parts are folded into the coefficient).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CardinalScalar {
    coefficient: CRational,
    factors: Vec<(Base, OmegaLinear)>,
}

impl CardinalScalar {
    pub fn one() -> Self {
        Self::constant(cone())
    }

    pub fn zero() -> Self {
        Self::constant(czero())
    }

    pub fn constant(c: CRational) -> Self {
        Self { coefficient: c, factors: Vec::new() }
    }

    pub fn rational(q: Rational) -> Self {
        Self::constant(crat(q))
    }

    pub fn coefficient(&self) -> &CRational {
        &self.coefficient
    }

    pub fn factors(&self) -> &[(Base, OmegaLinear)] {
        &self.factors
    }

    pub fn is_zero(&self) -> bool {
        self.coefficient.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty() && is_one(&self.coefficient)
    }

    /// `pi^e`.
    pub fn pi_pow(e: OmegaLinear) -> Self {
        Self::from_parts(cone(), vec![(Base::Pi, e)])
    }

    /// `Lambda^e`.
    pub fn lambda_pow(e: OmegaLinear) -> Self {
        Self::from_parts(cone(), vec![(Base::Lambda, e)])
    }

    /// `c^e` for a numeric constant `c`.
    pub fn const_pow(c: &CRational, e: &OmegaLinear) -> Self {
        if e.is_zero() {
            return Self::one();
        }
        if c.is_zero() {
            return Self::zero_pow(e);
        }
        if let Some(n) = e.as_integer() {
            return Self::constant(cpow(c, n));
        }
        if c.im.is_zero() && c.re.is_positive() {
            let mut factors = Vec::new();
            for (p, k) in factor_positive(c.re.numer()) {
                factors.push((Base::Prime(p), e.scale(&Rational::from_integer(BigInt::from(k)))));
            }
            for (p, k) in factor_positive(c.re.denom()) {
                factors.push((Base::Prime(p), e.scale(&-Rational::from_integer(BigInt::from(k)))));
            }
            Self::from_parts(cone(), factors)
        } else {
            Self::from_parts(cone(), vec![(Base::Const(c.clone()), e.clone())])
        }
    }

    fn zero_pow(e: &OmegaLinear) -> Self {
        let positive = if e.omega_coeff.is_zero() {
            e.const_coeff.is_positive()
        } else {
            e.omega_coeff.is_positive()
        };
        if positive {
            Self::zero()
        } else {
            Self { coefficient: cone(), factors: vec![(Base::Zero, e.clone())] }
        }
    }

    /// `base^e` for a rational function of Lambda.
    pub fn power(base: &LambdaRational, e: &OmegaLinear) -> Self {
        if e.is_zero() {
            return Self::one();
        }
        if base.is_zero() {
            return Self::zero_pow(e);
        }
        let mut out = Self::one();
        for (poly, sign) in [(base.numerator(), 1i64), (base.denominator(), -1i64)] {
            let exp = e.scale(&Rational::from_integer(BigInt::from(sign)));
            let k = poly.lowest_degree();
            let rest = poly.shift_down(k);
            let c0 = rest.coeff(0);
            out = out.mul(&Self::const_pow(&c0, &exp));
            if k > 0 {
                out = out.mul(&Self::lambda_pow(exp.scale(&Rational::from_integer(BigInt::from(k)))));
            }
            let normalized = rest.scale(&(cone() / c0));
            if !normalized.is_constant() {
                out = out.mul(&Self::from_parts(cone(), vec![(Base::Poly(normalized), exp)]));
            }
        }
        out
    }

    fn from_parts(coefficient: CRational, factors: Vec<(Base, OmegaLinear)>) -> Self {
        let mut s = Self { coefficient, factors };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        if self.coefficient.is_zero() {
            self.factors.clear();
            return;
        }
        self.factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Base, OmegaLinear)> = Vec::with_capacity(self.factors.len());
        for (b, e) in self.factors.drain(..) {
            match merged.last_mut() {
                Some((lb, le)) if *lb == b => *le = &*le + &e,
                _ => merged.push((b, e)),
            }
        }
        let mut coefficient = self.coefficient.clone();
        let mut out = Vec::with_capacity(merged.len());
        for (b, e) in merged {
            if e.is_zero() {
                continue;
            }
            if b.is_numeric_constant() {
                let (n, rest) = e.split_integer_part();
                if n != 0 {
                    coefficient *= cpow(&b.as_constant().unwrap(), n);
                }
                if !rest.is_zero() {
                    out.push((b, rest));
                }
            } else {
                out.push((b, e));
            }
        }
        self.coefficient = coefficient;
        self.factors = out;
        if self.coefficient.is_zero() {
            self.factors.clear();
        }
    }

    pub fn mul(&self, other: &CardinalScalar) -> CardinalScalar {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Self::from_parts(&self.coefficient * &other.coefficient, factors)
    }

    pub fn scale(&self, c: &CRational) -> CardinalScalar {
        Self::from_parts(&self.coefficient * c, self.factors.clone())
    }

    /// Raises the whole scalar to a linear exponent.
    pub fn pow(&self, e: &OmegaLinear) -> Result<CardinalScalar, CardinalError> {
        let mut out = Self::const_pow(&self.coefficient, e);
        for (b, fe) in &self.factors {
            let ne = fe.checked_mul(e).ok_or_else(|| CardinalError::NonLinearExponent {
                lhs: fe.to_string(),
                rhs: e.to_string(),
            })?;
            out = out.mul(&Self { coefficient: cone(), factors: vec![(b.clone(), ne)] });
        }
        out.normalize();
        Ok(out)
    }

    pub fn recip(&self) -> Result<CardinalScalar, CardinalError> {
        if self.is_zero() {
            return Err(CardinalError::ZeroBase);
        }
        self.pow(&OmegaLinear::integer(-1))
    }

    pub fn depends_on_lambda(&self) -> bool {
        self.factors.iter().any(|(b, _)| b.depends_on_lambda())
    }

    pub fn depends_on_omega(&self) -> bool {
        self.factors.iter().any(|(_, e)| e.depends_on_omega())
    }

    pub fn tags(&self) -> BTreeSet<Tag> {
        let mut t = BTreeSet::new();
        if self.depends_on_omega() {
            t.insert(Tag::Omega);
        }
        if self.depends_on_lambda() {
            t.insert(Tag::Lambda);
        }
        t
    }

    /// Substitutes `Lambda := 1/eps` and keeps the leading behaviour as `eps -> 0`.
    pub fn limit_lambda(&self) -> Result<LimitResult, CardinalError> {
        let mut value = Self::constant(self.coefficient.clone());
        // Power of Lambda that survives (equivalently eps^-order).
        let mut order = OmegaLinear::zero();
        for (b, e) in &self.factors {
            match b {
                Base::Zero => return Err(CardinalError::ZeroBase),
                Base::Lambda => order = &order + e,
                Base::Poly(p) => {
                    let deg = Rational::from_integer(BigInt::from(p.degree()));
                    order = &order + &e.scale(&deg);
                    value = value.mul(&Self::const_pow(&p.leading(), e));
                }
                _ => value = value.mul(&Self { coefficient: cone(), factors: vec![(b.clone(), e.clone())] }),
            }
        }
        value.normalize();
        let mut residual_tags = BTreeSet::new();
        if !order.is_zero() {
            residual_tags.insert(Tag::Lambda);
            if order.depends_on_omega() {
                residual_tags.insert(Tag::Omega);
            }
        }
        if value.depends_on_omega() {
            residual_tags.insert(Tag::Omega);
        }
        let finite = residual_tags.is_empty();
        Ok(LimitResult { value, lambda_order: order, residual_tags, finite })
    }

    /// Numeric value with `Omega := omega`; Lambda must be gone.
    pub fn instantiate(&self, omega: u32) -> Result<Complex<f64>, CardinalError> {
        let d = Rational::from_integer(BigInt::from(omega));
        let mut acc = to_c64(&self.coefficient);
        for (b, e) in &self.factors {
            let x = to_f64(&e.at(&d));
            let v = match b {
                Base::Pi => Complex::new(std::f64::consts::PI.powf(x), 0.0),
                Base::Prime(p) => Complex::new(p.to_f64().unwrap_or(f64::INFINITY).powf(x), 0.0),
                Base::Const(c) => to_c64(c).powf(x),
                Base::Zero => return Err(CardinalError::ZeroBase),
                Base::Lambda | Base::Poly(_) => return Err(CardinalError::ResidualLambda),
            };
            acc *= v;
        }
        Ok(acc)
    }
}

impl CardinalScalar {
    /// Numeric value at `Omega := omega` and a finite real `Lambda := lambda`.
    pub fn instantiate_at(&self, omega: u32, lambda: f64) -> Result<Complex<f64>, CardinalError> {
        let d = Rational::from_integer(BigInt::from(omega));
        let mut acc = to_c64(&self.coefficient);
        for (b, e) in &self.factors {
            let x = to_f64(&e.at(&d));
            let base = match b {
                Base::Lambda => Complex::new(lambda, 0.0),
                Base::Poly(p) => {
                    p.coeffs().iter().rev().fold(Complex::new(0.0, 0.0), |a, c| a * lambda + to_c64(c))
                }
                _ => {
                    acc *= Self { coefficient: cone(), factors: vec![(b.clone(), e.clone())] }.instantiate(omega)?;
                    continue;
                }
            };
            acc *= base.powf(x);
        }
        Ok(acc)
    }
}

/// Outcome of `Lambda -> infinity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitResult {
    /// Leading coefficient, free of Lambda.
    pub value: CardinalScalar,
    /// Surviving power of Lambda; zero when the Lambda tags cancelled.
    pub lambda_order: OmegaLinear,
    pub residual_tags: BTreeSet<Tag>,
    pub finite: bool,
}

impl LimitResult {
    pub fn instantiate(&self, omega: u32) -> Result<Complex<f64>, CardinalError> {
        if !self.lambda_order.is_zero() {
            return Err(CardinalError::ResidualLambda);
        }
        self.value.instantiate(omega)
    }
}

/// Closed form of `sum_N x^N (a)_N / N! = (1 - x)^(-a)`.
pub fn sum_pochhammer_series(a: &OmegaLinear, x: &LambdaRational) -> CardinalScalar {
    let one_minus_x = &LambdaRational::one() - x;
    CardinalScalar::power(&one_minus_x, &-a)
}

/// Prime factorization by trial division; a large leftover cofactor is kept whole.
fn factor_positive(n: &BigInt) -> Vec<(BigUint, u32)> {
    let mut n = n.magnitude().clone();
    let mut out = Vec::new();
    if n.is_one() || n.is_zero() {
        return out;
    }
    let mut p = BigUint::from(2u32);
    let limit = BigUint::from(100_000u32);
    while &p * &p <= n && p <= limit {
        let mut k = 0;
        loop {
            let (q, r) = n.div_rem(&p);
            if !r.is_zero() {
                break;
            }
            n = q;
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p += if p == BigUint::from(2u32) { 1u32 } else { 2u32 };
    }
    if !n.is_one() {
        out.push((n, 1));
    }
    out
}

impl fmt::Display for CardinalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut groups: Vec<(&OmegaLinear, Vec<&Base>)> = Vec::new();
        for (b, e) in &self.factors {
            match groups.iter_mut().find(|(ge, _)| *ge == e) {
                Some((_, members)) => members.push(b),
                None => groups.push((e, vec![b])),
            }
        }
        let mut parts: Vec<String> = Vec::new();
        if !is_one(&self.coefficient) || groups.is_empty() {
            parts.push(fmt_crat(&self.coefficient));
        }
        for (e, members) in groups {
            let inner = members.iter().map(|b| b.to_string()).collect::<Vec<_>>().join("*");
            let single_atom = members.len() == 1;
            let unit_exp = e.as_integer() == Some(1);
            let body = if single_atom || unit_exp { inner } else { format!("({inner})") };
            if unit_exp {
                parts.push(body);
            } else {
                parts.push(format!("{body}^{}", fmt_exponent(e)));
            }
        }
        f.write_str(&parts.join(" * "))
    }
}

pub(crate) fn fmt_exponent(e: &OmegaLinear) -> String {
    match e.as_integer() {
        Some(n) if n >= 0 => n.to_string(),
        _ => format!("({e})"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cint, int, rat};

    fn half_omega() -> OmegaLinear {
        OmegaLinear::omega(rat(1, 2))
    }

    fn two_pi_lambda_half_omega() -> CardinalScalar {
        let two_lambda = LambdaRational::from_polynomial(Polynomial::monomial(cint(2), 1));
        CardinalScalar::power(&two_lambda, &half_omega()).mul(&CardinalScalar::pi_pow(half_omega()))
    }

    fn one_plus_two_lambda() -> LambdaRational {
        LambdaRational::from_polynomial(Polynomial::new(vec![cint(1), cint(2)]))
    }

    #[test]
    fn product_keeps_distinct_bases() {
        let x = two_pi_lambda_half_omega().mul(&CardinalScalar::lambda_pow(OmegaLinear::integer(1)));
        assert_eq!(x.to_string(), "(2*pi)^(Omega/2) * Lambda^(Omega/2+1)");
        assert_eq!(x.factors().len(), 3);
    }

    #[test]
    fn identity_and_cancellation() {
        let x = two_pi_lambda_half_omega();
        assert_eq!(x.mul(&CardinalScalar::one()), x);
        let up = CardinalScalar::power(&one_plus_two_lambda(), &half_omega());
        let down = CardinalScalar::power(&one_plus_two_lambda(), &-half_omega());
        assert!(up.mul(&down).is_one());
    }

    #[test]
    fn constant_powers_fold_integer_parts() {
        let a = CardinalScalar::const_pow(&cint(4), &OmegaLinear::new(rat(1, 2), int(1)));
        // 4^(Omega/2+1) = 4 * 2^Omega
        assert_eq!(a.coefficient(), &cint(4));
        assert_eq!(a.factors(), &[(Base::Prime(BigUint::from(2u32)), OmegaLinear::omega(int(1)))]);
        let b = CardinalScalar::const_pow(&cint(2), &OmegaLinear::omega(int(1)));
        assert_eq!(a, b.scale(&cint(4)));
    }

    #[test]
    fn limit_of_basic_gaussian_prefactor() {
        let x = two_pi_lambda_half_omega().mul(&CardinalScalar::power(&one_plus_two_lambda(), &-half_omega()));
        assert_eq!(x.to_string(), "(2*pi*Lambda)^(Omega/2) * (1+2*Lambda)^(-Omega/2)");
        let lim = x.limit_lambda().unwrap();
        assert_eq!(lim.value, CardinalScalar::pi_pow(half_omega()));
        assert_eq!(lim.residual_tags, BTreeSet::from([Tag::Omega]));
        assert!(!lim.finite);
    }

    #[test]
    fn limit_of_constant_is_finite() {
        let lim = CardinalScalar::constant(cint(7)).limit_lambda().unwrap();
        assert!(lim.finite);
        assert!(lim.residual_tags.is_empty());
        assert_eq!(lim.value, CardinalScalar::constant(cint(7)));
    }

    #[test]
    fn divergent_limit_keeps_both_tags() {
        let x = two_pi_lambda_half_omega().mul(&CardinalScalar::lambda_pow(OmegaLinear::integer(1)));
        let lim = x.limit_lambda().unwrap();
        assert!(!lim.finite);
        assert_eq!(lim.residual_tags, BTreeSet::from([Tag::Omega, Tag::Lambda]));
        assert_eq!(lim.lambda_order, OmegaLinear::new(rat(1, 2), int(1)));
        assert_eq!(lim.instantiate(2), Err(CardinalError::ResidualLambda));
    }

    #[test]
    fn zero_base_with_negative_exponent_is_ill_posed() {
        let x = CardinalScalar::power(&LambdaRational::zero(), &-half_omega());
        assert_eq!(x.limit_lambda(), Err(CardinalError::ZeroBase));
        assert!(CardinalScalar::power(&LambdaRational::zero(), &half_omega()).is_zero());
    }

    #[test]
    fn pochhammer_closed_forms() {
        let minus_two_lambda = LambdaRational::from_polynomial(Polynomial::monomial(cint(-2), 1));
        let s = sum_pochhammer_series(&half_omega(), &minus_two_lambda);
        assert_eq!(s, CardinalScalar::power(&one_plus_two_lambda(), &-half_omega()));
        assert!(sum_pochhammer_series(&half_omega(), &LambdaRational::zero()).is_one());
        let s = sum_pochhammer_series(&OmegaLinear::integer(3), &LambdaRational::rational(rat(1, 4)));
        assert_eq!(s, CardinalScalar::rational(rat(64, 27)));
    }

    #[test]
    fn instantiation_substitutes_omega() {
        let pi_half = CardinalScalar::pi_pow(half_omega());
        assert!((pi_half.instantiate(2).unwrap().re - std::f64::consts::PI).abs() < 1e-15);
        assert!((pi_half.instantiate(1).unwrap().re - 1.772_453_850_905_516).abs() < 1e-15);
        let x = CardinalScalar::pi_pow(OmegaLinear::omega(int(1)))
            .mul(&CardinalScalar::const_pow(&cint(2), &-half_omega()));
        let v = x.instantiate(4).unwrap().re;
        assert!((v - std::f64::consts::PI.powi(4) / 4.0).abs() < 1e-12);
        assert_eq!(
            CardinalScalar::lambda_pow(OmegaLinear::integer(1)).instantiate(1),
            Err(CardinalError::ResidualLambda)
        );
    }

    #[test]
    fn pow_rejects_quadratic_exponents() {
        let x = CardinalScalar::pi_pow(half_omega());
        assert!(matches!(x.pow(&half_omega()), Err(CardinalError::NonLinearExponent { .. })));
        assert_eq!(x.pow(&OmegaLinear::integer(2)).unwrap(), CardinalScalar::pi_pow(OmegaLinear::omega(int(1))));
    }
}

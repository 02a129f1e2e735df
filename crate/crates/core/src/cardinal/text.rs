//! Parser for the canonical text rendering of cardinal scalars, e.g.
//! `pi^(Omega/2) * (1+2*Lambda)^(-Omega/2)`.

use num_traits::Zero;

use super::omega::OmegaLinear;
use super::poly::{LambdaRational, Polynomial};
use super::scalar::CardinalScalar;
use super::CardinalError;
use crate::exact::{crat, imag_unit, parse_decimal, CRational};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

#[derive(Debug, Clone)]
enum Ast {
    Num(CRational),
    Pi,
    Lambda,
    Omega,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, CardinalError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push((start, Tok::Num(chars[start..i].iter().collect())));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(CardinalError::Parse { position: i, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.len)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, CardinalError> {
        Err(CardinalError::Parse { position: self.offset(), message: message.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ast, CardinalError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Ast, CardinalError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, CardinalError> {
        if self.eat('-') {
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Ast::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Ast, CardinalError> {
        match self.peek().cloned() {
            Some(Tok::Num(s)) => {
                let q = match parse_decimal(&s) {
                    Some(q) => q,
                    None => return self.err(format!("bad number '{s}'")),
                };
                self.pos += 1;
                Ok(Ast::Num(crat(q)))
            }
            Some(Tok::Ident(name)) => {
                let ast = match name.as_str() {
                    "pi" => Ast::Pi,
                    "Lambda" => Ast::Lambda,
                    "Omega" => Ast::Omega,
                    "i" => Ast::Num(imag_unit()),
                    _ => return self.err(format!("unknown symbol '{name}'")),
                };
                self.pos += 1;
                Ok(ast)
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            _ => self.err("expected a number, symbol or '('"),
        }
    }
}

fn parse_ast(text: &str) -> Result<Ast, CardinalError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, len: text.len() };
    let ast = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(ast)
}

fn to_omega(ast: &Ast) -> Option<OmegaLinear> {
    Some(match ast {
        Ast::Num(c) if c.im.is_zero() => OmegaLinear::constant(c.re.clone()),
        Ast::Omega => OmegaLinear::omega(crate::exact::int(1)),
        Ast::Neg(a) => -to_omega(a)?,
        Ast::Add(a, b) => to_omega(a)? + to_omega(b)?,
        Ast::Sub(a, b) => to_omega(a)? - to_omega(b)?,
        Ast::Mul(a, b) => to_omega(a)?.checked_mul(&to_omega(b)?)?,
        Ast::Div(a, b) => {
            let d = to_omega(b)?;
            if !d.is_constant() || d.const_coeff.is_zero() {
                return None;
            }
            to_omega(a)?.scale(&(crate::exact::int(1) / d.const_coeff))
        }
        _ => return None,
    })
}

fn to_lambda_rational(ast: &Ast) -> Option<LambdaRational> {
    Some(match ast {
        Ast::Num(c) => LambdaRational::constant(c.clone()),
        Ast::Lambda => LambdaRational::lambda(),
        Ast::Neg(a) => -&to_lambda_rational(a)?,
        Ast::Add(a, b) => &to_lambda_rational(a)? + &to_lambda_rational(b)?,
        Ast::Sub(a, b) => &to_lambda_rational(a)? - &to_lambda_rational(b)?,
        Ast::Mul(a, b) => &to_lambda_rational(a)? * &to_lambda_rational(b)?,
        Ast::Div(a, b) => {
            let d = to_lambda_rational(b)?;
            if d.is_zero() {
                return None;
            }
            &to_lambda_rational(a)? * &d.recip().ok()?
        }
        Ast::Pow(a, e) => {
            let n = to_omega(e)?.as_integer()?;
            let base = to_lambda_rational(a)?;
            let mut acc = LambdaRational::one();
            for _ in 0..n.unsigned_abs() {
                acc = &acc * &base;
            }
            if n < 0 {
                acc.recip().ok()?
            } else {
                acc
            }
        }
        _ => return None,
    })
}

fn to_cardinal(ast: &Ast) -> Result<CardinalScalar, CardinalError> {
    if let Some(lr) = to_lambda_rational(ast) {
        return Ok(CardinalScalar::power(&lr, &OmegaLinear::integer(1)));
    }
    let bad = || CardinalError::Parse { position: 0, message: "expression is not a cardinal scalar".into() };
    match ast {
        Ast::Pi => Ok(CardinalScalar::pi_pow(OmegaLinear::integer(1))),
        Ast::Neg(a) => Ok(to_cardinal(a)?.scale(&crate::exact::cint(-1))),
        Ast::Mul(a, b) => Ok(to_cardinal(a)?.mul(&to_cardinal(b)?)),
        Ast::Div(a, b) => Ok(to_cardinal(a)?.mul(&to_cardinal(b)?.recip()?)),
        Ast::Pow(a, e) => {
            let exp = to_omega(e).ok_or_else(bad)?;
            to_cardinal(a)?.pow(&exp)
        }
        _ => Err(bad()),
    }
}

/// Parses the canonical rendering back into a normalized scalar.
pub fn parse_cardinal(text: &str) -> Result<CardinalScalar, CardinalError> {
    to_cardinal(&parse_ast(text)?)
}

/// Parses an exponent such as `-Omega/2+1`.
pub fn parse_omega_linear(text: &str) -> Result<OmegaLinear, CardinalError> {
    to_omega(&parse_ast(text)?).ok_or(CardinalError::Parse {
        position: 0,
        message: "not a linear form in Omega".into(),
    })
}

/// Parses a rational function of Lambda such as `(1/2*Lambda)/(1+2*Lambda)`.
pub fn parse_lambda_rational(text: &str) -> Result<LambdaRational, CardinalError> {
    to_lambda_rational(&parse_ast(text)?).ok_or(CardinalError::Parse {
        position: 0,
        message: "not a rational function of Lambda".into(),
    })
}

/// Polynomial constructor used by tests and the engine: coefficients lowest first.
pub fn lambda_poly(coeffs: &[i64]) -> LambdaRational {
    LambdaRational::from_polynomial(Polynomial::new(coeffs.iter().map(|&c| crate::exact::cint(c)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cint, rat};

    #[test]
    fn parses_measure_prefactor_forms() {
        let a = parse_cardinal("pi^(Omega/2) * (1+2*Lambda)^(-Omega/2)").unwrap();
        assert_eq!(a.to_string(), "pi^(Omega/2) * (1+2*Lambda)^(-Omega/2)");
        let b = parse_cardinal("(2*pi*Lambda)^(Omega/2) * Lambda^2").unwrap();
        assert_eq!(b.to_string(), "(2*pi)^(Omega/2) * Lambda^(Omega/2+2)");
        assert_eq!(parse_cardinal(&b.to_string()).unwrap(), b);
    }

    #[test]
    fn parses_coefficients_and_complex_bases() {
        let a = parse_cardinal("(1+2*i)^(Omega/2) * -3/4").unwrap();
        assert_eq!(a.coefficient(), &crat(rat(-3, 4)));
        assert_eq!(parse_cardinal(&a.to_string()).unwrap(), a);
        assert_eq!(parse_cardinal("7").unwrap(), CardinalScalar::constant(cint(7)));
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_cardinal("pi^(Omega*Omega)").is_err());
        assert!(parse_cardinal("x^2").is_err());
        assert!(parse_cardinal("(1+Lambda").is_err());
        assert!(parse_cardinal("pi $").is_err());
    }

    #[test]
    fn parses_rational_functions() {
        let r = parse_lambda_rational("(1/2*Lambda)/(1+2*Lambda)").unwrap();
        assert_eq!(r.to_string(), "(1/2*Lambda)/(1+2*Lambda)");
        assert_eq!(parse_omega_linear("-Omega/2+1").unwrap().to_string(), "-Omega/2+1");
    }
}

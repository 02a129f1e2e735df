//! Integrand language:
//!
//! ```text
//! integral := "int" "exp" "(" sum ")" measure+
//! sum      := ["-"] term (("+" | "-") term)*
//! term     := [coeff "*"] chain | coeff
//! chain    := atom ("." atom)*
//! atom     := IDENT ["'"]
//! coeff    := NUMBER ["/" NUMBER] ["*" "i"] | "i"
//! measure  := "D[" IDENT "]" | "Dc[" IDENT "]"
//! ```
//!
//! `.` is the contraction, a postfix `'` marks complex conjugation and `i` is
//! the imaginary unit (reserved).

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Signed, Zero};

use super::EngineError;
use crate::exact::{cone, fmt_rat, parse_decimal, CRational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub name: String,
    pub conj: bool,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, if self.conj { "'" } else { "" })
    }
}

/// `coefficient * a1 . a2 . ... . an`; an empty chain is a numeric constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coefficient: CRational,
    pub chain: Vec<Atom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub enum MeasureFlavor {
    /// `D[x]`
    Plain,
    /// `Dc[x]`: one factor `1/(2 pi)` per degree of freedom.
    Circle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measure {
    pub variable: String,
    pub flavor: MeasureFlavor,
    /// False when the variable never occurs in the integrand.
    pub used: bool,
}

/// Byte range of a term in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

/// Parsed integrand `int exp(sum) measures`.
#[derive(Debug, Clone)]
pub struct IntegrandAst {
    pub terms: Vec<Term>,
    pub measures: Vec<Measure>,
    pub spans: Vec<Span>,
}

impl PartialEq for IntegrandAst {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.measures == other.measures
    }
}

impl Eq for IntegrandAst {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    Sym(char),
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    text_len: usize,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}

fn lex(text: &str) -> Result<Lexed, EngineError> {
    let mut toks = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c.is_ascii_digit() || (c == '.' && text[pos + 1..].starts_with(|d: char| d.is_ascii_digit())) {
            let mut end = pos;
            let mut seen_dot = false;
            while let Some(&(p, d)) = it.peek() {
                let digit_after = text[p + 1..].starts_with(|x: char| x.is_ascii_digit());
                if d.is_ascii_digit() || (d == '.' && !seen_dot && digit_after) {
                    seen_dot |= d == '.';
                    end = p + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            toks.push((Tok::Number(text[pos..end].to_string()), pos));
        } else if c.is_alphabetic() || c == '_' {
            let mut end = pos;
            while let Some(&(p, d)) = it.peek() {
                if d.is_alphanumeric() || d == '_' {
                    end = p + d.len_utf8();
                    it.next();
                } else {
                    break;
                }
            }
            toks.push((Tok::Ident(text[pos..end].to_string()), pos));
        } else if "()[]+-*/.'".contains(c) {
            toks.push((Tok::Sym(c), pos));
            it.next();
        } else {
            let (line, column) = line_col(text, pos);
            return Err(EngineError::UnknownToken { line, column, token: c.to_string() });
        }
    }
    Ok(Lexed { toks, text_len: text.len() })
}

struct Parser<'a> {
    text: &'a str,
    lexed: Lexed,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.lexed.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.lexed.toks.get(self.pos + k).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.lexed.toks.get(self.pos).map_or(self.lexed.text_len, |(_, o)| *o)
    }

    fn prev_end(&self) -> usize {
        match self.pos.checked_sub(1).and_then(|p| self.lexed.toks.get(p)) {
            Some((Tok::Number(s) | Tok::Ident(s), o)) => o + s.len(),
            Some((Tok::Sym(c), o)) => o + c.len_utf8(),
            None => 0,
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, EngineError> {
        let (line, column) = line_col(self.text, self.offset());
        Err(EngineError::Syntax { line, column, message: message.into() })
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Number(s)) | Some(Tok::Ident(s)) => format!("'{s}'"),
            Some(Tok::Sym(c)) => format!("'{c}'"),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char, context: &str) -> Result<(), EngineError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.error(format!("expected '{c}' {context}, found {}", self.describe_next()))
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), EngineError> {
        if self.peek() == Some(&Tok::Ident(word.to_string())) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected '{word}', found {}", self.describe_next()))
        }
    }

    fn integral(&mut self) -> Result<IntegrandAst, EngineError> {
        self.expect_keyword("int")?;
        self.expect_keyword("exp")?;
        let open = self.offset();
        self.expect_sym('(', "after 'exp'")?;
        let (terms, spans) = self.sum()?;
        if !self.eat_sym(')') {
            if self.peek().is_none() {
                let (line, column) = line_col(self.text, open);
                return Err(EngineError::Syntax { line, column, message: "unclosed '(' opened here".into() });
            }
            return self.error(format!("expected '+', '-' or ')', found {}", self.describe_next()));
        }
        let mut measures = Vec::new();
        while self.peek().is_some() {
            measures.push(self.measure()?);
        }
        if measures.is_empty() {
            return self.error("expected at least one measure D[x] or Dc[x]");
        }
        Ok(IntegrandAst { terms, measures, spans })
    }

    fn measure(&mut self) -> Result<Measure, EngineError> {
        let flavor = match self.peek() {
            Some(Tok::Ident(s)) if s == "D" => MeasureFlavor::Plain,
            Some(Tok::Ident(s)) if s == "Dc" => MeasureFlavor::Circle,
            _ => return self.error(format!("expected a measure D[x] or Dc[x], found {}", self.describe_next())),
        };
        self.pos += 1;
        self.expect_sym('[', "after measure")?;
        let variable = match self.peek() {
            Some(Tok::Ident(s)) if s != "i" => s.clone(),
            _ => return self.error(format!("expected a variable name, found {}", self.describe_next())),
        };
        self.pos += 1;
        self.expect_sym(']', "to close the measure")?;
        Ok(Measure { variable, flavor, used: false })
    }

    fn sum(&mut self) -> Result<(Vec<Term>, Vec<Span>), EngineError> {
        let mut terms = Vec::new();
        let mut spans = Vec::new();
        let mut negative = self.eat_sym('-');
        loop {
            let start = self.offset();
            let mut term = self.term()?;
            if negative {
                term.coefficient = -term.coefficient;
            }
            spans.push(Span { start, end: self.prev_end() });
            terms.push(term);
            if self.eat_sym('+') {
                negative = false;
            } else if self.eat_sym('-') {
                negative = true;
            } else {
                return Ok((terms, spans));
            }
        }
    }

    fn number(&mut self) -> Result<Rational, EngineError> {
        match self.peek().cloned() {
            Some(Tok::Number(s)) => {
                self.pos += 1;
                match parse_decimal(&s) {
                    Some(q) => Ok(q),
                    None => self.error(format!("malformed number '{s}'")),
                }
            }
            _ => self.error(format!("expected a number, found {}", self.describe_next())),
        }
    }

    fn term(&mut self) -> Result<Term, EngineError> {
        let mut coefficient = cone();
        let mut have_coeff = false;
        match self.peek() {
            Some(Tok::Number(_)) => {
                let mut q = self.number()?;
                if self.eat_sym('/') {
                    let d = self.number()?;
                    if d.is_zero() {
                        return self.error("division by zero in coefficient");
                    }
                    q /= d;
                }
                coefficient = Complex::new(q, Rational::zero());
                have_coeff = true;
                if self.peek() == Some(&Tok::Sym('*')) && self.peek_at(1) == Some(&Tok::Ident("i".into())) {
                    self.pos += 2;
                    coefficient = Complex::new(Rational::zero(), coefficient.re);
                }
            }
            Some(Tok::Ident(s)) if s == "i" => {
                self.pos += 1;
                coefficient = Complex::new(Rational::zero(), Rational::one());
                have_coeff = true;
            }
            _ => {}
        }
        if have_coeff && !self.eat_sym('*') {
            return Ok(Term { coefficient, chain: Vec::new() });
        }
        Ok(Term { coefficient, chain: self.chain()? })
    }

    fn chain(&mut self) -> Result<Vec<Atom>, EngineError> {
        let mut chain = vec![self.atom()?];
        while self.eat_sym('.') {
            chain.push(self.atom()?);
        }
        Ok(chain)
    }

    fn atom(&mut self) -> Result<Atom, EngineError> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) if name == "i" => self.error("'i' is the imaginary unit and cannot name a symbol"),
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let conj = self.eat_sym('\'');
                Ok(Atom { name, conj })
            }
            _ => self.error(format!("expected a symbol, found {}", self.describe_next())),
        }
    }
}

/// Parses an integral; measure variables that never occur are flagged unused.
pub fn parse(text: &str) -> Result<IntegrandAst, EngineError> {
    let lexed = lex(text)?;
    let mut parser = Parser { text, lexed, pos: 0 };
    let mut ast = parser.integral()?;
    for m in &mut ast.measures {
        m.used = ast.terms.iter().any(|t| t.chain.iter().any(|a| a.name == m.variable));
    }
    Ok(ast)
}

fn fmt_coeff_magnitude(c: &CRational) -> String {
    if c.im.is_zero() {
        fmt_rat(&c.re.abs())
    } else {
        let m = c.im.abs();
        if m.is_one() {
            "i".into()
        } else {
            format!("{}*i", fmt_rat(&m))
        }
    }
}

impl fmt::Display for IntegrandAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("int exp(")?;
        for (k, t) in self.terms.iter().enumerate() {
            // A term whose coefficient mixes real and imaginary parts cannot be
            // written in the grammar; split it.
            let parts: Vec<CRational> = if !t.coefficient.re.is_zero() && !t.coefficient.im.is_zero() {
                vec![
                    Complex::new(t.coefficient.re.clone(), Rational::zero()),
                    Complex::new(Rational::zero(), t.coefficient.im.clone()),
                ]
            } else {
                vec![t.coefficient.clone()]
            };
            for (j, c) in parts.iter().enumerate() {
                let negative = if c.im.is_zero() { c.re.is_negative() } else { c.im.is_negative() };
                match (k == 0 && j == 0, negative) {
                    (true, true) => f.write_str("-")?,
                    (true, false) => {}
                    (false, true) => f.write_str(" - ")?,
                    (false, false) => f.write_str(" + ")?,
                }
                let mag = fmt_coeff_magnitude(c);
                let chain = t.chain.iter().map(Atom::to_string).collect::<Vec<_>>().join(".");
                if chain.is_empty() {
                    f.write_str(&mag)?;
                } else if mag == "1" {
                    f.write_str(&chain)?;
                } else {
                    write!(f, "{mag}*{chain}")?;
                }
            }
        }
        f.write_str(")")?;
        for m in &self.measures {
            let tag = match m.flavor {
                MeasureFlavor::Plain => "D",
                MeasureFlavor::Circle => "Dc",
            };
            write!(f, " {tag}[{}]", m.variable)?;
        }
        Ok(())
    }
}

//! Symbolic kernels, shift vectors and bilinear exponent terms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex;
use num_traits::{Signed, Zero};

use crate::cardinal::LambdaRational;
use crate::exact::{cone, fmt_crat, is_one, CRational};

/// Declared or assumed structure of a kernel symbol.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KernelProps {
    /// `X^T = X`
    pub symmetric: bool,
    /// `X^T = -X`
    pub antisymmetric: bool,
    /// `X^T = X'`
    pub self_adjoint: bool,
    /// `X' = X`
    pub real: bool,
}

impl KernelProps {
    pub fn symmetric() -> Self {
        Self { symmetric: true, ..Self::default() }
    }

    pub fn antisymmetric() -> Self {
        Self { antisymmetric: true, ..Self::default() }
    }

    pub fn self_adjoint() -> Self {
        Self { self_adjoint: true, ..Self::default() }
    }

    pub fn general() -> Self {
        Self::default()
    }

    pub fn union(self, other: Self) -> Self {
        Self {
            symmetric: self.symmetric || other.symmetric,
            antisymmetric: self.antisymmetric || other.antisymmetric,
            self_adjoint: self.self_adjoint || other.self_adjoint,
            real: self.real || other.real,
        }
    }
}

pub type PropTable = BTreeMap<String, KernelProps>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Kernel {
    Zero,
    Identity,
    Symbol { name: String, conj: bool, transpose: bool },
    Inverse(Box<Kernel>),
    Sqrt(Box<Kernel>),
    /// Contraction chain `A . B . C`.
    Product(Vec<Kernel>),
    /// Linear combination.
    Sum(Vec<(CRational, Kernel)>),
}

impl Kernel {
    pub fn symbol(name: &str) -> Self {
        Kernel::Symbol { name: name.to_string(), conj: false, transpose: false }
    }

    pub fn inv(self) -> Self {
        Kernel::Inverse(Box::new(self))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Kernel::Zero)
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Kernel::Identity)
    }

    pub fn conj(&self) -> Kernel {
        match self {
            Kernel::Zero | Kernel::Identity => self.clone(),
            Kernel::Symbol { name, conj, transpose } => {
                Kernel::Symbol { name: name.clone(), conj: !conj, transpose: *transpose }
            }
            Kernel::Inverse(k) => Kernel::Inverse(Box::new(k.conj())),
            Kernel::Sqrt(k) => Kernel::Sqrt(Box::new(k.conj())),
            Kernel::Product(ks) => Kernel::Product(ks.iter().map(Kernel::conj).collect()),
            Kernel::Sum(ts) => Kernel::Sum(ts.iter().map(|(c, k)| (c.conj(), k.conj())).collect()),
        }
    }

    pub fn transpose(&self) -> Kernel {
        match self {
            Kernel::Zero | Kernel::Identity => self.clone(),
            Kernel::Symbol { name, conj, transpose } => {
                Kernel::Symbol { name: name.clone(), conj: *conj, transpose: !transpose }
            }
            Kernel::Inverse(k) => Kernel::Inverse(Box::new(k.transpose())),
            Kernel::Sqrt(k) => Kernel::Sqrt(Box::new(k.transpose())),
            Kernel::Product(ks) => Kernel::Product(ks.iter().rev().map(Kernel::transpose).collect()),
            Kernel::Sum(ts) => Kernel::Sum(ts.iter().map(|(c, k)| (c.clone(), k.transpose())).collect()),
        }
    }

    pub fn scaled(self, c: CRational) -> Kernel {
        Kernel::Sum(vec![(c, self)])
    }

    /// Names of all kernel symbols.
    pub fn symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Kernel::Zero | Kernel::Identity => {}
            Kernel::Symbol { name, .. } => {
                out.insert(name.clone());
            }
            Kernel::Inverse(k) | Kernel::Sqrt(k) => k.symbols(out),
            Kernel::Product(ks) => ks.iter().for_each(|k| k.symbols(out)),
            Kernel::Sum(ts) => ts.iter().for_each(|(_, k)| k.symbols(out)),
        }
    }

    /// Replaces symbols by `Zero` or `Identity` (or any kernel), keeping conj/transpose marks.
    pub fn substitute(&self, map: &BTreeMap<String, Kernel>) -> Kernel {
        match self {
            Kernel::Zero | Kernel::Identity => self.clone(),
            Kernel::Symbol { name, conj, transpose } => match map.get(name) {
                Some(r) => {
                    let r = if *conj { r.conj() } else { r.clone() };
                    if *transpose {
                        r.transpose()
                    } else {
                        r
                    }
                }
                None => self.clone(),
            },
            Kernel::Inverse(k) => Kernel::Inverse(Box::new(k.substitute(map))),
            Kernel::Sqrt(k) => Kernel::Sqrt(Box::new(k.substitute(map))),
            Kernel::Product(ks) => Kernel::Product(ks.iter().map(|k| k.substitute(map)).collect()),
            Kernel::Sum(ts) => Kernel::Sum(ts.iter().map(|(c, k)| (c.clone(), k.substitute(map))).collect()),
        }
    }

    /// Canonical form under the given symbol properties.
    pub fn normalize(&self, props: &PropTable) -> Kernel {
        let (c, k) = self.split_scalar(props);
        rebuild(c, k)
    }

    /// Normalizes and pulls out an overall scalar: `self = c * k`.
    fn split_scalar(&self, props: &PropTable) -> (CRational, Kernel) {
        match self {
            Kernel::Zero => (cone(), Kernel::Zero),
            Kernel::Identity => (cone(), Kernel::Identity),
            Kernel::Symbol { name, conj, transpose } => {
                let p = props.get(name).copied().unwrap_or_default();
                let (mut conj, mut transpose) = (*conj, *transpose);
                let mut c = cone();
                if transpose {
                    if p.symmetric {
                        transpose = false;
                    } else if p.antisymmetric {
                        transpose = false;
                        c = -c;
                    } else if p.self_adjoint {
                        transpose = false;
                        conj = !conj;
                    }
                }
                if conj && p.real {
                    conj = false;
                }
                (c, Kernel::Symbol { name: name.clone(), conj, transpose })
            }
            Kernel::Inverse(inner) => {
                let (c, k) = inner.split_scalar(props);
                let inv_c = cone() / c;
                match k {
                    Kernel::Identity => (inv_c, Kernel::Identity),
                    Kernel::Inverse(x) => (inv_c, *x),
                    other => (inv_c, Kernel::Inverse(Box::new(other))),
                }
            }
            Kernel::Sqrt(inner) => match inner.normalize(props) {
                Kernel::Identity => (cone(), Kernel::Identity),
                other => (cone(), Kernel::Sqrt(Box::new(other))),
            },
            Kernel::Product(ks) => {
                let mut c = cone();
                let mut factors: Vec<Kernel> = Vec::new();
                for k in ks {
                    let (ck, nk) = k.split_scalar(props);
                    c *= ck;
                    match nk {
                        Kernel::Zero => return (cone(), Kernel::Zero),
                        Kernel::Identity => {}
                        Kernel::Product(inner) => factors.extend(inner),
                        other => factors.push(other),
                    }
                }
                if c.is_zero() {
                    return (cone(), Kernel::Zero);
                }
                // Adjacent X . inv(X) cancels.
                let mut out: Vec<Kernel> = Vec::new();
                for k in factors {
                    let cancels = match (out.last(), &k) {
                        (Some(Kernel::Inverse(a)), b) => **a == *b,
                        (Some(a), Kernel::Inverse(b)) => *a == **b,
                        _ => false,
                    };
                    if cancels {
                        out.pop();
                    } else {
                        out.push(k);
                    }
                }
                match out.len() {
                    0 => (c, Kernel::Identity),
                    1 => (c, out.pop().expect("one factor")),
                    _ => (c, Kernel::Product(out)),
                }
            }
            Kernel::Sum(ts) => {
                let mut merged: Vec<(CRational, Kernel)> = Vec::new();
                let mut push = |c: CRational, k: Kernel| {
                    if c.is_zero() || k.is_zero() {
                        return;
                    }
                    match merged.iter_mut().find(|(_, mk)| *mk == k) {
                        Some((mc, _)) => *mc += c,
                        None => merged.push((c, k)),
                    }
                };
                for (c, k) in ts {
                    let (ck, nk) = k.split_scalar(props);
                    let c = c * ck;
                    match nk {
                        Kernel::Sum(inner) => inner.into_iter().for_each(|(ci, ki)| push(&c * ci, ki)),
                        other => push(c, other),
                    }
                }
                merged.retain(|(c, _)| !c.is_zero());
                merged.sort_by_cached_key(|(_, k)| k.to_string());
                match merged.len() {
                    0 => (cone(), Kernel::Zero),
                    1 => {
                        let (c, k) = merged.pop().expect("one term");
                        (c, k)
                    }
                    _ => {
                        // Factor the leading coefficient out so `2*A + 2*B` and `A + B` share a body.
                        let lead = merged[0].0.clone();
                        let body = merged.into_iter().map(|(c, k)| (c / &lead, k)).collect();
                        (lead, Kernel::Sum(body))
                    }
                }
            }
        }
    }

    fn fmt_factor(&self) -> String {
        match self {
            Kernel::Sum(_) => format!("({self})"),
            other => other.to_string(),
        }
    }
}

fn rebuild(c: CRational, k: Kernel) -> Kernel {
    if c.is_zero() || k.is_zero() {
        Kernel::Zero
    } else if is_one(&c) {
        k
    } else {
        match k {
            Kernel::Sum(ts) => Kernel::Sum(ts.into_iter().map(|(ci, ki)| (ci * &c, ki)).collect()),
            other => Kernel::Sum(vec![(c, other)]),
        }
    }
}

/// Writes `c*body` inside a sum: the sign is emitted separately.
fn fmt_signed_term(out: &mut String, first: bool, c: &CRational, body: &str) {
    fmt_signed_term_sep(out, first, c, body, "*");
}

fn fmt_signed_term_sep(out: &mut String, first: bool, c: &CRational, body: &str, sep: &str) {
    let real = c.im.is_zero();
    let negative = real && c.re.is_negative();
    let mag = if negative { -c.clone() } else { c.clone() };
    match (first, negative) {
        (true, true) => out.push('-'),
        (true, false) => {}
        (false, true) => out.push_str(" - "),
        (false, false) => out.push_str(" + "),
    }
    if is_one(&mag) {
        out.push_str(body);
    } else {
        out.push_str(&fmt_crat(&mag));
        out.push_str(sep);
        out.push_str(body);
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Zero => f.write_str("0"),
            Kernel::Identity => f.write_str("1"),
            Kernel::Symbol { name, conj, transpose } => {
                write!(f, "{name}{}{}", if *conj { "'" } else { "" }, if *transpose { "^T" } else { "" })
            }
            Kernel::Inverse(k) => write!(f, "inv({k})"),
            Kernel::Sqrt(k) => write!(f, "sqrt({k})"),
            Kernel::Product(ks) => f.write_str(&ks.iter().map(Kernel::fmt_factor).collect::<Vec<_>>().join(" . ")),
            Kernel::Sum(ts) => {
                let mut s = String::new();
                for (i, (c, k)) in ts.iter().enumerate() {
                    fmt_signed_term(&mut s, i == 0, c, &k.fmt_factor());
                }
                f.write_str(&s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VecAtom {
    pub name: String,
    pub conj: bool,
}

impl VecAtom {
    pub fn new(name: &str, conj: bool) -> Self {
        Self { name: name.to_string(), conj }
    }
}

impl fmt::Display for VecAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, if self.conj { "'" } else { "" })
    }
}

/// One term `coef * kernel . atom` of a vector expression. As a left operand it
/// reads `coef * atom . kernel`; the kernel is written in reading order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VecTerm {
    pub coef: CRational,
    pub atom: VecAtom,
    pub kernel: Kernel,
}

/// Which side of a contraction a vector expression sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct VecExpr {
    pub terms: Vec<VecTerm>,
}

impl VecExpr {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn atom(name: &str, conj: bool) -> Self {
        Self { terms: vec![VecTerm { coef: cone(), atom: VecAtom::new(name, conj), kernel: Kernel::Identity }] }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, coef: CRational, atom: VecAtom, kernel: Kernel) {
        self.terms.push(VecTerm { coef, atom, kernel });
    }

    pub fn scaled(&self, c: &CRational) -> Self {
        Self { terms: self.terms.iter().map(|t| VecTerm { coef: &t.coef * c, ..t.clone() }).collect() }
    }

    pub fn plus(&self, other: &VecExpr) -> Self {
        Self { terms: self.terms.iter().chain(&other.terms).cloned().collect() }
    }

    /// Switches between left (row) and right (column) reading: transposes every kernel.
    pub fn flip_side(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| VecTerm { coef: t.coef.clone(), atom: t.atom.clone(), kernel: t.kernel.transpose() })
                .collect(),
        }
    }

    /// `self . k` for a left operand, `k . self` for a right operand.
    pub fn contract(&self, k: &Kernel, side: Side) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let kernel = match side {
                        Side::Left => Kernel::Product(vec![t.kernel.clone(), k.clone()]),
                        Side::Right => Kernel::Product(vec![k.clone(), t.kernel.clone()]),
                    };
                    VecTerm { coef: t.coef.clone(), atom: t.atom.clone(), kernel }
                })
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| VecTerm {
                    coef: t.coef.conj(),
                    atom: VecAtom { name: t.atom.name.clone(), conj: !t.atom.conj },
                    kernel: t.kernel.conj(),
                })
                .collect(),
        }
    }

    pub fn substitute(&self, kernels: &BTreeMap<String, Kernel>, zero_vectors: &BTreeSet<String>) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|t| !zero_vectors.contains(&t.atom.name))
                .map(|t| VecTerm { coef: t.coef.clone(), atom: t.atom.clone(), kernel: t.kernel.substitute(kernels) })
                .collect(),
        }
    }

    pub fn normalize(&self, props: &PropTable) -> Self {
        let mut out: Vec<VecTerm> = Vec::new();
        for t in &self.terms {
            let (c, k) = t.kernel.split_scalar(props);
            let coef = &t.coef * c;
            if coef.is_zero() || k.is_zero() {
                continue;
            }
            let pieces: Vec<(CRational, Kernel)> = match k {
                Kernel::Sum(ts) => ts.into_iter().map(|(ci, ki)| (&coef * ci, ki)).collect(),
                other => vec![(coef, other)],
            };
            for (coef, kernel) in pieces {
                match out.iter_mut().find(|o| o.atom == t.atom && o.kernel == kernel) {
                    Some(o) => o.coef += coef,
                    None => out.push(VecTerm { coef, atom: t.atom.clone(), kernel }),
                }
            }
        }
        out.retain(|t| !t.coef.is_zero());
        out.sort_by_cached_key(|t| (!t.kernel.is_identity(), t.atom.to_string(), t.kernel.to_string()));
        Self { terms: out }
    }

    fn symbols(&self, kernels: &mut BTreeSet<String>, vectors: &mut BTreeSet<String>) {
        for t in &self.terms {
            vectors.insert(t.atom.name.clone());
            t.kernel.symbols(kernels);
        }
    }

    pub fn render(&self, side: Side) -> String {
        let mut s = String::new();
        for (i, t) in self.terms.iter().enumerate() {
            let body = if t.kernel.is_identity() {
                t.atom.to_string()
            } else {
                match side {
                    Side::Left => format!("{} . {}", t.atom, t.kernel.fmt_factor()),
                    Side::Right => format!("{} . {}", t.kernel.fmt_factor(), t.atom),
                }
            };
            fmt_signed_term(&mut s, i == 0, &t.coef, &body);
        }
        if self.terms.len() > 1 || self.terms.first().is_some_and(|t| !is_one(&t.coef)) {
            format!("({s})")
        } else {
            s
        }
    }
}

/// `coef * left . mid . right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bilinear {
    pub coef: LambdaRational,
    pub left: VecExpr,
    pub mid: Kernel,
    pub right: VecExpr,
}

impl Bilinear {
    pub fn new(coef: LambdaRational, left: VecExpr, mid: Kernel, right: VecExpr) -> Self {
        Self { coef, left, mid, right }
    }

    /// True when both operands are bare atoms.
    pub fn is_simple(&self) -> bool {
        let bare = |v: &VecExpr| v.terms.len() == 1 && v.terms[0].kernel.is_identity() && is_one(&v.terms[0].coef);
        bare(&self.left) && bare(&self.right)
    }

    /// `None` when the term vanishes.
    pub fn normalize(&self, props: &PropTable) -> Option<Bilinear> {
        let mut left = self.left.normalize(props);
        let mut right = self.right.normalize(props);
        let (mc, mut mid) = self.mid.split_scalar(props);
        let mut coef = &self.coef * &LambdaRational::constant(mc);
        if left.is_zero() || right.is_zero() || mid.is_zero() || coef.is_zero() {
            return None;
        }
        if left.terms.len() == 1 && right.terms.len() == 1 {
            let l = left.terms.pop().expect("one term");
            let r = right.terms.pop().expect("one term");
            coef = &coef * &LambdaRational::constant(&l.coef * &r.coef);
            let (c, m) = Kernel::Product(vec![l.kernel, mid, r.kernel]).split_scalar(props);
            coef = &coef * &LambdaRational::constant(c);
            mid = m;
            if mid.is_zero() || coef.is_zero() {
                return None;
            }
            let (mut la, mut ra) = (l.atom, r.atom);
            // Orient x . M . y with x <= y.
            if la.to_string() > ra.to_string() {
                std::mem::swap(&mut la, &mut ra);
                mid = mid.transpose().normalize(props);
            }
            left = VecExpr { terms: vec![VecTerm { coef: cone(), atom: la, kernel: Kernel::Identity }] };
            right = VecExpr { terms: vec![VecTerm { coef: cone(), atom: ra, kernel: Kernel::Identity }] };
        }
        Some(Bilinear { coef, left, mid, right })
    }

    pub fn body(&self) -> String {
        let l = self.left.render(Side::Left);
        let r = self.right.render(Side::Right);
        if self.mid.is_identity() {
            format!("{l} . {r}")
        } else {
            format!("{l} . {} . {r}", self.mid.fmt_factor())
        }
    }

    pub fn substitute(&self, kernels: &BTreeMap<String, Kernel>, zero_vectors: &BTreeSet<String>) -> Bilinear {
        Bilinear {
            coef: self.coef.clone(),
            left: self.left.substitute(kernels, zero_vectors),
            mid: self.mid.substitute(kernels),
            right: self.right.substitute(kernels, zero_vectors),
        }
    }

    pub fn symbols(&self, kernels: &mut BTreeSet<String>, vectors: &mut BTreeSet<String>) {
        self.left.symbols(kernels, vectors);
        self.right.symbols(kernels, vectors);
        self.mid.symbols(kernels);
    }
}

/// Argument of the exponential: constant + scalar symbols + bilinears.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Exponent {
    pub constant: CRational,
    pub scalars: Vec<(CRational, String)>,
    pub terms: Vec<Bilinear>,
}

impl Exponent {
    pub fn new() -> Self {
        Self { constant: Complex::zero(), scalars: Vec::new(), terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.scalars.is_empty() && self.terms.is_empty()
    }

    pub fn normalize(&self, props: &PropTable) -> Exponent {
        let mut scalars: Vec<(CRational, String)> = Vec::new();
        for (c, s) in &self.scalars {
            match scalars.iter_mut().find(|(_, n)| n == s) {
                Some((mc, _)) => *mc += c,
                None => scalars.push((c.clone(), s.clone())),
            }
        }
        scalars.retain(|(c, _)| !c.is_zero());
        scalars.sort_by(|a, b| a.1.cmp(&b.1));
        let mut terms: Vec<Bilinear> = Vec::new();
        for t in &self.terms {
            let Some(n) = t.normalize(props) else { continue };
            match terms.iter_mut().find(|o| o.left == n.left && o.mid == n.mid && o.right == n.right) {
                Some(o) => o.coef = &o.coef + &n.coef,
                None => terms.push(n),
            }
        }
        terms.retain(|t| !t.coef.is_zero());
        terms.sort_by_cached_key(|t| (!t.is_simple(), t.body()));
        Exponent { constant: self.constant.clone(), scalars, terms }
    }

    pub fn substitute(&self, kernels: &BTreeMap<String, Kernel>, zero_vectors: &BTreeSet<String>) -> Exponent {
        Exponent {
            constant: self.constant.clone(),
            scalars: self.scalars.clone(),
            terms: self.terms.iter().map(|t| t.substitute(kernels, zero_vectors)).collect(),
        }
    }

    pub fn scale(&self, c: &CRational) -> Exponent {
        let lc = LambdaRational::constant(c.clone());
        Exponent {
            constant: &self.constant * c,
            scalars: self.scalars.iter().map(|(k, s)| (k * c, s.clone())).collect(),
            terms: self.terms.iter().map(|t| Bilinear { coef: &t.coef * &lc, ..t.clone() }).collect(),
        }
    }

    pub fn plus(&self, other: &Exponent) -> Exponent {
        Exponent {
            constant: &self.constant + &other.constant,
            scalars: self.scalars.iter().chain(&other.scalars).cloned().collect(),
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        let mut first = true;
        if !self.constant.is_zero() {
            s.push_str(&fmt_crat(&self.constant));
            first = false;
        }
        for (c, name) in &self.scalars {
            fmt_signed_term(&mut s, first, c, name);
            first = false;
        }
        for t in &self.terms {
            let body = t.body();
            match t.coef.as_constant() {
                Some(c) => fmt_signed_term_sep(&mut s, first, &c, &body, " * "),
                None => {
                    if !first {
                        s.push_str(" + ");
                    }
                    s.push_str(&format!("{} * {body}", t.coef));
                }
            }
            first = false;
        }
        if s.is_empty() {
            s.push('0');
        }
        f.write_str(&s)
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;

use super::canonical::{Flavor, QuadraticForm};
use super::dsl::MeasureFlavor;
use super::ir::{Bilinear, Exponent, Kernel, PropTable, Side, VecExpr};
use super::EngineError;
use crate::cardinal::{fmt_exponent, lambda_poly, CardinalScalar, LambdaRational, OmegaLinear, Tag};
use crate::exact::{cint, crat, int, rat, Rational};

/// Kernel property required for a closed form to hold.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assumption {
    Symmetric(Kernel),
    SelfAdjoint(Kernel),
    PositiveDefinite(Kernel),
}

impl Assumption {
    pub fn kernel(&self) -> &Kernel {
        match self {
            Assumption::Symmetric(k) | Assumption::SelfAdjoint(k) | Assumption::PositiveDefinite(k) => k,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Assumption::Symmetric(_) => 0,
            Assumption::SelfAdjoint(_) => 1,
            Assumption::PositiveDefinite(_) => 2,
        }
    }

    fn normalize(&self, props: &PropTable) -> Option<Assumption> {
        let k = self.kernel().normalize(props);
        let trivially_true = match self {
            Assumption::PositiveDefinite(_) => k.is_identity(),
            _ => k.is_identity() || k.is_zero(),
        };
        if trivially_true {
            return None;
        }
        Some(match self {
            Assumption::Symmetric(_) => Assumption::Symmetric(k),
            Assumption::SelfAdjoint(_) => Assumption::SelfAdjoint(k),
            Assumption::PositiveDefinite(_) => Assumption::PositiveDefinite(k),
        })
    }

    fn substitute(&self, map: &BTreeMap<String, Kernel>) -> Assumption {
        match self {
            Assumption::Symmetric(k) => Assumption::Symmetric(k.substitute(map)),
            Assumption::SelfAdjoint(k) => Assumption::SelfAdjoint(k.substitute(map)),
            Assumption::PositiveDefinite(k) => Assumption::PositiveDefinite(k.substitute(map)),
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::Symmetric(k) => write!(f, "{k} symmetric"),
            Assumption::SelfAdjoint(k) => write!(f, "{k} self-adjoint"),
            Assumption::PositiveDefinite(k) => write!(f, "{k} positive-definite"),
        }
    }
}

/// Symbolic result: `prefactor * prod det(K_i)^(e_i) * exp(exponent)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedForm {
    pub prefactor: CardinalScalar,
    pub det_factors: Vec<(Kernel, Rational)>,
    pub exponent: Exponent,
    pub assumptions: Vec<Assumption>,
    pub residual_tags: BTreeSet<Tag>,
}

/// Replacement of kernel symbols and zeroing of vector symbols.
#[derive(Debug, Clone, Default)]
pub struct Substitution {
    pub kernels: BTreeMap<String, Kernel>,
    pub zero_vectors: BTreeSet<String>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kernel(mut self, name: &str, k: Kernel) -> Self {
        self.kernels.insert(name.to_string(), k);
        self
    }

    pub fn zero_vector(mut self, name: &str) -> Self {
        self.zero_vectors.insert(name.to_string());
        self
    }
}

impl ClosedForm {
    pub fn normalize(&self, props: &PropTable) -> Result<ClosedForm, EngineError> {
        let mut prefactor = self.prefactor.clone();
        let mut dets: Vec<(Kernel, Rational)> = Vec::new();
        let mut queue: Vec<(Kernel, Rational)> = self.det_factors.clone();
        while let Some((k, e)) = queue.pop() {
            let k = k.normalize(props);
            match k {
                Kernel::Identity => {}
                Kernel::Inverse(inner) => queue.push((*inner, -e)),
                Kernel::Product(fs) => queue.extend(fs.into_iter().map(|f| (f, e.clone()))),
                Kernel::Sum(ref ts) if ts.len() == 1 => {
                    // det(c X) = c^Omega det(X)
                    let (c, inner) = ts[0].clone();
                    prefactor = prefactor.mul(&CardinalScalar::const_pow(&c, &OmegaLinear::omega(e.clone())));
                    queue.push((inner, e));
                }
                other => match dets.iter_mut().find(|(d, _)| *d == other) {
                    Some((_, de)) => *de += e,
                    None => dets.push((other, e)),
                },
            }
        }
        dets.retain(|(_, e)| !e.is_zero());
        dets.sort_by_cached_key(|(k, _)| k.to_string());

        let mut assumptions: Vec<Assumption> = Vec::new();
        for a in &self.assumptions {
            if let Some(n) = a.normalize(props) {
                if !assumptions.contains(&n) {
                    assumptions.push(n);
                }
            }
        }
        assumptions.sort_by_cached_key(|a| (a.kernel().to_string(), a.rank()));

        let exponent = self.exponent.normalize(props);
        let mut residual_tags = prefactor.tags();
        if exponent.terms.iter().any(|t| t.coef.as_constant().is_none()) {
            residual_tags.insert(Tag::Lambda);
        }
        Ok(ClosedForm { prefactor, det_factors: dets, exponent, assumptions, residual_tags })
    }

    /// Specializes symbols and renormalizes.
    pub fn substitute(&self, sub: &Substitution, props: &PropTable) -> Result<ClosedForm, EngineError> {
        let raw = ClosedForm {
            prefactor: self.prefactor.clone(),
            det_factors: self.det_factors.iter().map(|(k, e)| (k.substitute(&sub.kernels), e.clone())).collect(),
            exponent: self.exponent.substitute(&sub.kernels, &sub.zero_vectors),
            assumptions: self.assumptions.iter().map(|a| a.substitute(&sub.kernels)).collect(),
            residual_tags: self.residual_tags.clone(),
        };
        raw.normalize(props)
    }

    /// `self * other`.
    pub fn mul(&self, other: &ClosedForm, props: &PropTable) -> Result<ClosedForm, EngineError> {
        ClosedForm {
            prefactor: self.prefactor.mul(&other.prefactor),
            det_factors: self.det_factors.iter().chain(&other.det_factors).cloned().collect(),
            exponent: self.exponent.plus(&other.exponent),
            assumptions: self.assumptions.iter().chain(&other.assumptions).cloned().collect(),
            residual_tags: BTreeSet::new(),
        }
        .normalize(props)
    }

    /// `self^p` for a rational power (principal branch on the numeric side).
    pub fn pow(&self, p: &Rational, props: &PropTable) -> Result<ClosedForm, EngineError> {
        ClosedForm {
            prefactor: self.prefactor.pow(&OmegaLinear::constant(p.clone()))?,
            det_factors: self.det_factors.iter().map(|(k, e)| (k.clone(), e * p)).collect(),
            exponent: self.exponent.scale(&crat(p.clone())),
            assumptions: self.assumptions.clone(),
            residual_tags: BTreeSet::new(),
        }
        .normalize(props)
    }

    /// Takes `Lambda -> infinity` in the prefactor and in every exponent coefficient.
    pub fn limit_lambda(&self, props: &PropTable) -> Result<ClosedForm, EngineError> {
        let lim = self.prefactor.limit_lambda()?;
        let mut prefactor = lim.value.clone();
        if !lim.lambda_order.is_zero() {
            prefactor = prefactor.mul(&CardinalScalar::lambda_pow(lim.lambda_order.clone()));
        }
        let mut exponent = self.exponent.clone();
        for t in &mut exponent.terms {
            t.coef = LambdaRational::constant(t.coef.limit_at_infinity()?);
        }
        ClosedForm { prefactor, exponent, ..self.clone() }.normalize(props)
    }

    pub fn is_finite(&self) -> bool {
        !self.residual_tags.contains(&Tag::Lambda)
    }

    pub fn kernel_symbols(&self) -> BTreeSet<String> {
        let mut ks = BTreeSet::new();
        let mut vs = BTreeSet::new();
        for (k, _) in &self.det_factors {
            k.symbols(&mut ks);
        }
        for t in &self.exponent.terms {
            t.symbols(&mut ks, &mut vs);
        }
        ks
    }

    pub fn vector_symbols(&self) -> BTreeSet<String> {
        let mut ks = BTreeSet::new();
        let mut vs = BTreeSet::new();
        for t in &self.exponent.terms {
            t.symbols(&mut ks, &mut vs);
        }
        vs
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.prefactor.is_one() || (self.det_factors.is_empty() && self.exponent.is_zero()) {
            parts.push(self.prefactor.to_string());
        }
        for (k, e) in &self.det_factors {
            parts.push(format!("det({k})^{}", fmt_exponent(&OmegaLinear::constant(e.clone()))));
        }
        if !self.exponent.is_zero() {
            parts.push(format!("exp({})", self.exponent));
        }
        f.write_str(&parts.join(" * "))
    }
}

/// Measure normalization: `(2 pi)^(-Omega)` for `Dc`, and `(2 pi Lambda)^(Omega/2)`
/// (or its `Dc` counterpart) for every integrated variable that never occurs.
pub(crate) fn measure_prefactor(qf: &QuadraticForm) -> CardinalScalar {
    let omega = OmegaLinear::omega(int(1));
    let half_omega = OmegaLinear::omega(rat(1, 2));
    let two_pi = |e: &OmegaLinear| CardinalScalar::const_pow(&cint(2), e).mul(&CardinalScalar::pi_pow(e.clone()));
    let circle = |fl: MeasureFlavor| match fl {
        MeasureFlavor::Plain => CardinalScalar::one(),
        MeasureFlavor::Circle => two_pi(&-omega.clone()),
    };
    let mut p = circle(qf.measure);
    for (_, fl) in &qf.unused_measures {
        let m0 = CardinalScalar::power(&lambda_poly(&[0, 2]), &half_omega).mul(&CardinalScalar::pi_pow(half_omega.clone()));
        p = p.mul(&m0).mul(&circle(*fl));
    }
    p
}

fn quarter() -> LambdaRational {
    LambdaRational::constant(crat(rat(1, 4)))
}

/// Closed form of a canonical Gaussian integral.
pub fn evaluate(qf: &QuadraticForm) -> Result<ClosedForm, EngineError> {
    let props = &qf.props;
    let mut exponent = qf.constant.clone();
    let mut det_factors = Vec::new();
    let mut assumptions = Vec::new();
    let prefactor;
    match qf.flavor {
        Flavor::Real => {
            prefactor = CardinalScalar::pi_pow(OmegaLinear::omega(rat(1, 2)));
            det_factors.push((qf.k.clone(), rat(-1, 2)));
            exponent.terms.push(Bilinear::new(quarter(), qf.shift.flip_side(), qf.k.clone().inv(), qf.shift.clone()));
            assumptions.push(Assumption::Symmetric(qf.k.clone()));
            assumptions.push(Assumption::PositiveDefinite(qf.k.clone()));
        }
        Flavor::Complex if qf.l.is_zero() => {
            prefactor = CardinalScalar::pi_pow(OmegaLinear::omega(int(1)));
            det_factors.push((qf.k.clone(), int(-1)));
            let half = LambdaRational::constant(crat(rat(1, 2)));
            exponent.terms.push(Bilinear::new(half, qf.shift_left.clone(), qf.k.clone().inv(), qf.shift.clone()));
            assumptions.push(Assumption::SelfAdjoint(qf.k.clone()));
            assumptions.push(Assumption::PositiveDefinite(qf.k.clone()));
        }
        Flavor::Complex => {
            prefactor = CardinalScalar::pi_pow(OmegaLinear::omega(int(1)));
            let k = qf.k.clone();
            let l = qf.l.clone();
            let lstar = l.conj();
            let kstar_inv = k.conj().inv();
            // S = K - L . inv(K') . L'
            let schur = Kernel::Sum(vec![
                (cint(1), k.clone()),
                (cint(-1), Kernel::Product(vec![l.clone(), kstar_inv.clone(), lstar.clone()])),
            ]);
            det_factors.push((k.clone(), rat(-1, 2)));
            det_factors.push((schur.clone(), rat(-1, 2)));
            let w1 = &qf.shift_left;
            let w2 = &qf.shift;
            exponent.terms.push(Bilinear::new(quarter(), w1.clone(), k.clone().inv(), w2.clone()));
            // (w1' - w2 . inv(K') . L') . inv(S) . (w2 - L . inv(K') . w1')
            let left = w1.plus(
                &w2.flip_side().contract(&Kernel::Product(vec![kstar_inv.clone(), lstar]), Side::Left).scaled(&cint(-1)),
            );
            let right = w2.plus(
                &w1.flip_side().contract(&Kernel::Product(vec![l.clone(), kstar_inv]), Side::Right).scaled(&cint(-1)),
            );
            exponent.terms.push(Bilinear::new(quarter(), left, schur.clone().inv(), right));
            assumptions.push(Assumption::SelfAdjoint(k.clone()));
            assumptions.push(Assumption::PositiveDefinite(k));
            assumptions.push(Assumption::Symmetric(l));
            assumptions.push(Assumption::PositiveDefinite(schur));
        }
    }
    let raw = ClosedForm {
        prefactor: prefactor.mul(&measure_prefactor(qf)),
        det_factors,
        exponent,
        assumptions,
        residual_tags: BTreeSet::new(),
    };
    let cf = raw.normalize(props)?;
    if qf.unused_measures.is_empty() {
        Ok(cf)
    } else {
        cf.limit_lambda(props)
    }
}

/// An empty vector expression, for building forms by hand.
pub fn no_shift() -> VecExpr {
    VecExpr::zero()
}

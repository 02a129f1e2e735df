//! Squared-integral derivation for the anisotropic complex integral: double
//! the integral, rotate the two copies into a pair that decouples, and
//! integrate them one after the other.

use std::collections::BTreeSet;

use num_complex::Complex;

use super::canonical::{Flavor, QuadraticForm};
use super::closed::{evaluate, Assumption, ClosedForm};
use super::dsl::MeasureFlavor;
use super::ir::{Bilinear, Exponent, Kernel, PropTable, VecAtom, VecExpr};
use super::EngineError;
use crate::cardinal::{CardinalScalar, LambdaRational};
use crate::exact::{cint, crat, rat, CRational};

const ALPHA0: &str = "alpha0";
const ALPHA1: &str = "alpha1";
const ALPHA: &str = "alpha";
const BETA: &str = "beta";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareTrickTrace {
    /// Exponent of the squared integral over the two copies `alpha0`, `alpha1`.
    pub doubled: Exponent,
    /// Same exponent after `alpha0 = (alpha+beta)/sqrt2`, `alpha1 = i(beta-alpha)/sqrt2`.
    pub rotated: Exponent,
    /// `alpha` integrated with `beta` held fixed.
    pub alpha_form: QuadraticForm,
    pub alpha_step: ClosedForm,
    /// Remaining integral over `beta`.
    pub beta_form: QuadraticForm,
    pub beta_step: ClosedForm,
    /// Square of the integral.
    pub squared: ClosedForm,
    /// Principal square root of `squared`.
    pub result: ClosedForm,
    pub lines: Vec<String>,
}

fn term(c: CRational, l: (&str, bool), mid: Kernel, r: (&str, bool)) -> Bilinear {
    Bilinear::new(LambdaRational::constant(c), VecExpr::atom(l.0, l.1), mid, VecExpr::atom(r.0, r.1))
}

/// Rotation of one copy, in units of `1/sqrt2`.
fn rotate(name: &str, conj: bool) -> Vec<(CRational, &'static str, bool)> {
    let i = Complex::new(rat(0, 1), rat(1, 1));
    let one = cint(1);
    match (name, conj) {
        (ALPHA0, c) => vec![(one.clone(), ALPHA, c), (one, BETA, c)],
        (ALPHA1, false) => vec![(-i.clone(), ALPHA, false), (i, BETA, false)],
        (ALPHA1, true) => vec![(i.clone(), ALPHA, true), (-i, BETA, true)],
        _ => vec![(one, if name == ALPHA { ALPHA } else { BETA }, conj)],
    }
}

fn bare_atom(v: &VecExpr) -> Result<VecAtom, EngineError> {
    match v.terms.as_slice() {
        [t] if t.kernel.is_identity() && t.coef == cint(1) => Ok(t.atom.clone()),
        _ => Err(EngineError::Unsupported(format!("expected a bare vector, found {}", v.render(super::ir::Side::Right)))),
    }
}

fn constant_coef(b: &Bilinear) -> Result<CRational, EngineError> {
    b.coef.as_constant().ok_or_else(|| EngineError::Unsupported(format!("Lambda-dependent coefficient {}", b.coef)))
}

/// Reads `exp(exponent)` as a complex Gaussian in `var`; every other atom
/// becomes part of a shift or of the constant.
fn form_from_exponent(var: &str, exponent: &Exponent, props: &PropTable) -> Result<QuadraticForm, EngineError> {
    let half = crat(rat(1, 2));
    let mut k_terms = Vec::new();
    let mut l_terms = Vec::new();
    let mut lstar_terms = Vec::new();
    let mut shift_left = VecExpr::zero();
    let mut shift = VecExpr::zero();
    let mut constant = Exponent { constant: exponent.constant.clone(), scalars: exponent.scalars.clone(), terms: Vec::new() };
    for b in &exponent.terms {
        let (x, y) = (bare_atom(&b.left)?, bare_atom(&b.right)?);
        let c = constant_coef(b)?;
        let m = b.mid.clone();
        match (x.name == var, y.name == var) {
            (true, true) => match (x.conj, y.conj) {
                (true, false) => k_terms.push((-c * &half, m)),
                (false, true) => k_terms.push((-c * &half, m.transpose())),
                (true, true) => l_terms.push((-c, m)),
                (false, false) => lstar_terms.push((-c, m)),
            },
            // v' . M . u  ->  w2 = -c M.u
            (true, false) if x.conj => shift.push(-c, y, m),
            // v . M . u  ->  w1' = -c u.M^T
            (true, false) => shift_left.push(-c, y, m.transpose()),
            // u . M . v'  ->  w2 = -c M^T.u
            (false, true) if y.conj => shift.push(-c, x, m.transpose()),
            // u . M . v  ->  w1' = -c u.M
            (false, true) => shift_left.push(-c, x, m),
            (false, false) => constant.terms.push(b.clone()),
        }
    }
    let symmetrize = |terms: Vec<(CRational, Kernel)>| {
        let raw = Kernel::Sum(terms);
        Kernel::Sum(vec![(half.clone(), raw.clone()), (half.clone(), raw.transpose())]).normalize(props)
    };
    let l = symmetrize(l_terms);
    if symmetrize(lstar_terms) != l.conj().normalize(props) {
        return Err(EngineError::MixedFlavor(format!("{var}.X.{var} is not the conjugate of {var}'.L.{var}'")));
    }
    Ok(QuadraticForm {
        flavor: Flavor::Complex,
        variable: var.to_string(),
        measure: MeasureFlavor::Plain,
        unused_measures: Vec::new(),
        k: Kernel::Sum(k_terms).normalize(props),
        l,
        shift_left: shift_left.normalize(props),
        shift: shift.normalize(props),
        constant: constant.normalize(props),
        props: props.clone(),
    })
}

/// Derives the unshifted anisotropic complex integral through its square.
pub fn square_trick_expand(qf: &QuadraticForm) -> Result<SquareTrickTrace, EngineError> {
    if qf.flavor != Flavor::Complex {
        return Err(EngineError::Unsupported("the squaring derivation needs a complex integration field".into()));
    }
    if !qf.shift.is_zero() || !qf.shift_left.is_zero() {
        return Err(EngineError::Unsupported("the squaring derivation needs vanishing shifts".into()));
    }
    if qf.measure != MeasureFlavor::Plain || !qf.unused_measures.is_empty() {
        return Err(EngineError::Unsupported("the squaring derivation needs a single plain measure".into()));
    }
    let mut used = qf.kernel_symbols();
    used.extend(qf.vector_symbols());
    used.extend(qf.scalar_symbols());
    if let Some(clash) = [ALPHA0, ALPHA1, ALPHA, BETA].iter().find(|n| used.contains(**n)) {
        return Err(EngineError::Unsupported(format!("symbol '{clash}' is reserved by the squaring derivation")));
    }
    let props = &qf.props;
    let mut lines = Vec::new();

    let lstar = qf.l.conj();
    let mut doubled = qf.constant.scale(&cint(2));
    for v in [ALPHA0, ALPHA1] {
        doubled.terms.push(term(cint(-2), (v, true), qf.k.clone(), (v, false)));
        doubled.terms.push(term(cint(-1), (v, true), qf.l.clone(), (v, true)));
        doubled.terms.push(term(cint(-1), (v, false), lstar.clone(), (v, false)));
    }
    let doubled = doubled.normalize(props);
    lines.push(format!("squared integrand: exp({doubled})"));

    let mut rotated = Exponent { constant: doubled.constant.clone(), scalars: doubled.scalars.clone(), terms: Vec::new() };
    for b in &doubled.terms {
        let (x, y) = (bare_atom(&b.left)?, bare_atom(&b.right)?);
        let c = constant_coef(b)?;
        for (cx, nx, jx) in rotate(&x.name, x.conj) {
            for (cy, ny, jy) in rotate(&y.name, y.conj) {
                let coef = &c * &cx * &cy * crat(rat(1, 2));
                rotated.terms.push(term(coef, (nx, jx), b.mid.clone(), (ny, jy)));
            }
        }
    }
    let rotated = rotated.normalize(props);
    lines.push(format!("rotated (unit Jacobian): exp({rotated})"));

    let alpha_form = form_from_exponent(ALPHA, &rotated, props)?;
    let alpha_step = evaluate(&alpha_form)?;
    lines.push(format!("integrate {ALPHA}: {alpha_step}"));

    let beta_form = form_from_exponent(BETA, &alpha_step.exponent, props)?;
    let beta_step = evaluate(&beta_form)?;
    lines.push(format!("integrate {BETA}: {beta_step}"));

    let squared = ClosedForm {
        prefactor: alpha_step.prefactor.mul(&beta_step.prefactor),
        det_factors: alpha_step.det_factors.iter().chain(&beta_step.det_factors).cloned().collect(),
        exponent: beta_step.exponent.clone(),
        assumptions: alpha_step.assumptions.iter().chain(&beta_step.assumptions).cloned().collect(),
        residual_tags: BTreeSet::new(),
    }
    .normalize(props)?;
    lines.push(format!("square: {squared}"));

    let mut result = squared.pow(&rat(1, 2), props)?;
    // The rotation relies on L being symmetric.
    result.assumptions.push(Assumption::Symmetric(qf.l.clone()));
    result.assumptions.retain(|a| !matches!(a, Assumption::SelfAdjoint(k) if *k == beta_form.k));
    let result = result.normalize(props)?;
    lines.push(format!("square root: {result}"));
    debug_assert!(result.prefactor != CardinalScalar::zero());
    Ok(SquareTrickTrace { doubled, rotated, alpha_form, alpha_step, beta_form, beta_step, squared, result, lines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::canonical::canonicalize;
    use crate::engine::dsl::parse;

    fn qf(text: &str) -> QuadraticForm {
        canonicalize(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn rotation_decouples() {
        let t = square_trick_expand(&qf("int exp(-2*a'.K.a - a'.L.a' - a.L'.a) D[a]")).unwrap();
        let expect = "-2 * alpha . K' . alpha' - 2 * alpha . L' . beta - 2 * alpha' . L . beta' - 2 * beta . K' . beta'";
        assert_eq!(t.rotated.to_string(), expect);
        assert_eq!(t.beta_form.k, Kernel::Sum(vec![(cint(1), Kernel::symbol("K")), (cint(-1), Kernel::Product(vec![Kernel::symbol("L"), Kernel::symbol("K").conj().inv(), Kernel::symbol("L").conj()]))]).normalize(&t.beta_form.props));
        assert_eq!(t.squared.to_string(), "pi^(2*Omega) * det(K)^(-1) * det(K - L . inv(K') . L')^(-1)");
    }

    #[test]
    fn square_root_matches_direct_evaluation() {
        let q = qf("int exp(-2*a'.K.a - a'.L.a' - a.L'.a) D[a]");
        let t = square_trick_expand(&q).unwrap();
        assert_eq!(t.result, evaluate(&q).unwrap());
    }

    #[test]
    fn isotropic_degenerate_case() {
        let t = square_trick_expand(&qf("int exp(-2*a'.a) D[a]")).unwrap();
        assert_eq!(t.squared.to_string(), "pi^(2*Omega)");
        assert_eq!(t.result.to_string(), "pi^(Omega)");
    }

    #[test]
    fn rejects_shifts_and_real_forms() {
        assert!(square_trick_expand(&qf("int exp(-2*a'.a - a'.w) D[a]")).is_err());
        assert!(square_trick_expand(&qf("int exp(-q.q) D[q]")).is_err());
    }
}

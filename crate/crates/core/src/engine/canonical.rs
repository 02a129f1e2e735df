use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::dsl::{Atom, IntegrandAst, MeasureFlavor, Term};
use super::ir::{Bilinear, Exponent, Kernel, KernelProps, PropTable, VecAtom, VecExpr};
use super::EngineError;
use crate::cardinal::LambdaRational;
use crate::exact::{crat, rat, CRational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Flavor {
    Real,
    Complex,
}

/// Gaussian integrand in canonical shape.
///
/// Real: `exp(-q.K.q + q.f + c)`.
/// Complex: `exp(-2 a'.K.a - a'.L.a' - a.L'.a - w1'.a - a'.w2 + c)`, where the
/// row vector `w1'` is held in `shift_left` and the column `w2` in `shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    pub flavor: Flavor,
    pub variable: String,
    pub measure: MeasureFlavor,
    pub unused_measures: Vec<(String, MeasureFlavor)>,
    pub k: Kernel,
    /// `Zero` for the real flavor and for isotropic complex forms.
    pub l: Kernel,
    pub shift_left: VecExpr,
    pub shift: VecExpr,
    /// Terms free of the integration variable.
    pub constant: Exponent,
    pub props: PropTable,
}

impl QuadraticForm {
    pub fn kernel_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.k.symbols(&mut out);
        self.l.symbols(&mut out);
        let mut vecs = BTreeSet::new();
        for v in [&self.shift_left, &self.shift] {
            for t in &v.terms {
                t.kernel.symbols(&mut out);
                vecs.insert(t.atom.name.clone());
            }
        }
        for b in &self.constant.terms {
            b.symbols(&mut out, &mut vecs);
        }
        out
    }

    pub fn vector_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut ks = BTreeSet::new();
        for v in [&self.shift_left, &self.shift] {
            out.extend(v.terms.iter().map(|t| t.atom.name.clone()));
        }
        for b in &self.constant.terms {
            b.symbols(&mut ks, &mut out);
        }
        out
    }

    pub fn scalar_symbols(&self) -> BTreeSet<String> {
        self.constant.scalars.iter().map(|(_, s)| s.clone()).collect()
    }
}

/// Canonical form plus the antisymmetric part of a real quadratic kernel,
/// which integrates to zero and is dropped from the form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonicalized {
    pub form: QuadraticForm,
    pub antisymmetric_residue: Kernel,
}

pub fn canonicalize(ast: &IntegrandAst) -> Result<QuadraticForm, EngineError> {
    Ok(canonicalize_with(ast, &PropTable::new())?.form)
}

enum Role {
    Kernel,
    Vector,
    Scalar,
}

fn kernel_of(atoms: &[Atom]) -> Kernel {
    match atoms.len() {
        0 => Kernel::Identity,
        _ => Kernel::Product(
            atoms
                .iter()
                .map(|a| Kernel::Symbol { name: a.name.clone(), conj: a.conj, transpose: false })
                .collect(),
        ),
    }
}

fn render_term(t: &Term) -> String {
    t.chain.iter().map(Atom::to_string).collect::<Vec<_>>().join(".")
}

/// Canonicalizes with declared kernel properties. Kernel symbols without a
/// declaration get the property their position implies: symmetric in a real
/// quadratic or in `a'.L.a'`, self-adjoint in `a'.K.a`.
pub fn canonicalize_with(ast: &IntegrandAst, declared: &PropTable) -> Result<Canonicalized, EngineError> {
    let mut seen = BTreeSet::new();
    for m in &ast.measures {
        if !seen.insert(m.variable.clone()) {
            return Err(EngineError::Unsupported(format!("variable '{}' is integrated twice", m.variable)));
        }
    }
    let used: Vec<_> = ast.measures.iter().filter(|m| m.used).collect();
    if used.len() > 1 {
        return Err(EngineError::Unsupported(format!(
            "{} integration variables are used together; only one is supported",
            used.len()
        )));
    }
    let main = used.first().copied().unwrap_or(&ast.measures[0]);
    let var = main.variable.clone();
    let unused_measures = ast
        .measures
        .iter()
        .filter(|m| m.variable != var)
        .map(|m| (m.variable.clone(), m.flavor))
        .collect();
    let measure_vars: BTreeSet<&str> = ast.measures.iter().map(|m| m.variable.as_str()).collect();

    // Roles of the other symbols.
    let mut roles: BTreeMap<String, Role> = BTreeMap::new();
    let mut assign = |name: &str, role: Role| -> Result<(), EngineError> {
        match (roles.get(name), &role) {
            (None, _) => {
                roles.insert(name.to_string(), role);
                Ok(())
            }
            (Some(Role::Kernel), Role::Kernel) | (Some(Role::Vector), Role::Vector) | (Some(Role::Scalar), Role::Scalar) => Ok(()),
            _ => Err(EngineError::SymbolRole(name.to_string())),
        }
    };

    let complex = ast.terms.iter().any(|t| t.chain.iter().any(|a| a.name == var && a.conj));
    let flavor = if complex { Flavor::Complex } else { Flavor::Real };

    let mut props = declared.clone();
    let assume = |name: &str, p: KernelProps, props: &mut PropTable| {
        if !declared.contains_key(name) {
            let e = props.entry(name.to_string()).or_default();
            *e = e.union(p);
        }
    };

    let mut k_terms: Vec<(CRational, Kernel)> = Vec::new();
    let mut l_terms: Vec<(CRational, Kernel)> = Vec::new();
    let mut lstar_terms: Vec<(CRational, Kernel)> = Vec::new();
    let mut shift_left = VecExpr::zero();
    let mut shift = VecExpr::zero();
    let mut constant = Exponent::new();

    for term in &ast.terms {
        let c = term.coefficient.clone();
        let chain = &term.chain;
        let positions: Vec<usize> = chain.iter().enumerate().filter(|(_, a)| a.name == var).map(|(i, _)| i).collect();
        if let Some(stray) = chain.iter().find(|a| a.name != var && measure_vars.contains(a.name.as_str())) {
            return Err(EngineError::Unsupported(format!("'{}' is integrated but appears next to '{var}'", stray.name)));
        }
        let degree = positions.len();
        if degree > 2 {
            return Err(EngineError::NotGaussian { degree, term: render_term(term) });
        }
        if positions.iter().any(|&p| p != 0 && p != chain.len() - 1) || (degree == 1 && chain.len() == 1) {
            return Err(EngineError::NotGaussian { degree, term: render_term(term) });
        }
        match degree {
            0 => match chain.len() {
                0 => constant.constant += c,
                1 => {
                    assign(&chain[0].name, Role::Scalar)?;
                    if chain[0].conj {
                        return Err(EngineError::Unsupported(format!("conjugated scalar '{}'", chain[0])));
                    }
                    constant.scalars.push((c, chain[0].name.clone()));
                }
                n => {
                    assign(&chain[0].name, Role::Vector)?;
                    assign(&chain[n - 1].name, Role::Vector)?;
                    for a in &chain[1..n - 1] {
                        assign(&a.name, Role::Kernel)?;
                    }
                    constant.terms.push(Bilinear::new(
                        LambdaRational::constant(c),
                        VecExpr::atom(&chain[0].name, chain[0].conj),
                        kernel_of(&chain[1..n - 1]),
                        VecExpr::atom(&chain[n - 1].name, chain[n - 1].conj),
                    ));
                }
            },
            2 => {
                let (lhs, rhs) = (&chain[0], &chain[chain.len() - 1]);
                let middle = &chain[1..chain.len() - 1];
                for a in middle {
                    assign(&a.name, Role::Kernel)?;
                }
                let x = kernel_of(middle);
                let half = crat(rat(1, 2));
                match (flavor, lhs.conj, rhs.conj) {
                    (Flavor::Real, _, _) => {
                        for a in middle {
                            assume(&a.name, KernelProps::symmetric(), &mut props);
                        }
                        k_terms.push((-c, x));
                    }
                    (Flavor::Complex, true, false) => {
                        for a in middle {
                            assume(&a.name, KernelProps::self_adjoint(), &mut props);
                        }
                        k_terms.push((-c * &half, x));
                    }
                    (Flavor::Complex, false, true) => {
                        for a in middle {
                            assume(&a.name, KernelProps::self_adjoint(), &mut props);
                        }
                        k_terms.push((-c * &half, x.transpose()));
                    }
                    (Flavor::Complex, true, true) => {
                        for a in middle {
                            assume(&a.name, KernelProps::symmetric(), &mut props);
                        }
                        l_terms.push((-c, x));
                    }
                    (Flavor::Complex, false, false) => {
                        for a in middle {
                            assume(&a.name, KernelProps::symmetric(), &mut props);
                        }
                        lstar_terms.push((-c, x));
                    }
                }
            }
            _ => {
                let var_first = positions[0] == 0;
                let (v_atom, other) = if var_first { (&chain[0], &chain[chain.len() - 1]) } else { (&chain[chain.len() - 1], &chain[0]) };
                assign(&other.name, Role::Vector)?;
                let middle = &chain[1..chain.len() - 1];
                for a in middle {
                    assign(&a.name, Role::Kernel)?;
                }
                let x = kernel_of(middle);
                let atom = VecAtom::new(&other.name, other.conj);
                match (flavor, var_first, v_atom.conj) {
                    // q . X . v  ->  f += c X.v
                    (Flavor::Real, true, _) => shift.push(c, atom, x),
                    // v . X . q  ->  f += c X^T.v
                    (Flavor::Real, false, _) => shift.push(c, atom, x.transpose()),
                    // a' . X . v  ->  w2 = -c X.v
                    (Flavor::Complex, true, true) => shift.push(-c, atom, x),
                    // v . X . a'  ->  w2 = -c X^T.v
                    (Flavor::Complex, false, true) => shift.push(-c, atom, x.transpose()),
                    // v . X . a  ->  w1' = -c v.X
                    (Flavor::Complex, false, false) => shift_left.push(-c, atom, x),
                    // a . X . v  ->  w1' = -c v.X^T
                    (Flavor::Complex, true, false) => shift_left.push(-c, atom, x.transpose()),
                }
            }
        }
    }

    let half = crat(rat(1, 2));
    let raw_k = Kernel::Sum(k_terms);
    let (k, residue) = match flavor {
        Flavor::Real => {
            let sym = Kernel::Sum(vec![(half.clone(), raw_k.clone()), (half.clone(), raw_k.transpose())]);
            let anti = Kernel::Sum(vec![(half.clone(), raw_k.clone()), (-half.clone(), raw_k.transpose())]);
            (sym.normalize(&props), anti.normalize(&props))
        }
        Flavor::Complex => (raw_k.normalize(&props), Kernel::Zero),
    };
    let symmetrize = |terms: Vec<(CRational, Kernel)>, props: &PropTable| {
        let raw = Kernel::Sum(terms);
        Kernel::Sum(vec![(half.clone(), raw.clone()), (half.clone(), raw.transpose())]).normalize(props)
    };
    let l = symmetrize(l_terms, &props);
    let lstar = symmetrize(lstar_terms, &props);
    if lstar != l.conj().normalize(&props) {
        return Err(EngineError::MixedFlavor(format!(
            "the a.X.a coefficient '{lstar}' is not the conjugate of the a'.X.a' coefficient '{l}'"
        )));
    }

    let form = QuadraticForm {
        flavor,
        variable: var,
        measure: main.flavor,
        unused_measures,
        k,
        l,
        shift_left: shift_left.normalize(&props),
        shift: shift.normalize(&props),
        constant: constant.normalize(&props),
        props,
    };
    Ok(Canonicalized { form, antisymmetric_residue: residue })
}

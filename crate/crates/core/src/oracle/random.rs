use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::analytic::assemble;
use super::OracleError;
use crate::engine::{kernel_value, Bindings, Flavor, QuadraticForm};
use crate::kernelalg::{DiscreteKernel, FieldVector, QuadratureGrid};

/// Diagonal shift keeping generated kernels positive definite.
const DELTA: f64 = 0.1;
/// Spectral norm of `L` relative to the smallest eigenvalue of `K`.
const L_SCALE: f64 = 0.3;
/// Bound on `b^T (Re A)^-1 b` for the generated shifts, which caps the
/// importance-sampling variance.
const SHIFT_BUDGET: f64 = 0.5;

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    rng.random_range(-1.0..1.0)
}

fn cuniform(rng: &mut ChaCha20Rng) -> Complex64 {
    Complex64::new(uniform(rng), uniform(rng))
}

fn spd(rng: &mut ChaCha20Rng, d: usize, complex: bool) -> DMatrix<Complex64> {
    let b = DMatrix::from_fn(d, d, |_, _| if complex { cuniform(rng) } else { Complex64::new(uniform(rng), 0.0) });
    let m = &b * b.adjoint() + DMatrix::identity(d, d) * Complex64::new(DELTA, 0.0);
    (&m + m.adjoint()).map(|z| z * 0.5)
}

fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()).map(|z| z * 0.5);
    h.symmetric_eigenvalues().min()
}

/// Random bindings satisfying the assumptions of `qf` at dimension `dim`.
///
/// Kernels in the quadratic part are positive definite (`A A^T + 0.1` real,
/// `B B^H + 0.1` complex); `L` is complex symmetric with spectral norm
/// `0.3 * lambda_min(K)`, which keeps `K - L inv(K') L'` positive definite.
/// Shifts are scaled so `b^T (Re A)^-1 b <= 0.5`.
pub fn random_bindings(qf: &QuadraticForm, dim: usize, seed: u64) -> Result<Bindings, OracleError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let grid = Arc::new(QuadratureGrid::new((0..dim).map(|_| rng.random_range(0.5..1.5)).collect())?);
    let complex = qf.flavor == Flavor::Complex;

    let mut k_syms = BTreeSet::new();
    qf.k.symbols(&mut k_syms);
    let mut l_syms = BTreeSet::new();
    qf.l.symbols(&mut l_syms);
    let mut bindings = Bindings::new();
    for name in qf.kernel_symbols() {
        if l_syms.contains(&name) && !k_syms.contains(&name) {
            continue;
        }
        let m = spd(&mut rng, dim, complex);
        bindings.kernels.insert(name, DiscreteKernel::from_weighted(grid.clone(), &m));
    }
    if !l_syms.is_empty() {
        let kmin = min_eigenvalue(&kernel_value(&qf.k, &bindings, &grid)?.weighted());
        for name in l_syms.iter().filter(|n| !k_syms.contains(*n)) {
            let c = DMatrix::from_fn(dim, dim, |_, _| cuniform(&mut rng));
            let sym = (&c + c.transpose()).map(|z| z * 0.5);
            let norm = spectral_norm(&sym);
            let scaled = sym.map(|z| z * (L_SCALE * kmin / (norm * l_syms.len() as f64)));
            bindings.kernels.insert(name.clone(), DiscreteKernel::from_weighted(grid.clone(), &scaled));
        }
    }
    for name in qf.vector_symbols() {
        let values: Vec<Complex64> = (0..dim).map(|_| if complex { cuniform(&mut rng) } else { Complex64::new(uniform(&mut rng), 0.0) }).collect();
        bindings.vectors.insert(name, FieldVector::new(grid.clone(), values)?);
    }
    for name in qf.scalar_symbols() {
        bindings.scalars.insert(name, Complex64::new(0.5 * uniform(&mut rng), 0.0));
    }

    if !bindings.vectors.is_empty() {
        let p = assemble(qf, &bindings, dim)?;
        let chol = p.envelope().ok_or(OracleError::NotPositiveDefinite)?;
        let budget = [p.b.map(|z| z.re), p.b.map(|z| z.im)].iter().map(|v| v.dot(&chol.solve(v))).sum::<f64>();
        if budget > SHIFT_BUDGET {
            let s = Complex64::new((SHIFT_BUDGET / budget).sqrt(), 0.0);
            for v in bindings.vectors.values_mut() {
                *v = v.scale(s);
            }
        }
    }
    Ok(bindings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{canonicalize, catalog, evaluate, instantiate_closed_form, parse};

    #[test]
    fn catalog_assumptions_hold_for_generated_bindings() {
        for case in catalog() {
            let qf = canonicalize(&parse(case.dsl).unwrap()).unwrap();
            let cf = evaluate(&qf).unwrap();
            for dim in [1, 2, 4, 8] {
                for seed in 0..5 {
                    let b = random_bindings(&qf, dim, seed).unwrap();
                    instantiate_closed_form(&cf, &b, dim).unwrap_or_else(|e| panic!("{} D={dim} seed={seed}: {e}", case.id));
                }
            }
        }
    }

    #[test]
    fn deterministic_and_budgeted() {
        let qf = canonicalize(&parse("int exp(-2*a'.K.a - a'.L.a' - a.L'.a - w1'.a - a'.w2) D[a]").unwrap()).unwrap();
        let a = random_bindings(&qf, 4, 3).unwrap();
        let b = random_bindings(&qf, 4, 3).unwrap();
        assert_eq!(a.kernels["L"].entries(), b.kernels["L"].entries());
        assert_eq!(a.vectors["w1"].values(), b.vectors["w1"].values());
        let p = assemble(&qf, &a, 4).unwrap();
        let chol = p.envelope().unwrap();
        let re = p.b.map(|z| z.re);
        assert!(re.dot(&chol.solve(&re)) <= SHIFT_BUDGET + 1e-12);
        let l = a.kernels["L"].weighted();
        assert!((&l - l.transpose()).norm() < 1e-14);
    }
}

//! Numeric instantiation of closed forms on discretized kernels and vectors.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::closed::{Assumption, ClosedForm};
use super::ir::{Bilinear, Exponent, Kernel, Side, VecExpr};
use super::EngineError;
use crate::cardinal::CardinalError;
use crate::exact::{to_c64, to_f64};
use crate::kernelalg::{diamond, spectral_apply, DiscreteKernel, FieldVector, QuadratureGrid, SpectralFn, SpectralResult, SYMMETRY_TOL};

/// Symmetry tolerance for kernels assembled from several bound factors.
pub const COMPOUND_SYMMETRY_TOL: f64 = 1e-9;

/// Numeric values for the symbols of a closed form.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    pub kernels: BTreeMap<String, DiscreteKernel>,
    pub vectors: BTreeMap<String, FieldVector>,
    pub scalars: BTreeMap<String, Complex64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kernel(mut self, name: &str, k: DiscreteKernel) -> Self {
        self.kernels.insert(name.to_string(), k);
        self
    }

    pub fn vector(mut self, name: &str, v: FieldVector) -> Self {
        self.vectors.insert(name.to_string(), v);
        self
    }

    pub fn scalar(mut self, name: &str, z: Complex64) -> Self {
        self.scalars.insert(name.to_string(), z);
        self
    }

    /// Grid shared by the bindings; uniform of size `dim` when nothing is bound.
    pub fn grid(&self, dim: usize) -> Result<Arc<QuadratureGrid>, EngineError> {
        let grid = self
            .kernels
            .values()
            .map(|k| k.grid().clone())
            .chain(self.vectors.values().map(|v| v.grid().clone()))
            .next()
            .unwrap_or_else(|| Arc::new(QuadratureGrid::uniform(dim)));
        if grid.dim() != dim {
            return Err(EngineError::DimensionMismatch { expected: dim, found: grid.dim() });
        }
        Ok(grid)
    }
}

struct Evaluator<'a> {
    bindings: &'a Bindings,
    grid: Arc<QuadratureGrid>,
}

impl Evaluator<'_> {
    fn kernel(&self, k: &Kernel) -> Result<DiscreteKernel, EngineError> {
        Ok(match k {
            Kernel::Zero => DiscreteKernel::zeros(self.grid.clone()),
            Kernel::Identity => DiscreteKernel::identity(self.grid.clone()),
            Kernel::Symbol { name, conj, transpose } => {
                let mut m = self.bindings.kernels.get(name).ok_or_else(|| EngineError::MissingBinding(name.clone()))?.clone();
                if *conj {
                    m = m.conj();
                }
                if *transpose {
                    m = m.transpose();
                }
                m
            }
            Kernel::Inverse(inner) => self.kernel(inner)?.inverse()?,
            Kernel::Sqrt(inner) => match spectral_apply(&self.kernel(inner)?, SpectralFn::Sqrt)? {
                SpectralResult::Kernel(m) => m,
                SpectralResult::Scalar(_) => unreachable!("sqrt yields a kernel"),
            },
            Kernel::Product(fs) => {
                let mut acc = DiscreteKernel::identity(self.grid.clone());
                for f in fs {
                    acc = acc.compose(&self.kernel(f)?)?;
                }
                acc
            }
            Kernel::Sum(ts) => {
                let mut acc = DiscreteKernel::zeros(self.grid.clone());
                for (c, t) in ts {
                    acc = acc.add(&self.kernel(t)?.scale(to_c64(c)))?;
                }
                acc
            }
        })
    }

    fn vector(&self, v: &VecExpr, side: Side) -> Result<FieldVector, EngineError> {
        let mut acc = FieldVector::zeros(self.grid.clone());
        for t in &v.terms {
            let name = &t.atom.name;
            let mut x = self.bindings.vectors.get(name).ok_or_else(|| EngineError::MissingBinding(name.clone()))?.clone();
            if t.atom.conj {
                x = x.conj();
            }
            let k = match side {
                Side::Right => t.kernel.clone(),
                Side::Left => t.kernel.transpose(),
            };
            let kx = if k.is_identity() { x } else { self.kernel(&k)?.apply(&x)? };
            acc = acc.add(&kx.scale(to_c64(&t.coef)))?;
        }
        Ok(acc)
    }

    fn bilinear(&self, b: &Bilinear) -> Result<Complex64, EngineError> {
        let coef = b.coef.as_constant().ok_or(EngineError::Cardinal(CardinalError::ResidualLambda))?;
        let left = self.vector(&b.left, Side::Left)?;
        let right = self.vector(&b.right, Side::Right)?;
        let mr = if b.mid.is_identity() { right } else { self.kernel(&b.mid)?.apply(&right)? };
        Ok(to_c64(&coef) * diamond(&left, &mr)?)
    }

    fn check(&self, a: &Assumption) -> Result<(), EngineError> {
        let k = self.kernel(a.kernel())?;
        let tol = if matches!(a.kernel(), Kernel::Symbol { .. }) { SYMMETRY_TOL } else { COMPOUND_SYMMETRY_TOL };
        let defect = |other: DMatrix<Complex64>| {
            let m = k.weighted();
            let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let o = DiscreteKernel::new(self.grid.clone(), other).map(|o| o.weighted());
            match (scale, o) {
                (0.0, _) => 0.0,
                (s, Ok(o)) => (&m - &o).iter().map(|z| z.norm()).fold(0.0, f64::max) / s,
                (_, Err(_)) => f64::INFINITY,
            }
        };
        let ok = match a {
            Assumption::Symmetric(_) => defect(k.entries().transpose()) <= tol,
            Assumption::SelfAdjoint(_) => defect(k.entries().adjoint()) <= tol,
            Assumption::PositiveDefinite(_) => {
                defect(k.entries().adjoint()) <= tol && {
                    let herm = (k.entries() + k.entries().adjoint()).map(|z| z * 0.5);
                    DiscreteKernel::new(self.grid.clone(), herm)?.is_positive_definite()
                }
            }
        };
        if ok {
            Ok(())
        } else {
            Err(EngineError::AssumptionUnsatisfied(a.to_string()))
        }
    }
}

/// Numeric value of a kernel expression on `grid`.
pub fn kernel_value(k: &Kernel, bindings: &Bindings, grid: &Arc<QuadratureGrid>) -> Result<DiscreteKernel, EngineError> {
    Evaluator { bindings, grid: grid.clone() }.kernel(k)
}

/// Numeric value of a vector expression read from `side`.
pub fn vector_value(v: &VecExpr, side: Side, bindings: &Bindings, grid: &Arc<QuadratureGrid>) -> Result<FieldVector, EngineError> {
    Evaluator { bindings, grid: grid.clone() }.vector(v, side)
}

/// Numeric value of an exponent (the argument of `exp`).
pub fn exponent_value(ex: &Exponent, bindings: &Bindings, grid: &Arc<QuadratureGrid>) -> Result<Complex64, EngineError> {
    let ev = Evaluator { bindings, grid: grid.clone() };
    let mut arg = to_c64(&ex.constant);
    for (c, s) in &ex.scalars {
        arg += to_c64(c) * *bindings.scalars.get(s).ok_or_else(|| EngineError::MissingBinding(s.clone()))?;
    }
    for b in &ex.terms {
        arg += ev.bilinear(b)?;
    }
    Ok(arg)
}

/// Numeric value of `cf` with `Omega := dim`, after checking every assumption
/// on the bound kernels. The grid of the bindings must have `dim` points.
pub fn instantiate_closed_form(cf: &ClosedForm, bindings: &Bindings, dim: usize) -> Result<Complex64, EngineError> {
    let grid = bindings.grid(dim)?;
    for v in bindings.vectors.values() {
        if v.grid().dim() != dim {
            return Err(EngineError::DimensionMismatch { expected: dim, found: v.grid().dim() });
        }
    }
    for k in bindings.kernels.values() {
        if k.dim() != dim {
            return Err(EngineError::DimensionMismatch { expected: dim, found: k.dim() });
        }
    }
    let ev = Evaluator { bindings, grid };
    for a in &cf.assumptions {
        ev.check(a)?;
    }
    let omega = u32::try_from(dim).map_err(|_| EngineError::DimensionMismatch { expected: u32::MAX as usize, found: dim })?;
    let mut value = cf.prefactor.instantiate(omega)?;
    for (k, e) in &cf.det_factors {
        value *= ev.kernel(k)?.det().powf(to_f64(e));
    }
    Ok(value * exponent_value(&cf.exponent, bindings, &ev.grid)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::canonical::canonicalize;
    use crate::engine::closed::evaluate;
    use crate::engine::dsl::parse;
    use crate::engine::square::square_trick_expand;
    use std::f64::consts::PI;

    fn eval(text: &str) -> ClosedForm {
        evaluate(&canonicalize(&parse(text).unwrap()).unwrap()).unwrap()
    }

    fn unit(d: usize) -> Arc<QuadratureGrid> {
        Arc::new(QuadratureGrid::uniform(d))
    }

    fn real_kernel(d: usize, v: &[f64]) -> DiscreteKernel {
        DiscreteKernel::from_real(unit(d), &DMatrix::from_row_slice(d, d, v)).unwrap()
    }

    #[test]
    fn one_dimensional_values() {
        let c = eval("int exp(-q.K.q) D[q]");
        let v = instantiate_closed_form(&c, &Bindings::new().kernel("K", real_kernel(1, &[2.0])), 1).unwrap();
        assert!((v.re - (PI / 2.0).sqrt()).abs() < 1e-12 && v.im.abs() < 1e-15);
        let e = eval("int exp(-2*a'.a) D[a]");
        let v = instantiate_closed_form(&e, &Bindings::new(), 1).unwrap();
        assert!((v.re - PI).abs() < 1e-12);
    }

    #[test]
    fn shifted_isotropic_value() {
        let b = eval("int exp(-q.q + q.f) D[q]");
        let f = FieldVector::from_real(unit(2), &[2.0, 0.0]).unwrap();
        let v = instantiate_closed_form(&b, &Bindings::new().vector("f", f), 2).unwrap();
        assert!((v.re - PI * 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let c = eval("int exp(-q.K.q) D[q]");
        assert!(matches!(instantiate_closed_form(&c, &Bindings::new(), 1), Err(EngineError::MissingBinding(_))));
        let bad = Bindings::new().kernel("K", real_kernel(2, &[1.0, 0.0, 0.0, -1.0]));
        assert!(matches!(instantiate_closed_form(&c, &bad, 2), Err(EngineError::AssumptionUnsatisfied(_))));
        let asym = Bindings::new().kernel("K", real_kernel(2, &[1.0, 0.5, 0.0, 1.0]));
        assert!(matches!(instantiate_closed_form(&c, &asym, 2), Err(EngineError::AssumptionUnsatisfied(_))));
        let ok = Bindings::new().kernel("K", real_kernel(2, &[1.0, 0.0, 0.0, 1.0]));
        assert!(matches!(instantiate_closed_form(&c, &ok, 3), Err(EngineError::DimensionMismatch { .. })));
    }

    #[test]
    fn square_trick_numeric_agreement() {
        let text = "int exp(-2*a'.K.a - a'.L.a' - a.L'.a) D[a]";
        let qf = canonicalize(&parse(text).unwrap()).unwrap();
        let grid = unit(2);
        let k = DiscreteKernel::new(
            grid.clone(),
            DMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 0.0), Complex64::new(0.3, 0.4), Complex64::new(0.3, -0.4), Complex64::new(1.5, 0.0)]),
        )
        .unwrap();
        let l = DiscreteKernel::new(
            grid,
            DMatrix::from_row_slice(2, 2, &[Complex64::new(0.4, 0.1), Complex64::new(0.2, -0.3), Complex64::new(0.2, -0.3), Complex64::new(0.3, 0.2)]),
        )
        .unwrap();
        let b = Bindings::new().kernel("K", k).kernel("L", l);
        let direct = instantiate_closed_form(&evaluate(&qf).unwrap(), &b, 2).unwrap();
        let via_square = instantiate_closed_form(&square_trick_expand(&qf).unwrap().result, &b, 2).unwrap();
        assert!((direct - via_square).norm() <= 1e-10 * direct.norm());
    }
}

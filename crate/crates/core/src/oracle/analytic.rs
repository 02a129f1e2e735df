use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::OracleError;
use crate::engine::{exponent_value, kernel_value, vector_value, Bindings, Flavor, MeasureFlavor, QuadraticForm, Side};

/// `scale * int dx exp(-x^T A x + b^T x)` over real `x`, with `A` complex symmetric.
#[derive(Debug, Clone)]
pub struct GaussianProblem {
    pub a: DMatrix<Complex64>,
    pub b: DVector<Complex64>,
    pub scale: Complex64,
}

impl GaussianProblem {
    pub fn real_part(&self) -> DMatrix<f64> {
        self.a.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.a.map(|z| z.im)
    }

    /// Cholesky factor of `Re A`, the sampling envelope.
    pub fn envelope(&self) -> Option<Cholesky<f64, nalgebra::Dyn>> {
        Cholesky::new(self.real_part())
    }
}

fn symmetrize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    (&m + m.transpose()).map(|z| z * 0.5)
}

/// Rewrites the integral of `qf` at dimension `dim` in real weighted
/// coordinates. A complex field `a` becomes `(u + i v)/sqrt2` in `2 dim` reals.
pub fn assemble(qf: &QuadraticForm, bindings: &Bindings, dim: usize) -> Result<GaussianProblem, OracleError> {
    if let Some((v, _)) = qf.unused_measures.first() {
        return Err(OracleError::UnsupportedForm(format!("'{v}' is integrated but never used")));
    }
    let grid = bindings.grid(dim)?;
    let k = kernel_value(&qf.k, bindings, &grid)?.weighted();
    let constant = exponent_value(&qf.constant, bindings, &grid)?;
    let mut scale = constant.exp();
    if qf.measure == MeasureFlavor::Circle {
        scale /= (2.0 * PI).powi(dim as i32);
    }
    let (a, b) = match qf.flavor {
        Flavor::Real => (symmetrize(k), vector_value(&qf.shift, Side::Right, bindings, &grid)?.weighted()),
        Flavor::Complex => {
            let l = kernel_value(&qf.l, bindings, &grid)?.weighted();
            let lstar = l.map(|z| z.conj());
            let w1 = vector_value(&qf.shift_left, Side::Left, bindings, &grid)?.weighted();
            let w2 = vector_value(&qf.shift, Side::Right, bindings, &grid)?.weighted();
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let i = Complex64::new(0.0, 1.0);
            let t = DMatrix::from_fn(dim, 2 * dim, |row, col| match (col < dim, col % dim == row) {
                (_, false) => Complex64::new(0.0, 0.0),
                (true, true) => Complex64::new(r, 0.0),
                (false, true) => i * r,
            });
            let tc = t.map(|z| z.conj());
            let a = &tc.transpose() * &k * &t * Complex64::new(2.0, 0.0) + tc.transpose() * &l * &tc + t.transpose() * &lstar * &t;
            let b = -(t.transpose() * w1 + tc.transpose() * w2);
            (symmetrize(a), b)
        }
    };
    Ok(GaussianProblem { a, b, scale })
}

/// `int dx exp(-x^T A x + b^T x) = pi^(n/2) det(A)^(-1/2) exp(b^T A^-1 b / 4)`,
/// with the branch of `det(A)^(-1/2)` continued from `Re A`.
pub fn gaussian_integral(p: &GaussianProblem) -> Result<Complex64, OracleError> {
    let n = p.a.nrows();
    let chol = p.envelope().ok_or(OracleError::NotPositiveDefinite)?;
    let c = chol.l();
    let c_inv = c.clone().try_inverse().ok_or(OracleError::NotPositiveDefinite)?;
    let m = &c_inv * p.imag_part() * c_inv.transpose();
    let h = SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues;
    let det_r_inv_sqrt: f64 = c.diagonal().iter().map(|x| 1.0 / x).product();
    let twist: Complex64 = h.iter().map(|&x| Complex64::new(1.0, x).powf(-0.5)).product();
    let a_inv = p.a.clone().try_inverse().ok_or(OracleError::NotPositiveDefinite)?;
    let quad = (p.b.transpose() * a_inv * &p.b)[(0, 0)];
    Ok(p.scale * PI.powf(n as f64 / 2.0) * det_r_inv_sqrt * twist * (quad * 0.25).exp())
}

/// Exact value of the integral of `qf` with `Omega := dim`.
pub fn analytic_finite_integral(qf: &QuadraticForm, bindings: &Bindings, dim: usize) -> Result<Complex64, OracleError> {
    gaussian_integral(&assemble(qf, bindings, dim)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{canonicalize, parse};
    use crate::kernelalg::{DiscreteKernel, FieldVector, QuadratureGrid};
    use std::sync::Arc;

    fn qf(text: &str) -> QuadraticForm {
        canonicalize(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn textbook_values() {
        let grid = Arc::new(QuadratureGrid::uniform(1));
        let k = DiscreteKernel::from_real(grid, &DMatrix::from_element(1, 1, 2.0)).unwrap();
        let v = analytic_finite_integral(&qf("int exp(-q.K.q) D[q]"), &Bindings::new().kernel("K", k), 1).unwrap();
        assert!((v.re - 1.2533141373155).abs() < 1e-12);
        let f = FieldVector::from_real(Arc::new(QuadratureGrid::uniform(2)), &[2.0, 0.0]).unwrap();
        let v = analytic_finite_integral(&qf("int exp(-q.q + q.f) D[q]"), &Bindings::new().vector("f", f), 2).unwrap();
        assert!((v.re - 8.539734222673566).abs() < 1e-12);
        let v = analytic_finite_integral(&qf("int exp(-2*a'.a) D[a]"), &Bindings::new(), 1).unwrap();
        assert!((v.re - PI).abs() < 1e-12);
        let v = analytic_finite_integral(&qf("int exp(-q.q) Dc[q]"), &Bindings::new(), 2).unwrap();
        assert!((v.re - PI / (2.0 * PI).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn isotropic_complex_shift_in_real_coordinates() {
        // Independent shifts, w1 != conj(w2).
        let g = Arc::new(QuadratureGrid::uniform(1));
        let w1 = FieldVector::new(g.clone(), vec![Complex64::new(0.3, -0.2)]).unwrap();
        let w2 = FieldVector::new(g, vec![Complex64::new(-0.1, 0.4)]).unwrap();
        let b = Bindings::new().vector("w1", w1.clone()).vector("w2", w2.clone());
        let v = analytic_finite_integral(&qf("int exp(-2*a'.a - w1'.a - a'.w2) D[a]"), &b, 1).unwrap();
        let expect = PI * (w1.values()[0].conj() * w2.values()[0] * 0.5).exp();
        assert!((v - expect).norm() < 1e-12);
    }

    #[test]
    fn complex_symmetric_branch() {
        // 1-D: int exp(-(1 + i t) x^2) dx = sqrt(pi / (1 + i t)) on the principal branch.
        for t in [-50.0, -1.0, 0.0, 3.0, 200.0] {
            let p = GaussianProblem {
                a: DMatrix::from_element(1, 1, Complex64::new(1.0, t)),
                b: DVector::from_element(1, Complex64::new(0.0, 0.0)),
                scale: Complex64::new(1.0, 0.0),
            };
            let v = gaussian_integral(&p).unwrap();
            let expect = (Complex64::new(PI, 0.0) / Complex64::new(1.0, t)).sqrt();
            assert!((v - expect).norm() < 1e-12, "{t}");
        }
    }

    #[test]
    fn indefinite_forms_are_rejected() {
        let grid = Arc::new(QuadratureGrid::uniform(2));
        let k = DiscreteKernel::from_real(grid, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        let err = analytic_finite_integral(&qf("int exp(-q.K.q) D[q]"), &Bindings::new().kernel("K", k), 2);
        assert!(matches!(err, Err(OracleError::NotPositiveDefinite)));
        assert!(matches!(
            analytic_finite_integral(&qf("int exp(-q.q) D[q] D[p]"), &Bindings::new(), 1),
            Err(OracleError::UnsupportedForm(_))
        ));
    }
}

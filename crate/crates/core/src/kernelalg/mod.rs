//! Finite-dimensional kernels on a quadrature grid.
//!
//! A kernel `K(k1, k2)` is stored by its values on grid nodes. The contraction
//! `(K . q)_i = sum_j w_j K_ij q_j` makes `1_ij = delta_ij / w_i` the exact
//! identity. All spectral work happens in the weighted frame
//! `W^{1/2} K W^{1/2}`, where contraction is an ordinary matrix product.

mod io;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

pub use io::{load_field, read_kernel_csv, read_vector_csv, to_csv, LoadedField};

/// Absolute tolerance for symmetry / self-adjointness checks on normalized matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Relative positive-definiteness threshold against the largest eigenvalue.
pub const PD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("quadrature weights must be non-empty and strictly positive")]
    InvalidGrid,
    #[error("grid mismatch: dimension {left} vs {right} or differing weights")]
    GridMismatch { left: usize, right: usize },
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("kernel is not self-adjoint")]
    NotSelfAdjoint,
    #[error("kernel is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositiveDefinite { eigenvalue: f64 },
    #[error("kernel is singular")]
    Singular,
    #[error("eigen-decomposition did not converge")]
    ConvergenceFailure,
    #[error("field is complex where a real field is required")]
    NotReal,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Discretization of `d^3k / (2 pi)^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(weights: Vec<f64>) -> Result<Self, KernelError> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(KernelError::InvalidGrid);
        }
        Ok(Self { weights })
    }

    /// Unit weights.
    pub fn uniform(dim: usize) -> Self {
        Self { weights: vec![1.0; dim.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn sqrt_weights(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.weights.iter().map(|w| w.sqrt()))
    }
}

fn same_grid(a: &QuadratureGrid, b: &QuadratureGrid) -> Result<(), KernelError> {
    if a == b {
        Ok(())
    } else {
        Err(KernelError::GridMismatch { left: a.dim(), right: b.dim() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector {
    grid: Arc<QuadratureGrid>,
    values: DVector<Complex64>,
}

impl FieldVector {
    pub fn new(grid: Arc<QuadratureGrid>, values: Vec<Complex64>) -> Result<Self, KernelError> {
        if values.len() != grid.dim() {
            return Err(KernelError::ShapeMismatch { expected: grid.dim(), found: values.len() });
        }
        Ok(Self { values: DVector::from_vec(values), grid })
    }

    pub fn from_real(grid: Arc<QuadratureGrid>, values: &[f64]) -> Result<Self, KernelError> {
        Self::new(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(grid: Arc<QuadratureGrid>) -> Self {
        let d = grid.dim();
        Self { grid, values: DVector::zeros(d) }
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.map(|z| z.conj()) }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.map(|z| z * c) }
    }

    pub fn add(&self, other: &FieldVector) -> Result<Self, KernelError> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self { grid: self.grid.clone(), values: &self.values + &other.values })
    }

    /// `W^{1/2} u`.
    pub fn weighted(&self) -> DVector<Complex64> {
        let s = self.grid.sqrt_weights();
        DVector::from_iterator(self.values.len(), self.values.iter().zip(s.iter()).map(|(z, w)| z * *w))
    }

    /// Inverse of [`FieldVector::weighted`].
    pub fn from_weighted(grid: Arc<QuadratureGrid>, v: &DVector<Complex64>) -> Self {
        let s = grid.sqrt_weights();
        let values = DVector::from_iterator(v.len(), v.iter().zip(s.iter()).map(|(z, w)| z / *w));
        Self { grid, values }
    }

    /// `u . u*` with the grid weights; the squared norm.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().zip(self.grid.weights()).map(|(z, w)| w * z.norm_sqr()).sum()
    }
}

/// `u . v = sum_i w_i u_i v_i`, without conjugation.
pub fn diamond(u: &FieldVector, v: &FieldVector) -> Result<Complex64, KernelError> {
    same_grid(&u.grid, &v.grid)?;
    Ok(u.values.iter().zip(v.values.iter()).zip(u.grid.weights()).map(|((a, b), w)| a * b * *w).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    grid: Arc<QuadratureGrid>,
    entries: DMatrix<Complex64>,
}

impl DiscreteKernel {
    pub fn new(grid: Arc<QuadratureGrid>, entries: DMatrix<Complex64>) -> Result<Self, KernelError> {
        let d = grid.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(KernelError::ShapeMismatch { expected: d * d, found: entries.len() });
        }
        Ok(Self { grid, entries })
    }

    pub fn from_real(grid: Arc<QuadratureGrid>, entries: &DMatrix<f64>) -> Result<Self, KernelError> {
        Self::new(grid, entries.map(|x| Complex64::new(x, 0.0)))
    }

    /// The contraction identity `delta_ij / w_i`.
    pub fn identity(grid: Arc<QuadratureGrid>) -> Self {
        let d = grid.dim();
        let entries = DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(1.0 / grid.weights()[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self { grid, entries }
    }

    pub fn zeros(grid: Arc<QuadratureGrid>) -> Self {
        let d = grid.dim();
        Self { grid, entries: DMatrix::zeros(d, d) }
    }

    pub fn grid(&self) -> &Arc<QuadratureGrid> {
        &self.grid
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == 0.0)
    }

    /// `W^{1/2} K W^{1/2}`.
    pub fn weighted(&self) -> DMatrix<Complex64> {
        let s = self.grid.sqrt_weights();
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.entries[(i, j)] * (s[i] * s[j]))
    }

    /// Inverse of [`DiscreteKernel::weighted`].
    pub fn from_weighted(grid: Arc<QuadratureGrid>, m: &DMatrix<Complex64>) -> Self {
        let s = grid.sqrt_weights();
        let entries = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] / (s[i] * s[j]));
        Self { grid, entries }
    }

    pub fn transpose(&self) -> Self {
        Self { grid: self.grid.clone(), entries: self.entries.transpose() }
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), entries: self.entries.map(|z| z.conj()) }
    }

    pub fn adjoint(&self) -> Self {
        Self { grid: self.grid.clone(), entries: self.entries.adjoint() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), entries: self.entries.map(|z| z * c) }
    }

    pub fn add(&self, other: &DiscreteKernel) -> Result<Self, KernelError> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self { grid: self.grid.clone(), entries: &self.entries + &other.entries })
    }

    /// `(A . B)_ij = sum_k A_ik w_k B_kj`.
    pub fn compose(&self, other: &DiscreteKernel) -> Result<Self, KernelError> {
        same_grid(&self.grid, &other.grid)?;
        let w = DMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.grid.weights().iter().map(|&w| Complex64::new(w, 0.0)),
        ));
        Ok(Self { grid: self.grid.clone(), entries: &self.entries * w * &other.entries })
    }

    /// `(K . q)_i = sum_j w_j K_ij q_j`.
    pub fn apply(&self, q: &FieldVector) -> Result<FieldVector, KernelError> {
        same_grid(&self.grid, &q.grid)?;
        let wq = DVector::from_iterator(
            self.dim(),
            q.values.iter().zip(self.grid.weights()).map(|(z, w)| z * *w),
        );
        Ok(FieldVector { grid: self.grid.clone(), values: &self.entries * wq })
    }

    fn normalized_defect(&self, other: &DMatrix<Complex64>) -> f64 {
        let m = self.weighted();
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let o = DiscreteKernel { grid: self.grid.clone(), entries: other.clone() }.weighted();
        (&m - &o).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale
    }

    pub fn is_symmetric(&self) -> bool {
        self.normalized_defect(&self.entries.transpose()) <= SYMMETRY_TOL
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.normalized_defect(&(-self.entries.transpose())) <= SYMMETRY_TOL
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.normalized_defect(&self.entries.adjoint()) <= SYMMETRY_TOL
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_self_adjoint() && mercer(self).map(|s| pd_violation(&s.eigenvalues).is_none()).unwrap_or(false)
    }

    /// Determinant of the contraction operator, `det(W^{1/2} K W^{1/2})`.
    pub fn det(&self) -> Complex64 {
        self.weighted().determinant()
    }

    /// Contraction inverse: `K . K^{-1} = 1`. Works for any nonsingular kernel.
    pub fn inverse(&self) -> Result<Self, KernelError> {
        let inv = self.weighted().try_inverse().ok_or(KernelError::Singular)?;
        Ok(Self::from_weighted(self.grid.clone(), &inv))
    }

    /// Frobenius norm of the weighted matrix.
    pub fn weighted_norm(&self) -> f64 {
        self.weighted().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `K = K_e + i K_o` with `K_e` real symmetric and `K_o` real antisymmetric.
pub fn split_even_odd(k: &DiscreteKernel) -> Result<(DiscreteKernel, DiscreteKernel), KernelError> {
    if !k.is_self_adjoint() {
        return Err(KernelError::NotSelfAdjoint);
    }
    let even = k.entries.map(|z| Complex64::new(z.re, 0.0));
    let odd = k.entries.map(|z| Complex64::new(z.im, 0.0));
    Ok((
        DiscreteKernel { grid: k.grid.clone(), entries: even },
        DiscreteKernel { grid: k.grid.clone(), entries: odd },
    ))
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<FieldVector>,
}

impl SpectralDecomposition {
    /// `sum_n g(kappa_n) phi_n phi_n^dagger`.
    pub fn reassemble(&self, g: impl Fn(f64) -> f64) -> DiscreteKernel {
        let grid = self.eigenvectors[0].grid.clone();
        let d = grid.dim();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (kappa, phi) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let v = &phi.values;
            m += v * v.adjoint() * Complex64::new(g(*kappa), 0.0);
        }
        DiscreteKernel { grid, entries: m }
    }
}

fn pd_violation(eigenvalues: &[f64]) -> Option<f64> {
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 || min <= PD_REL_TOL * max {
        Some(min)
    } else {
        None
    }
}

/// Eigenpairs of a self-adjoint kernel, descending, orthonormal under the
/// conjugated contraction. Each eigenvector has its largest-magnitude
/// component made real and positive.
pub fn mercer(k: &DiscreteKernel) -> Result<SpectralDecomposition, KernelError> {
    if !k.is_self_adjoint() {
        return Err(KernelError::NotSelfAdjoint);
    }
    let m = k.weighted();
    let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::try_new(herm, f64::EPSILON, 0).ok_or(KernelError::ConvergenceFailure)?;
    let mut order: Vec<usize> = (0..k.dim()).collect();
    // Stable sort keeps first occurrence on ties.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut eigenvalues = Vec::with_capacity(k.dim());
    let mut eigenvectors = Vec::with_capacity(k.dim());
    for idx in order {
        let mut v: DVector<Complex64> = eig.eigenvectors.column(idx).into_owned();
        let mut best = 0;
        for i in 1..v.len() {
            if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
                best = i;
            }
        }
        let phase = v[best].conj() / v[best].norm();
        v *= phase;
        v[best] = Complex64::new(v[best].re, 0.0);
        eigenvalues.push(eig.eigenvalues[idx]);
        eigenvectors.push(FieldVector::from_weighted(k.grid.clone(), &v));
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralFn {
    Det,
    Inverse,
    Sqrt,
}

#[derive(Debug, Clone)]
pub enum SpectralResult {
    Scalar(f64),
    Kernel(DiscreteKernel),
}

/// Applies `det`, `inverse` or `sqrt` on the spectrum of a positive-definite kernel.
pub fn spectral_apply(k: &DiscreteKernel, f: SpectralFn) -> Result<SpectralResult, KernelError> {
    let s = mercer(k)?;
    if let Some(bad) = pd_violation(&s.eigenvalues) {
        return Err(KernelError::NotPositiveDefinite { eigenvalue: bad });
    }
    Ok(match f {
        SpectralFn::Det => SpectralResult::Scalar(s.eigenvalues.iter().product()),
        SpectralFn::Inverse => SpectralResult::Kernel(s.reassemble(|x| 1.0 / x)),
        SpectralFn::Sqrt => SpectralResult::Kernel(s.reassemble(f64::sqrt)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit(d: usize) -> Arc<QuadratureGrid> {
        Arc::new(QuadratureGrid::uniform(d))
    }

    fn random_grid(rng: &mut ChaCha20Rng, d: usize) -> Arc<QuadratureGrid> {
        Arc::new(QuadratureGrid::new((0..d).map(|_| rng.random_range(0.2..2.0)).collect()).unwrap())
    }

    fn random_spd(rng: &mut ChaCha20Rng, grid: Arc<QuadratureGrid>) -> DiscreteKernel {
        let d = grid.dim();
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let m = &a * a.transpose() + DMatrix::identity(d, d) * 0.5;
        DiscreteKernel::from_weighted(grid, &m.map(|x| c(x, 0.0)))
    }

    fn frob_rel(a: &DiscreteKernel, b: &DiscreteKernel) -> f64 {
        let diff = (a.weighted() - b.weighted()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        diff / b.weighted_norm()
    }

    #[test]
    fn diamond_examples() {
        let g = unit(2);
        let u = FieldVector::from_real(g.clone(), &[1.0, 2.0]).unwrap();
        let v = FieldVector::from_real(g.clone(), &[3.0, 4.0]).unwrap();
        assert_eq!(diamond(&u, &v).unwrap(), c(11.0, 0.0));
        let other = FieldVector::from_real(unit(3), &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(diamond(&u, &other), Err(KernelError::GridMismatch { .. })));
    }

    #[test]
    fn identity_kernel_acts_as_identity() {
        let g = Arc::new(QuadratureGrid::new(vec![0.3, 1.7, 2.5]).unwrap());
        let q = FieldVector::from_real(g.clone(), &[1.0, -2.0, 0.5]).unwrap();
        let out = DiscreteKernel::identity(g).apply(&q).unwrap();
        for (a, b) in out.values().iter().zip(q.values().iter()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn antisymmetric_kernels_integrate_to_zero() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let g = random_grid(&mut rng, 5);
        let a = DMatrix::from_fn(5, 5, |_, _| rng.random_range(-1.0..1.0));
        let k = DiscreteKernel::from_real(g.clone(), &(&a - a.transpose())).unwrap();
        assert!(k.is_antisymmetric());
        let q = FieldVector::from_real(g, &(0..5).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
        assert!(diamond(&q, &k.apply(&q).unwrap()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn even_odd_split() {
        let g = unit(2);
        let k = DiscreteKernel::new(g.clone(), DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 1.), c(0., -1.), c(1., 0.)]))
            .unwrap();
        let (e, o) = split_even_odd(&k).unwrap();
        assert_eq!(e, DiscreteKernel::identity(g.clone()));
        assert_eq!(o.entries(), &DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(-1., 0.), c(0., 0.)]));
        let real = DiscreteKernel::from_real(g.clone(), &DMatrix::from_row_slice(2, 2, &[2., 1., 1., 3.])).unwrap();
        assert_eq!(split_even_odd(&real).unwrap().1, DiscreteKernel::zeros(g.clone()));
        let bad = DiscreteKernel::from_real(g, &DMatrix::from_row_slice(2, 2, &[1., 2., 0., 1.])).unwrap();
        assert!(matches!(split_even_odd(&bad), Err(KernelError::NotSelfAdjoint)));
    }

    #[test]
    fn even_odd_reconstruction_is_exact() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let g = random_grid(&mut rng, 4);
        let a = DMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let k = DiscreteKernel::new(g, &a + a.adjoint()).unwrap();
        let (e, o) = split_even_odd(&k).unwrap();
        assert!(e.is_symmetric() && e.is_real() && o.is_antisymmetric() && o.is_real());
        assert_eq!(e.add(&o.scale(c(0.0, 1.0))).unwrap(), k);
    }

    #[test]
    fn mercer_examples() {
        let g = unit(3);
        let s = mercer(&DiscreteKernel::identity(g)).unwrap();
        assert!(s.eigenvalues.iter().all(|&k| (k - 1.0).abs() < 1e-14));
        let diag = DiscreteKernel::from_real(unit(2), &DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 3.0]))).unwrap();
        let s = mercer(&diag).unwrap();
        assert!((s.eigenvalues[0] - 3.0).abs() < 1e-14 && (s.eigenvalues[1] - 2.0).abs() < 1e-14);
        assert!(s.eigenvectors[0].values()[1].re > 0.0);
    }

    #[test]
    fn mercer_reconstructs_and_is_orthonormal() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let g = random_grid(&mut rng, 6);
        let k = random_spd(&mut rng, g);
        let s = mercer(&k).unwrap();
        assert!(frob_rel(&s.reassemble(|x| x), &k) < 1e-10);
        for (m, pm) in s.eigenvectors.iter().enumerate() {
            for (n, pn) in s.eigenvectors.iter().enumerate() {
                let ip = diamond(&pm.conj(), pn).unwrap();
                let expect = if m == n { 1.0 } else { 0.0 };
                assert!((ip - c(expect, 0.0)).norm() < 1e-10);
            }
        }
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn spectral_functions() {
        let diag = |a: f64, b: f64| {
            DiscreteKernel::from_real(unit(2), &DMatrix::from_diagonal(&DVector::from_vec(vec![a, b]))).unwrap()
        };
        match spectral_apply(&diag(2.0, 3.0), SpectralFn::Det).unwrap() {
            SpectralResult::Scalar(d) => assert!((d - 6.0).abs() < 1e-13),
            _ => panic!(),
        }
        match spectral_apply(&diag(4.0, 9.0), SpectralFn::Sqrt).unwrap() {
            SpectralResult::Kernel(r) => {
                let s = mercer(&r).unwrap();
                assert!((s.eigenvalues[0] - 3.0).abs() < 1e-13 && (s.eigenvalues[1] - 2.0).abs() < 1e-13);
            }
            _ => panic!(),
        }
        assert!(matches!(
            spectral_apply(&diag(1.0, -1.0), SpectralFn::Det),
            Err(KernelError::NotPositiveDefinite { eigenvalue }) if eigenvalue == -1.0
        ));
    }

    #[test]
    fn inverse_and_sqrt_residuals() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let g = random_grid(&mut rng, 6);
        let k = random_spd(&mut rng, g.clone());
        let id = DiscreteKernel::identity(g);
        let SpectralResult::Kernel(inv) = spectral_apply(&k, SpectralFn::Inverse).unwrap() else { panic!() };
        assert!(frob_rel(&k.compose(&inv).unwrap(), &id) < 1e-10);
        assert!(frob_rel(&k.compose(&k.inverse().unwrap()).unwrap(), &id) < 1e-10);
        let SpectralResult::Kernel(root) = spectral_apply(&k, SpectralFn::Sqrt).unwrap() else { panic!() };
        assert!(frob_rel(&root.compose(&root).unwrap(), &k) < 1e-10);
        let d = k.det().re;
        assert!(d > 0.0);
        assert!(((root.det().re).powi(2) - d).abs() / d < 1e-10);
        assert!(k.is_positive_definite());
    }

    #[test]
    fn determinant_chain_for_self_adjoint_kernels() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let g = random_grid(&mut rng, 4);
        let ke = random_spd(&mut rng, g.clone());
        let a = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-0.3..0.3));
        let ko = DiscreteKernel::from_weighted(g.clone(), &(&a - a.transpose()).map(|x| c(x, 0.0)));
        let i = c(0.0, 1.0);
        let lhs = ke.add(&ko.scale(i)).unwrap().det() * ke.add(&ko.scale(-i)).unwrap().det();
        let x = ke.inverse().unwrap().compose(&ko).unwrap();
        let rhs = ke.det().powi(2) * DiscreteKernel::identity(g).add(&x.compose(&x).unwrap()).unwrap().det();
        assert!((lhs - rhs).norm() / rhs.norm() < 1e-8);
    }
}

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::analytic::{assemble, GaussianProblem};
use super::OracleError;
use crate::engine::{Bindings, QuadraticForm};
use crate::kernelalg::FieldVector;

/// Samples per chunk; chunk `i` draws from ChaCha20 stream `i`.
pub const MC_CHUNK: u64 = 4096;
pub const GENERATOR_ID: &str = "chacha20(seed_from_u64(seed), stream=chunk, chunk=4096)/standard-normal";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: Complex64,
    pub stderr: f64,
    pub samples: u64,
}

/// Running mean and squared deviation of complex samples.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: Complex64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, z: Complex64) {
        self.n += 1;
        let d = z - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += (d.conj() * (z - self.mean)).re;
    }

    fn merge(self, o: Welford) -> Welford {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * (o.n as f64 / n as f64);
        let m2 = self.m2 + o.m2 + d.norm_sqr() * (self.n as f64 * o.n as f64 / n as f64);
        Welford { n, mean, m2 }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Accumulates `g(x)` over `samples` standard-normal vectors of length `n`,
/// chunk by chunk in ascending order.
fn chunked<G>(n: usize, samples: u64, seed: u64, g: G) -> Welford
where
    G: Fn(&DVector<f64>) -> Complex64 + Sync,
{
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Welford> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut acc = Welford::default();
            let mut z = DVector::zeros(n);
            for _ in 0..count {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                acc.push(g(&z));
            }
            acc
        })
        .collect();
    parts.into_iter().fold(Welford::default(), Welford::merge)
}

/// Importance sampling with the real part of the quadratic form as envelope:
/// `x ~ N(0, (2 Re A)^-1)` and weight `exp(-i x^T (Im A) x + b^T x)`.
pub fn mc_gaussian(p: &GaussianProblem, samples: u64, seed: u64) -> Result<McEstimate, OracleError> {
    let n = p.a.nrows();
    let chol = p.envelope().ok_or(OracleError::EnvelopeFailure)?;
    let c = chol.l();
    // x = C^-T z / sqrt2 so that E[x x^T] = (2 C C^T)^-1.
    let map: DMatrix<f64> =
        c.clone().try_inverse().ok_or(OracleError::EnvelopeFailure)?.transpose() * std::f64::consts::FRAC_1_SQRT_2;
    let j = p.imag_part();
    let has_twist = j.iter().any(|&x| x != 0.0);
    let b = &p.b;
    let normalizer: f64 = std::f64::consts::PI.powf(n as f64 / 2.0) * c.diagonal().iter().map(|x| 1.0 / x).product::<f64>();
    let stats = chunked(n, samples, seed, |z| {
        let x = &map * z;
        let mut arg = Complex64::new(0.0, 0.0);
        if has_twist {
            arg.im -= x.dot(&(&j * &x));
        }
        for (bi, xi) in b.iter().zip(x.iter()) {
            arg += bi * xi;
        }
        arg.exp()
    });
    let s = p.scale * normalizer;
    Ok(McEstimate { estimate: stats.mean * s, stderr: stats.stderr() * s.norm(), samples })
}

/// Monte Carlo estimate of the integral of `qf` with `Omega := dim`.
pub fn mc_integral(qf: &QuadraticForm, bindings: &Bindings, dim: usize, samples: u64, seed: u64) -> Result<McEstimate, OracleError> {
    mc_gaussian(&assemble(qf, bindings, dim)?, samples, seed)
}

/// Estimates `E[(q.f)^(2n)]` under the density proportional to `exp(-q.q)`.
/// Only the real part of `f` is used.
pub fn mc_probability_moment(n: u32, f: &FieldVector, dim: usize, samples: u64, seed: u64) -> Result<(f64, f64), OracleError> {
    if n > 4 {
        return Err(OracleError::VarianceGuard(n));
    }
    if f.grid().dim() != dim {
        return Err(OracleError::DimensionMismatch { expected: dim, found: f.grid().dim() });
    }
    if n == 0 {
        return Ok((1.0, 0.0));
    }
    // Weighted coordinates: q~ ~ N(0, I/2) and q.f = q~ . f~.
    let ft: DVector<f64> = f.weighted().map(|z| z.re * std::f64::consts::FRAC_1_SQRT_2);
    let stats = chunked(dim, samples, seed, |z| Complex64::new(z.dot(&ft).powi(2 * n as i32), 0.0));
    Ok((stats.mean.re, stats.stderr()))
}

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

/// Termwise comparison of `m_{2n}^{-1/2n}` against `1/(2 |f| sqrt(n))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlemanReport {
    pub f_norm: f64,
    pub n_max: u64,
    pub terms: Vec<f64>,
    pub lower_bounds: Vec<f64>,
    pub partial_sum: f64,
    pub bound_sum: f64,
    pub termwise_ok: bool,
}

/// Evaluates `term_n = (2/|f|) (n!/(2n)!)^{1/2n}` in log space for `n = 1..=n_max`.
pub fn carleman_check(f_norm: f64, n_max: u64) -> CarlemanReport {
    let n_max = n_max.max(1);
    let mut terms = Vec::with_capacity(n_max as usize);
    let mut lower_bounds = Vec::with_capacity(n_max as usize);
    let (mut partial_sum, mut bound_sum) = (0.0, 0.0);
    let mut termwise_ok = true;
    for n in 1..=n_max {
        let nf = n as f64;
        let log_ratio = ln_gamma(nf + 1.0) - ln_gamma(2.0 * nf + 1.0);
        let term = (2.0 / f_norm) * (log_ratio / (2.0 * nf)).exp();
        let bound = 1.0 / (2.0 * f_norm * nf.sqrt());
        termwise_ok &= term > bound;
        partial_sum += term;
        bound_sum += bound;
        terms.push(term);
        lower_bounds.push(bound);
    }
    CarlemanReport { f_norm, n_max, terms, lower_bounds, partial_sum, bound_sum, termwise_ok }
}

//! Evaluation of the isotropic real integrals by expanding the integrand in
//! powers of the field and summing the moment series.

use std::collections::BTreeSet;

use num_traits::{ToPrimitive, Zero};

use super::canonical::{Flavor, QuadraticForm};
use super::closed::{measure_prefactor, ClosedForm};
use super::ir::{Bilinear, Kernel};
use super::EngineError;
use crate::cardinal::{lambda_poly, sum_pochhammer_series, CardinalScalar, LambdaRational, LimitResult, OmegaLinear};
use crate::exact::rat;
use crate::wick::{count_pairings, s_polynomial, s_polynomial_bruteforce, t_reduction, t_reduction_bruteforce, OmegaPolynomial};

/// Orders up to which the recurrences are cross-checked against explicit pairings.
const BRUTEFORCE_ORDER: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesEvaluation {
    /// Summed series with `Lambda` still finite.
    pub pre_limit: ClosedForm,
    /// After `Lambda -> infinity`.
    pub post_limit: ClosedForm,
    /// Limit of the prefactor alone.
    pub limit: LimitResult,
    pub trace: Vec<String>,
}

/// `prod_{m=0}^{n-1} (Omega + 2r + 2m) = 2^n (Omega/2 + r)_n`.
fn shifted_pochhammer(n: u32, r: u32) -> OmegaPolynomial {
    (0..n).fold(OmegaPolynomial::one(), |acc, m| &acc * &OmegaPolynomial::omega_plus(2 * (r + m) as i64))
}

fn check_recurrences(trace: &mut Vec<String>) -> Result<(), EngineError> {
    for n in 0..=BRUTEFORCE_ORDER {
        let s = s_polynomial(n);
        if s != s_polynomial_bruteforce(n)? {
            return Err(EngineError::Unsupported(format!("S_{} recurrence disagrees with enumeration", 2 * n)));
        }
        if s != shifted_pochhammer(n, 0) {
            return Err(EngineError::Unsupported(format!("S_{} is not 2^N (Omega/2)_N", 2 * n)));
        }
        trace.push(format!("S_{} = {s}", 2 * n));
    }
    for n in 0..=BRUTEFORCE_ORDER {
        for r in 0..=BRUTEFORCE_ORDER - n {
            let t = t_reduction(n, r);
            let groups = t_reduction_bruteforce(n, r)?;
            if groups.iter().any(|(_, p)| *p != t) || t != shifted_pochhammer(n, r) {
                return Err(EngineError::Unsupported(format!("T_({},{}) recurrence disagrees", 2 * n, 2 * r)));
            }
            trace.push(format!("T_({},{}) / T_(0,{}) = {t}", 2 * n, 2 * r, 2 * r));
        }
    }
    for r in 0..=BRUTEFORCE_ORDER {
        let rho = if r == 0 { 1u32.into() } else { count_pairings(2 * r)? };
        let fact2r: u64 = (1..=2 * r as u64).product();
        let fact_r: u64 = (1..=r as u64).product();
        if rho.to_u64() != Some(fact2r / ((1u64 << r) * fact_r)) {
            return Err(EngineError::Unsupported(format!("pairing count of {} items is off", 2 * r)));
        }
        trace.push(format!("rho({}) / ({})! = 1/(2^{r} {r}!)", 2 * r, 2 * r));
    }
    Ok(())
}

fn require_isotropic_real(qf: &QuadraticForm) -> Result<(), EngineError> {
    if qf.flavor != Flavor::Real {
        return Err(EngineError::UnsupportedKernel("series route needs a real integration field".into()));
    }
    if qf.k != Kernel::Identity {
        return Err(EngineError::UnsupportedKernel(format!("series route needs K = 1, found {}", qf.k)));
    }
    Ok(())
}

/// Full series derivation for `exp(-q.q + q.f + c)`.
pub fn evaluate_via_series_traced(qf: &QuadraticForm) -> Result<SeriesEvaluation, EngineError> {
    require_isotropic_real(qf)?;
    let mut trace = Vec::new();
    check_recurrences(&mut trace)?;

    let half_omega = OmegaLinear::omega(rat(1, 2));
    let measure = CardinalScalar::power(&lambda_poly(&[0, 2]), &half_omega).mul(&CardinalScalar::pi_pow(half_omega.clone()));
    let minus_two_lambda = lambda_poly(&[0, -2]);
    let n_sum = sum_pochhammer_series(&half_omega, &minus_two_lambda);
    trace.push(format!("sum_N (-2*Lambda)^N (Omega/2)_N / N! = {n_sum}"));
    let prefactor = measure.mul(&n_sum);

    let mut exponent = qf.constant.clone();
    if !qf.shift.is_zero() {
        // sum_R (Lambda F / 2)^R / R! (1 + 2 Lambda)^(-R)
        let coef = &(&lambda_poly(&[0, 1]) * &LambdaRational::rational(rat(1, 2))) * &lambda_poly(&[1, 2]).recip()?;
        trace.push(format!("sum_R (Lambda F/2)^R / R! (1+2*Lambda)^(-R) = exp({coef} * F)"));
        exponent.terms.push(Bilinear::new(coef, qf.shift.flip_side(), Kernel::Identity, qf.shift.clone()));
    }
    let pre_limit = ClosedForm {
        prefactor: prefactor.mul(&measure_prefactor(qf)),
        det_factors: Vec::new(),
        exponent,
        assumptions: Vec::new(),
        residual_tags: BTreeSet::new(),
    }
    .normalize(&qf.props)?;
    trace.push(format!("pre-limit: {pre_limit}"));
    let limit = prefactor.limit_lambda()?;
    let post_limit = pre_limit.limit_lambda(&qf.props)?;
    trace.push(format!("Lambda -> infinity: {post_limit}"));
    Ok(SeriesEvaluation { pre_limit, post_limit, limit, trace })
}

pub fn evaluate_via_series(qf: &QuadraticForm) -> Result<ClosedForm, EngineError> {
    Ok(evaluate_via_series_traced(qf)?.post_limit)
}

/// Numeric double series `sum_{N,R <= n_max}` of the moment expansion at
/// `Omega := omega`, finite `lambda` and `F = f.f`, measure prefactor included.
pub fn series_partial_sum(omega: u32, lambda: f64, f_dot_f: f64, n_max: u32) -> f64 {
    let measure = (2.0 * std::f64::consts::PI * lambda).powf(omega as f64 / 2.0);
    let mut total = 0.0;
    // (Lambda F / 2)^R / R!
    let mut r_weight = 1.0;
    for r in 0..=n_max {
        if r > 0 {
            r_weight *= lambda * f_dot_f / 2.0 / r as f64;
        }
        if r_weight.is_zero() && r > 0 {
            break;
        }
        let mut inner = 0.0;
        // (-Lambda)^N T(N, R) / N!, with T(N, R) = T(N-1, R) (Omega + 2(N+R) - 2)
        let mut n_weight = 1.0;
        for n in 0..=n_max {
            if n > 0 {
                n_weight *= -lambda / n as f64 * (omega as f64 + 2.0 * (n + r) as f64 - 2.0);
            }
            inner += n_weight;
        }
        total += r_weight * inner;
    }
    measure * total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::canonical::canonicalize;
    use crate::engine::closed::evaluate;
    use crate::engine::dsl::parse;
    use crate::exact::{int, to_f64};

    fn qf(text: &str) -> QuadraticForm {
        canonicalize(&parse(text).unwrap()).unwrap()
    }

    #[test]
    fn series_matches_closed_form_for_a_and_b() {
        for text in ["int exp(-q.q) D[q]", "int exp(-q.q + q.f) D[q]", "int exp(-q.q + q.f + 3) D[q]"] {
            let q = qf(text);
            assert_eq!(evaluate_via_series(&q).unwrap(), evaluate(&q).unwrap(), "{text}");
        }
    }

    #[test]
    fn pre_limit_forms() {
        let a = evaluate_via_series_traced(&qf("int exp(-q.q) D[q]")).unwrap();
        assert_eq!(a.pre_limit.to_string(), "(2*pi*Lambda)^(Omega/2) * (1+2*Lambda)^(-Omega/2)");
        assert!(a.limit.lambda_order.is_zero());
        let b = evaluate_via_series_traced(&qf("int exp(-q.q + q.f) D[q]")).unwrap();
        assert_eq!(b.pre_limit.exponent.to_string(), "(1/2*Lambda)/(1+2*Lambda) * f . f");
        assert_eq!(b.post_limit.to_string(), "pi^(Omega/2) * exp(1/4 * f . f)");
        assert!(!b.trace.is_empty());
    }

    #[test]
    fn anisotropic_kernels_are_rejected() {
        assert!(matches!(
            evaluate_via_series(&qf("int exp(-q.K.q) D[q]")),
            Err(EngineError::UnsupportedKernel(_))
        ));
        assert!(matches!(evaluate_via_series(&qf("int exp(-2*a'.a) D[a]")), Err(EngineError::UnsupportedKernel(_))));
    }

    #[test]
    fn truncated_series_converges_inside_radius() {
        let lambda = 0.1;
        let (omega, ff) = (2u32, 1.5);
        let exact = (2.0 * std::f64::consts::PI * lambda / (1.0 + 2.0 * lambda)).powf(omega as f64 / 2.0)
            * (0.5 * lambda * ff / (1.0 + 2.0 * lambda)).exp();
        for (n, r) in [(0, 0), (1, 0), (2, 3), (5, 2)] {
            let t = to_f64(&t_reduction(n, r).eval(&int(omega as i64)));
            let recurrence: f64 = (1..=n).map(|m| omega as f64 + 2.0 * (m + r) as f64 - 2.0).product();
            assert_eq!(t, recurrence);
        }
        let partial = series_partial_sum(omega, lambda, ff, 40);
        assert!((partial - exact).abs() <= 1e-8 * exact.abs(), "{partial} vs {exact}");
        let cf = evaluate_via_series_traced(&qf("int exp(-q.q) D[q]")).unwrap();
        let v = cf.pre_limit.prefactor.instantiate_at(omega, lambda).unwrap();
        assert!((v.re - series_partial_sum(omega, lambda, 0.0, 40)).abs() < 1e-10);
    }
}

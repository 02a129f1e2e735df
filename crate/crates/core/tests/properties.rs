//! Property tests for the algebraic invariants of every module.

use std::sync::Arc;

use funcint::cardinal::{lambda_poly, parse_cardinal, sum_pochhammer_series, CardinalScalar, LambdaRational, OmegaLinear};
use funcint::engine::{
    canonicalize, canonicalize_with, catalog, evaluate, instantiate_closed_form, parse, KernelProps, PropTable,
};
use funcint::exact::{crat, rat};
use funcint::kernelalg::{diamond, split_even_odd, spectral_apply, DiscreteKernel, FieldVector, QuadratureGrid, SpectralFn, SpectralResult};
use funcint::oracle::{analytic_finite_integral, random_bindings};
use funcint::wick::{
    carleman_check, count_pairings, enumerate_pairings, s_polynomial, ContractionGraph, OmegaPolynomial, Pairing,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

// ---- cardinal ----

fn omega_linear() -> impl Strategy<Value = OmegaLinear> {
    (-4i64..=4, 1i64..=3, -4i64..=4, 1i64..=3).prop_map(|(a, b, c, d)| OmegaLinear::new(rat(a, b), rat(c, d)))
}

fn scalar() -> impl Strategy<Value = CardinalScalar> {
    (1i64..=9, 1i64..=9, omega_linear(), omega_linear(), omega_linear(), (1i64..=3, 1i64..=3), omega_linear()).prop_map(
        |(n, d, e1, e2, e3, (p0, p1), e4)| {
            CardinalScalar::const_pow(&crat(rat(n, d)), &e1)
                .mul(&CardinalScalar::pi_pow(e2))
                .mul(&CardinalScalar::lambda_pow(e3))
                .mul(&CardinalScalar::power(&lambda_poly(&[p0, p1]), &e4))
        },
    )
}

proptest! {
    #[test]
    fn cardinal_mul_is_associative_and_commutative(a in scalar(), b in scalar(), c in scalar()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
    }

    #[test]
    fn lambda_limit_is_multiplicative(a in scalar(), b in scalar()) {
        let (la, lb) = (a.limit_lambda().unwrap(), b.limit_lambda().unwrap());
        let lab = a.mul(&b).limit_lambda().unwrap();
        prop_assert_eq!(lab.value, la.value.mul(&lb.value));
        prop_assert_eq!(lab.lambda_order, la.lambda_order + lb.lambda_order);
    }

    #[test]
    fn pochhammer_series_matches_truncation(an in -6i64..=12, ad in 1i64..=4, xn in -9i64..=9) {
        let a = rat(an, ad);
        let x = rat(xn, 20);
        let closed = sum_pochhammer_series(&OmegaLinear::constant(a.clone()), &LambdaRational::rational(x.clone()))
            .instantiate(1)
            .unwrap();
        let (af, xf) = (an as f64 / ad as f64, xn as f64 / 20.0);
        let (mut term, mut sum) = (1.0f64, 1.0f64);
        for n in 0..80 {
            term *= xf * (af + n as f64) / (n as f64 + 1.0);
            sum += term;
        }
        prop_assert!((closed.re - sum).abs() <= 1e-10 * sum.abs().max(1e-300), "{} vs {}", closed.re, sum);
        prop_assert!(closed.im.abs() <= 1e-12);
    }
}

#[test]
fn series_prefactor_limit_instantiates_to_pi_power() {
    let pre = parse_cardinal("(2*pi*Lambda)^(Omega/2) * (1+2*Lambda)^(-Omega/2)").unwrap();
    let lim = pre.limit_lambda().unwrap();
    assert!(lim.lambda_order.is_zero());
    assert_eq!(lim.value, parse_cardinal("pi^(Omega/2)").unwrap());
    for d in 1..=16u32 {
        let z = lim.value.instantiate(d).unwrap();
        let expected = std::f64::consts::PI.powf(d as f64 / 2.0);
        assert!((z.re - expected).abs() <= 1e-14 * expected && z.im == 0.0);
    }
}

// ---- wick ----

proptest! {
    #[test]
    fn enumeration_matches_count(n in 0u32..=6) {
        let listed = if n == 0 { vec![Pairing::empty()] } else { enumerate_pairings(2 * n).unwrap() };
        let count = if n == 0 { 1u32.into() } else { count_pairings(2 * n).unwrap() };
        prop_assert_eq!(count, listed.len().into());
    }

    #[test]
    fn s_polynomial_recurrence(n in 1u32..=8) {
        prop_assert_eq!(s_polynomial(n), &s_polynomial(n - 1) * &OmegaPolynomial::omega_plus(2 * n as i64 - 2));
    }

    #[test]
    fn contraction_is_order_independent(
        (n, r) in (0u32..=3, 0u32..=2),
        pick in any::<prop::sample::Index>(),
        order in Just(()).prop_flat_map(|_| Just((1u32..=6).collect::<Vec<_>>()).prop_shuffle()),
    ) {
        let total = 2 * (n + r);
        prop_assume!(total > 0);
        let pairings = enumerate_pairings(total).unwrap();
        let p = &pairings[pick.index(pairings.len())];
        let edges = p.pairs().iter().copied().chain((1..=n).map(|m| (2 * m - 1, 2 * m)));
        let g = ContractionGraph::new(1..=total, edges, 1..=2 * n).unwrap();
        let order: Vec<u32> = order.into_iter().filter(|v| *v <= 2 * n).collect();
        let (l1, r1) = g.contract().unwrap();
        let (l2, r2) = g.contract_in_order(&order).unwrap();
        prop_assert_eq!(l1, l2);
        prop_assert_eq!(r1.edge_multiset(), r2.edge_multiset());
    }

    #[test]
    fn carleman_terms_dominate_for_any_norm(norm in 0.05f64..20.0) {
        let r = carleman_check(norm, 2_000);
        prop_assert!(r.termwise_ok);
        prop_assert!(r.partial_sum >= r.bound_sum);
    }
}

// ---- kernelalg ----

fn grid_and_seed() -> impl Strategy<Value = (Arc<QuadratureGrid>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|d| {
        (prop::collection::vec(0.5f64..1.5, d), prop::collection::vec(-1.0f64..1.0, 4 * d * d + 4 * d))
            .prop_map(|(w, raw)| (Arc::new(QuadratureGrid::new(w).unwrap()), raw))
    })
}

fn complex_vector(grid: &Arc<QuadratureGrid>, raw: &[f64]) -> FieldVector {
    let d = grid.dim();
    FieldVector::new(grid.clone(), (0..d).map(|i| Complex64::new(raw[2 * i], raw[2 * i + 1])).collect()).unwrap()
}

/// Weighted-frame matrix `A A^T + 0.5` lifted to a kernel.
fn spd(grid: &Arc<QuadratureGrid>, raw: &[f64]) -> DiscreteKernel {
    let d = grid.dim();
    let a = DMatrix::from_fn(d, d, |i, j| raw[i * d + j]);
    let m = &a * a.transpose() + DMatrix::identity(d, d) * 0.5;
    DiscreteKernel::from_weighted(grid.clone(), &m.map(|x| Complex64::new(x, 0.0)))
}

/// Self-adjoint positive-definite `B B^dagger + 0.5` in the weighted frame.
fn hermitian_pd(grid: &Arc<QuadratureGrid>, raw: &[f64]) -> DiscreteKernel {
    let d = grid.dim();
    let b = DMatrix::from_fn(d, d, |i, j| Complex64::new(raw[i * d + j], raw[d * d + i * d + j]));
    let m = &b * b.adjoint() + DMatrix::identity(d, d) * Complex64::new(0.5, 0.0);
    DiscreteKernel::from_weighted(grid.clone(), &m)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

proptest! {
    #[test]
    fn diamond_is_symmetric_and_bilinear((grid, raw) in grid_and_seed(), c in -2.0f64..2.0) {
        let d = grid.dim();
        let u = complex_vector(&grid, &raw);
        let v = complex_vector(&grid, &raw[2 * d..]);
        let w = complex_vector(&grid, &raw[4 * d..]);
        prop_assert!((diamond(&u, &v).unwrap() - diamond(&v, &u).unwrap()).norm() <= 1e-14);
        let lhs = diamond(&u.scale(Complex64::new(c, 0.5)).add(&w).unwrap(), &v).unwrap();
        let rhs = Complex64::new(c, 0.5) * diamond(&u, &v).unwrap() + diamond(&w, &v).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn spd_det_and_square_root((grid, raw) in grid_and_seed()) {
        let k = spd(&grid, &raw);
        let det = k.det();
        prop_assert!(det.re > 0.0 && det.im.abs() <= 1e-12 * det.re);
        let SpectralResult::Kernel(root) = spectral_apply(&k, SpectralFn::Sqrt).unwrap() else { unreachable!() };
        prop_assert!(rel(root.det() * root.det(), det) <= 1e-10);
    }

    #[test]
    fn even_odd_determinant_chain((grid, raw) in grid_and_seed()) {
        let k = hermitian_pd(&grid, &raw);
        let (ke, ko) = split_even_odd(&k).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let lhs = ke.add(&ko.scale(i)).unwrap().det() * ke.add(&ko.scale(-i)).unwrap().det();
        let x = ke.inverse().unwrap().compose(&ko).unwrap();
        let one = DiscreteKernel::identity(grid.clone());
        let rhs = ke.det() * ke.det() * one.add(&x.compose(&x).unwrap()).unwrap().det();
        prop_assert!(rel(lhs, rhs) <= 1e-8, "{} vs {}", lhs, rhs);
    }

    #[test]
    fn finite_measure_jacobian((grid, raw) in grid_and_seed()) {
        let k = spd(&grid, &raw);
        let d = grid.dim();
        let det = k.det();
        let qf = canonicalize(&parse("int exp(-q.K.q) D[q]").unwrap()).unwrap();
        let z = analytic_finite_integral(&qf, &funcint::engine::Bindings::new().kernel("K", k), d).unwrap();
        let expected = Complex64::new(std::f64::consts::PI.powf(d as f64 / 2.0), 0.0) / det.sqrt();
        prop_assert!(rel(z, expected) <= 1e-10);
    }
}

// ---- engine ----

proptest! {
    #[test]
    fn dsl_round_trips_through_display(case in 0usize..10, s in -9i64..=9, d in 1i64..=9) {
        let dsl = catalog()[case].dsl.replacen("exp(-", &format!("exp({s}/{d} -"), 1);
        let ast = parse(&dsl).unwrap();
        prop_assert_eq!(parse(&ast.to_string()).unwrap(), ast);
    }

    #[test]
    fn antisymmetric_kernels_never_reach_the_form(a in 1i64..=9, b in -9i64..=9, f in -9i64..=9) {
        let mut decl = PropTable::new();
        decl.insert("S".into(), KernelProps::symmetric());
        decl.insert("N".into(), KernelProps::antisymmetric());
        let with = format!("int exp(-{a}*q.S.q {b:+}*q.N.q {f:+}*q.g) D[q]");
        let without = format!("int exp(-{a}*q.S.q {f:+}*q.g) D[q]");
        let with = canonicalize_with(&parse(&with).unwrap(), &decl).unwrap();
        let without = canonicalize_with(&parse(&without).unwrap(), &decl).unwrap();
        prop_assert_eq!(with.form, without.form);
    }

    #[test]
    fn shift_invariance_for_any_scale(c in 1i64..=6) {
        // -(c q - f/2).(c q - f/2), expanded
        let shifted = format!("int exp(-{}*q.q + {c}*q.f - 1/4*f.f) D[q]", c * c);
        let plain = format!("int exp(-{}*q.q) D[q]", c * c);
        let eval = |s: &str| evaluate(&canonicalize(&parse(s).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(eval(&shifted), eval(&plain));
    }
}

// ---- oracle ----

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn engine_matches_analytic_oracle(case in 0usize..10, seed in any::<u64>(), dim in prop::sample::select(vec![1usize, 2, 3, 4, 8])) {
        let c = &catalog()[case];
        let qf = canonicalize(&parse(c.dsl).unwrap()).unwrap();
        let b = random_bindings(&qf, dim, seed).unwrap();
        let analytic = analytic_finite_integral(&qf, &b, dim).unwrap();
        let engine = instantiate_closed_form(&evaluate(&qf).unwrap(), &b, dim).unwrap();
        prop_assert!(rel(engine, analytic) <= 1e-8, "case {} D={}: {} vs {}", c.id, dim, engine, analytic);
    }
}

#[test]
fn probability_moments_match_monte_carlo() {
    use funcint::oracle::mc_probability_moment;
    use funcint::wick::probability_moment;
    for n in 1..=3u32 {
        for dim in 1..=6usize {
            let grid = Arc::new(QuadratureGrid::new((0..dim).map(|i| 0.6 + 0.15 * i as f64).collect()).unwrap());
            let raw: Vec<f64> = (0..dim).map(|i| ((i as f64 + 1.0) * 0.7).sin()).collect();
            let f = FieldVector::from_real(grid, &raw).unwrap();
            let exact = probability_moment(n, f.norm_sqr().sqrt());
            let (est, se) = mc_probability_moment(n, &f, dim, 400_000, 31 * n as u64 + dim as u64).unwrap();
            assert!((est - exact).abs() <= 4.0 * se, "n={n} D={dim}: {est} +- {se} vs {exact}");
        }
    }
}

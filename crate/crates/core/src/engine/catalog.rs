//! Built-in integrals `A` through `J` with their expected closed forms.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CatalogCase {
    pub id: &'static str,
    pub title: &'static str,
    pub dsl: &'static str,
    /// Canonical rendering of the closed form.
    pub expected: &'static str,
}

const CASES: [CatalogCase; 10] = [
    CatalogCase {
        id: "A",
        title: "isotropic real",
        dsl: "int exp(-q.q) D[q]",
        expected: "pi^(Omega/2)",
    },
    CatalogCase {
        id: "B",
        title: "isotropic real, shifted",
        dsl: "int exp(-q.q + q.f) D[q]",
        expected: "pi^(Omega/2) * exp(1/4 * f . f)",
    },
    CatalogCase {
        id: "C",
        title: "anisotropic real",
        dsl: "int exp(-q.K.q) D[q]",
        expected: "pi^(Omega/2) * det(K)^(-1/2)",
    },
    CatalogCase {
        id: "D",
        title: "anisotropic real, shifted",
        dsl: "int exp(-q.K.q + q.f) D[q]",
        expected: "pi^(Omega/2) * det(K)^(-1/2) * exp(1/4 * f . inv(K) . f)",
    },
    CatalogCase {
        id: "E",
        title: "isotropic complex",
        dsl: "int exp(-2*a'.a) D[a]",
        expected: "pi^(Omega)",
    },
    CatalogCase {
        id: "F",
        title: "isotropic complex, shifted",
        dsl: "int exp(-2*a'.a - w1'.a - a'.w2) D[a]",
        expected: "pi^(Omega) * exp(1/2 * w1' . w2)",
    },
    CatalogCase {
        id: "G",
        title: "self-adjoint complex",
        dsl: "int exp(-2*a'.K.a) D[a]",
        expected: "pi^(Omega) * det(K)^(-1)",
    },
    CatalogCase {
        id: "H",
        title: "self-adjoint complex, shifted",
        dsl: "int exp(-2*a'.K.a - w1'.a - a'.w2) D[a]",
        expected: "pi^(Omega) * det(K)^(-1) * exp(1/2 * w1' . inv(K) . w2)",
    },
    CatalogCase {
        id: "I",
        title: "anisotropic complex",
        dsl: "int exp(-2*a'.K.a - a'.L.a' - a.L'.a) D[a]",
        expected: "pi^(Omega) * det(K)^(-1/2) * det(K - L . inv(K') . L')^(-1/2)",
    },
    CatalogCase {
        id: "J",
        title: "anisotropic complex, shifted",
        dsl: "int exp(-2*a'.K.a - a'.L.a' - a.L'.a - w1'.a - a'.w2) D[a]",
        expected: "pi^(Omega) * det(K)^(-1/2) * det(K - L . inv(K') . L')^(-1/2) * exp(1/4 * w1' . inv(K) . w2 + 1/4 * (w1' - w2 . inv(K') . L') . inv(K - L . inv(K') . L') . (w2 - L . inv(K') . w1'))",
    },
];

pub fn catalog() -> &'static [CatalogCase] {
    &CASES
}

/// Case by id, case-insensitive.
pub fn catalog_case(id: &str) -> Option<&'static CatalogCase> {
    CASES.iter().find(|c| c.id.eq_ignore_ascii_case(id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{canonicalize, evaluate, parse};

    #[test]
    fn every_case_renders_its_expected_form() {
        for c in catalog() {
            let cf = evaluate(&canonicalize(&parse(c.dsl).unwrap()).unwrap()).unwrap();
            assert_eq!(cf.to_string(), c.expected, "case {}", c.id);
            assert!(cf.is_finite());
        }
        assert_eq!(catalog_case("j").unwrap().id, "J");
        assert!(catalog_case("bogus").is_none());
    }
}

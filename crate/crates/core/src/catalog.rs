//! Built-in metric families.
//!
//! | name            | n | m | A                                              |
//! |-----------------|---|---|------------------------------------------------|
//! | `euclid2`       | 2 | 2 | `(y1)^2 + (y2)^2`                              |
//! | `conformal2`    | 2 | 2 | `(1 + 2 x1)((y1)^2 + (y2)^2)`                  |
//! | `berwald_moor3` | 3 | 3 | `y1 y2 y3`                                     |
//! | `quartic2`      | 2 | 4 | `(y1)^4 + (y2)^4 + (1 + x1 + (x2)^2)(y1 y2)^2` |
//!
//! Coefficients are tensor components, so cross terms are divided by their
//! multiplicity: `berwald_moor3` stores `a_123 = 1/6`, and `quartic2` stores
//! `a_1122 = (1 + x1 + (x2)^2) / 6`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::tensor_core::{MetricSpec, MultiIndex, XPolynomial};

pub const CATALOG_NAMES: [&str; 4] = ["euclid2", "conformal2", "berwald_moor3", "quartic2"];

/// A property each catalog entry is expected to have or lack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    /// Cartan torsion vanishes.
    Riemannian,
    /// Coefficients do not depend on x.
    LocallyMinkowskian,
    /// `A_ij` is positive definite at the probe point `x = 0, y = (1, ..., 1)`.
    PositiveDefiniteAtProbe,
    /// Berwald curvature vanishes.
    BerwaldZero,
    /// Mean Berwald curvature vanishes.
    MeanBerwaldZero,
    /// Landsberg curvature vanishes.
    LandsbergZero,
    /// H-curvature vanishes.
    HZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnownFlag {
    pub property: Property,
    pub expected: bool,
    /// How the flag was established; re-checked by the test suite.
    pub provenance: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub spec: MetricSpec,
    pub known_flags: Vec<KnownFlag>,
}

impl CatalogEntry {
    pub fn flag(&self, property: Property) -> Option<bool> {
        self.known_flags
            .iter()
            .find(|f| f.property == property)
            .map(|f| f.expected)
    }
}

fn flag(property: Property, expected: bool, provenance: &'static str) -> KnownFlag {
    KnownFlag {
        property,
        expected,
        provenance,
    }
}

fn poly(n: usize, terms: &[(&[u32], f64)]) -> XPolynomial {
    XPolynomial::from_terms(n, terms.iter().map(|(e, c)| (e.to_vec(), *c)))
        .expect("catalog polynomials are well formed")
}

fn build(n: usize, m: usize, entries: Vec<(Vec<usize>, XPolynomial)>) -> MetricSpec {
    let coeffs: BTreeMap<_, _> = entries
        .into_iter()
        .map(|(idx, p)| (MultiIndex::new(idx).expect("sorted"), p))
        .collect();
    MetricSpec::new(n, m, coeffs).expect("catalog specs are valid")
}

pub fn catalog_metric(name: &str) -> Result<CatalogEntry> {
    use Property::*;
    let entry = match name {
        "euclid2" => CatalogEntry {
            name: "euclid2",
            spec: build(
                2,
                2,
                vec![
                    (vec![0, 0], XPolynomial::constant(2, 1.0)),
                    (vec![1, 1], XPolynomial::constant(2, 1.0)),
                ],
            ),
            known_flags: vec![
                flag(
                    Riemannian,
                    true,
                    "m = 2: the Cartan bracket carries the factor (2/m - 1)",
                ),
                flag(LocallyMinkowskian, true, "constant coefficients"),
                flag(PositiveDefiniteAtProbe, true, "A_ij = 2 I"),
                flag(BerwaldZero, true, "spray vanishes identically"),
                flag(MeanBerwaldZero, true, "spray vanishes identically"),
                flag(LandsbergZero, true, "spray vanishes identically"),
                flag(HZero, true, "spray vanishes identically"),
            ],
        },
        "conformal2" => {
            let f = poly(2, &[(&[0, 0], 1.0), (&[1, 0], 2.0)]);
            CatalogEntry {
                name: "conformal2",
                spec: build(2, 2, vec![(vec![0, 0], f.clone()), (vec![1, 1], f)]),
                known_flags: vec![
                    flag(Riemannian, true, "m = 2"),
                    flag(LocallyMinkowskian, false, "coefficients depend on x1"),
                    flag(PositiveDefiniteAtProbe, true, "A_ij = 2 I at x = 0"),
                    flag(BerwaldZero, true, "Christoffel oracle: G quadratic in y"),
                    flag(
                        MeanBerwaldZero,
                        true,
                        "Christoffel oracle: G quadratic in y",
                    ),
                    flag(LandsbergZero, true, "Christoffel oracle: G quadratic in y"),
                    flag(HZero, true, "E vanishes identically"),
                ],
            }
        }
        "berwald_moor3" => CatalogEntry {
            name: "berwald_moor3",
            spec: build(
                3,
                3,
                vec![(vec![0, 1, 2], XPolynomial::constant(3, 1.0 / 6.0))],
            ),
            known_flags: vec![
                flag(
                    Riemannian,
                    false,
                    "Cartan tensor evaluated at (1, 1, 1) is of order one",
                ),
                flag(LocallyMinkowskian, true, "constant coefficients"),
                flag(
                    PositiveDefiniteAtProbe,
                    false,
                    "A_ij at (1, 1, 1) has inertia (1, 2, 0)",
                ),
                flag(BerwaldZero, true, "locally Minkowskian: G = 0"),
                flag(MeanBerwaldZero, true, "locally Minkowskian: G = 0"),
                flag(LandsbergZero, true, "locally Minkowskian: G = 0"),
                flag(HZero, true, "locally Minkowskian: G = 0"),
            ],
        },
        "quartic2" => {
            let cross = poly(
                2,
                &[
                    (&[0, 0], 1.0 / 6.0),
                    (&[1, 0], 1.0 / 6.0),
                    (&[0, 2], 1.0 / 6.0),
                ],
            );
            CatalogEntry {
                name: "quartic2",
                spec: build(
                    2,
                    4,
                    vec![
                        (vec![0, 0, 0, 0], XPolynomial::constant(2, 1.0)),
                        (vec![0, 0, 1, 1], cross),
                        (vec![1, 1, 1, 1], XPolynomial::constant(2, 1.0)),
                    ],
                ),
                known_flags: vec![
                    flag(
                        Riemannian,
                        false,
                        "Cartan tensor checked against finite differences of F^2",
                    ),
                    flag(LocallyMinkowskian, false, "cross coefficient depends on x"),
                    flag(
                        PositiveDefiniteAtProbe,
                        true,
                        "A_ij = [[14, 4], [4, 14]] at y = (1, 1)",
                    ),
                    flag(
                        BerwaldZero,
                        false,
                        "jet engine cross-checked with finite differences of the spray",
                    ),
                    flag(
                        MeanBerwaldZero,
                        false,
                        "jet engine cross-checked with finite differences of div G",
                    ),
                    flag(
                        LandsbergZero,
                        false,
                        "jet engine cross-checked with finite differences of the spray",
                    ),
                    flag(
                        HZero,
                        false,
                        "jet engine cross-checked with a geodesic transport oracle",
                    ),
                ],
            }
        }
        other => return Err(Error::UnknownMetric(other.to_string())),
    };
    Ok(entry)
}

/// Every catalog entry, in [`CATALOG_NAMES`] order.
pub fn all() -> Vec<CatalogEntry> {
    CATALOG_NAMES
        .iter()
        .map(|n| catalog_metric(n).expect("catalog names resolve"))
        .collect()
}

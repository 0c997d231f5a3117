//! Randomized invariants: Euler homogeneity, spray homogeneity, jet algebra,
//! matrix-jet inversion and spec file round trips.

mod common;

use std::collections::BTreeMap;

use mroot::jets::{Jet, JetLayout, MatrixJet};
use mroot::spec_file;
use mroot::spray_curvature::{spray, SprayCurvatures};
use mroot::tensor_core::{
    eval_a, y_gradient, y_hessian, EvalPoint, MetricSpec, MultiIndex, XPolynomial,
};
use proptest::prelude::*;

fn sorted_indices(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(out: &mut Vec<Vec<usize>>, cur: &mut Vec<usize>, start: usize, n: usize, m: usize) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(out, cur, i, n, m);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut out, &mut Vec::new(), 0, n, m);
    out
}

/// Random spec with a constant plus linear-in-x coefficient per index.
fn arb_spec() -> impl Strategy<Value = MetricSpec> {
    (1usize..=3, 2usize..=4).prop_flat_map(|(n, m)| {
        let idx = sorted_indices(n, m);
        let k = idx.len();
        prop::collection::vec((-1.0f64..1.0, prop::collection::vec(-0.5f64..0.5, n)), k).prop_map(
            move |cs| {
                let mut coeffs = BTreeMap::new();
                for (ix, (c0, lin)) in idx.iter().zip(cs) {
                    let mut terms = vec![(vec![0u32; n], c0 + 1.5)];
                    for (v, l) in lin.into_iter().enumerate() {
                        let mut e = vec![0u32; n];
                        e[v] = 1;
                        terms.push((e, l));
                    }
                    coeffs.insert(
                        MultiIndex::new(ix.clone()).unwrap(),
                        XPolynomial::from_terms(n, terms).unwrap(),
                    );
                }
                MetricSpec::new(n, m, coeffs).unwrap()
            },
        )
    })
}

fn arb_spec_and_point() -> impl Strategy<Value = (MetricSpec, EvalPoint)> {
    arb_spec().prop_flat_map(|s| {
        let n = s.dimension();
        (
            Just(s),
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(0.2f64..2.0, n),
            prop::collection::vec(any::<bool>(), n),
        )
            .prop_map(|(s, x, mag, neg)| {
                let y = mag
                    .iter()
                    .zip(neg)
                    .map(|(v, b)| if b { -v } else { *v })
                    .collect();
                let p = EvalPoint::new(x, y).unwrap();
                (s, p)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn euler_identities_hold((s, p) in arb_spec_and_point()) {
        let m = s.degree() as f64;
        let a = eval_a(&s, &p).unwrap();
        let grad = y_gradient(&s, &p).unwrap();
        let hess = y_hessian(&s, &p).unwrap();
        let ya: f64 = grad.iter().zip(&p.y).map(|(g, y)| g * y).sum();
        let scale = 1.0 + grad.iter().zip(&p.y).map(|(g, y)| (g * y).abs()).sum::<f64>();
        prop_assert!((ya - m * a).abs() < 1e-12 * scale);
        for j in 0..s.dimension() {
            let yh: f64 = (0..s.dimension()).map(|i| p.y[i] * hess[(i, j)]).sum();
            let scale = 1.0 + (0..s.dimension()).map(|i| (p.y[i] * hess[(i, j)]).abs()).sum::<f64>();
            prop_assert!((yh - (m - 1.0) * grad[j]).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn spray_is_two_homogeneous((s, p) in arb_spec_and_point(), lambda in 0.3f64..3.0) {
        let Ok(g) = spray(&s, &p) else { return Ok(()) };
        let cond = y_hessian(&s, &p).unwrap().svd(false, false).singular_values;
        prop_assume!(cond.min() > 1e-3 * cond.max());
        let q = p.scaled(lambda).unwrap();
        let g2 = spray(&s, &q).unwrap();
        let want = g.scale(lambda * lambda);
        prop_assert!(common::mixed_rel(&g2.comps, &want.comps) < 1e-9);
    }

    #[test]
    fn jet_spray_agrees_with_direct_formula((s, p) in arb_spec_and_point()) {
        let cond = y_hessian(&s, &p).unwrap().svd(false, false).singular_values;
        prop_assume!(cond.min() > 1e-2 * cond.max());
        let direct = spray(&s, &p).unwrap();
        let bundle = SprayCurvatures::compute(&s, &p).unwrap();
        prop_assert!(common::mixed_rel(&bundle.spray.comps, &direct.comps) < 1e-9);
        // N^i_j y^j = 2 G^i
        let ny = bundle.nonlinear_connection.contract(1, &p.y);
        prop_assert!(common::mixed_rel(&ny.comps, &direct.scale(2.0).comps) < 1e-8);
    }

    #[test]
    fn spec_files_round_trip(s in arb_spec()) {
        let text = spec_file::to_json(&s);
        prop_assert_eq!(spec_file::parse_spec(&text).unwrap(), s);
    }

    #[test]
    fn jet_products_commute_and_associate(
        a in prop::collection::vec(-2.0f64..2.0, 35),
        b in prop::collection::vec(-2.0f64..2.0, 35),
        c in prop::collection::vec(-2.0f64..2.0, 35),
    ) {
        let layout = JetLayout::get(3, 3).unwrap();
        prop_assert_eq!(layout.len(), 20);
        let mk = |v: &[f64]| {
            let mut i = 0;
            Jet::from_fn(&layout, |_| { i += 1; v[i - 1] })
        };
        let (a, b, c) = (mk(&a), mk(&b), mk(&c));
        prop_assert!((&a * &b).max_abs_diff(&(&b * &a)) < 1e-12);
        prop_assert!((&(&a * &b) * &c).max_abs_diff(&(&a * &(&b * &c))) < 1e-11);
        prop_assert!((&a * &(&b + &c)).max_abs_diff(&(&(&a * &b) + &(&a * &c))) < 1e-11);
    }

    #[test]
    fn matrix_jet_inverse_is_two_sided(
        base in prop::collection::vec(-1.0f64..1.0, 9),
        higher in prop::collection::vec(-1.0f64..1.0, 9 * 15),
    ) {
        let layout = JetLayout::get(2, 4).unwrap();
        let m = MatrixJet::from_fn(&layout, 3, 3, |i, j| {
            let k = i * 3 + j;
            Jet::from_fn(&layout, |alpha| {
                let d: u8 = alpha.iter().sum();
                if d == 0 {
                    base[k] + if i == j { 4.0 } else { 0.0 }
                } else {
                    let pos = layout.index_of(alpha).unwrap() - 1;
                    higher[k * 14 + pos]
                }
            })
        }).unwrap();
        let inv = m.inverse().unwrap();
        let id = MatrixJet::identity(&layout, 3);
        prop_assert!(m.checked_mul(&inv).unwrap().max_abs_diff(&id) < 1e-10);
        prop_assert!(inv.checked_mul(&m).unwrap().max_abs_diff(&id) < 1e-10);
    }
}

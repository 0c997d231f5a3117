//! Truncated Taylor arithmetic: products, matrix inversion, and lifting A.

use mroot::catalog::catalog_metric;
use mroot::jets::{jet_lift_a, Jet, JetLayout, MatrixJet};
use mroot::tensor_core::partial_a;
use mroot::EvalPoint;

pub fn main() {
    // f(t0, t1) = (2 + t0)(3 + t1) to order 2
    let layout = JetLayout::get(2, 2).unwrap();
    let u = Jet::variable(&layout, 0, 2.0).unwrap();
    let v = Jet::variable(&layout, 1, 3.0).unwrap();
    let f = &u * &v;
    println!(
        "f = {} , df/dt0 = {}, d2f/dt0dt1 = {}",
        f.value(),
        f.extract_partial(&[1, 0]).unwrap(),
        f.extract_partial(&[1, 1]).unwrap()
    );

    // 2x2 matrix of jets and its inverse
    let m = MatrixJet::from_fn(&layout, 2, 2, |i, j| {
        if i == j {
            &u + &Jet::constant(&layout, 1.0)
        } else {
            v.scale(0.1)
        }
    })
    .unwrap();
    let inv = m.inverse().unwrap();
    let err = m
        .checked_mul(&inv)
        .unwrap()
        .max_abs_diff(&MatrixJet::identity(&layout, 2));
    println!("|M M^-1 - I| over all coefficients = {err:e}");

    // Taylor expansion of A about a point agrees with exact partials
    let spec = catalog_metric("quartic2").unwrap().spec;
    let p = EvalPoint::new(vec![0.2, 0.1], vec![1.0, -0.5]).unwrap();
    let lift = jet_lift_a(&spec, &p, 4, None).unwrap();
    for alpha in [[0, 0], [1, 0], [2, 1], [2, 2], [0, 4]] {
        let jet = lift.extract_partial(&alpha).unwrap();
        let exact = partial_a(&spec, &p, &alpha, &[0, 0]).unwrap();
        println!("d^{alpha:?} A: jet {jet:>10.6}  exact {exact:>10.6}");
        assert!((jet - exact).abs() < 1e-10);
    }
}

//! Build an m-th root metric by hand and evaluate A and its partials.
//!
//! A = (1 + x1)(y1)^3 + 3 (y1)^2 y2 + (y2)^3, a cubic metric on the plane.

use std::collections::BTreeMap;

use mroot::tensor_core::{contracted_partials, eval_a, partial_a, y_gradient, y_hessian};
use mroot::{EvalPoint, MetricSpec, MultiIndex, XPolynomial};

pub fn main() {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(
        MultiIndex::new(vec![0, 0, 0]).unwrap(),
        XPolynomial::from_terms(2, [(vec![0, 0], 1.0), (vec![1, 0], 1.0)]).unwrap(),
    );
    // a_112 appears three times in the symmetric sum, so 3 (y1)^2 y2 needs a_112 = 1
    coeffs.insert(
        MultiIndex::new(vec![0, 0, 1]).unwrap(),
        XPolynomial::constant(2, 1.0),
    );
    coeffs.insert(
        MultiIndex::new(vec![1, 1, 1]).unwrap(),
        XPolynomial::constant(2, 1.0),
    );
    let spec = MetricSpec::new(2, 3, coeffs).unwrap();

    let p = EvalPoint::new(vec![0.5, -1.0], vec![1.0, 2.0]).unwrap();
    let a = eval_a(&spec, &p).unwrap();
    println!("A(x, y)          = {a}");
    println!("A_y              = {:?}", y_gradient(&spec, &p).unwrap());
    println!("A_yy             = {}", y_hessian(&spec, &p).unwrap());
    println!(
        "d3A/dy1^2 dx1    = {}",
        partial_a(&spec, &p, &[2, 0], &[1, 0]).unwrap()
    );

    let (a0, a0j) = contracted_partials(&spec, &p).unwrap();
    println!("A_0 = y^k A_x^k  = {a0}");
    println!("A_0j             = {a0j:?}");

    let expected = 1.5 * 1.0 + 3.0 * 2.0 + 8.0;
    assert!((a - expected).abs() < 1e-12);
}

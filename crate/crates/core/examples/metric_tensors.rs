//! Fundamental tensor, its inverse, Cartan torsion and the angular metric,
//! with the homogeneity identities of A as a self-check.

use mroot::catalog::catalog_metric;
use mroot::metric_tensors::{
    a_hessian_signature, angular_metric, cartan_tensor, finsler_norm, fundamental_tensor,
    identity_suite, inverse_fundamental, lowered_y,
};
use mroot::EvalPoint;

pub fn main() {
    for (name, y) in [
        ("quartic2", vec![1.0, 0.5]),
        ("berwald_moor3", vec![1.0, 2.0, 0.5]),
    ] {
        let spec = catalog_metric(name).unwrap().spec;
        let p = EvalPoint::new(vec![0.0; y.len()], y).unwrap();
        println!("== {name} at y = {:?}", p.y);
        println!("F          = {}", finsler_norm(&spec, &p).unwrap());
        println!("sig(A_ij)  = {:?}", a_hessian_signature(&spec, &p).unwrap());
        println!(
            "g          = {}",
            fundamental_tensor(&spec, &p).unwrap().to_matrix()
        );
        println!(
            "g^-1       = {}",
            inverse_fundamental(&spec, &p).unwrap().to_matrix()
        );
        println!("y_i        = {:?}", lowered_y(&spec, &p).unwrap().comps);
        let c = cartan_tensor(&spec, &p).unwrap();
        println!(
            "|C|        = {:.6}, C(y, ., .) = {:.1e}",
            c.norm(),
            c.contract(0, &p.y).norm()
        );
        let h = angular_metric(&spec, &p).unwrap();
        println!("h(y, .)    = {:.1e}", h.contract(1, &p.y).norm());
        let ids = identity_suite(&spec, &p).unwrap();
        println!("identities = {:.1e} (worst relative residual)", ids.max());
        assert!(ids.max() < 1e-12);
    }
}

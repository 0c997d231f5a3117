//! Spray and the curvatures derived from it, checked against the
//! Christoffel form of the spray.

use mroot::catalog::catalog_metric;
use mroot::metric_tensors::lowered_y;
use mroot::spray_curvature::{spray, spray_from_g_oracle, SprayCurvatures};
use mroot::EvalPoint;

pub fn main() {
    // conformal2 is Riemannian with Gaussian curvature 2/(1 + 2 x1)^3
    let spec = catalog_metric("conformal2").unwrap().spec;
    let p = EvalPoint::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let all = SprayCurvatures::compute(&spec, &p).unwrap();
    println!("conformal2 G = {:?}", all.spray.comps);
    println!("conformal2 R = {}", all.riemann.to_matrix());
    println!("conformal2 |B| = {:e}", all.berwald.norm());

    let spec = catalog_metric("quartic2").unwrap().spec;
    let p = EvalPoint::new(vec![0.1, -0.3], vec![1.0, 0.5]).unwrap();
    let direct = spray(&spec, &p).unwrap();
    let oracle = spray_from_g_oracle(&spec, &p).unwrap();
    println!("quartic2 G (direct) = {:?}", direct.comps);
    println!("quartic2 G (g form) = {:?}", oracle.comps);
    assert!(direct.max_abs_diff(&oracle) < 1e-12);

    let all = SprayCurvatures::compute(&spec, &p).unwrap();
    let l = all.landsberg(&lowered_y(&spec, &p).unwrap().comps);
    for (label, t) in [
        ("N", &all.nonlinear_connection),
        ("G^i_jk", &all.berwald_connection),
        ("B", &all.berwald),
        ("E", &all.mean_berwald),
        ("L", &l),
        ("H", &all.h),
        ("R", &all.riemann),
    ] {
        println!("quartic2 |{label:<6}| = {:.6}", t.norm());
    }
}

//! det(A_ij) G^i is a polynomial in y; fit it on half the samples and score
//! the other half.

use mroot::analysis::{rationality_check, rationality_degree_bound, SamplePlan};
use mroot::catalog;

pub fn main() {
    for entry in catalog::all() {
        let (n, m) = (entry.spec.dimension(), entry.spec.degree());
        let x: Vec<f64> = (0..n).map(|k| 0.1 * (k + 1) as f64).collect();
        let report = rationality_check(&entry.spec, &x, &SamplePlan::new(1, 200)).unwrap();
        println!(
            "{:<14} degree <= {} ({} monomials): held-out residual {:.2e}",
            entry.name,
            rationality_degree_bound(n, m),
            report.monomials,
            report.heldout_residual
        );
        assert!(report.is_polynomial.iter().all(|&ok| ok));
    }
}

//! Landsberg and H isotropy fits over sampled directions for every catalog
//! metric. A forbidden quadrant would mean an isotropic but non-trivial fit.

use mroot::analysis::{classify, SamplePlan};
use mroot::catalog;

pub fn main() {
    println!(
        "{:<14} {:>12} {:>12} {:>12} {:>12}  verdicts",
        "metric", "|L|", "L fit res", "|H|", "H fit res"
    );
    for entry in catalog::all() {
        let x = vec![0.0; entry.spec.dimension()];
        let c = classify(&entry.spec, &x, &SamplePlan::new(0, 40)).unwrap();
        println!(
            "{:<14} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}  {:?} / {:?}",
            entry.name,
            c.landsberg_fit.landsberg_norm,
            c.landsberg_fit.fit.residual_rel,
            c.h_fit.h_norm,
            c.h_fit.fit.residual_rel,
            c.landsberg_fit.verdict,
            c.h_fit.verdict,
        );
        assert!(!c.forbidden());
    }
}

//! Small dense linear-algebra helpers shared by the tensor modules.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative determinant cutoff: a matrix is degenerate when
/// `|det| < DEGENERACY_RTOL * scale^n` with `scale` its largest absolute entry.
pub const DEGENERACY_RTOL: f64 = 1e-12;

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Scale-aware degeneracy threshold for a square matrix.
pub fn degeneracy_threshold(m: &DMatrix<f64>) -> f64 {
    let scale = max_abs(m.as_slice());
    DEGENERACY_RTOL * scale.powi(m.nrows() as i32)
}

/// Inverse of `m`, or [`Error::Degenerate`] when its determinant falls below
/// [`degeneracy_threshold`].
pub fn invert_checked(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let det = m.determinant();
    let threshold = degeneracy_threshold(m);
    if det.is_nan() || det.abs() < threshold || threshold == 0.0 {
        return Err(Error::Degenerate { det, threshold });
    }
    m.clone()
        .try_inverse()
        .ok_or(Error::Degenerate { det, threshold })
}

/// Inertia `(positive, negative, zero)` of a symmetric matrix. Eigenvalues
/// within `1e-12 * max|lambda|` of zero count as zero.
pub fn signature(m: &DMatrix<f64>) -> (usize, usize, usize) {
    let eig = m.clone().symmetric_eigen().eigenvalues;
    let tol = 1e-12 * max_abs(eig.as_slice()).max(f64::MIN_POSITIVE);
    eig.iter().fold((0, 0, 0), |(p, q, z), &l| {
        if l > tol {
            (p + 1, q, z)
        } else if l < -tol {
            (p, q + 1, z)
        } else {
            (p, q, z + 1)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_matrix_is_degenerate() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(invert_checked(&m), Err(Error::Degenerate { .. })));
        assert!(invert_checked(&DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn threshold_scales_with_entries() {
        let m = DMatrix::from_row_slice(2, 2, &[1e-5, 0.0, 0.0, 1e-5]);
        let inv = invert_checked(&m).unwrap();
        assert!((inv[(0, 0)] - 1e5).abs() < 1e-6);
    }

    #[test]
    fn signature_of_indefinite_matrix() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
        assert_eq!(signature(&m), (1, 2, 0));
    }
}

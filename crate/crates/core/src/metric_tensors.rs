//! Closed-form tensors of an m-th root metric, all assembled from exact
//! y-partials of `A`.
//!
//! Every fractional power of `A` requires `A > 0`; elsewhere these functions
//! return [`Error::NonPositiveA`]. Positive definiteness of `A_ij` is not
//! required, only invertibility where `A^ij` appears. [`a_hessian_signature`]
//! reports the inertia so callers can flag indefinite points.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, max_abs};
use crate::tensor::TensorValue;
use crate::tensor_core::{eval_a, y_gradient, y_hessian, y_third, EvalPoint, MetricSpec};

fn positive_a(spec: &MetricSpec, p: &EvalPoint) -> Result<f64> {
    let a = eval_a(spec, p)?;
    if a > 0.0 {
        Ok(a)
    } else {
        Err(Error::NonPositiveA { value: a })
    }
}

/// `F = A^(1/m)`.
pub fn finsler_norm(spec: &MetricSpec, p: &EvalPoint) -> Result<f64> {
    let a = positive_a(spec, p)?;
    Ok(a.powf(1.0 / spec.degree() as f64))
}

/// `g_ij = A^(2/m-2)/m^2 [m A A_ij + (2-m) A_i A_j]`.
pub fn fundamental_tensor(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let a = positive_a(spec, p)?;
    let m = spec.degree() as f64;
    let ai = y_gradient(spec, p)?;
    let aij = y_hessian(spec, p)?;
    let pre = a.powf(2.0 / m - 2.0) / (m * m);
    Ok(TensorValue::from_fn(spec.dimension(), 0, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        pre * (m * a * aij[(i, j)] + (2.0 - m) * ai[i] * ai[j])
    }))
}

/// `g^ij = A^(-2/m) [m A A^ij + (m-2)/(m-1) y^i y^j]`, with `A^ij` the
/// numeric inverse of `A_ij`.
pub fn inverse_fundamental(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let a = positive_a(spec, p)?;
    let m = spec.degree() as f64;
    let a_inv = linalg::invert_checked(&y_hessian(spec, p)?)?;
    let pre = a.powf(-2.0 / m);
    let y = &p.y;
    Ok(TensorValue::from_fn(spec.dimension(), 2, 0, |ix| {
        let (i, j) = (ix[0], ix[1]);
        pre * (m * a * a_inv[(i, j)] + (m - 2.0) / (m - 1.0) * y[i] * y[j])
    }))
}

/// `y_i = (1/m) A^(2/m-1) A_i`.
pub fn lowered_y(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let a = positive_a(spec, p)?;
    let m = spec.degree() as f64;
    let pre = a.powf(2.0 / m - 1.0) / m;
    let ai = y_gradient(spec, p)?;
    TensorValue::new(spec.dimension(), 0, 1, ai.iter().map(|v| pre * v).collect())
}

/// Cartan torsion `C_ijk = 1/4 d^3 F^2 / dy^i dy^j dy^k`:
///
/// `C_ijk = A^(2/m-3)/(2m) [A^2 A_ijk + (2/m-1)(2/m-2) A_i A_j A_k
///          + (2/m-1) A (A_i A_jk + A_j A_ki + A_k A_ij)]`.
pub fn cartan_tensor(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let a = positive_a(spec, p)?;
    let n = spec.dimension();
    let m = spec.degree() as f64;
    let q = 2.0 / m;
    let ai = y_gradient(spec, p)?;
    let aij = y_hessian(spec, p)?;
    let aijk = y_third(spec, p)?;
    let pre = a.powf(q - 3.0) / (2.0 * m);
    Ok(TensorValue::from_fn(n, 0, 3, |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let bracket = a * a * aijk[(i * n + j) * n + k]
            + (q - 1.0) * (q - 2.0) * ai[i] * ai[j] * ai[k]
            + (q - 1.0) * a * (ai[i] * aij[(j, k)] + ai[j] * aij[(k, i)] + ai[k] * aij[(i, j)]);
        pre * bracket
    }))
}

/// Angular metric `h_ij = (1/m^2)[m A A_ij + (1-m) A_i A_j] A^(2/m-2)`,
/// equal to `g_ij - y_i y_j / F^2`.
pub fn angular_metric(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let a = positive_a(spec, p)?;
    let m = spec.degree() as f64;
    let ai = y_gradient(spec, p)?;
    let aij = y_hessian(spec, p)?;
    let pre = a.powf(2.0 / m - 2.0) / (m * m);
    Ok(TensorValue::from_fn(spec.dimension(), 0, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        pre * (m * a * aij[(i, j)] + (1.0 - m) * ai[i] * ai[j])
    }))
}

/// Inertia `(positive, negative, zero)` of `A_ij` at `p`.
pub fn a_hessian_signature(spec: &MetricSpec, p: &EvalPoint) -> Result<(usize, usize, usize)> {
    Ok(linalg::signature(&y_hessian(spec, p)?))
}

/// Relative residuals of the five homogeneity identities of `A`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct IdentityResiduals {
    /// `y^i A_i = m A`
    pub euler_first: f64,
    /// `y^i A_ij = (m-1) A_j`
    pub euler_second: f64,
    /// `y_i = (1/m) A^(2/m-1) A_i` against `g_ij y^j`
    pub lowered_y: f64,
    /// `A^ij A_i = y^j / (m-1)`
    pub inverse_gradient: f64,
    /// `A_i A_j A^ij = m A / (m-1)`
    pub inverse_quadratic: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.euler_first,
            self.euler_second,
            self.lowered_y,
            self.inverse_gradient,
            self.inverse_quadratic,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn as_array(&self) -> [(&'static str, f64); 5] {
        [
            ("euler_first", self.euler_first),
            ("euler_second", self.euler_second),
            ("lowered_y", self.lowered_y),
            ("inverse_gradient", self.inverse_gradient),
            ("inverse_quadratic", self.inverse_quadratic),
        ]
    }
}

/// `max|lhs - rhs| / max(|lhs|, |rhs|)`, zero when both sides vanish.
pub fn relative_residual(lhs: &[f64], rhs: &[f64]) -> f64 {
    let diff = lhs
        .iter()
        .zip(rhs)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    let scale = max_abs(lhs).max(max_abs(rhs));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Evaluate the five identities at `p`. Needs `A > 0` for the lowered-y
/// identity and an invertible `A_ij` for the last two.
pub fn identity_suite(spec: &MetricSpec, p: &EvalPoint) -> Result<IdentityResiduals> {
    let n = spec.dimension();
    let m = spec.degree() as f64;
    let a = eval_a(spec, p)?;
    let ai = y_gradient(spec, p)?;
    let aij = y_hessian(spec, p)?;
    let y = &p.y;

    let ya: f64 = y.iter().zip(&ai).map(|(u, v)| u * v).sum();
    let euler_first = relative_residual(&[ya], &[m * a]);

    let yaij: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| y[i] * aij[(i, j)]).sum())
        .collect();
    let rhs: Vec<f64> = ai.iter().map(|v| (m - 1.0) * v).collect();
    let euler_second = relative_residual(&yaij, &rhs);

    let g = fundamental_tensor(spec, p)?;
    let gy = g.contract(1, y);
    let lowered = lowered_y(spec, p)?;
    let lowered_y = relative_residual(&lowered.comps, &gy.comps);

    let a_inv = linalg::invert_checked(&aij)?;
    let inv_grad: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| a_inv[(i, j)] * ai[i]).sum())
        .collect();
    let rhs: Vec<f64> = y.iter().map(|v| v / (m - 1.0)).collect();
    let inverse_gradient = relative_residual(&inv_grad, &rhs);

    let grad = DMatrix::from_column_slice(n, 1, &ai);
    let quad = (grad.transpose() * &a_inv * &grad)[(0, 0)];
    let inverse_quadratic = relative_residual(&[quad], &[m * a / (m - 1.0)]);

    Ok(IdentityResiduals {
        euler_first,
        euler_second,
        lowered_y,
        inverse_gradient,
        inverse_quadratic,
    })
}

//! Curvature of m-th root Finsler metrics `F = A^(1/m)`, where
//! `A = a_{i1..im}(x) y^{i1} ... y^{im}` has polynomial coefficients.
//!
//! Everything is computed from exact partial derivatives of `A`:
//! closed-form metric tensors in [`metric_tensors`], and the spray with its
//! Berwald, mean Berwald, Landsberg, H- and Riemann curvatures in
//! [`spray_curvature`] through truncated Taylor jets ([`jets`]).
//! [`analysis`] fits the isotropy relations `L = c F C` and
//! `H = (n+1)/(2F) theta h` and checks that `det(A_ij) G^i` is polynomial.

pub mod analysis;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod jets;
pub mod linalg;
pub mod metric_tensors;
pub mod spec_file;
pub mod spray_curvature;
pub mod tensor;
pub mod tensor_core;

pub use error::{Error, Result};
pub use tensor::TensorValue;
pub use tensor_core::{EvalPoint, MetricSpec, MultiIndex, XPolynomial};

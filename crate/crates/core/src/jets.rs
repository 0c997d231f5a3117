//! Truncated multivariate Taylor expansions ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar function of `dim`
//! perturbation variables up to a total degree `order`. Products are
//! truncated Cauchy products, so rational compositions (including matrix
//! inversion, see [`MatrixJet::inverse`]) stay exact through the represented
//! orders. The layout may additionally cap the degree of the last variable;
//! this is how the optional x-direction perturbation `s` is kept at first
//! order while the `y` perturbations go up to [`MAX_ORDER`].
//!
//! Coefficients are stored densely in graded order: the constant term first,
//! then the degree-one monomials `t_0, t_1, ...`, and so on.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;
use crate::tensor_core::{factorial, partial_unchecked, EvalPoint, MetricSpec};

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 4;

/// Monomial table and multiplication schedule for one `(dim, order, cap)`.
#[derive(Debug)]
pub struct JetLayout {
    dim: usize,
    order: usize,
    last_cap: Option<usize>,
    monomials: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    products: Vec<(u32, u32, u32)>,
    alpha_factorial: Vec<f64>,
}

impl JetLayout {
    /// Shared layout for `dim` variables truncated at total degree `order`.
    pub fn get(dim: usize, order: usize) -> Result<Arc<Self>> {
        Self::cached(dim, order, None)
    }

    /// Like [`JetLayout::get`], but the last variable never exceeds degree
    /// `cap`.
    pub fn with_capped_last(dim: usize, order: usize, cap: usize) -> Result<Arc<Self>> {
        Self::cached(dim, order, Some(cap))
    }

    fn cached(dim: usize, order: usize, last_cap: Option<usize>) -> Result<Arc<Self>> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_ORDER,
            });
        }
        if dim == 0 {
            return Err(Error::ShapeMismatch(
                "jet needs at least one variable".into(),
            ));
        }
        type Cache = Mutex<HashMap<(usize, usize, Option<usize>), Arc<JetLayout>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard
            .entry((dim, order, last_cap))
            .or_insert_with(|| Arc::new(Self::build(dim, order, last_cap)))
            .clone())
    }

    fn build(dim: usize, order: usize, last_cap: Option<usize>) -> Self {
        let mut monomials = Vec::new();
        for d in 0..=order {
            let mut current = vec![0u8; dim];
            push_compositions(&mut monomials, &mut current, 0, d);
        }
        if let Some(cap) = last_cap {
            monomials.retain(|m| (m[dim - 1] as usize) <= cap);
        }
        let lookup: HashMap<Vec<u8>, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut products = Vec::new();
        let mut sum = vec![0u8; dim];
        for (a, ma) in monomials.iter().enumerate() {
            for (b, mb) in monomials.iter().enumerate() {
                for k in 0..dim {
                    sum[k] = ma[k] + mb[k];
                }
                if let Some(&c) = lookup.get(&sum) {
                    products.push((a as u32, b as u32, c as u32));
                }
            }
        }
        let alpha_factorial = monomials
            .iter()
            .map(|m| m.iter().map(|&e| factorial(e as u32)).product())
            .collect();
        Self {
            dim,
            order,
            last_cap,
            monomials,
            lookup,
            products,
            alpha_factorial,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn last_cap(&self) -> Option<usize> {
        self.last_cap
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u8>] {
        &self.monomials
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }
}

/// All exponent vectors of total degree `remaining` over positions `pos..`,
/// in descending lexicographic order.
fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, pos: usize, remaining: usize) {
    if pos == current.len() - 1 {
        current[pos] = remaining as u8;
        out.push(current.clone());
        current[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e as u8;
        push_compositions(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

/// A truncated Taylor expansion about a base point.
#[derive(Debug, Clone)]
pub struct Jet {
    layout: Arc<JetLayout>,
    coeffs: Vec<f64>,
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(layout: &Arc<JetLayout>) -> Self {
        Self {
            layout: layout.clone(),
            coeffs: vec![0.0; layout.len()],
        }
    }

    pub fn constant(layout: &Arc<JetLayout>, value: f64) -> Self {
        let mut j = Self::zero(layout);
        j.coeffs[0] = value;
        j
    }

    /// `value + t_var`.
    pub fn variable(layout: &Arc<JetLayout>, var: usize, value: f64) -> Result<Self> {
        let mut alpha = vec![0u8; layout.dim()];
        if var >= layout.dim() {
            return Err(Error::ShapeMismatch(format!(
                "variable {var} out of range for a {}-variable jet",
                layout.dim()
            )));
        }
        alpha[var] = 1;
        let mut j = Self::constant(layout, value);
        if let Some(idx) = layout.index_of(&alpha) {
            j.coeffs[idx] = 1.0;
        }
        Ok(j)
    }

    /// Build from a coefficient function over the layout's monomials.
    pub fn from_fn(layout: &Arc<JetLayout>, mut f: impl FnMut(&[u8]) -> f64) -> Self {
        Self {
            layout: layout.clone(),
            coeffs: layout.monomials.iter().map(|m| f(m)).collect(),
        }
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient of `t^alpha`; zero for monomials outside the layout.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.layout.index_of(alpha).map_or(0.0, |i| self.coeffs[i])
    }

    /// The mixed partial `d^alpha f` at the base point, i.e.
    /// `alpha! * coeff(alpha)`.
    pub fn extract_partial(&self, alpha: &[u32]) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::ShapeMismatch(format!(
                "exponent of length {} for a {}-variable jet",
                alpha.len(),
                self.dim()
            )));
        }
        let total: u32 = alpha.iter().sum();
        let capped = self
            .layout
            .last_cap
            .is_some_and(|cap| alpha[self.dim() - 1] as usize > cap);
        if total as usize > self.order() || capped {
            return Err(Error::UnsupportedOrder {
                order: total as usize,
                max: self.order(),
            });
        }
        let key: Vec<u8> = alpha.iter().map(|&a| a as u8).collect();
        let idx = self
            .layout
            .index_of(&key)
            .expect("in-range monomials are always present");
        Ok(self.layout.alpha_factorial[idx] * self.coeffs[idx])
    }

    fn check_same(&self, other: &Jet) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "(dim {}, order {}, cap {:?}) vs (dim {}, order {}, cap {:?})",
                self.dim(),
                self.order(),
                self.layout.last_cap,
                other.dim(),
                other.order(),
                other.layout.last_cap
            )))
        }
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// Truncated Cauchy product.
    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        let mut out = Jet::zero(&self.layout);
        out.add_product(self, other);
        Ok(out)
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
        }
    }

    /// `self += a * b` without allocating. Layouts must already agree.
    fn add_product(&mut self, a: &Jet, b: &Jet) {
        for &(i, j, k) in &self.layout.products {
            let (av, bv) = (a.coeffs[i as usize], b.coeffs[j as usize]);
            if av != 0.0 && bv != 0.0 {
                self.coeffs[k as usize] += av * bv;
            }
        }
    }

    fn axpy(&mut self, c: f64, x: &Jet) {
        if c != 0.0 {
            for (s, v) in self.coeffs.iter_mut().zip(&x.coeffs) {
                *s += c * v;
            }
        }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Largest absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &Jet) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()))
    }
}

// Operator forms panic on mismatched layouts; use the `checked_*` methods
// when layouts come from untrusted input.
impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.checked_add(rhs).expect("jet layouts must match")
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.checked_sub(rhs).expect("jet layouts must match")
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.checked_mul(rhs).expect("jet layouts must match")
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// A dense row-major matrix of jets sharing one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJet {
    rows: usize,
    cols: usize,
    entries: Vec<Jet>,
}

impl MatrixJet {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Jet>) -> Result<Self> {
        if entries.len() != rows * cols || entries.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let layout = entries[0].layout.clone();
        if entries.iter().any(|e| !Arc::ptr_eq(&e.layout, &layout)) {
            return Err(Error::ShapeMismatch(
                "matrix entries have different jet layouts".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        layout: &Arc<JetLayout>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Jet,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        let m = Self::from_entries(rows, cols, entries)?;
        if !Arc::ptr_eq(&m.entries[0].layout, layout) {
            return Err(Error::ShapeMismatch(
                "entry layout differs from requested".into(),
            ));
        }
        Ok(m)
    }

    pub fn constant(layout: &Arc<JetLayout>, m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| Jet::constant(layout, m[(i, j)]))
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn identity(layout: &Arc<JetLayout>, n: usize) -> Self {
        Self::constant(layout, &DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.entries[0].layout
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.cols + j]
    }

    /// The matrix of constant terms.
    pub fn constant_part(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn checked_mul(&self, other: &MatrixJet) -> Result<MatrixJet> {
        if self.cols != other.rows || !Arc::ptr_eq(self.layout(), other.layout()) {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{} matrix jets",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let layout = self.layout().clone();
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Jet::zero(&layout);
                for k in 0..self.cols {
                    acc.add_product(self.get(i, k), other.get(k, j));
                }
                entries.push(acc);
            }
        }
        Ok(MatrixJet {
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// `c * self` for a constant matrix `c`.
    fn left_constant_mul(c: &DMatrix<f64>, m: &MatrixJet) -> MatrixJet {
        let layout = m.layout().clone();
        let mut entries = Vec::with_capacity(c.nrows() * m.cols);
        for i in 0..c.nrows() {
            for j in 0..m.cols {
                let mut acc = Jet::zero(&layout);
                for k in 0..c.ncols() {
                    acc.axpy(c[(i, k)], m.get(k, j));
                }
                entries.push(acc);
            }
        }
        MatrixJet {
            rows: c.nrows(),
            cols: m.cols,
            entries,
        }
    }

    /// Inverse jet `N` with `M N = I` through the truncation order.
    ///
    /// The constant term is inverted numerically; higher homogeneous parts
    /// follow from `N_k = -M_0^{-1} sum_{j>=1} M_j N_{k-j}`, evaluated here as
    /// `order` sweeps of `N <- M_0^{-1} (I - (M - M_0) N)`, each of which
    /// fixes one more degree.
    pub fn inverse(&self) -> Result<MatrixJet> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "cannot invert a {}x{} matrix jet",
                self.rows, self.cols
            )));
        }
        let m0 = self.constant_part();
        let m0_inv = linalg::invert_checked(&m0)?;
        let layout = self.layout().clone();
        let mut tail = self.clone();
        for e in &mut tail.entries {
            e.coeffs[0] = 0.0;
        }
        let base = MatrixJet::constant(&layout, &m0_inv);
        let mut inv = base.clone();
        for _ in 0..layout.order {
            let correction = Self::left_constant_mul(&m0_inv, &tail.checked_mul(&inv)?);
            inv = base.clone();
            for (e, c) in inv.entries.iter_mut().zip(&correction.entries) {
                e.axpy(-1.0, c);
            }
        }
        Ok(inv)
    }

    /// Largest absolute coefficient difference over all entries.
    pub fn max_abs_diff(&self, other: &MatrixJet) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0f64, |acc, (a, b)| acc.max(a.max_abs_diff(b)))
    }
}

/// Layout for expansions of `A`-derived quantities at `order` in the `n`
/// direction perturbations, plus a first-order `s` when an x-direction is
/// given.
pub fn layout_for(n: usize, order: usize, with_x_direction: bool) -> Result<Arc<JetLayout>> {
    if with_x_direction {
        JetLayout::with_capped_last(n + 1, order, 1)
    } else {
        JetLayout::get(n, order)
    }
}

/// Taylor expansion of `d^{ay_base} d^{ax_base} A` at `(x + s v, y + t)` on
/// `layout`. Variables `0..n` perturb `y`; when `direction` is given the last
/// variable is `s`. Coefficients come straight from exact partials of `A`.
pub fn lift_partial(
    spec: &MetricSpec,
    p: &EvalPoint,
    layout: &Arc<JetLayout>,
    ay_base: &[u32],
    ax_base: &[u32],
    direction: Option<&[f64]>,
) -> Jet {
    let n = spec.dimension();
    let mut ay = vec![0u32; n];
    let mut ax = vec![0u32; n];
    Jet::from_fn(layout, |alpha| {
        let mut alpha_fact = 1.0;
        for k in 0..n {
            ay[k] = ay_base[k] + alpha[k] as u32;
            alpha_fact *= factorial(alpha[k] as u32);
        }
        let s_order = if direction.is_some() {
            alpha[n] as usize
        } else {
            0
        };
        let mut total = 0.0;
        match direction {
            None => {
                total = partial_unchecked(spec, p, &ay, ax_base);
            }
            Some(v) => {
                // (1/b!) d^b/ds^b f(x + s v) = sum_{|beta| = b} v^beta / beta! d^beta f
                let mut beta = vec![0u8; n];
                let mut betas = Vec::new();
                push_compositions(&mut betas, &mut beta, 0, s_order);
                for beta in betas {
                    let mut w = 1.0;
                    for k in 0..n {
                        ax[k] = ax_base[k] + beta[k] as u32;
                        w *= v[k].powi(beta[k] as i32) / factorial(beta[k] as u32);
                    }
                    if w != 0.0 {
                        total += w * partial_unchecked(spec, p, &ay, &ax);
                    }
                }
            }
        }
        total / alpha_fact
    })
}

/// Taylor expansion of `A(x + s v, y + t)` about `p`, truncated at `order`
/// in `t` (and first order in `s` when `x_direction` is given).
pub fn jet_lift_a(
    spec: &MetricSpec,
    p: &EvalPoint,
    order: usize,
    x_direction: Option<&[f64]>,
) -> Result<Jet> {
    let n = spec.dimension();
    if p.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.dimension(),
        });
    }
    if let Some(v) = x_direction {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let layout = layout_for(n, order, x_direction.is_some())?;
    let zero = vec![0; n];
    Ok(lift_partial(spec, p, &layout, &zero, &zero, x_direction))
}

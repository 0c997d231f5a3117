//! The polynomial `A(x, y) = a_{i1..im}(x) y^{i1} ... y^{im}` and its exact
//! mixed partial derivatives.
//!
//! Only sorted multi-indices are storable, so the coefficient tensor is
//! symmetric by construction. The stored value `a_I` is the tensor component;
//! evaluation multiplies it by the multinomial multiplicity
//! `m! / (k_1! ... k_n!)` to recover the full symmetric sum.
//!
//! Indices are 0-based throughout the Rust API. The spec file format and the
//! CLI reports use 1-based indices (see [`crate::spec_file`]).

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// A sorted multi-index `(i_1 <= i_2 <= ... <= i_m)` into the coefficient
/// tensor, 0-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// Build from 0-based entries, which must be non-decreasing.
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidSpec(format!(
                "multi-index {entries:?} is not sorted ascending"
            )));
        }
        Ok(Self(entries))
    }

    /// Build from 1-based entries as written in spec files.
    pub fn from_one_based(entries: &[usize]) -> Result<Self> {
        if entries.contains(&0) {
            return Err(Error::InvalidSpec(format!(
                "multi-index {entries:?} contains 0; indices are 1-based"
            )));
        }
        Self::new(entries.iter().map(|&e| e - 1).collect())
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&e| e + 1).collect()
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Occurrence count of each index `0..n`.
    pub fn counts(&self, n: usize) -> Vec<u32> {
        let mut counts = vec![0u32; n];
        for &e in &self.0 {
            counts[e] += 1;
        }
        counts
    }

    /// Multinomial multiplicity `m! / (k_1! ... k_n!)`.
    pub fn multiplicity(&self, n: usize) -> f64 {
        let m = self.0.len() as u32;
        self.counts(n)
            .iter()
            .fold(factorial(m), |acc, &k| acc / factorial(k))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_one_based())
    }
}

/// A real polynomial in the base coordinates `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct XPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl XPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c)
            .expect("exponent length matches by construction");
        p
    }

    /// Build from `(exponents, coefficient)` pairs. Repeated exponents are
    /// rejected; exact-zero coefficients are dropped.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut p = Self::zero(nvars);
        for (exp, c) in terms {
            if p.terms.contains_key(&exp) {
                return Err(Error::InvalidSpec(format!(
                    "repeated exponent {exp:?} in polynomial"
                )));
            }
            p.add_term(exp, c)?;
        }
        Ok(p)
    }

    /// Add `c * x^exp`, merging with an existing term.
    pub fn add_term(&mut self, exp: Vec<u32>, c: f64) -> Result<()> {
        if exp.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: exp.len(),
            });
        }
        if !c.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "non-finite coefficient {c} for exponent {exp:?}"
            )));
        }
        let sum = self.terms.get(&exp).copied().unwrap_or(0.0) + c;
        if sum == 0.0 {
            self.terms.remove(&exp);
        } else {
            self.terms.insert(exp, sum);
        }
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.partial_eval(x, &vec![0; self.nvars])
    }

    /// Exact `d^{|order|} p / dx^order` evaluated at `x`.
    pub fn partial_eval(&self, x: &[f64], order: &[u32]) -> f64 {
        let mut total = 0.0;
        'terms: for (exp, &c) in &self.terms {
            let mut v = c;
            for ((&e, &d), &xi) in exp.iter().zip(order).zip(x) {
                if d > e {
                    continue 'terms;
                }
                v *= falling_factorial(e, d) * xi.powi((e - d) as i32);
            }
            total += v;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
struct SpecTerm {
    counts: Vec<u32>,
    weight: f64,
    poly: XPolynomial,
}

/// An m-th root metric `F = A^(1/m)` given by its symmetric coefficient
/// tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    n: usize,
    m: usize,
    coeffs: BTreeMap<MultiIndex, XPolynomial>,
    terms: Vec<SpecTerm>,
}

impl MetricSpec {
    pub fn new(n: usize, m: usize, coeffs: BTreeMap<MultiIndex, XPolynomial>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if m < 2 {
            return Err(Error::InvalidSpec(format!(
                "degree must be at least 2, got {m}"
            )));
        }
        for (idx, poly) in &coeffs {
            if idx.degree() != m {
                return Err(Error::InvalidSpec(format!(
                    "coefficient {idx} has {} entries, expected {m}",
                    idx.degree()
                )));
            }
            if let Some(&bad) = idx.entries().iter().find(|&&e| e >= n) {
                return Err(Error::InvalidSpec(format!(
                    "coefficient {idx} has entry {} outside 1..={n}",
                    bad + 1
                )));
            }
            if poly.nvars() != n {
                return Err(Error::InvalidSpec(format!(
                    "coefficient {idx} polynomial has {} variables, expected {n}",
                    poly.nvars()
                )));
            }
        }
        let coeffs: BTreeMap<_, _> = coeffs.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if coeffs.is_empty() {
            return Err(Error::InvalidSpec(
                "all coefficients are the zero polynomial".into(),
            ));
        }
        let terms = coeffs
            .iter()
            .map(|(idx, poly)| SpecTerm {
                counts: idx.counts(n),
                weight: idx.multiplicity(n),
                poly: poly.clone(),
            })
            .collect();
        Ok(Self {
            n,
            m,
            coeffs,
            terms,
        })
    }

    /// Convenience constructor for x-independent metrics from 0-based
    /// `(multi-index, value)` pairs.
    pub fn constant<I>(n: usize, m: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (idx, c) in entries {
            let idx = MultiIndex::new(idx)?;
            if coeffs
                .insert(idx.clone(), XPolynomial::constant(n, c))
                .is_some()
            {
                return Err(Error::InvalidSpec(format!("duplicate coefficient {idx}")));
            }
        }
        Self::new(n, m, coeffs)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, XPolynomial> {
        &self.coeffs
    }

    /// True when every coefficient is constant in `x` (locally Minkowskian).
    pub fn is_x_independent(&self) -> bool {
        self.coeffs.values().all(XPolynomial::is_constant)
    }

    fn check_point(&self, p: &EvalPoint) -> Result<()> {
        for len in [p.x.len(), p.y.len()] {
            if len != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: len,
                });
            }
        }
        Ok(())
    }
}

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl EvalPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidPoint(format!(
                "x has {} components but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPoint("non-finite coordinate".into()));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::InvalidPoint("y must be non-zero".into()));
        }
        Ok(Self { x, y })
    }

    /// `(x, y)` with `x` at the origin.
    pub fn at_origin(y: Vec<f64>) -> Result<Self> {
        Self::new(vec![0.0; y.len()], y)
    }

    pub fn dimension(&self) -> usize {
        self.y.len()
    }

    /// The same base point with `y` scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.x.clone(), self.y.iter().map(|v| v * lambda).collect())
    }
}

/// `A(x, y)`.
pub fn eval_a(spec: &MetricSpec, p: &EvalPoint) -> Result<f64> {
    partial_a(spec, p, &vec![0; spec.n], &vec![0; spec.n])
}

/// Exact `d^{|ax|+|ay|} A / dx^ax dy^ay` at `p`. Orders above `m` in `y`
/// give exactly zero.
pub fn partial_a(spec: &MetricSpec, p: &EvalPoint, ay: &[u32], ax: &[u32]) -> Result<f64> {
    spec.check_point(p)?;
    for len in [ay.len(), ax.len()] {
        if len != spec.n {
            return Err(Error::DimensionMismatch {
                expected: spec.n,
                got: len,
            });
        }
    }
    Ok(partial_unchecked(spec, p, ay, ax))
}

pub(crate) fn partial_unchecked(spec: &MetricSpec, p: &EvalPoint, ay: &[u32], ax: &[u32]) -> f64 {
    let mut total = 0.0;
    'terms: for term in &spec.terms {
        let mut v = term.weight;
        for ((&k, &d), &yj) in term.counts.iter().zip(ay).zip(&p.y) {
            if d > k {
                continue 'terms;
            }
            v *= falling_factorial(k, d) * yj.powi((k - d) as i32);
        }
        if v == 0.0 {
            continue;
        }
        total += v * term.poly.partial_eval(&p.x, ax);
    }
    total
}

/// `A_0 = A_{x^k} y^k` and `A_{0j} = A_{x^k y^j} y^k`.
pub fn contracted_partials(spec: &MetricSpec, p: &EvalPoint) -> Result<(f64, Vec<f64>)> {
    spec.check_point(p)?;
    let n = spec.n;
    let mut a0 = 0.0;
    let mut a0j = vec![0.0; n];
    for k in 0..n {
        let ax = unit(n, k);
        a0 += partial_unchecked(spec, p, &vec![0; n], &ax) * p.y[k];
        for (j, slot) in a0j.iter_mut().enumerate() {
            *slot += partial_unchecked(spec, p, &unit(n, j), &ax) * p.y[k];
        }
    }
    Ok((a0, a0j))
}

/// `A_i = dA/dy^i`.
pub fn y_gradient(spec: &MetricSpec, p: &EvalPoint) -> Result<Vec<f64>> {
    spec.check_point(p)?;
    let n = spec.n;
    let zero = vec![0; n];
    Ok((0..n)
        .map(|i| partial_unchecked(spec, p, &unit(n, i), &zero))
        .collect())
}

/// `A_ij = d^2 A / dy^i dy^j`.
pub fn y_hessian(spec: &MetricSpec, p: &EvalPoint) -> Result<DMatrix<f64>> {
    spec.check_point(p)?;
    let n = spec.n;
    let zero = vec![0; n];
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = partial_unchecked(spec, p, &orders_of(n, &[i, j]), &zero);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// `A_ijk`, row-major `n^3`.
pub fn y_third(spec: &MetricSpec, p: &EvalPoint) -> Result<Vec<f64>> {
    spec.check_point(p)?;
    let n = spec.n;
    let zero = vec![0; n];
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] =
                    partial_unchecked(spec, p, &orders_of(n, &[i, j, k]), &zero);
            }
        }
    }
    Ok(out)
}

/// Multi-order vector with a single 1 at `i`.
pub fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; n];
    v[i] = 1;
    v
}

/// Multi-order vector counting the listed (0-based) indices.
pub fn orders_of(n: usize, indices: &[usize]) -> Vec<u32> {
    let mut v = vec![0; n];
    for &i in indices {
        v[i] += 1;
    }
    v
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, v| acc * v as f64)
}

fn falling_factorial(k: u32, d: u32) -> f64 {
    (0..d).fold(1.0, |acc, i| acc * (k - i) as f64)
}

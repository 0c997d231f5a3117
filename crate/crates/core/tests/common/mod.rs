//! Independent oracles shared by the integration tests: finite differences,
//! a symbolic polynomial type, and a geodesic transport integrator.

#![allow(dead_code)]

use std::collections::BTreeMap;

use mroot::catalog;
use mroot::spray_curvature::{mean_berwald, nonlinear_connection, spray};
use mroot::tensor_core::{eval_a, unit, EvalPoint, MetricSpec};

pub fn spec(name: &str) -> MetricSpec {
    catalog::catalog_metric(name).unwrap().spec
}

pub fn point(x: &[f64], y: &[f64]) -> EvalPoint {
    EvalPoint::new(x.to_vec(), y.to_vec()).unwrap()
}

/// Product of central differences along `dirs`, no extrapolation.
fn central(f: &dyn Fn(&[f64]) -> f64, y: &[f64], dirs: &[usize], h: f64) -> f64 {
    let k = dirs.len();
    let mut total = 0.0;
    let mut z = y.to_vec();
    for mask in 0..(1u32 << k) {
        z.copy_from_slice(y);
        let mut sign = 1.0;
        for (b, &d) in dirs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                z[d] -= h;
                sign = -sign;
            } else {
                z[d] += h;
            }
        }
        total += sign * f(&z);
    }
    total / (2.0 * h).powi(k as i32)
}

/// Mixed partial along `dirs` by central differences with one Richardson
/// step (error O(h^4)).
pub fn fd_partial(f: impl Fn(&[f64]) -> f64, y: &[f64], dirs: &[usize], h: f64) -> f64 {
    let coarse = central(&f, y, dirs, h);
    let fine = central(&f, y, dirs, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// `base` shrunk near coordinate hyperplanes, where `F^2` of a product
/// metric is singular.
pub fn fd_step(y: &[f64], base: f64) -> f64 {
    let near = y.iter().fold(1.0f64, |m, v| m.min(v.abs()));
    base * near.max(0.1)
}

pub fn f_squared(spec: &MetricSpec, x: &[f64], y: &[f64]) -> f64 {
    let a = eval_a(spec, &point(x, y)).unwrap();
    a.powf(2.0 / spec.degree() as f64)
}

pub fn spray_at(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Vec<f64> {
    spray(spec, &point(x, y)).unwrap().comps
}

/// Row-major flatten over all `n^rank` index tuples.
pub fn index_tuples(n: usize, rank: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..rank {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// `d^3 G^i / dy^j dy^k dy^l` by differencing the closed-form spray.
pub fn fd_berwald(spec: &MetricSpec, p: &EvalPoint, h: f64) -> Vec<f64> {
    let n = spec.dimension();
    index_tuples(n, 4)
        .into_iter()
        .map(|ix| fd_partial(|y| spray_at(spec, &p.x, y)[ix[0]], &p.y, &ix[1..], h))
        .collect()
}

/// Largest difference over `max(1, |a|, |b|)`.
pub fn mixed_rel(a: &[f64], b: &[f64]) -> f64 {
    mroot::cli::mixed_residual(a, b)
}

pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    mroot::metric_tensors::relative_residual(a, b)
}

/// Sparse polynomial in `y` with real coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct YPoly {
    pub n: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl YPoly {
    pub fn zero(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(n: usize, exp: Vec<u32>, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(exp, c);
        p
    }

    pub fn add_term(&mut self, exp: Vec<u32>, c: f64) {
        *self.terms.entry(exp).or_insert(0.0) += c;
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (e, &c) in &o.terms {
            r.add_term(e.clone(), c);
        }
        r
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &o.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(e, ca * cb);
            }
        }
        r
    }

    pub fn dy(&self, k: usize) -> Self {
        let mut r = Self::zero(self.n);
        for (e, &c) in &self.terms {
            if e[k] > 0 {
                let mut e2 = e.clone();
                e2[k] -= 1;
                r.add_term(e2, c * e[k] as f64);
            }
        }
        r
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(y)
                    .map(|(&k, v)| v.powi(k as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Highest total degree carrying a coefficient above `tol`.
    pub fn degree(&self, tol: f64) -> Option<u32> {
        self.terms
            .iter()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(e, _)| e.iter().sum())
            .max()
    }
}

/// `d^{ax} A (x, .)` as a polynomial in `y`, built term by term from the
/// coefficient list.
pub fn a_as_ypoly(spec: &MetricSpec, x: &[f64], ax: &[u32]) -> YPoly {
    let n = spec.dimension();
    let mut p = YPoly::zero(n);
    for (idx, poly) in spec.coefficients() {
        let c = idx.multiplicity(n) * poly.partial_eval(x, ax);
        let exp = idx.counts(n);
        p.add_term(exp, c);
    }
    p
}

/// `det(A_ij) G^i` for `n = 2`, symbolically in `y` at fixed `x`.
pub fn symbolic_det_spray_2d(spec: &MetricSpec, x: &[f64]) -> [YPoly; 2] {
    assert_eq!(spec.dimension(), 2);
    let n = 2;
    let zero = vec![0; n];
    let a = a_as_ypoly(spec, x, &zero);
    let h = |i: usize, j: usize| a.dy(i).dy(j);
    let ax: Vec<YPoly> = (0..n).map(|k| a_as_ypoly(spec, x, &unit(n, k))).collect();
    // forcing_j = y^k d_{x^k} d_{y^j} A - d_{x^j} A
    let forcing: Vec<YPoly> = (0..n)
        .map(|j| {
            let mut acc = ax[j].scale(-1.0);
            for (k, axk) in ax.iter().enumerate() {
                acc = acc.add(&YPoly::monomial(n, unit(n, k), 1.0).mul(&axk.dy(j)));
            }
            acc
        })
        .collect();
    let adj = [
        [h(1, 1), h(0, 1).scale(-1.0)],
        [h(1, 0).scale(-1.0), h(0, 0)],
    ];
    let comp = |i: usize| {
        adj[i][0]
            .mul(&forcing[0])
            .add(&adj[i][1].mul(&forcing[1]))
            .scale(0.5)
    };
    [comp(0), comp(1)]
}

/// State `(x, y, U, V)` carried along a geodesic.
#[derive(Debug, Clone)]
struct Transport {
    x: Vec<f64>,
    y: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

fn transport_rhs(spec: &MetricSpec, s: &Transport) -> Transport {
    let p = point(&s.x, &s.y);
    let g = spray(spec, &p).unwrap().comps;
    let nl = nonlinear_connection(spec, &p).unwrap().to_matrix();
    let n = s.x.len();
    let mv = |w: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| -(0..n).map(|j| nl[(i, j)] * w[j]).sum::<f64>())
            .collect()
    };
    Transport {
        x: s.y.clone(),
        y: g.iter().map(|v| -2.0 * v).collect(),
        u: mv(&s.u),
        v: mv(&s.v),
    }
}

fn axpy(s: &Transport, k: &Transport, h: f64) -> Transport {
    let f = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p + h * q).collect();
    Transport {
        x: f(&s.x, &k.x),
        y: f(&s.y, &k.y),
        u: f(&s.u, &k.u),
        v: f(&s.v, &k.v),
    }
}

fn rk4(spec: &MetricSpec, s: &Transport, dt: f64) -> Transport {
    let k1 = transport_rhs(spec, s);
    let k2 = transport_rhs(spec, &axpy(s, &k1, dt / 2.0));
    let k3 = transport_rhs(spec, &axpy(s, &k2, dt / 2.0));
    let k4 = transport_rhs(spec, &axpy(s, &k3, dt));
    let mut out = s.clone();
    for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
        out = axpy(&out, k, w * dt / 6.0);
    }
    out
}

/// `E(U, V)` after transporting for time `t` (signed) in `steps` steps.
fn transported_e(spec: &MetricSpec, start: &Transport, t: f64, steps: usize) -> f64 {
    let mut s = start.clone();
    for _ in 0..steps {
        s = rk4(spec, &s, t / steps as f64);
    }
    let e = mean_berwald(spec, &point(&s.x, &s.y)).unwrap().to_matrix();
    let n = s.x.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += e[(i, j)] * s.u[i] * s.v[j];
        }
    }
    total
}

/// `H_ij` as `d/dt E(U, V)` along the geodesic with initial velocity `y`,
/// with `U`, `V` parallel along it and starting at `e_i`, `e_j`.
pub fn h_by_transport(spec: &MetricSpec, p: &EvalPoint) -> Vec<f64> {
    let n = spec.dimension();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let start = Transport {
                x: p.x.clone(),
                y: p.y.clone(),
                u: unit(n, i).iter().map(|&v| v as f64).collect(),
                v: unit(n, j).iter().map(|&v| v as f64).collect(),
            };
            let d = |h: f64| {
                (transported_e(spec, &start, h, 8) - transported_e(spec, &start, -h, 8)) / (2.0 * h)
            };
            let h = 1e-2;
            out.push((4.0 * d(h / 2.0) - d(h)) / 3.0);
        }
    }
    out
}

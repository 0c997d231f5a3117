//! Spray coefficients and the curvatures built from them.
//!
//! The spray of an m-th root metric is `G^i = 1/2 (A_{0j} - A_{x^j}) A^{ij}`,
//! rational in `y`. All y- and x-derivatives of `G` are read off a
//! [`SprayJet`], which composes exact lifts of the partials of `A` with a
//! jet-valued inverse of `A_ij`; nothing here uses finite differences.
//!
//! Conventions:
//!
//! * `N^i_j = dG^i/dy^j`, `G^i_jk = d^2 G^i / dy^j dy^k`,
//!   `B^i_jkl = d^3 G^i / dy^j dy^k dy^l`.
//! * Mean Berwald curvature `E_ij = 1/2 B^m_imj`.
//! * H-curvature is the Berwald horizontal derivative of `E` along `y`:
//!   `H_ij = y^m dE_ij/dx^m - 2 G^s dE_ij/dy^s - N^s_i E_sj - N^s_j E_is`.
//! * Landsberg curvature `L_ijk = -1/2 y_s B^s_ijk`.
//! * Riemann curvature `R^i_k = 2 dG^i/dx^k - y^j d^2G^i/dx^j dy^k
//!   + 2 G^j d^2G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{layout_for, lift_partial, Jet, MatrixJet};
use crate::linalg;
use crate::metric_tensors::{fundamental_tensor, lowered_y};
use crate::tensor::TensorValue;
use crate::tensor_core::{
    contracted_partials, eval_a, orders_of, partial_unchecked, unit, y_gradient, y_hessian,
    EvalPoint, MetricSpec,
};

/// Spray `G^i` at `p` from the closed form, with `A^ij` inverted numerically.
pub fn spray(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let n = spec.dimension();
    let (_, a0j) = contracted_partials(spec, p)?;
    let a_inv = linalg::invert_checked(&y_hessian(spec, p)?)?;
    let zero = vec![0; n];
    let axj: Vec<f64> = (0..n)
        .map(|j| partial_unchecked(spec, p, &zero, &unit(n, j)))
        .collect();
    Ok(TensorValue::from_fn(n, 1, 0, |ix| {
        0.5 * (0..n)
            .map(|j| (a0j[j] - axj[j]) * a_inv[(ix[0], j)])
            .sum::<f64>()
    }))
}

/// Spray from the fundamental tensor,
/// `G^i = 1/4 g^ik (2 dg_pk/dx^q - dg_pq/dx^k) y^p y^q`, with the
/// x-derivatives of `g` assembled from exact mixed partials of `A`.
/// Shares nothing with [`spray`] beyond the partials of `A`.
pub fn spray_from_g_oracle(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let n = spec.dimension();
    let m = spec.degree() as f64;
    let g = fundamental_tensor(spec, p)?.to_matrix();
    let g_inv = linalg::invert_checked(&g)?;
    let a = eval_a(spec, p)?;
    let ai = y_gradient(spec, p)?;
    let aij = y_hessian(spec, p)?;
    let pow = 2.0 / m - 2.0;
    let pre = a.powf(pow) / (m * m);
    let dpre = pow * a.powf(pow - 1.0) / (m * m);
    let zero = vec![0; n];

    // dg[q] = dg_ij / dx^q
    let mut dg = Vec::with_capacity(n);
    for q in 0..n {
        let xq = unit(n, q);
        let a_q = partial_unchecked(spec, p, &zero, &xq);
        let ai_q: Vec<f64> = (0..n)
            .map(|i| partial_unchecked(spec, p, &unit(n, i), &xq))
            .collect();
        dg.push(DMatrix::from_fn(n, n, |i, j| {
            let aij_q = partial_unchecked(spec, p, &orders_of(n, &[i, j]), &xq);
            let bracket = m * a * aij[(i, j)] + (2.0 - m) * ai[i] * ai[j];
            let dbracket = m * (a_q * aij[(i, j)] + a * aij_q)
                + (2.0 - m) * (ai_q[i] * ai[j] + ai[i] * ai_q[j]);
            dpre * a_q * bracket + pre * dbracket
        }));
    }
    let y = &p.y;
    let mut lower = vec![0.0; n];
    for (k, slot) in lower.iter_mut().enumerate() {
        for pp in 0..n {
            for q in 0..n {
                *slot += (2.0 * dg[q][(pp, k)] - dg[k][(pp, q)]) * y[pp] * y[q];
            }
        }
    }
    Ok(TensorValue::from_fn(n, 1, 0, |ix| {
        0.25 * (0..n).map(|k| g_inv[(ix[0], k)] * lower[k]).sum::<f64>()
    }))
}

/// Jets of the spray components `G^i(x + s v, y + t)`.
#[derive(Debug, Clone)]
pub struct SprayJet {
    point: EvalPoint,
    x_direction: Option<Vec<f64>>,
    components: Vec<Jet>,
}

impl SprayJet {
    /// Expand `G` to `y_order` in the `y` perturbations, and to first order
    /// along `x_direction` when given.
    pub fn build(
        spec: &MetricSpec,
        p: &EvalPoint,
        y_order: usize,
        x_direction: Option<&[f64]>,
    ) -> Result<Self> {
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
        let layout = layout_for(n, y_order, x_direction.is_some())?;
        let zero = vec![0u32; n];
        let lift = |ay: &[u32], ax: &[u32]| lift_partial(spec, p, &layout, ay, ax, x_direction);

        let hessian =
            MatrixJet::from_fn(&layout, n, n, |i, j| lift(&orders_of(n, &[i, j]), &zero))?;
        let inverse = hessian.inverse()?;

        // (A_{0j} - A_{x^j}) with A_{0j} = A_{x^k y^j} (y^k + t_k)
        let ys: Vec<Jet> = (0..n)
            .map(|k| Jet::variable(&layout, k, p.y[k]))
            .collect::<Result<_>>()?;
        let mut forcing = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = -&lift(&zero, &unit(n, j));
            for (k, yk) in ys.iter().enumerate() {
                acc = &acc + &(&lift(&unit(n, j), &unit(n, k)) * yk);
            }
            forcing.push(acc);
        }
        let components = (0..n)
            .map(|i| {
                let mut acc = Jet::zero(&layout);
                for (j, f) in forcing.iter().enumerate() {
                    acc = &acc + &(f * inverse.get(i, j));
                }
                acc.scale(0.5)
            })
            .collect();
        Ok(Self {
            point: p.clone(),
            x_direction: x_direction.map(<[f64]>::to_vec),
            components,
        })
    }

    pub fn point(&self) -> &EvalPoint {
        &self.point
    }

    pub fn x_direction(&self) -> Option<&[f64]> {
        self.x_direction.as_deref()
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Jet {
        &self.components[i]
    }

    /// `G^i` at the base point.
    pub fn value(&self, i: usize) -> f64 {
        self.components[i].value()
    }

    /// `d^{|idx|+s_order} G^i / dy^{idx} ds^{s_order}` at the base point,
    /// where `s` moves `x` along the jet's x-direction.
    pub fn partial(&self, i: usize, y_indices: &[usize], s_order: u32) -> Result<f64> {
        let n = self.dimension();
        let mut alpha = orders_of(n, y_indices);
        match (&self.x_direction, s_order) {
            (Some(_), s) => alpha.push(s),
            (None, 0) => {}
            (None, _) => {
                return Err(Error::ShapeMismatch(
                    "x-derivative requested from a jet without an x-direction".into(),
                ))
            }
        }
        self.components[i].extract_partial(&alpha)
    }

    fn y_tensor(&self, y_order: usize, s_order: u32) -> Result<TensorValue> {
        let n = self.dimension();
        let mut err = None;
        let t = TensorValue::from_fn(n, 1, y_order, |ix| {
            self.partial(ix[0], &ix[1..], s_order).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        });
        match err {
            Some(e) => Err(e),
            None => Ok(t),
        }
    }
}

/// [`SprayJet::build`].
pub fn spray_jet(
    spec: &MetricSpec,
    p: &EvalPoint,
    y_order: usize,
    x_direction: Option<&[f64]>,
) -> Result<SprayJet> {
    SprayJet::build(spec, p, y_order, x_direction)
}

/// `N^i_j = dG^i/dy^j`.
pub fn nonlinear_connection(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    SprayJet::build(spec, p, 1, None)?.y_tensor(1, 0)
}

/// `G^i_jk = d^2 G^i / dy^j dy^k`.
pub fn berwald_connection(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    SprayJet::build(spec, p, 2, None)?.y_tensor(2, 0)
}

/// `B^i_jkl = d^3 G^i / dy^j dy^k dy^l`.
pub fn berwald_curvature(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    SprayJet::build(spec, p, 3, None)?.y_tensor(3, 0)
}

fn trace_berwald(b: &TensorValue) -> TensorValue {
    let n = b.n;
    TensorValue::from_fn(n, 0, 2, |ix| {
        0.5 * (0..n).map(|m| b.get(&[m, ix[0], m, ix[1]])).sum::<f64>()
    })
}

/// `E_ij = 1/2 B^m_imj`.
pub fn mean_berwald(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    Ok(trace_berwald(&berwald_curvature(spec, p)?))
}

/// `L_ijk = -1/2 y_s B^s_ijk`. Needs `A > 0` for `y_s`.
pub fn landsberg_curvature(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let yl = lowered_y(spec, p)?;
    Ok(landsberg_from(&berwald_curvature(spec, p)?, &yl.comps))
}

fn landsberg_from(b: &TensorValue, y_lower: &[f64]) -> TensorValue {
    b.contract(0, y_lower).scale(-0.5)
}

/// H-curvature, the Berwald horizontal derivative of `E` along `y`.
pub fn h_curvature(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let jet = SprayJet::build(spec, p, 4, Some(&p.y))?;
    h_from_jet(&jet)
}

fn h_from_jet(jet: &SprayJet) -> Result<TensorValue> {
    let n = jet.dimension();
    let y = &jet.point().y;
    debug_assert_eq!(jet.x_direction(), Some(y.as_slice()));
    let g = jet.y_tensor(0, 0)?;
    let nl = jet.y_tensor(1, 0)?;
    let e = trace_berwald(&jet.y_tensor(3, 0)?);
    let mut dy_e = vec![0.0; n * n * n];
    let mut along_e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                along_e[i * n + j] += 0.5 * jet.partial(m, &[m, i, j], 1)?;
                for s in 0..n {
                    dy_e[(i * n + j) * n + s] += 0.5 * jet.partial(m, &[m, i, j, s], 0)?;
                }
            }
        }
    }
    Ok(TensorValue::from_fn(n, 0, 2, |ix| {
        let (i, j) = (ix[0], ix[1]);
        let mut h = along_e[i * n + j];
        for s in 0..n {
            h -= 2.0 * g.comps[s] * dy_e[(i * n + j) * n + s];
            h -= nl.get(&[s, i]) * e.get(&[s, j]);
            h -= nl.get(&[s, j]) * e.get(&[i, s]);
        }
        h
    }))
}

/// `R^i_k`, with `dG/dx^k` from one x-directional jet per coordinate.
pub fn riemann_curvature(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorValue> {
    let along_y = SprayJet::build(spec, p, 2, Some(&p.y))?;
    riemann_from_jet(spec, &along_y)
}

fn riemann_from_jet(spec: &MetricSpec, along_y: &SprayJet) -> Result<TensorValue> {
    let n = spec.dimension();
    let p = along_y.point();
    let mut dx_g = DMatrix::zeros(n, n);
    for k in 0..n {
        let dir: Vec<f64> = unit(n, k).iter().map(|&v| v as f64).collect();
        let jet = SprayJet::build(spec, p, 1, Some(&dir))?;
        for i in 0..n {
            dx_g[(i, k)] = jet.partial(i, &[], 1)?;
        }
    }
    let g = along_y.y_tensor(0, 0)?;
    let nl = along_y.y_tensor(1, 0)?;
    let gjk = along_y.y_tensor(2, 0)?;
    let mut out = TensorValue::zeros(n, 1, 1);
    for i in 0..n {
        for k in 0..n {
            let mut r = 2.0 * dx_g[(i, k)] - along_y.partial(i, &[k], 1)?;
            for j in 0..n {
                r += 2.0 * g.comps[j] * gjk.get(&[i, j, k]) - nl.get(&[i, j]) * nl.get(&[j, k]);
            }
            out.comps[i * n + k] = r;
        }
    }
    Ok(out)
}

/// Every spray-derived tensor at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SprayCurvatures {
    pub spray: TensorValue,
    pub nonlinear_connection: TensorValue,
    pub berwald_connection: TensorValue,
    pub berwald: TensorValue,
    pub mean_berwald: TensorValue,
    pub h: TensorValue,
    pub riemann: TensorValue,
}

impl SprayCurvatures {
    /// One order-4 jet along `v = y` plus `n` first-order coordinate jets.
    pub fn compute(spec: &MetricSpec, p: &EvalPoint) -> Result<Self> {
        let jet = SprayJet::build(spec, p, 4, Some(&p.y))?;
        let berwald = jet.y_tensor(3, 0)?;
        Ok(Self {
            spray: jet.y_tensor(0, 0)?,
            nonlinear_connection: jet.y_tensor(1, 0)?,
            berwald_connection: jet.y_tensor(2, 0)?,
            mean_berwald: trace_berwald(&berwald),
            h: h_from_jet(&jet)?,
            riemann: riemann_from_jet(spec, &jet)?,
            berwald,
        })
    }

    /// Landsberg curvature given the lowered direction `y_i`.
    pub fn landsberg(&self, y_lower: &[f64]) -> TensorValue {
        landsberg_from(&self.berwald, y_lower)
    }
}

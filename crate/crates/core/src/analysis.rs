//! Isotropy fits and the rationality check.
//!
//! At a fixed base point `x` the direction space is sampled, every tensor is
//! evaluated per sample, and two relations are fitted by least squares:
//!
//! * isotropic Landsberg, `L = c F C` with a scalar `c`;
//! * isotropic H-curvature, `H = (n+1)/(2F) theta(y) h` with a 1-form
//!   `theta(y) = theta_k y^k`.
//!
//! The outcome is sorted into verdicts. A fit that explains a non-zero `L`
//! (with `C` non-zero) or a non-zero `H` lands in a forbidden quadrant: for
//! m-th root metrics those combinations cannot occur, and observing one is
//! reported as [`LandsbergVerdict::Forbidden`] / [`HVerdict::Forbidden`].
//!
//! [`rationality_check`] fits `det(A_ij) G^i` by a polynomial in `y` of total
//! degree at most `(n-1)(m-2) + m` and reports the held-out residual.
//!
//! Sample evaluation runs on the ambient rayon pool; every reduction is a
//! sequential fold in sample order, so results do not depend on thread count.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::metric_tensors::{angular_metric, cartan_tensor, finsler_norm, lowered_y};
use crate::spray_curvature::{spray, SprayCurvatures};
use crate::tensor::TensorValue;
use crate::tensor_core::{eval_a, y_hessian, EvalPoint, MetricSpec};

/// A quantity counts as zero below this max-abs norm.
pub const ZERO_TOL: f64 = 1e-6;
/// A fit counts as exact below this relative residual.
pub const FIT_TOL: f64 = 1e-6;
/// Held-out residual below which `det(A_ij) G^i` counts as polynomial.
pub const RATIONAL_TOL: f64 = 1e-7;
/// Targets with Frobenius norm below this are treated as exactly zero.
pub const TARGET_ZERO: f64 = 1e-12;
/// Draws allowed per requested sample before giving up.
pub const MAX_DRAWS_PER_SAMPLE: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub fitted: Vec<f64>,
    pub residual_rel: f64,
    pub samples_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    /// Directions are drawn with `|y|` uniform in this interval.
    pub radius: (f64, f64),
    /// Reject directions with `A <= 0`.
    pub positivity_filter: bool,
}

impl SamplePlan {
    pub fn new(seed: u64, count: usize) -> Self {
        Self {
            seed,
            count,
            radius: (0.5, 2.0),
            positivity_filter: true,
        }
    }
}

/// Seeded sample directions at `x` with their rejection statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub points: Vec<EvalPoint>,
    pub draws: usize,
}

impl SampleSet {
    pub fn acceptance_rate(&self) -> f64 {
        self.points.len() as f64 / self.draws as f64
    }
}

/// Draw directions uniformly on the unit sphere, scale them into
/// `plan.radius`, and keep those with `A > 0` (when filtering) and a
/// non-degenerate `A_ij`.
pub fn sample_directions(spec: &MetricSpec, x: &[f64], plan: &SamplePlan) -> Result<SampleSet> {
    let n = spec.dimension();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if plan.count == 0 {
        return Err(Error::InvalidPoint(
            "sample plan count must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let max_draws = plan.count * MAX_DRAWS_PER_SAMPLE;
    let mut points = Vec::with_capacity(plan.count);
    let mut draws = 0;
    while points.len() < plan.count {
        if draws == max_draws {
            return Err(Error::SamplingStarved {
                requested: plan.count,
                accepted: points.len(),
                attempts: draws,
            });
        }
        draws += 1;
        let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let radius = rng.random_range(plan.radius.0..=plan.radius.1);
        if norm == 0.0 {
            continue;
        }
        let y = dir.iter().map(|v| v * radius / norm).collect();
        let p = EvalPoint::new(x.to_vec(), y)?;
        if plan.positivity_filter && eval_a(spec, &p)? <= 0.0 {
            continue;
        }
        let hess = y_hessian(spec, &p)?;
        let det = hess.determinant();
        if det.is_nan() || det.abs() < linalg::degeneracy_threshold(&hess) {
            continue;
        }
        points.push(p);
    }
    Ok(SampleSet { points, draws })
}

/// Everything the fits need at one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEval {
    pub point: EvalPoint,
    pub norm: f64,
    pub fundamental_norm: f64,
    pub cartan: TensorValue,
    pub angular: TensorValue,
    pub landsberg: TensorValue,
    pub curvatures: SprayCurvatures,
}

impl SampleEval {
    pub fn compute(spec: &MetricSpec, p: &EvalPoint) -> Result<Self> {
        let curvatures = SprayCurvatures::compute(spec, p)?;
        let yl = lowered_y(spec, p)?;
        Ok(Self {
            point: p.clone(),
            norm: finsler_norm(spec, p)?,
            fundamental_norm: crate::metric_tensors::fundamental_tensor(spec, p)?.norm(),
            cartan: cartan_tensor(spec, p)?,
            angular: angular_metric(spec, p)?,
            landsberg: curvatures.landsberg(&yl.comps),
            curvatures,
        })
    }
}

/// Evaluate all samples in parallel, keeping sample order.
pub fn evaluate_samples(spec: &MetricSpec, points: &[EvalPoint]) -> Result<Vec<SampleEval>> {
    points
        .par_iter()
        .map(|p| SampleEval::compute(spec, p))
        .collect()
}

fn max_norm<'a>(tensors: impl Iterator<Item = &'a TensorValue>) -> f64 {
    tensors.fold(0.0, |acc, t| acc.max(t.norm()))
}

/// `max ||C|| / (1 + ||g||^(3/2))` over the evaluated samples.
pub fn riemannian_residual_of(samples: &[SampleEval]) -> f64 {
    samples.iter().fold(0.0, |acc, s| {
        acc.max(s.cartan.norm() / (1.0 + s.fundamental_norm.powf(1.5)))
    })
}

/// Scale-normalized Cartan norm; below [`ZERO_TOL`] the metric is classified
/// Riemannian at `x`.
pub fn riemannian_residual(spec: &MetricSpec, x: &[f64], plan: &SamplePlan) -> Result<f64> {
    let set = sample_directions(spec, x, plan)?;
    let samples: Vec<f64> = set
        .points
        .par_iter()
        .map(|p| -> Result<f64> {
            let c = cartan_tensor(spec, p)?.norm();
            let g = crate::metric_tensors::fundamental_tensor(spec, p)?.norm();
            Ok(c / (1.0 + g.powf(1.5)))
        })
        .collect::<Result<_>>()?;
    Ok(samples.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandsbergVerdict {
    /// `C` vanishes on the samples.
    Riemannian,
    /// `L` vanishes while `C` does not.
    Landsberg,
    /// No scalar `c` explains `L` by `c F C`.
    NotIsotropic,
    /// `L = c F C` fits with `L` and `C` both non-zero.
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandsbergReport {
    pub fit: FitResult,
    pub landsberg_norm: f64,
    pub cartan_norm: f64,
    pub verdict: LandsbergVerdict,
}

/// Least-squares `c` for `L = c F C` over the evaluated samples.
pub fn landsberg_fit_of(samples: &[SampleEval]) -> LandsbergReport {
    let landsberg_norm = max_norm(samples.iter().map(|s| &s.landsberg));
    let cartan_norm = max_norm(samples.iter().map(|s| &s.cartan));
    let riemannian = cartan_norm < ZERO_TOL;

    let (mut num, mut den, mut target) = (0.0, 0.0, 0.0);
    for s in samples {
        for (l, c) in s.landsberg.comps.iter().zip(&s.cartan.comps) {
            let fc = s.norm * c;
            num += l * fc;
            den += fc * fc;
            target += l * l;
        }
    }
    let fit = if riemannian || target.sqrt() < TARGET_ZERO || den == 0.0 {
        FitResult {
            fitted: vec![0.0],
            residual_rel: 0.0,
            samples_used: samples.len(),
        }
    } else {
        let c = num / den;
        let mut unexplained = 0.0;
        for s in samples {
            for (l, cc) in s.landsberg.comps.iter().zip(&s.cartan.comps) {
                let r = l - c * s.norm * cc;
                unexplained += r * r;
            }
        }
        FitResult {
            fitted: vec![c],
            residual_rel: (unexplained / target).sqrt(),
            samples_used: samples.len(),
        }
    };
    let verdict = if riemannian {
        LandsbergVerdict::Riemannian
    } else if landsberg_norm < ZERO_TOL {
        LandsbergVerdict::Landsberg
    } else if fit.residual_rel >= FIT_TOL {
        LandsbergVerdict::NotIsotropic
    } else {
        LandsbergVerdict::Forbidden
    };
    LandsbergReport {
        fit,
        landsberg_norm,
        cartan_norm,
        verdict,
    }
}

pub fn landsberg_isotropy_fit(
    spec: &MetricSpec,
    x: &[f64],
    plan: &SamplePlan,
) -> Result<LandsbergReport> {
    let set = sample_directions(spec, x, plan)?;
    Ok(landsberg_fit_of(&evaluate_samples(spec, &set.points)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HVerdict {
    /// `H` vanishes on the samples.
    Flat,
    /// No 1-form explains `H`.
    NotIsotropic,
    /// `H = (n+1)/(2F) theta h` fits with `H` non-zero.
    Forbidden,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HReport {
    pub fit: FitResult,
    pub h_norm: f64,
    pub verdict: HVerdict,
}

/// Least-squares 1-form `theta` for `H = (n+1)/(2F) (theta_k y^k) h`.
pub fn h_fit_of(samples: &[SampleEval]) -> Result<HReport> {
    let n = samples
        .first()
        .map(|s| s.point.dimension())
        .ok_or(Error::Underdetermined {
            samples: 0,
            unknowns: 0,
            required: 1,
        })?;
    if samples.len() < n + 2 {
        return Err(Error::Underdetermined {
            samples: samples.len(),
            unknowns: n,
            required: n + 2,
        });
    }
    let h_norm = max_norm(samples.iter().map(|s| &s.curvatures.h));
    let rows = samples.len() * n * n;
    let mut design = DMatrix::zeros(rows, n);
    let mut target = DVector::zeros(rows);
    for (si, s) in samples.iter().enumerate() {
        let w = (n as f64 + 1.0) / (2.0 * s.norm);
        for ij in 0..n * n {
            let r = si * n * n + ij;
            target[r] = s.curvatures.h.comps[ij];
            for k in 0..n {
                design[(r, k)] = w * s.point.y[k] * s.angular.comps[ij];
            }
        }
    }
    let target_norm = target.norm();
    let fit = if target_norm < TARGET_ZERO {
        FitResult {
            fitted: vec![0.0; n],
            residual_rel: 0.0,
            samples_used: samples.len(),
        }
    } else {
        let theta = least_squares(&design, &target)?;
        let residual = (&target - &design * &theta).norm() / target_norm;
        FitResult {
            fitted: theta.iter().copied().collect(),
            residual_rel: residual,
            samples_used: samples.len(),
        }
    };
    let verdict = if h_norm < ZERO_TOL {
        HVerdict::Flat
    } else if fit.residual_rel >= FIT_TOL {
        HVerdict::NotIsotropic
    } else {
        HVerdict::Forbidden
    };
    Ok(HReport {
        fit,
        h_norm,
        verdict,
    })
}

pub fn h_isotropy_fit(spec: &MetricSpec, x: &[f64], plan: &SamplePlan) -> Result<HReport> {
    let n = spec.dimension();
    if plan.count < n + 2 {
        return Err(Error::Underdetermined {
            samples: plan.count,
            unknowns: n,
            required: n + 2,
        });
    }
    let set = sample_directions(spec, x, plan)?;
    h_fit_of(&evaluate_samples(spec, &set.points)?)
}

/// Column-scaled SVD least squares.
fn least_squares(design: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
    let scales: Vec<f64> = design
        .column_iter()
        .map(|c| {
            let s = c.norm();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = scaled.svd(true, true);
    let sol = svd
        .solve(target, 1e-13)
        .map_err(|e| Error::ShapeMismatch(format!("least squares failed: {e}")))?;
    Ok(DVector::from_iterator(
        sol.len(),
        sol.iter().zip(&scales).map(|(v, s)| v / s),
    ))
}

/// Degree bound for `det(A_ij) G^i`: `A_{0j} - A_{x^j}` has degree `m` and
/// the adjugate of `A_ij` degree `(n-1)(m-2)`.
pub fn rationality_degree_bound(n: usize, m: usize) -> usize {
    (n - 1) * (m - 2) + m
}

/// All exponent vectors in `n` variables of total degree at most `d`.
pub fn monomials_up_to(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, pos: usize, left: u32) {
        if pos == cur.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[pos] = e;
            rec(out, cur, pos + 1, left - e);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    rec(&mut out, &mut vec![0; n], 0, d as u32);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalityReport {
    pub degree_bound: usize,
    pub monomials: usize,
    pub is_polynomial: Vec<bool>,
    /// Largest held-out relative residual over the components.
    pub heldout_residual: f64,
    pub component_residuals: Vec<f64>,
}

/// Fit `Q^i = det(A_ij) G^i` by a polynomial of total degree at most
/// [`rationality_degree_bound`] on the first half of the samples and score
/// it on the second half.
pub fn rationality_check(
    spec: &MetricSpec,
    x: &[f64],
    plan: &SamplePlan,
) -> Result<RationalityReport> {
    let n = spec.dimension();
    let degree_bound = rationality_degree_bound(n, spec.degree());
    let basis = monomials_up_to(n, degree_bound);
    if plan.count < 2 * basis.len() {
        return Err(Error::Underdetermined {
            samples: plan.count,
            unknowns: basis.len(),
            required: 2 * basis.len(),
        });
    }
    let set = sample_directions(spec, x, plan)?;
    let values: Vec<Vec<f64>> = set
        .points
        .par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let det = y_hessian(spec, p)?.determinant();
            Ok(spray(spec, p)?.comps.iter().map(|g| det * g).collect())
        })
        .collect::<Result<_>>()?;

    let half = set.points.len() / 2;
    let design_of = |pts: &[EvalPoint]| {
        DMatrix::from_fn(pts.len(), basis.len(), |r, c| {
            basis[c]
                .iter()
                .zip(&pts[r].y)
                .map(|(&e, &y)| y.powi(e as i32))
                .product()
        })
    };
    let train = design_of(&set.points[..half]);
    let test = design_of(&set.points[half..]);

    let mut component_residuals = Vec::with_capacity(n);
    for i in 0..n {
        let train_t = DVector::from_iterator(half, values[..half].iter().map(|v| v[i]));
        let test_t =
            DVector::from_iterator(values.len() - half, values[half..].iter().map(|v| v[i]));
        let scale = train_t.norm().max(test_t.norm());
        if scale < TARGET_ZERO {
            component_residuals.push(0.0);
            continue;
        }
        let coef = least_squares(&train, &train_t)?;
        let resid = (&test_t - &test * &coef).norm() / test_t.norm().max(TARGET_ZERO);
        component_residuals.push(resid);
    }
    Ok(RationalityReport {
        degree_bound,
        monomials: basis.len(),
        is_polynomial: component_residuals
            .iter()
            .map(|&r| r < RATIONAL_TOL)
            .collect(),
        heldout_residual: component_residuals.iter().copied().fold(0.0, f64::max),
        component_residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub riemannian: bool,
    pub landsberg: bool,
    pub berwald: bool,
    pub weakly_berwald: bool,
    pub h_flat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub riemannian_residual: f64,
    pub landsberg_fit: LandsbergReport,
    pub h_fit: HReport,
    pub rationality: RationalityReport,
    pub berwald_norm: f64,
    pub mean_berwald_norm: f64,
    pub verdicts: Verdicts,
}

impl Classification {
    /// A forbidden quadrant of either dichotomy was observed.
    pub fn forbidden(&self) -> bool {
        self.landsberg_fit.verdict == LandsbergVerdict::Forbidden
            || self.h_fit.verdict == HVerdict::Forbidden
    }
}

/// Run both fits and the rationality check at `x`. The rationality check
/// draws at least twice as many samples as its monomial basis needs.
pub fn classify(spec: &MetricSpec, x: &[f64], plan: &SamplePlan) -> Result<Classification> {
    let set = sample_directions(spec, x, plan)?;
    let samples = evaluate_samples(spec, &set.points)?;
    let landsberg_fit = landsberg_fit_of(&samples);
    let h_fit = h_fit_of(&samples)?;
    let basis = monomials_up_to(
        spec.dimension(),
        rationality_degree_bound(spec.dimension(), spec.degree()),
    );
    let rational_plan = SamplePlan {
        count: plan.count.max(2 * basis.len() + 2),
        ..*plan
    };
    let rationality = rationality_check(spec, x, &rational_plan)?;
    let berwald_norm = max_norm(samples.iter().map(|s| &s.curvatures.berwald));
    let mean_berwald_norm = max_norm(samples.iter().map(|s| &s.curvatures.mean_berwald));
    let riemannian_residual = riemannian_residual_of(&samples);
    let verdicts = Verdicts {
        riemannian: riemannian_residual < ZERO_TOL,
        landsberg: landsberg_fit.landsberg_norm < ZERO_TOL,
        berwald: berwald_norm < ZERO_TOL,
        weakly_berwald: mean_berwald_norm < ZERO_TOL,
        h_flat: h_fit.h_norm < ZERO_TOL,
    };
    Ok(Classification {
        riemannian_residual,
        landsberg_fit,
        h_fit,
        rationality,
        berwald_norm,
        mean_berwald_norm,
        verdicts,
    })
}

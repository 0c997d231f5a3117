//! The `mroot` command line: `validate | report | verify | classify`, plus
//! `catalog` to export built-in metrics as spec files.
//!
//! JSON goes to standard output as one document with numbers written to 17
//! significant digits; diagnostics go to standard error. Exit codes:
//!
//! | code | meaning                                       |
//! |------|-----------------------------------------------|
//! | 0    | ok                                            |
//! | 1    | a check failed or a forbidden quadrant showed |
//! | 2    | input error                                   |
//! | 3    | degenerate `A_ij` at the requested point      |
//! | 4    | sampling starved                              |
//!
//! [`run`] returns the captured streams and exit code so the whole front end
//! is testable in-process; the binary only forwards them.

use std::ffi::OsString;
use std::io;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::analysis::{self, SamplePlan};
use crate::catalog;
use crate::error::Error;
use crate::linalg;
use crate::metric_tensors::{
    a_hessian_signature, angular_metric, cartan_tensor, finsler_norm, fundamental_tensor,
    identity_suite, inverse_fundamental, lowered_y, IdentityResiduals,
};
use crate::spec_file;
use crate::spray_curvature::{spray, spray_from_g_oracle, SprayCurvatures};
use crate::tensor::TensorValue;
use crate::tensor_core::{eval_a, y_hessian, EvalPoint, MetricSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_STARVED: i32 = 4;

pub const SCHEMA: &str = "mroot-report/1";

#[derive(Debug, Parser)]
#[command(
    name = "mroot",
    about = "Curvature of m-th root Finsler metrics",
    version
)]
pub struct Cli {
    /// Worker threads for sample evaluation (falls back to MROOT_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a metric spec file.
    Validate { path: PathBuf },
    /// Every tensor at one point, as JSON.
    Report {
        path: PathBuf,
        /// Base point, comma separated (default: origin).
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Direction, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Identity, oracle, homogeneity and contraction checks over samples.
    Verify {
        path: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
    },
    /// Isotropy fits, rationality check and verdicts, as JSON.
    Classify {
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a built-in metric as a spec file.
    Catalog { name: String },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: stderr.into(),
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Degenerate { .. } => EXIT_DEGENERATE,
        Error::SamplingStarved { .. } => EXIT_STARVED,
        Error::NonPositiveA { .. } | Error::Underdetermined { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_INPUT,
    }
}

fn from_error(err: Error) -> Outcome {
    Outcome::fail(exit_code_for(&err), format!("error: {err}\n"))
}

/// Parse `args` (including the program name) and execute.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome::ok(text)
            } else {
                Outcome::fail(code, text)
            };
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("MROOT_THREADS")
            .ok()
            .and_then(|v| v.trim().parse().ok())
    });
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads.filter(|&t| t > 0) {
        builder = builder.num_threads(t);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| execute(cli.command)),
        Err(e) => Outcome::fail(
            EXIT_INPUT,
            format!("error: cannot start thread pool: {e}\n"),
        ),
    }
}

fn execute(command: Command) -> Outcome {
    match command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Report { path, x, y } => cmd_report(&path, x.as_deref(), &y),
        Command::Verify {
            path,
            samples,
            seed,
            tol,
            x,
        } => cmd_verify(&path, samples, seed, tol, x.as_deref()),
        Command::Classify {
            path,
            x,
            samples,
            seed,
        } => cmd_classify(&path, x.as_deref(), samples, seed),
        Command::Catalog { name } => match catalog::catalog_metric(&name) {
            Ok(entry) => Outcome::ok(spec_file::to_json(&entry.spec) + "\n"),
            Err(e) => from_error(e),
        },
    }
}

fn load(path: &std::path::Path) -> Result<MetricSpec, Outcome> {
    spec_file::read_spec(path)
        .map_err(|e| Outcome::fail(EXIT_INPUT, format!("error: {}: {e}\n", path.display())))
}

fn parse_reals(flag: &str, text: &str, n: usize) -> Result<Vec<f64>, Outcome> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match values {
        Ok(v) if v.len() == n => Ok(v),
        Ok(v) => Err(Outcome::fail(
            EXIT_INPUT,
            format!(
                "error: --{flag} has {} components, the metric has dimension {n}\n",
                v.len()
            ),
        )),
        Err(e) => Err(Outcome::fail(
            EXIT_INPUT,
            format!("error: --{flag}: cannot parse `{text}`: {e}\n"),
        )),
    }
}

fn base_point(x: Option<&str>, n: usize) -> Result<Vec<f64>, Outcome> {
    match x {
        Some(text) => parse_reals("x", text, n),
        None => Ok(vec![0.0; n]),
    }
}

/// Writes every float with 17 significant digits.
struct SigDigits;

impl Formatter for SigDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// One-line JSON with 17-significant-digit numbers.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value
        .serialize(&mut ser)
        .expect("report values always serialize");
    let mut s = String::from_utf8(buf).expect("serde_json emits UTF-8");
    s.push('\n');
    s
}

pub fn cmd_validate(path: &std::path::Path) -> Outcome {
    match load(path) {
        Ok(spec) => Outcome::ok(format!(
            "ok: dimension {}, degree {}, {} coefficient(s){}\n",
            spec.dimension(),
            spec.degree(),
            spec.coefficients().len(),
            if spec.is_x_independent() {
                ", x-independent"
            } else {
                ""
            }
        )),
        Err(o) => o,
    }
}

#[derive(Debug, Serialize)]
struct TensorJson {
    con: usize,
    cov: usize,
    norm: f64,
    comps: Vec<f64>,
}

fn tensor_json(t: &TensorValue) -> Option<TensorJson> {
    t.comps.iter().all(|v| v.is_finite()).then(|| TensorJson {
        con: t.con,
        cov: t.cov,
        norm: t.norm(),
        comps: t.comps.clone(),
    })
}

#[derive(Debug, Serialize)]
struct PointJson {
    x: Vec<f64>,
    y: Vec<f64>,
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct ScalarsJson {
    A: f64,
    F: Option<f64>,
    det_A_ij: f64,
    /// (positive, negative, zero) eigenvalue counts of A_ij
    signature_A_ij: [usize; 3],
}

#[derive(Debug, Serialize)]
#[allow(non_snake_case)]
struct TensorsJson {
    g: Option<TensorJson>,
    g_inv: Option<TensorJson>,
    y_lowered: Option<TensorJson>,
    C: Option<TensorJson>,
    h: Option<TensorJson>,
    G: Option<TensorJson>,
    N: Option<TensorJson>,
    B: Option<TensorJson>,
    E: Option<TensorJson>,
    L: Option<TensorJson>,
    H: Option<TensorJson>,
    R: Option<TensorJson>,
}

#[derive(Debug, Serialize)]
struct ResidualsJson {
    identity_suite: Option<IdentityResiduals>,
    spray_oracle: Option<f64>,
}

#[derive(Debug, Serialize)]
struct FlagsJson {
    positive_definite: bool,
    domain_ok: bool,
}

/// Single-point report payload.
#[derive(Debug, Serialize)]
struct CurvatureReport {
    schema: &'static str,
    kind: &'static str,
    /// Tensor components are row-major, upper indices first.
    layout: &'static str,
    point: PointJson,
    scalars: ScalarsJson,
    tensors: TensorsJson,
    residuals: ResidualsJson,
    flags: FlagsJson,
}

/// Largest difference relative to `max(1, |a|, |b|)`.
pub fn mixed_residual(a: &[f64], b: &[f64]) -> f64 {
    let diff = a
        .iter()
        .zip(b)
        .fold(0.0f64, |acc, (u, v)| acc.max((u - v).abs()));
    diff / linalg::max_abs(a).max(linalg::max_abs(b)).max(1.0)
}

pub fn cmd_report(path: &std::path::Path, x: Option<&str>, y: &str) -> Outcome {
    let spec = match load(path) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let n = spec.dimension();
    let point = match base_point(x, n)
        .and_then(|x| parse_reals("y", y, n).map(|y| (x, y)))
        .and_then(|(x, y)| EvalPoint::new(x, y).map_err(from_error))
    {
        Ok(p) => p,
        Err(o) => return o,
    };
    match build_report(&spec, &point) {
        Ok(report) => Outcome::ok(to_json_line(&report)),
        Err(e) => from_error(e),
    }
}

fn build_report(spec: &MetricSpec, p: &EvalPoint) -> crate::Result<CurvatureReport> {
    let n = spec.dimension();
    let a = eval_a(spec, p)?;
    let hess = y_hessian(spec, p)?;
    let det = hess.determinant();
    linalg::invert_checked(&hess)?;
    let (pos, neg, zero) = a_hessian_signature(spec, p)?;
    let domain_ok = a > 0.0;

    let curv = SprayCurvatures::compute(spec, p)?;
    let fractional =
        |f: &dyn Fn() -> crate::Result<TensorValue>| -> crate::Result<Option<TensorJson>> {
            if domain_ok {
                Ok(tensor_json(&f()?))
            } else {
                Ok(None)
            }
        };
    let landsberg = if domain_ok {
        let yl = lowered_y(spec, p)?;
        tensor_json(&curv.landsberg(&yl.comps))
    } else {
        None
    };
    let spray_oracle = if domain_ok {
        match spray_from_g_oracle(spec, p) {
            Ok(oracle) => Some(mixed_residual(&spray(spec, p)?.comps, &oracle.comps)),
            Err(Error::Degenerate { .. }) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(CurvatureReport {
        schema: SCHEMA,
        kind: "report",
        layout: "row-major, upper indices first",
        point: PointJson {
            x: p.x.clone(),
            y: p.y.clone(),
        },
        scalars: ScalarsJson {
            A: a,
            F: if domain_ok {
                Some(finsler_norm(spec, p)?)
            } else {
                None
            },
            det_A_ij: det,
            signature_A_ij: [pos, neg, zero],
        },
        tensors: TensorsJson {
            g: fractional(&|| fundamental_tensor(spec, p))?,
            g_inv: fractional(&|| inverse_fundamental(spec, p))?,
            y_lowered: fractional(&|| lowered_y(spec, p))?,
            C: fractional(&|| cartan_tensor(spec, p))?,
            h: fractional(&|| angular_metric(spec, p))?,
            G: tensor_json(&curv.spray),
            N: tensor_json(&curv.nonlinear_connection),
            B: tensor_json(&curv.berwald),
            E: tensor_json(&curv.mean_berwald),
            L: landsberg,
            H: tensor_json(&curv.h),
            R: tensor_json(&curv.riemann),
        },
        residuals: ResidualsJson {
            identity_suite: if domain_ok {
                Some(identity_suite(spec, p)?)
            } else {
                None
            },
            spray_oracle,
        },
        flags: FlagsJson {
            positive_definite: pos == n,
            domain_ok,
        },
    })
}

/// Named maximum residuals from [`verify_samples`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub checks: Vec<(String, f64)>,
}

impl VerifySummary {
    pub fn max(&self) -> f64 {
        self.checks.iter().map(|c| c.1).fold(0.0, f64::max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.checks.iter().find(|c| c.0 == name).map(|c| c.1)
    }
}

struct PointChecks(Vec<(String, f64)>);

impl PointChecks {
    fn push(&mut self, name: impl Into<String>, v: f64) {
        self.0.push((name.into(), v));
    }
}

fn contraction_residual(t: &TensorValue, slot: usize, y: &[f64]) -> f64 {
    let ynorm = linalg::max_abs(y);
    t.contract(slot, y).norm() / (t.norm() * ynorm).max(1.0)
}

fn point_checks(spec: &MetricSpec, p: &EvalPoint) -> crate::Result<PointChecks> {
    let mut out = PointChecks(Vec::new());
    for (name, v) in identity_suite(spec, p)?.as_array() {
        out.push(format!("identity.{name}"), v);
    }
    let g_spray = spray(spec, p)?;
    out.push(
        "spray.oracle",
        mixed_residual(&g_spray.comps, &spray_from_g_oracle(spec, p)?.comps),
    );
    let n = spec.dimension();
    let gi = inverse_fundamental(spec, p)?.to_matrix();
    let g = fundamental_tensor(spec, p)?;
    let ident = gi * g.to_matrix();
    out.push(
        "inverse.g",
        mixed_residual(ident.as_slice(), DMatrix::<f64>::identity(n, n).as_slice()),
    );

    let base = Tensors::at(spec, p)?;
    for lambda in [0.5, 2.0] {
        let scaled = Tensors::at(spec, &p.scaled(lambda)?)?;
        for ((name, degree, t0), (_, _, t1)) in base.graded().into_iter().zip(scaled.graded()) {
            let expected = t0.scale(lambda.powi(degree));
            let r = mixed_residual(&t1.comps, &expected.comps);
            out.push(name, r);
        }
    }

    let y = &p.y;
    out.push("contraction.C", contraction_residual(&base.cartan, 0, y));
    out.push("contraction.h", contraction_residual(&base.angular, 1, y));
    out.push(
        "contraction.E",
        contraction_residual(&base.curv.mean_berwald, 1, y),
    );
    out.push("contraction.L", contraction_residual(&base.landsberg, 0, y));
    out.push("contraction.H", contraction_residual(&base.curv.h, 1, y));
    out.push(
        "contraction.R",
        contraction_residual(&base.curv.riemann, 1, y),
    );

    let sym = |t: &TensorValue, k: usize| t.symmetry_residual(k) / t.norm().max(1.0);
    out.push("symmetry.C", sym(&base.cartan, 3));
    out.push("symmetry.B", sym(&base.curv.berwald, 3));
    out.push("symmetry.L", sym(&base.landsberg, 3));
    out.push("symmetry.E", sym(&base.curv.mean_berwald, 2));
    out.push("symmetry.H", sym(&base.curv.h, 2));
    Ok(out)
}

struct Tensors {
    fundamental: TensorValue,
    cartan: TensorValue,
    angular: TensorValue,
    landsberg: TensorValue,
    curv: SprayCurvatures,
}

impl Tensors {
    fn at(spec: &MetricSpec, p: &EvalPoint) -> crate::Result<Self> {
        let curv = SprayCurvatures::compute(spec, p)?;
        let yl = lowered_y(spec, p)?;
        Ok(Self {
            fundamental: fundamental_tensor(spec, p)?,
            cartan: cartan_tensor(spec, p)?,
            angular: angular_metric(spec, p)?,
            landsberg: curv.landsberg(&yl.comps),
            curv,
        })
    }

    /// `(check name, homogeneity degree in y, tensor)`.
    fn graded(&self) -> Vec<(&'static str, i32, &TensorValue)> {
        vec![
            ("homogeneity.g", 0, &self.fundamental),
            ("homogeneity.C", -1, &self.cartan),
            ("homogeneity.h", 0, &self.angular),
            ("homogeneity.G", 2, &self.curv.spray),
            ("homogeneity.N", 1, &self.curv.nonlinear_connection),
            ("homogeneity.B", -1, &self.curv.berwald),
            ("homogeneity.E", -1, &self.curv.mean_berwald),
            ("homogeneity.L", 0, &self.landsberg),
            ("homogeneity.H", 0, &self.curv.h),
            ("homogeneity.R", 2, &self.curv.riemann),
        ]
    }
}

/// Run every verification check at each point; report the worst residual
/// per check, in a fixed check order.
///
/// Residuals are relative to `max(1, |values|)` except the identity suite,
/// which is purely relative.
pub fn verify_samples(spec: &MetricSpec, points: &[EvalPoint]) -> crate::Result<VerifySummary> {
    use rayon::prelude::*;
    let per_point: Vec<PointChecks> = points
        .par_iter()
        .map(|p| point_checks(spec, p))
        .collect::<crate::Result<_>>()?;
    let mut checks: Vec<(String, f64)> = Vec::new();
    for pc in &per_point {
        for (name, v) in &pc.0 {
            match checks.iter_mut().find(|c| &c.0 == name) {
                Some(c) => c.1 = c.1.max(*v),
                None => checks.push((name.clone(), *v)),
            }
        }
    }
    Ok(VerifySummary { checks })
}

pub fn cmd_verify(
    path: &std::path::Path,
    samples: usize,
    seed: u64,
    tol: f64,
    x: Option<&str>,
) -> Outcome {
    let spec = match load(path) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let x = match base_point(x, spec.dimension()) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let plan = SamplePlan::new(seed, samples);
    let set = match analysis::sample_directions(&spec, &x, &plan) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let summary = match verify_samples(&spec, &set.points) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let mut out = String::new();
    out.push_str(&format!(
        "verify: {} samples, seed {seed}, tol {tol:e}, x = {x:?}\n",
        set.points.len()
    ));
    out.push_str(&format!("{:<30} {:>24}  status\n", "check", "max residual"));
    let mut failed = 0;
    for (name, v) in &summary.checks {
        let ok = *v < tol;
        if !ok {
            failed += 1;
        }
        out.push_str(&format!(
            "{name:<30} {v:>24.16e}  {}\n",
            if ok { "pass" } else { "FAIL" }
        ));
    }
    out.push_str(&format!(
        "result: {} ({} of {} checks failed)\n",
        if failed == 0 { "pass" } else { "fail" },
        failed,
        summary.checks.len()
    ));
    Outcome {
        code: if failed == 0 {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        },
        stdout: out,
        stderr: String::new(),
    }
}

#[derive(Debug, Serialize)]
struct ClassificationJson<'a> {
    schema: &'static str,
    kind: &'static str,
    x: &'a [f64],
    samples: usize,
    seed: u64,
    #[serde(flatten)]
    classification: &'a analysis::Classification,
    forbidden_quadrant: bool,
}

pub fn cmd_classify(path: &std::path::Path, x: Option<&str>, samples: usize, seed: u64) -> Outcome {
    let spec = match load(path) {
        Ok(s) => s,
        Err(o) => return o,
    };
    let x = match base_point(x, spec.dimension()) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let plan = SamplePlan::new(seed, samples);
    let classification = match analysis::classify(&spec, &x, &plan) {
        Ok(c) => c,
        Err(e) => return from_error(e),
    };
    let forbidden = classification.forbidden();
    let stdout = to_json_line(&ClassificationJson {
        schema: SCHEMA,
        kind: "classification",
        x: &x,
        samples,
        seed,
        classification: &classification,
        forbidden_quadrant: forbidden,
    });
    let mut stderr = String::new();
    if forbidden {
        stderr.push_str(&format!(
            "FORBIDDEN QUADRANT: landsberg verdict {:?}, H verdict {:?}\n",
            classification.landsberg_fit.verdict, classification.h_fit.verdict
        ));
    }
    Outcome {
        code: if forbidden {
            EXIT_CHECK_FAILED
        } else {
            EXIT_OK
        },
        stdout,
        stderr,
    }
}

//! Acceptance gate: ten criteria at fixed tolerances, one PASS/FAIL line
//! each. Exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use mroot::analysis::{
    evaluate_samples, h_fit_of, landsberg_fit_of, rationality_check, rationality_degree_bound,
    sample_directions, LandsbergVerdict, SamplePlan,
};
use mroot::catalog::{self, CATALOG_NAMES};
use mroot::cli::verify_samples;
use mroot::metric_tensors::{
    angular_metric, cartan_tensor, fundamental_tensor, identity_suite, inverse_fundamental,
    lowered_y,
};
use mroot::spray_curvature::{spray, spray_from_g_oracle, SprayCurvatures};
use mroot::tensor_core::y_hessian;
use mroot::{EvalPoint, MetricSpec};

type Outcome = Result<String, String>;

fn samples(s: &MetricSpec, seed: u64, count: usize) -> Vec<EvalPoint> {
    let x = vec![0.0; s.dimension()];
    sample_directions(s, &x, &SamplePlan::new(seed, count))
        .unwrap()
        .points
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_identity_suite() -> Outcome {
    let mut worst = 0.0f64;
    for name in CATALOG_NAMES {
        let s = spec(name);
        for p in samples(&s, 1, 100) {
            worst = worst.max(identity_suite(&s, &p).unwrap().max());
        }
    }
    check(
        worst < 1e-9,
        format!("max relative residual {worst:.2e} over 4 x 100 samples (< 1e-9)"),
    )
}

fn c2_fundamental_tensor() -> Outcome {
    let (mut hess, mut inv) = (0.0f64, 0.0f64);
    for name in CATALOG_NAMES {
        let s = spec(name);
        let n = s.dimension();
        for p in samples(&s, 2, 20) {
            let fd: Vec<f64> = index_tuples(n, 2)
                .iter()
                .map(|ix| {
                    0.5 * fd_partial(|y| f_squared(&s, &p.x, y), &p.y, ix, fd_step(&p.y, 1e-3))
                })
                .collect();
            let g = fundamental_tensor(&s, &p).unwrap();
            hess = hess.max(rel(&g.comps, &fd));
            let prod = inverse_fundamental(&s, &p).unwrap().to_matrix() * g.to_matrix();
            inv = inv.max((prod - nalgebra::DMatrix::<f64>::identity(n, n)).amax());
        }
    }
    check(
        hess < 1e-6 && inv < 1e-9,
        format!("g vs FD Hessian {hess:.2e} (< 1e-6), |g^-1 g - I| {inv:.2e} (< 1e-9)"),
    )
}

fn c3_spray_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for name in CATALOG_NAMES {
        let s = spec(name);
        for p in samples(&s, 3, 100) {
            let direct = spray(&s, &p).unwrap();
            let oracle = spray_from_g_oracle(&s, &p).unwrap();
            worst = worst.max(rel(&direct.comps, &oracle.comps));
        }
    }
    let g = spray(&spec("conformal2"), &point(&[0.0, 0.0], &[1.0, 1.0]))
        .unwrap()
        .comps;
    let christoffel = (g[0] - 0.0).abs().max((g[1] - 1.0).abs());
    check(
        worst < 1e-8 && christoffel < 1e-10,
        format!("direct vs g-form {worst:.2e} (< 1e-8); conformal2 G - (0, 1) = {christoffel:.2e} (< 1e-10)"),
    )
}

fn c4_cartan_and_angular() -> Outcome {
    let (mut cartan, mut angular, mut contraction) = (0.0f64, 0.0f64, 0.0f64);
    for name in CATALOG_NAMES {
        let s = spec(name);
        let n = s.dimension();
        for p in samples(&s, 4, 10) {
            let fd: Vec<f64> = index_tuples(n, 3)
                .iter()
                .map(|ix| {
                    0.25 * fd_partial(|y| f_squared(&s, &p.x, y), &p.y, ix, fd_step(&p.y, 1e-2))
                })
                .collect();
            let c = cartan_tensor(&s, &p).unwrap();
            let g = fundamental_tensor(&s, &p).unwrap();
            let scale = c.norm().max(g.norm());
            let diff = c
                .comps
                .iter()
                .zip(&fd)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            cartan = cartan.max(diff / scale);

            let yl = lowered_y(&s, &p).unwrap().comps;
            let f2 = f_squared(&s, &p.x, &p.y);
            let want: Vec<f64> = index_tuples(n, 2)
                .iter()
                .map(|ix| g.get(ix) - yl[ix[0]] * yl[ix[1]] / f2)
                .collect();
            let ang = angular_metric(&s, &p).unwrap();
            angular = angular.max(mixed_rel(&ang.comps, &want));
            contraction = contraction
                .max(c.contract(0, &p.y).norm() / c.norm().max(1.0))
                .max(ang.contract(1, &p.y).norm() / g.norm().max(1.0));
        }
    }
    check(
        cartan < 1e-5 && angular < 1e-10 && contraction < 1e-10,
        format!(
            "C vs FD {cartan:.2e} (< 1e-5), h vs g - yy/F^2 {angular:.2e} (< 1e-10), y-contractions {contraction:.2e} (< 1e-10)"
        ),
    )
}

fn c5_degeneration() -> Outcome {
    let (mut riem, mut mink) = (0.0f64, 0.0f64);
    for entry in catalog::all() {
        let s = &entry.spec;
        for p in samples(s, 5, 50) {
            let all = SprayCurvatures::compute(s, &p).unwrap();
            let l = all.landsberg(&lowered_y(s, &p).unwrap().comps);
            if s.degree() == 2 {
                let c = cartan_tensor(s, &p).unwrap();
                for t in [&c, &l, &all.berwald, &all.mean_berwald, &all.h] {
                    riem = riem.max(t.norm());
                }
            }
            if s.is_x_independent() {
                for t in [&all.spray, &l, &all.h, &all.riemann] {
                    mink = mink.max(t.norm());
                }
            }
        }
    }
    check(
        riem < 1e-9 && mink < 1e-9,
        format!("m = 2: max |C|,|L|,|B|,|E|,|H| = {riem:.2e}; x-independent: max |G|,|L|,|H|,|R| = {mink:.2e} (< 1e-9)"),
    )
}

fn c6_homogeneity() -> Outcome {
    let mut worst = 0.0f64;
    let mut which = String::new();
    for name in CATALOG_NAMES {
        let s = spec(name);
        let summary = verify_samples(&s, &samples(&s, 6, 50)).unwrap();
        for (check, v) in &summary.checks {
            if check.starts_with("homogeneity.") && *v >= worst {
                worst = *v;
                which = format!("{name} {check}");
            }
        }
    }
    check(
        worst < 1e-8,
        format!("G N B E L H R g C h at lambda 1/2 and 2: worst {worst:.2e} ({which}) (< 1e-8)"),
    )
}

struct Grid {
    landsberg_hits: Vec<String>,
    h_hits: Vec<String>,
    bm_landsberg: bool,
    flat_ok: bool,
}

fn dichotomy_grid() -> Grid {
    let mut grid = Grid {
        landsberg_hits: Vec::new(),
        h_hits: Vec::new(),
        bm_landsberg: true,
        flat_ok: true,
    };
    for entry in catalog::all() {
        let s = &entry.spec;
        for seed in 0..10 {
            let evals = evaluate_samples(s, &samples(s, 100 + seed, 50)).unwrap();
            let l = landsberg_fit_of(&evals);
            if l.fit.residual_rel < 1e-6 && l.landsberg_norm > 1e-6 && l.cartan_norm > 1e-6 {
                grid.landsberg_hits
                    .push(format!("{} seed {seed}", entry.name));
            }
            let h = h_fit_of(&evals).unwrap();
            if h.fit.residual_rel < 1e-6 && h.h_norm > 1e-6 {
                grid.h_hits.push(format!("{} seed {seed}", entry.name));
            }
            if entry.name == "berwald_moor3" {
                grid.bm_landsberg &=
                    l.verdict == LandsbergVerdict::Landsberg && l.fit.fitted == [0.0];
            }
            if s.degree() == 2 || s.is_x_independent() {
                grid.flat_ok &= h.h_norm < mroot::analysis::ZERO_TOL;
            }
        }
    }
    grid
}

fn c7_landsberg_dichotomy(grid: &Grid) -> Outcome {
    check(
        grid.landsberg_hits.is_empty() && grid.bm_landsberg,
        format!(
            "forbidden quadrant hits {:?} over 4 metrics x 10 seeds x 50 samples; berwald_moor3 Landsberg with c = 0: {}",
            grid.landsberg_hits, grid.bm_landsberg
        ),
    )
}

fn c8_h_dichotomy(grid: &Grid) -> Outcome {
    check(
        grid.h_hits.is_empty() && grid.flat_ok,
        format!(
            "forbidden quadrant hits {:?}; Riemannian and locally Minkowskian entries h_flat: {}",
            grid.h_hits, grid.flat_ok
        ),
    )
}

fn c9_rationality() -> Outcome {
    let mut worst = 0.0f64;
    for name in CATALOG_NAMES {
        let s = spec(name);
        let x: Vec<f64> = (0..s.dimension()).map(|k| 0.1 * (k + 1) as f64).collect();
        let r = rationality_check(&s, &x, &SamplePlan::new(9, 200)).unwrap();
        worst = worst.max(r.heldout_residual);
    }
    // the bound against an exact symbolic expansion, n = 2 with m = 2 and m = 4
    let mut symbolic = Vec::new();
    let mut agree = true;
    for name in ["conformal2", "quartic2"] {
        let s = spec(name);
        let x = [0.3, -0.2];
        let q = symbolic_det_spray_2d(&s, &x);
        for p in samples(&s, 10, 10) {
            let p = point(&x, &p.y);
            let det = y_hessian(&s, &p).unwrap().determinant();
            let numeric: Vec<f64> = spray(&s, &p)
                .unwrap()
                .comps
                .iter()
                .map(|g| det * g)
                .collect();
            let sym: Vec<f64> = q.iter().map(|c| c.eval(&p.y)).collect();
            agree &= mixed_rel(&numeric, &sym) < 1e-10;
        }
        let top = q.iter().filter_map(|c| c.degree(1e-12)).max().unwrap_or(0);
        symbolic.push((
            s.degree(),
            top as usize,
            rationality_degree_bound(2, s.degree()),
        ));
    }
    let bound_ok = symbolic.iter().all(|(_, top, bound)| top <= bound);
    check(
        worst < 1e-7 && agree && bound_ok,
        format!(
            "held-out residual {worst:.2e} (< 1e-7); symbolic (m, degree, bound) = {symbolic:?}, symbolic matches numeric: {agree}"
        ),
    )
}

fn c10_cli() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_mroot");
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let quartic = data.join("quartic2.json");
    let run = |args: &[&str]| {
        Command::new(exe)
            .args(args)
            .env_remove("MROOT_THREADS")
            .output()
            .unwrap()
    };
    let q = quartic.to_str().unwrap();
    let verify = [
        "verify",
        q,
        "--samples",
        "100",
        "--seed",
        "7",
        "--tol",
        "1e-6",
    ];
    let first = run(&verify);
    let second = run(&verify);
    let verify_ok = first.status.code() == Some(0);
    let identical = first.stdout == second.stdout && !first.stdout.is_empty();

    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("tampered.json");
    std::fs::write(
        &tampered,
        r#"{"dimension": 2, "degree": 2, "coefficients": [
            {"index": [1, 1], "poly": [{"exp": [0, 0], "coeff": 1.0}]},
            {"index": [1, 2], "poly": [{"exp": [0, 0], "coeff": 0.2}]},
            {"index": [2, 1], "poly": [{"exp": [0, 0], "coeff": 0.3}]},
            {"index": [2, 2], "poly": [{"exp": [0, 0], "coeff": 1.0}]}]}"#,
    )
    .unwrap();
    let tampered_code = run(&["verify", tampered.to_str().unwrap()]).status.code();

    let bm = data.join("berwald_moor3.json");
    let report = run(&["report", bm.to_str().unwrap(), "--y=1,1,-1"]);
    let domain = serde_json::from_slice::<serde_json::Value>(&report.stdout)
        .map(|v| v["flags"]["domain_ok"] == false && v["scalars"]["F"].is_null())
        .unwrap_or(false);
    check(
        verify_ok && identical && tampered_code == Some(2) && report.status.code() == Some(0) && domain,
        format!(
            "verify quartic2 exit {:?}, byte-identical rerun {identical}, tampered exit {tampered_code:?}, berwald_moor3 y=(1,1,-1) exit {:?} domain_ok=false {domain}",
            first.status.code(),
            report.status.code()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let grid = dichotomy_grid();
    let results: Vec<(&str, Outcome)> = vec![
        ("1  identity suite", c1_identity_suite()),
        ("2  fundamental tensor", c2_fundamental_tensor()),
        ("3  spray oracle", c3_spray_oracle()),
        ("4  Cartan and angular", c4_cartan_and_angular()),
        ("5  degeneration", c5_degeneration()),
        ("6  homogeneity", c6_homogeneity()),
        ("7  Landsberg dichotomy", c7_landsberg_dichotomy(&grid)),
        ("8  H dichotomy", c8_h_dichotomy(&grid)),
        ("9  rationality", c9_rationality()),
        ("10 CLI contract", c10_cli()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS criterion {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {name}: {d}");
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1} s",
        results.len() - failed,
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the summary lines always reach the
//! console, including under plain `cargo test`.

use std::f64::consts::PI;
use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use extremal::cli::{cmd_mcf_compare, cmd_simulate, cmd_verify, DEFAULT_SHAPES};
use extremal::flux::{assemble_a, linear_degeneracy_residual};
use extremal::mcf::{
    acceleration_limit_test, mcf_step, mean_radius, observed_orders, tangency_residual, EmbeddingField,
};
use extremal::scalar::ratio;
use extremal::solver::{run, DiagnosticsRow, FourierMode, Grid, GridField, InitialData, Simulation, StencilOrder};
use extremal::state::StateLayout;
use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Constraint norms at or below this are preserved to rounding and carry no
/// convergence information.
const ROUNDOFF_FLOOR: f64 = 1e-13;
const MIN_ORDER: f64 = 1.8;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Order check that treats a quantity at the rounding floor on both grids
/// as exactly preserved.
fn order_ok(coarse: f64, fine: f64) -> bool {
    (coarse <= ROUNDOFF_FLOOR && fine <= ROUNDOFF_FLOOR) || order(coarse, fine) >= MIN_ORDER
}

fn mode(wave: Vec<i64>, amplitude: f64, phase: f64) -> FourierMode {
    FourierMode { component: 1, wave, amplitude, phase }
}

fn string_data() -> InitialData {
    InitialData { height: vec![mode(vec![1], 0.1, 0.0)], velocity: vec![mode(vec![1], 0.1, 0.5)], ..Default::default() }
}

fn membrane_data() -> InitialData {
    InitialData {
        height: vec![mode(vec![1, 1], 0.1, 0.0), mode(vec![0, 1], 0.05, 0.3)],
        velocity: vec![mode(vec![1, 0], 0.1, 0.5)],
        ..Default::default()
    }
}

fn evolve(n: usize, points: usize, data: InitialData) -> (Vec<DiagnosticsRow>, f64) {
    let start = Instant::now();
    let grid = Grid::uniform(n, points, 2.0 * PI).unwrap();
    let mut sim = Simulation::new(1, n, grid, data);
    sim.oracle = true;
    let out = run(&sim).unwrap();
    (out.rows, start.elapsed().as_secs_f64())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let report = cmd_verify(&DEFAULT_SHAPES, 200, 20_240_901).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let checks: usize = report.suites.iter().map(|s| s.passed + s.failed).sum();
    let expected = DEFAULT_SHAPES.len() * 200 * report.suites.len();
    outcome(
        report.all_passed && checks == expected && secs < 10.0,
        format!("{checks} exact checks, {} failures, {secs:.2} s", report.failures.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut rational = || ratio(rng.gen_range(-12..=12), rng.gen_range(1..=6));
    let shapes: Vec<(usize, usize)> = (1..=2).flat_map(|m| (1..=3).map(move |n| (m, n))).collect();
    let mut failures = 0;
    for sample in 0..500 {
        let (m, n) = shapes[sample % shapes.len()];
        let layout = StateLayout::new(m, n).unwrap();
        let dim = layout.dim();
        let j = 1 + sample % n;
        let w1: Vec<BigRational> = (0..dim).map(|_| rational()).collect();
        let w2: Vec<BigRational> = (0..dim).map(|_| rational()).collect();
        let (a, b) = (rational(), rational());
        let mixed: Vec<BigRational> = w1.iter().zip(&w2).map(|(x, y)| &a * x + &b * y).collect();
        let (m1, m2, mm) =
            (assemble_a(j, &w1, &layout).unwrap(), assemble_a(j, &w2, &layout).unwrap(), assemble_a(j, &mixed, &layout).unwrap());
        let symmetric = (0..dim).all(|p| (0..dim).all(|q| m1.get(p, q) == m1.get(q, p)));
        let linear = (0..dim).all(|p| (0..dim).all(|q| *mm.get(p, q) == &a * m1.get(p, q) + &b * m2.get(p, q)));
        if !(symmetric && linear) {
            failures += 1;
        }
    }
    let dims_ok = (1..=3).all(|m| (1..=2).all(|n| StateLayout::new(m, n).unwrap().dim() == n + m + binomial(m + n, n)))
        && shapes.iter().all(|&(m, n)| StateLayout::new(m, n).unwrap().dim() == n + m + binomial(m + n, n));
    outcome(failures == 0 && dims_ok, format!("500 samples, {failures} failures, dimensions match: {dims_ok}"))
}

/// Eigenvalues of `A₁` straight from the symmetric eigensolver.
fn spectrum(w: &[f64], layout: &StateLayout) -> Vec<f64> {
    let a: DMatrix<f64> = assemble_a(1, w, layout).unwrap().to_f64();
    let mut e: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut eig_err, mut degeneracy, mut independent): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in 1..=3 {
        let layout = StateLayout::new(m, 1).unwrap();
        for _ in 0..100 {
            let mut w: Vec<f64> = (0..layout.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            w[0] = rng.gen_range(0.2..1.5);
            let (tau, v) = (w[0], w[layout.v(1)]);
            let e = spectrum(&w, &layout);
            let mut expected = vec![v - tau; m + 1];
            expected.extend(vec![v + tau; m + 1]);
            for (x, y) in e.iter().zip(&expected) {
                eig_err = eig_err.max((x - y).abs());
            }
            degeneracy = degeneracy.max(linear_degeneracy_residual(&w, &layout).unwrap());

            // speed clusters re-measured after stepping along a null-space
            // basis of A₁ − λ from the SVD
            let a = assemble_a(1, &w, &layout).unwrap().to_f64();
            let eps = 1e-5 * w.iter().map(|x| x.abs()).fold(1.0, f64::max);
            for (lambda, upper) in [(v + tau, true), (v - tau, false)] {
                let shifted = &a - DMatrix::<f64>::identity(a.nrows(), a.ncols()) * lambda;
                let svd = shifted.clone().svd(false, true);
                let vt = svd.v_t.unwrap();
                let cluster = |x: &[f64]| {
                    let s = spectrum(x, &layout);
                    let half = if upper { &s[m + 1..] } else { &s[..m + 1] };
                    half.iter().sum::<f64>() / half.len() as f64
                };
                let mut found = 0;
                for k in (0..vt.nrows()).filter(|&k| svd.singular_values[k] < 1e-9) {
                    let r = vt.row(k).transpose();
                    eig_err = eig_err.max((&shifted * &r).norm());
                    let fwd: Vec<f64> = w.iter().zip(r.iter()).map(|(a, b)| a + eps * b).collect();
                    let bwd: Vec<f64> = w.iter().zip(r.iter()).map(|(a, b)| a - eps * b).collect();
                    independent = independent.max(((cluster(&fwd) - cluster(&bwd)) / (2.0 * eps)).abs());
                    found += 1;
                }
                if found != m + 1 {
                    eig_err = f64::INFINITY;
                }
            }
        }
    }
    outcome(
        eig_err <= 1e-10 && degeneracy <= 1e-6 && independent <= 1e-6,
        format!("max eigenpair error {eig_err:.2e}, degeneracy {degeneracy:.2e} (independent {independent:.2e})"),
    )
}

struct Runs {
    s128: Vec<DiagnosticsRow>,
    s256: Vec<DiagnosticsRow>,
    m64: Vec<DiagnosticsRow>,
    m128: Vec<DiagnosticsRow>,
    seconds: f64,
}

fn evolve_all() -> Runs {
    let (s128, a) = evolve(1, 128, string_data());
    let (s256, b) = evolve(1, 256, string_data());
    let (m64, c) = evolve(2, 64, membrane_data());
    let (m128, d) = evolve(2, 128, membrane_data());
    Runs { s128, s256, m64, m128, seconds: a + b + c + d }
}

fn criterion_4(runs: &Runs) -> Outcome {
    let (c, f) = (runs.s128.last().unwrap(), runs.s256.last().unwrap());
    let string = [
        (c.lambda_linf, f.lambda_linf),
        (c.omega_linf, f.omega_linf),
        (c.phi_linf, f.phi_linf),
        (c.psi_linf, f.psi_linf),
    ];
    let (mc, mf) = (runs.m64.last().unwrap(), runs.m128.last().unwrap());
    let membrane = [
        (mc.lambda_linf, mf.lambda_linf),
        (mc.omega_linf, mf.omega_linf),
        (mc.phi_linf, mf.phi_linf),
        (mc.psi_linf, mf.psi_linf),
        (mc.sigma_linf, mf.sigma_linf),
    ];
    let fine = f.constraint_linf();
    let passed = string.iter().chain(&membrane).all(|&(a, b)| order_ok(a, b)) && fine <= 1e-5 && runs.seconds < 120.0;
    let orders = |pairs: &[(f64, f64)]| {
        pairs
            .iter()
            .map(|&(a, b)| if a <= ROUNDOFF_FLOOR && b <= ROUNDOFF_FLOOR { "exact".to_string() } else { format!("{:.2}", order(a, b)) })
            .collect::<Vec<_>>()
            .join("/")
    };
    outcome(
        passed,
        format!(
            "n=1 orders λ/ω/φ/ψ {}, Linf@256 {fine:.2e}; n=2 orders λ/ω/φ/ψ/σ {}; {:.1} s",
            orders(&string),
            orders(&membrane),
            runs.seconds
        ),
    )
}

fn oracle_err(row: &DiagnosticsRow) -> f64 {
    row.oracle_f_err_linf.unwrap().max(row.oracle_d_err_linf.unwrap())
}

fn criterion_5(runs: &Runs) -> Outcome {
    let (c, f) = (oracle_err(runs.s128.last().unwrap()), oracle_err(runs.s256.last().unwrap()));
    let (mc, mf) = (oracle_err(runs.m64.last().unwrap()), oracle_err(runs.m128.last().unwrap()));
    outcome(
        order(c, f) >= MIN_ORDER && f <= 1e-5 && order(mc, mf) >= MIN_ORDER && mf <= 1e-5,
        format!(
            "n=1 {c:.2e} -> {f:.2e} (order {:.2}); n=2 {mc:.2e} -> {mf:.2e} (order {:.2})",
            order(c, f),
            order(mc, mf)
        ),
    )
}

fn criterion_6(runs: &Runs) -> Outcome {
    let e0 = runs.s128[0].total_energy;
    let drift = runs.s128.iter().map(|r| ((r.total_energy - e0) / e0).abs()).fold(0.0, f64::max);
    let (c, f) = (runs.s128.last().unwrap().entropy_residual_l2, runs.s256.last().unwrap().entropy_residual_l2);
    outcome(
        drift <= 1e-8 && order(c, f) >= MIN_ORDER,
        format!("energy drift {drift:.2e}; entropy residual {c:.2e} -> {f:.2e} (order {:.2})", order(c, f)),
    )
}

fn criterion_7() -> Outcome {
    let grid = Grid::uniform(1, 512, 2.0 * PI).unwrap();
    let data = InitialData { height: vec![mode(vec![1], 0.1, 0.0)], ..Default::default() };
    let errors: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| acceleration_limit_test(1, &grid, &data, dt, 1, StencilOrder::Fourth).unwrap().err_linf)
        .collect();
    let dt_orders = observed_orders(&errors);

    let mut circle = EmbeddingField::circle(256, 1.0, StencilOrder::Second).unwrap();
    let du = circle.grid().spacing(1);
    let dtheta = 0.1 * du * du;
    let steps = (0.25 / dtheta).floor() as usize;
    let mut radius_err: f64 = 0.0;
    for k in 1..=steps {
        circle = mcf_step(&circle, dtheta).unwrap();
        let exact = (1.0 - 2.0 * k as f64 * dtheta).sqrt();
        radius_err = radius_err.max((mean_radius(&circle) - exact).abs() / exact);
    }

    let tangency: Vec<f64> = [128, 256]
        .iter()
        .map(|&points| {
            let g = Grid::uniform(1, points, 2.0 * PI).unwrap();
            let u = GridField::from_fn(&g, 1, |p, out| out[0] = 0.1 * g.coords(p)[0].sin());
            tangency_residual(&EmbeddingField::graph(&u, StencilOrder::Second).unwrap()).unwrap()
        })
        .collect();
    let tangency_order = order(tangency[0], tangency[1]);
    outcome(
        dt_orders.iter().all(|&o| o >= MIN_ORDER) && radius_err <= 0.01 && tangency_order >= MIN_ORDER,
        format!(
            "dt orders {:.2}/{:.2}; circle radius rel. error {radius_err:.2e} over θ ≤ {:.4}; tangency order {tangency_order:.2}",
            dt_orders[0],
            dt_orders[1],
            steps as f64 * dtheta
        ),
    )
}

fn criterion_8() -> Outcome {
    let configs = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &dirs {
        cmd_simulate(&configs.join("string_n1.json"), Some(dir.path())).unwrap();
        cmd_mcf_compare(&configs.join("mcf_sine.json"), Some(dir.path())).unwrap();
    }
    let files = ["diagnostics.csv", "mcf_acceleration.csv", "mcf_graph.csv", "mcf_circle.csv"];
    let same = files.iter().all(|f| fs::read(dirs[0].path().join(f)).unwrap() == fs::read(dirs[1].path().join(f)).unwrap());
    let reports_same = cmd_verify(&DEFAULT_SHAPES, 10, 8).unwrap().to_json() == cmd_verify(&DEFAULT_SHAPES, 10, 8).unwrap().to_json();
    outcome(same && reports_same, format!("{} CSV files and the verify report byte-identical: {}", files.len(), same && reports_same))
}

fn main() -> ExitCode {
    let runs = evolve_all();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("identity suite", Box::new(criterion_1)),
        ("flux structure", Box::new(criterion_2)),
        ("string characteristics", Box::new(criterion_3)),
        ("constraint preservation", Box::new(|| criterion_4(&runs))),
        ("oracle equivalence", Box::new(|| criterion_5(&runs))),
        ("conservation", Box::new(|| criterion_6(&runs))),
        ("mean curvature flow limit", Box::new(criterion_7)),
        ("determinism", Box::new(criterion_8)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("criterion {} ({name}): {} | {}", k + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

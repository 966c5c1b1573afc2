use std::f64::consts::PI;

use extremal::flux::System;
use extremal::solver::{
    cfl_dt, initial_state, rhs_augmented, rk4_step, run, FourierMode, Grid, GridField, InitialData, Simulation,
    StencilOrder,
};
use extremal::state::StateLayout;
use extremal::Error;

fn mode(component: usize, wave: Vec<i64>, amplitude: f64, phase: f64) -> FourierMode {
    FourierMode { component, wave, amplitude, phase }
}

fn string_data(phase: f64) -> InitialData {
    InitialData {
        height: vec![mode(1, vec![1], 0.1, phase)],
        velocity: vec![mode(1, vec![2], 0.08, phase)],
        ..Default::default()
    }
}

/// Reverses time: `d → −d`, `v → −v`.
fn reverse(field: &GridField, layout: &StateLayout) -> GridField {
    let mut out = field.clone();
    for p in 0..field.grid.points() {
        let w = out.point_mut(p);
        for a in 1..=layout.m() {
            w[layout.d(a)] = -w[layout.d(a)];
        }
        for i in 1..=layout.n() {
            w[layout.v(i)] = -w[layout.v(i)];
        }
    }
    out
}

#[test]
fn flat_state_is_stationary() {
    for (m, n) in [(1, 1), (2, 1), (3, 2)] {
        let layout = StateLayout::new(m, n).unwrap();
        let grid = Grid::uniform(n, 8, 1.0).unwrap();
        let w = initial_state(&layout, &grid, &InitialData::default()).unwrap().w;
        let rhs = rhs_augmented(&System::new(m, n).unwrap(), StencilOrder::Fourth, &w).unwrap();
        // zero up to the rounding of the stencil weights
        assert!(rhs.values.iter().all(|x| x.abs() < 1e-14), "({m}, {n})");
    }
}

#[test]
fn evolution_is_time_reversible() {
    let layout = StateLayout::new(1, 1).unwrap();
    let system = System::new(1, 1).unwrap();
    let grid = Grid::uniform(1, 64, 2.0 * PI).unwrap();
    let w0 = initial_state(&layout, &grid, &string_data(0.2)).unwrap().w;
    let dt = 0.25 * grid.min_spacing();
    let advance = |mut w: GridField| {
        for k in 0..40 {
            w = rk4_step(&w, k as f64 * dt, dt, |f| rhs_augmented(&system, StencilOrder::Second, f)).unwrap();
        }
        w
    };
    let back = reverse(&advance(reverse(&advance(w0.clone()), &layout)), &layout);
    // central stencils keep the semi-discrete system reversible; what is
    // left is the RK4 truncation error
    assert!(back.max_abs_diff(&w0) < 1e-8, "{}", back.max_abs_diff(&w0));
}

#[test]
fn evolution_commutes_with_grid_translation() {
    let grid = Grid::uniform(1, 32, 2.0 * PI).unwrap();
    let shift = grid.spacing(1);
    let mut a = Simulation::new(1, 1, grid.clone(), string_data(0.0));
    a.t_end = 0.5;
    let mut b = a.clone();
    // κ = 1 for the height, κ = 2 for the velocity
    b.initial.height[0].phase = shift;
    b.initial.velocity[0].phase = 2.0 * shift;
    let (wa, wb) = (run(&a).unwrap().w, run(&b).unwrap().w);
    let points = grid.points();
    let mut worst: f64 = 0.0;
    for p in 0..points {
        let q = (p + 1) % points;
        for (x, y) in wb.point(p).iter().zip(wa.point(q)) {
            worst = worst.max((x - y).abs());
        }
    }
    assert!(worst < 1e-13, "{worst}");
}

#[test]
fn two_codimension_membrane_constraints_converge() {
    let data = InitialData {
        height: vec![mode(1, vec![1, 0], 0.08, 0.0), mode(2, vec![0, 1], 0.08, 0.4), mode(2, vec![1, 1], 0.04, 0.1)],
        velocity: vec![mode(1, vec![0, 1], 0.05, 0.3)],
        ..Default::default()
    };
    let finals: Vec<_> = [16, 32]
        .iter()
        .map(|&points| {
            let mut sim = Simulation::new(2, 2, Grid::uniform(2, points, 2.0 * PI).unwrap(), data.clone());
            sim.t_end = 0.5;
            sim.oracle = true;
            run(&sim).unwrap().rows.pop().unwrap()
        })
        .collect();
    let order = |a: f64, b: f64| (a / b).log2();
    let (c, f) = (&finals[0], &finals[1]);
    for (name, a, b) in [
        ("lambda", c.lambda_linf, f.lambda_linf),
        ("omega", c.omega_linf, f.omega_linf),
        ("phi", c.phi_linf, f.phi_linf),
        ("psi", c.psi_linf, f.psi_linf),
        ("sigma", c.sigma_linf, f.sigma_linf),
        ("oracle", c.oracle_f_err_linf.unwrap(), f.oracle_f_err_linf.unwrap()),
    ] {
        assert!(b < 1e-13 || order(a, b) > 1.7, "{name}: {a:e} -> {b:e}");
    }
    // m = n = 2 carries the 2×2 minor, so φ and ψ are genuinely exercised
    assert!(c.phi_linf > 1e-10 || c.psi_linf > 1e-10);
}

#[test]
fn fourth_order_stencils_converge_faster() {
    let errs: Vec<f64> = [32, 64]
        .iter()
        .map(|&points| {
            let mut sim = Simulation::new(1, 1, Grid::uniform(1, points, 2.0 * PI).unwrap(), string_data(0.0));
            sim.order = StencilOrder::Fourth;
            sim.oracle = true;
            sim.cfl = 0.2;
            run(&sim).unwrap().rows.pop().unwrap().lambda_linf
        })
        .collect();
    assert!((errs[0] / errs[1]).log2() > 3.5, "{errs:?}");
}

#[test]
fn rk4_reports_blow_up_and_bad_steps() {
    let grid = Grid::uniform(1, 8, 1.0).unwrap();
    let w = GridField::zeros(&grid, 1);
    let explode = |f: &GridField| Ok(GridField::from_fn(&f.grid, 1, |_, x| x[0] = f64::NAN));
    assert!(matches!(rk4_step(&w, 0.0, 0.1, explode), Err(Error::BlowUp { .. })));
    assert!(rk4_step(&w, 0.0, 0.0, |f| Ok(f.clone())).is_err());
}

#[test]
fn cfl_is_validated() {
    let layout = StateLayout::new(1, 1).unwrap();
    let grid = Grid::uniform(1, 16, 1.0).unwrap();
    let w = initial_state(&layout, &grid, &InitialData::default()).unwrap().w;
    assert!(matches!(cfl_dt(&w, &layout, 1.5), Err(Error::Config(_))));
    assert!(matches!(cfl_dt(&w, &layout, 0.0), Err(Error::Config(_))));
    // flat state: speeds ±1
    assert!((cfl_dt(&w, &layout, 0.5).unwrap() - 0.5 / 16.0).abs() < 1e-15);
}

#[test]
fn zero_time_run_emits_only_the_initial_row() {
    let mut sim = Simulation::new(1, 1, Grid::uniform(1, 16, 1.0).unwrap(), InitialData::default());
    sim.t_end = 0.0;
    let out = run(&sim).unwrap();
    assert_eq!(out.steps, 0);
    assert_eq!(out.rows.len(), 1);
}

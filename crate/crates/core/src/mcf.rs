//! Mean curvature flow of embedded submanifolds on periodic parameter
//! domains, and its small-time comparison with the extremal-surface
//! evolution under `θ = t²/2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solver::{
    derivative, derivative_shifted, initial_state, rk4_step, Augmented, Grid, GridField, InitialData, StencilOrder,
};
use crate::state::StateLayout;

/// `X: grid → R^{N}` with per-axis period jumps (`shifts[axis][c]` is the
/// increase of component `c` over one period along `axis`).
#[derive(Clone, Debug)]
pub struct EmbeddingField {
    pub x: GridField,
    pub shifts: Vec<Vec<f64>>,
    pub order: StencilOrder,
}

impl EmbeddingField {
    pub fn new(x: GridField, shifts: Vec<Vec<f64>>, order: StencilOrder) -> Result<Self> {
        if shifts.len() != x.grid.n() || shifts.iter().any(|s| s.len() != x.comps) {
            return Err(Error::Domain("one shift per component is needed for every axis".into()));
        }
        if x.comps < x.grid.n() {
            return Err(Error::Domain(format!("{} components cannot embed an {}-dimensional domain", x.comps, x.grid.n())));
        }
        Ok(Self { x, shifts, order })
    }

    /// Graph `X = (x, u(x))` over a flat periodic base.
    pub fn graph(heights: &GridField, order: StencilOrder) -> Result<Self> {
        let grid = &heights.grid;
        let (n, m) = (grid.n(), heights.comps);
        let x = GridField::from_fn(grid, n + m, |p, out| {
            out[..n].copy_from_slice(&grid.coords(p));
            out[n..].copy_from_slice(heights.point(p));
        });
        let shifts = (0..n)
            .map(|a| (0..n + m).map(|c| if c == a { grid.lengths()[a] } else { 0.0 }).collect())
            .collect();
        Self::new(x, shifts, order)
    }

    /// Closed curve `u ↦ (R cos u, R sin u)` in the plane, `u ∈ [0, 2π)`.
    pub fn circle(points: usize, radius: f64, order: StencilOrder) -> Result<Self> {
        let grid = Grid::new(vec![points], vec![2.0 * std::f64::consts::PI])?;
        let x = GridField::from_fn(&grid, 2, |p, out| {
            let u = grid.coords(p)[0];
            out[0] = radius * u.cos();
            out[1] = radius * u.sin();
        });
        Self::new(x, vec![vec![0.0, 0.0]], order)
    }

    pub fn grid(&self) -> &Grid {
        &self.x.grid
    }

    pub fn n(&self) -> usize {
        self.x.grid.n()
    }

    pub fn ambient(&self) -> usize {
        self.x.comps
    }

    /// Transverse components of a graph embedding.
    pub fn heights(&self) -> GridField {
        let n = self.n();
        GridField::from_fn(self.grid(), self.ambient() - n, |p, out| out.copy_from_slice(&self.x.point(p)[n..]))
    }

    fn tangents(&self) -> Result<Vec<GridField>> {
        (1..=self.n()).map(|a| derivative_shifted(&self.x, a, self.order, &self.shifts[a - 1])).collect()
    }
}

/// Induced metric at one point (`n × n`, row-major).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricPoint {
    pub g: Vec<f64>,
    pub det: f64,
    pub inv: Vec<f64>,
}

impl MetricPoint {
    fn from_tangents(tangents: &[&[f64]], point: usize) -> Result<Self> {
        let n = tangents.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = tangents[i].iter().zip(tangents[j]).map(|(a, b)| a * b).sum();
            }
        }
        let det = if n == 1 { g[0] } else { g[0] * g[3] - g[1] * g[2] };
        if !(det > 0.0) {
            return Err(Error::DegenerateMetric { point, det });
        }
        let inv = if n == 1 { vec![1.0 / det] } else { vec![g[3] / det, -g[1] / det, -g[2] / det, g[0] / det] };
        Ok(Self { g, det, inv })
    }

    /// Smallest eigenvalue of `g`.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.g.len() == 1 {
            return self.g[0];
        }
        let (a, b, d) = (self.g[0], self.g[1], self.g[3]);
        let mean = 0.5 * (a + d);
        mean - (0.25 * (a - d) * (a - d) + b * b).sqrt()
    }
}

struct Geometry {
    tangents: Vec<GridField>,
    metric: Vec<MetricPoint>,
}

fn geometry(e: &EmbeddingField) -> Result<Geometry> {
    let tangents = e.tangents()?;
    let metric = (0..e.grid().points())
        .map(|p| {
            let t: Vec<&[f64]> = tangents.iter().map(|f| f.point(p)).collect();
            MetricPoint::from_tangents(&t, p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Geometry { tangents, metric })
}

/// `g_{ij} = ⟨∂_i X, ∂_j X⟩` with its determinant and inverse, per point.
pub fn induced_metric(e: &EmbeddingField) -> Result<Vec<MetricPoint>> {
    Ok(geometry(e)?.metric)
}

/// `g^{-1/2} ∂_i(√g g^{ij} ∂_j X)` for each ambient component.
pub fn mcf_velocity(e: &EmbeddingField) -> Result<GridField> {
    let geo = geometry(e)?;
    mcf_velocity_from(e, &geo)
}

fn mcf_velocity_from(e: &EmbeddingField, geo: &Geometry) -> Result<GridField> {
    let (n, big) = (e.n(), e.ambient());
    let grid = e.grid();
    let mut out = GridField::zeros(grid, big);
    for i in 0..n {
        let flux = GridField::from_fn(grid, big, |p, dst| {
            let mp = &geo.metric[p];
            let root = mp.det.sqrt();
            for (c, x) in dst.iter_mut().enumerate() {
                *x = (0..n).map(|j| root * mp.inv[i * n + j] * geo.tangents[j].point(p)[c]).sum();
            }
        });
        out = out.axpy(1.0, &derivative(&flux, i + 1, e.order)?);
    }
    for (p, mp) in geo.metric.iter().enumerate() {
        let root = mp.det.sqrt();
        out.point_mut(p).iter_mut().for_each(|x| *x /= root);
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `max |⟨H, ∂_i X⟩|` over points and directions.
pub fn tangency_residual(e: &EmbeddingField) -> Result<f64> {
    let geo = geometry(e)?;
    let h = mcf_velocity_from(e, &geo)?;
    let mut worst: f64 = 0.0;
    for p in 0..e.grid().points() {
        for t in &geo.tangents {
            worst = worst.max(dot(h.point(p), t.point(p)).abs());
        }
    }
    Ok(worst)
}

/// Pointwise residual of the area balance along the flow,
/// `∂_θ√g + √g|∂_θX|² − ∂_i(√g g^{ij} h_j) − √g g^{ij} h_i h_j` with
/// `∂_θ X = H`, `h_j = ⟨H, ∂_j X⟩` and `∂_θ√g = √g g^{ij}⟨∂_i H, ∂_j X⟩`.
pub fn area_balance_residual(e: &EmbeddingField) -> Result<f64> {
    let geo = geometry(e)?;
    let n = e.n();
    let grid = e.grid();
    let vel = mcf_velocity_from(e, &geo)?;
    let dvel = (1..=n).map(|a| derivative(&vel, a, e.order)).collect::<Result<Vec<_>>>()?;
    let h_of = |p: usize| -> Vec<f64> { geo.tangents.iter().map(|t| dot(vel.point(p), t.point(p))).collect() };
    let mut div = GridField::zeros(grid, 1);
    for i in 0..n {
        let flux = GridField::from_fn(grid, 1, |p, dst| {
            let mp = &geo.metric[p];
            let h = h_of(p);
            dst[0] = mp.det.sqrt() * (0..n).map(|j| mp.inv[i * n + j] * h[j]).sum::<f64>();
        });
        div = div.axpy(1.0, &derivative(&flux, i + 1, e.order)?);
    }
    let mut worst: f64 = 0.0;
    for p in 0..grid.points() {
        let mp = &geo.metric[p];
        let root = mp.det.sqrt();
        let h = h_of(p);
        let mut rate = 0.0;
        let mut hh = 0.0;
        for i in 0..n {
            for j in 0..n {
                rate += mp.inv[i * n + j] * dot(dvel[i].point(p), geo.tangents[j].point(p));
                hh += mp.inv[i * n + j] * h[i] * h[j];
            }
        }
        let r = root * rate + root * dot(vel.point(p), vel.point(p)) - div.values[p] - root * hh;
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Largest explicit step for the reference flow:
/// `0.25 · min Δx² · min_points λ_min(g)`.
pub fn max_stable_dtheta(e: &EmbeddingField) -> Result<f64> {
    let lmin = induced_metric(e)?.iter().map(MetricPoint::min_eigenvalue).fold(f64::INFINITY, f64::min);
    let dx = e.grid().min_spacing();
    Ok(0.25 * dx * dx * lmin)
}

/// Explicit Euler step `X ← X + dθ H`.
pub fn mcf_step(e: &EmbeddingField, dtheta: f64) -> Result<EmbeddingField> {
    let vel = mcf_velocity(e)?;
    let x = e.x.axpy(dtheta, &vel);
    if !x.is_finite() {
        return Err(Error::BlowUp { t: dtheta });
    }
    Ok(EmbeddingField { x, shifts: e.shifts.clone(), order: e.order })
}

/// Mean-curvature velocity of a graph expressed as a height rate:
/// `H^{n+α} − Σ_i ∂_i u_α H^i`.
pub fn graph_height_velocity(e: &EmbeddingField) -> Result<GridField> {
    let n = e.n();
    let m = e.ambient() - n;
    let vel = mcf_velocity(e)?;
    let heights = e.heights();
    let grads = (1..=n).map(|a| derivative(&heights, a, e.order)).collect::<Result<Vec<_>>>()?;
    Ok(GridField::from_fn(e.grid(), m, |p, out| {
        let h = vel.point(p);
        for (alpha, o) in out.iter_mut().enumerate() {
            *o = h[n + alpha] - (0..n).map(|i| grads[i].point(p)[alpha] * h[i]).sum::<f64>();
        }
    }))
}

/// Result of one acceleration comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccelerationResult {
    pub dt: f64,
    pub err_linf: f64,
    /// Tangency residual of the initial embedding.
    pub tangency: f64,
    /// Largest `|a|` of the reference velocity, for scale.
    pub reference_linf: f64,
}

/// Starts the augmented evolution from graph data at rest, integrates the
/// heights over `[0, dt]` in `substeps` RK4 steps and compares
/// `2(X(dt) − X(0))/dt²` with the graph mean-curvature velocity of `X(0)`.
pub fn acceleration_limit_test(
    m: usize,
    grid: &Grid,
    data: &InitialData,
    dt: f64,
    substeps: usize,
    order: StencilOrder,
) -> Result<AccelerationResult> {
    if data.has_velocity() {
        return Err(Error::Config("the acceleration test needs initial velocity V = 0".into()));
    }
    if !(dt > 0.0) || substeps == 0 {
        return Err(Error::Config(format!("dt = {dt} and substeps = {substeps} must be positive")));
    }
    let n = grid.n();
    let aug = Augmented::new(m, n, order)?.with_heights();
    let layout: &StateLayout = aug.layout();
    let init = initial_state(layout, grid, data)?;
    let dim = layout.dim();
    let mut field = GridField::from_fn(grid, dim + m, |p, out| {
        out[..dim].copy_from_slice(init.w.point(p));
        out[dim..].copy_from_slice(init.heights.point(p));
    });
    let h = dt / substeps as f64;
    for k in 0..substeps {
        field = rk4_step(&field, k as f64 * h, h, |f| aug.rhs(f))?;
    }

    let embedding = EmbeddingField::graph(&init.heights, order)?;
    let reference = graph_height_velocity(&embedding)?;
    let mut err: f64 = 0.0;
    for p in 0..grid.points() {
        for alpha in 0..m {
            let a = 2.0 * (field.point(p)[dim + alpha] - init.heights.point(p)[alpha]) / (dt * dt);
            err = err.max((a - reference.point(p)[alpha]).abs());
        }
    }
    let reference_linf = reference.values.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    Ok(AccelerationResult { dt, err_linf: err, tangency: tangency_residual(&embedding)?, reference_linf })
}

/// Observed convergence orders `log2(e_k / e_{k+1})` for a halving sequence.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Mean distance from the origin (radius of a circle-like curve).
pub fn mean_radius(e: &EmbeddingField) -> f64 {
    let pts = e.grid().points();
    (0..pts).map(|p| dot(e.x.point(p), e.x.point(p)).sqrt()).sum::<f64>() / pts as f64
}

/// Coefficient of `sin(2π k·x/L)` in the first height of a graph.
pub fn sine_amplitude(e: &EmbeddingField, wave: &[i64]) -> f64 {
    let grid = e.grid();
    let n = e.n();
    let pts = grid.points();
    let s: f64 = (0..pts)
        .map(|p| {
            let x = grid.coords(p);
            let arg: f64 = (0..n).map(|a| 2.0 * std::f64::consts::PI * wave[a] as f64 * x[a] / grid.lengths()[a]).sum();
            e.x.point(p)[n] * arg.sin()
        })
        .sum();
    2.0 * s / pts as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::FourierMode;
    use std::f64::consts::PI;

    fn sine_graph(points: usize, eps: f64, order: StencilOrder) -> EmbeddingField {
        let grid = Grid::uniform(1, points, 2.0 * PI).unwrap();
        let u = GridField::from_fn(&grid, 1, |p, x| x[0] = eps * grid.coords(p)[0].sin());
        EmbeddingField::graph(&u, order).unwrap()
    }

    #[test]
    fn flat_graph() {
        let e = sine_graph(16, 0.0, StencilOrder::Second);
        let g = induced_metric(&e).unwrap();
        assert!(g.iter().all(|mp| (mp.det - 1.0).abs() < 1e-14));
        assert!(mcf_velocity(&e).unwrap().values.iter().all(|x| x.abs() < 1e-13));
        assert!(tangency_residual(&e).unwrap() < 1e-13);
        let next = mcf_step(&e, 1e-3).unwrap();
        assert!(next.x.max_abs_diff(&e.x) < 1e-15);
    }

    #[test]
    fn sine_graph_metric() {
        let eps = 0.3;
        let e = sine_graph(256, eps, StencilOrder::Fourth);
        for (p, mp) in induced_metric(&e).unwrap().iter().enumerate() {
            let x = e.grid().coords(p)[0];
            assert!((mp.g[0] - (1.0 + eps * eps * x.cos().powi(2))).abs() < 1e-7);
        }
    }

    #[test]
    fn unit_circle_moves_inward() {
        let e = EmbeddingField::circle(128, 1.0, StencilOrder::Second);
        let e = e.unwrap();
        assert!(induced_metric(&e).unwrap().iter().all(|mp| (mp.g[0] - 1.0).abs() < 1e-3));
        let v = mcf_velocity(&e).unwrap();
        let du = e.grid().spacing(1);
        for p in 0..128 {
            for c in 0..2 {
                assert!((v.point(p)[c] + e.x.point(p)[c]).abs() < du * du);
            }
        }
        assert!(tangency_residual(&e).unwrap() < du * du);
    }

    #[test]
    fn small_graphs_follow_the_heat_flow() {
        let eps = 1e-3;
        let e = sine_graph(64, eps, StencilOrder::Second);
        let v = graph_height_velocity(&e).unwrap();
        let heights = e.heights();
        let lap = derivative(&derivative(&heights, 1, StencilOrder::Second).unwrap(), 1, StencilOrder::Second).unwrap();
        assert!(v.max_abs_diff(&lap) < 1e-8);
    }

    #[test]
    fn acceleration_test_rejects_moving_data() {
        let grid = Grid::uniform(1, 16, 2.0 * PI).unwrap();
        let data = InitialData {
            velocity: vec![FourierMode { component: 1, wave: vec![1], amplitude: 0.1, phase: 0.0 }],
            ..Default::default()
        };
        assert!(acceleration_limit_test(1, &grid, &data, 1e-3, 1, StencilOrder::Second).is_err());
        let flat = acceleration_limit_test(1, &grid, &InitialData::default(), 1e-3, 1, StencilOrder::Second).unwrap();
        assert!(flat.err_linf <= 1e-10);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        let grid = Grid::uniform(1, 8, 1.0).unwrap();
        let x = GridField::zeros(&grid, 2);
        let e = EmbeddingField::new(x, vec![vec![0.0, 0.0]], StencilOrder::Second).unwrap();
        assert!(matches!(induced_metric(&e), Err(Error::DegenerateMetric { .. })));
    }
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{Grid, GridField};
use crate::error::{Error, Result};
use crate::minors::{xi, Matrix};
use crate::state::{lift, to_primitive, GraphData, StateLayout, DEFAULT_GUARD};

pub const DEFAULT_TIMELIKE_MARGIN: f64 = 0.05;

/// `amplitude * sin(κ·x + phase)` with `κ_j = 2π wave_j / L_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierMode {
    /// 1-based transverse component α.
    pub component: usize,
    pub wave: Vec<i64>,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Heights `X^{n+α}(0, x)` and velocities `V_α(0, x)` as Fourier sums.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default)]
    pub height: Vec<FourierMode>,
    #[serde(default)]
    pub velocity: Vec<FourierMode>,
    #[serde(default = "default_margin")]
    pub timelike_margin: f64,
}

fn default_margin() -> f64 {
    DEFAULT_TIMELIKE_MARGIN
}

impl Default for InitialData {
    fn default() -> Self {
        Self { height: Vec::new(), velocity: Vec::new(), timelike_margin: DEFAULT_TIMELIKE_MARGIN }
    }
}

impl InitialData {
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        for (what, modes) in [("height", &self.height), ("velocity", &self.velocity)] {
            for mode in modes {
                if mode.component == 0 || mode.component > m {
                    return Err(Error::Config(format!("{what} mode component {} outside [1, {m}]", mode.component)));
                }
                if mode.wave.len() != n {
                    return Err(Error::Config(format!("{what} mode wave vector has length {}, expected {n}", mode.wave.len())));
                }
                if !mode.amplitude.is_finite() || !mode.phase.is_finite() {
                    return Err(Error::Config(format!("{what} mode amplitude and phase must be finite")));
                }
            }
        }
        if !(self.timelike_margin > 0.0 && self.timelike_margin < 1.0) {
            return Err(Error::Config(format!("timelike_margin {} not in (0, 1)", self.timelike_margin)));
        }
        Ok(())
    }

    pub fn has_velocity(&self) -> bool {
        self.velocity.iter().any(|mode| mode.amplitude != 0.0)
    }
}

fn phase(mode: &FourierMode, grid: &Grid, x: &[f64]) -> (f64, Vec<f64>) {
    let kappa: Vec<f64> =
        mode.wave.iter().zip(grid.lengths()).map(|(&k, &l)| 2.0 * PI * k as f64 / l).collect();
    (kappa.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + mode.phase, kappa)
}

/// Heights with their analytic gradient `F`, plus velocities, at one point.
pub fn graph_fields(data: &InitialData, m: usize, n: usize, grid: &Grid, x: &[f64]) -> (Vec<f64>, Matrix<f64>, Vec<f64>) {
    let mut heights = vec![0.0; m];
    let mut f = Matrix::zeros(m, n);
    let mut vel = vec![0.0; m];
    for mode in &data.height {
        let (arg, kappa) = phase(mode, grid, x);
        let a = mode.component - 1;
        heights[a] += mode.amplitude * arg.sin();
        for (i, k) in kappa.iter().enumerate() {
            let value = f.at(a, i) + mode.amplitude * k * arg.cos();
            f.set(a, i, value);
        }
    }
    for mode in &data.velocity {
        let (arg, _) = phase(mode, grid, x);
        vel[mode.component - 1] += mode.amplitude * arg.sin();
    }
    (heights, f, vel)
}

/// `D = √ξ (I + FFᵀ)⁻¹V / √(1 − Vᵀ(I + FFᵀ)⁻¹V)`, rejecting data closer
/// than `margin` to the light cone.
pub fn momentum_from_velocity(f: &Matrix<f64>, vel: &[f64], margin: f64) -> Result<Vec<f64>> {
    let m = f.rows();
    let zeta = Matrix::identity(m).add(&f.matmul(&f.transpose())?);
    let det = zeta.det();
    let adj = zeta.adjugate();
    let y: Vec<f64> = (0..m).map(|a| (0..m).map(|b| adj.at(a, b) * vel[b]).sum::<f64>() / det).collect();
    let q: f64 = y.iter().zip(vel).map(|(a, b)| a * b).sum();
    if !(1.0 - q >= margin) {
        return Err(Error::Config(format!(
            "initial data is not time-like enough: 1 - Vᵀ(I+FFᵀ)⁻¹V = {} < {margin}",
            1.0 - q
        )));
    }
    let scale = (xi(f) / (1.0 - q)).sqrt();
    Ok(y.iter().map(|x| x * scale).collect())
}

/// Initial fields from one set of graph data.
#[derive(Clone, Debug)]
pub struct InitialState {
    /// Primitive state `W`.
    pub w: GridField,
    /// Graph state `(F row-major, D)` for the original system.
    pub graph: GridField,
    /// Transverse heights `X^{n+α}`.
    pub heights: GridField,
}

pub fn initial_state(layout: &StateLayout, grid: &Grid, data: &InitialData) -> Result<InitialState> {
    let (m, n) = (layout.m(), layout.n());
    if grid.n() != n {
        return Err(Error::Config(format!("grid has dimension {}, layout has n = {n}", grid.n())));
    }
    data.validate(m, n)?;
    let mut w = GridField::zeros(grid, layout.dim());
    let mut graph = GridField::zeros(grid, m * n + m);
    let mut heights = GridField::zeros(grid, m);
    for p in 0..grid.points() {
        let x = grid.coords(p);
        let (h, f, vel) = graph_fields(data, m, n, grid, &x);
        let d = momentum_from_velocity(&f, &vel, data.timelike_margin)?;
        let g = GraphData { f, d };
        let prim = to_primitive(&lift(&g, layout)?, DEFAULT_GUARD)?;
        w.point_mut(p).copy_from_slice(&prim.to_vec());
        let gp = graph.point_mut(p);
        gp[..m * n].copy_from_slice(g.f.data());
        gp[m * n..].copy_from_slice(&g.d);
        heights.point_mut(p).copy_from_slice(&h);
    }
    Ok(InitialState { w, graph, heights })
}

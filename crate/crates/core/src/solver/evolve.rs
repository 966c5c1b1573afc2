use super::grid::{apply_filter, derivative, GridField, StencilOrder};
use crate::error::{Error, Result};
use crate::flux::{max_coordinate_speed, System};
use crate::minors::{xi, xi_prime, Matrix};
use crate::state::{StateLayout, DEFAULT_GUARD};

#[cfg(feature = "parallel")]
fn for_each_point<F>(out: &mut [f64], comps: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    use rayon::prelude::*;
    out.par_chunks_mut(comps).enumerate().for_each(|(p, chunk)| f(p, chunk));
}

#[cfg(not(feature = "parallel"))]
fn for_each_point<F>(out: &mut [f64], comps: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    out.chunks_mut(comps).enumerate().for_each(|(p, chunk)| f(p, chunk));
}

/// Right-hand side of the non-conservative system on a grid, optionally
/// carrying the transverse heights `X^{n+α}` as `m` trailing components.
#[derive(Clone, Debug)]
pub struct Augmented {
    system: System,
    order: StencilOrder,
    heights: bool,
}

impl Augmented {
    pub fn new(m: usize, n: usize, order: StencilOrder) -> Result<Self> {
        Ok(Self { system: System::new(m, n)?, order, heights: false })
    }

    /// Also integrate `∂_t X^{n+α} = −(d_α + Σ_j m_{αj} v_j / τ)`.
    pub fn with_heights(mut self) -> Self {
        self.heights = true;
        self
    }

    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn layout(&self) -> &StateLayout {
        self.system.layout()
    }

    pub fn order(&self) -> StencilOrder {
        self.order
    }

    pub fn comps(&self) -> usize {
        self.system.dim() + if self.heights { self.layout().m() } else { 0 }
    }

    pub fn rhs(&self, field: &GridField) -> Result<GridField> {
        if field.comps != self.comps() {
            return Err(Error::Domain(format!("field has {} components, expected {}", field.comps, self.comps())));
        }
        let n = self.layout().n();
        if self.heights {
            let tau_min = (0..field.grid.points())
                .map(|p| field.point(p)[StateLayout::TAU].abs())
                .fold(f64::INFINITY, f64::min);
            if !(tau_min > DEFAULT_GUARD) {
                return Err(Error::SingularState { what: "tau", value: tau_min, guard: DEFAULT_GUARD });
            }
        }
        let derivs = (1..=n).map(|j| derivative(field, j, self.order)).collect::<Result<Vec<_>>>()?;
        let comps = field.comps;
        let dim = self.system.dim();
        let layout = self.layout();
        let mut out = GridField::zeros(&field.grid, comps);
        for_each_point(&mut out.values, comps, |p, dst| {
            let range = p * comps..p * comps + dim;
            let grads: Vec<&[f64]> = derivs.iter().map(|d| &d.values[range.clone()]).collect();
            let w = &field.values[range.clone()];
            self.system.rhs_point_into(w, &grads, &mut dst[..dim]);
            if self.heights {
                for alpha in 1..=layout.m() {
                    let flow: f64 = (1..=n)
                        .map(|j| w[layout.minor(layout.minors().entry_index(alpha, j))] * w[layout.v(j)])
                        .sum();
                    dst[dim + alpha - 1] = -(w[layout.d(alpha)] + flow / w[StateLayout::TAU]);
                }
            }
        });
        Ok(out)
    }
}

/// `∂_t W = −Σ_j A_j(W) ∂_j W` on a periodic grid.
pub fn rhs_augmented(system: &System, order: StencilOrder, field: &GridField) -> Result<GridField> {
    let aug = Augmented { system: system.clone(), order, heights: false };
    aug.rhs(field)
}

/// Right-hand side of the original graph system in `(F, D)`, with `ξ` and
/// `ξ'` evaluated from determinants and adjugates.
///
/// Field layout per point: `F` row-major (`m × n`), then `D`.
pub fn rhs_original(field: &GridField, m: usize, n: usize, order: StencilOrder) -> Result<GridField> {
    let comps = m * n + m;
    if field.comps != comps || field.grid.n() != n {
        return Err(Error::Domain(format!("graph field with {} components for (m, n) = ({m}, {n})", field.comps)));
    }
    let mut fluxes: Vec<GridField> = (0..n).map(|_| GridField::zeros(&field.grid, comps)).collect();
    for p in 0..field.grid.points() {
        let point = field.point(p);
        let f = Matrix::new(m, n, point[..m * n].to_vec())?;
        let d = &point[m * n..];
        let pm: Vec<f64> = (0..n).map(|i| (0..m).map(|a| f.at(a, i) * d[a]).sum()).collect();
        let h = (d.iter().map(|x| x * x).sum::<f64>() + pm.iter().map(|x| x * x).sum::<f64>() + xi(&f)).sqrt();
        let xp = xi_prime(&f);
        for (i, flux) in fluxes.iter_mut().enumerate() {
            let dst = flux.point_mut(p);
            for a in 0..m {
                let fp: f64 = (0..n).map(|j| f.at(a, j) * pm[j]).sum();
                dst[a * n + i] = (d[a] + fp) / h;
                dst[m * n + a] = (d[a] * pm[i] + xp.at(a, i)) / h;
            }
        }
    }
    let mut out = GridField::zeros(&field.grid, comps);
    for (i, flux) in fluxes.iter().enumerate() {
        out = out.axpy(-1.0, &derivative(flux, i + 1, order)?);
    }
    Ok(out)
}

/// Classical four-stage Runge–Kutta step from time `t`.
pub fn rk4_step(field: &GridField, t: f64, dt: f64, rhs: impl Fn(&GridField) -> Result<GridField>) -> Result<GridField> {
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    let k1 = rhs(field)?;
    let k2 = rhs(&field.axpy(dt / 2.0, &k1))?;
    let k3 = rhs(&field.axpy(dt / 2.0, &k2))?;
    let k4 = rhs(&field.axpy(dt, &k3))?;
    let mut values = field.values.clone();
    for (i, x) in values.iter_mut().enumerate() {
        *x += dt / 6.0 * (k1.values[i] + 2.0 * k2.values[i] + 2.0 * k3.values[i] + k4.values[i]);
    }
    let next = GridField { grid: field.grid.clone(), comps: field.comps, values };
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::BlowUp { t: t + dt })
    }
}

/// `steps` RK4 steps of size `dt`, filtering after each one.
pub fn integrate(
    field: &GridField,
    t0: f64,
    dt: f64,
    steps: usize,
    filter: f64,
    rhs: impl Fn(&GridField) -> Result<GridField>,
) -> Result<GridField> {
    let mut u = field.clone();
    for k in 0..steps {
        u = rk4_step(&u, t0 + k as f64 * dt, dt, &rhs)?;
        apply_filter(&mut u, filter);
    }
    Ok(u)
}

/// `cfl · min Δx / s_max`, with `s_max` the largest coordinate-direction
/// wave speed over the grid (falls back to `cfl · min Δx` for static fields).
pub fn cfl_dt(field: &GridField, layout: &StateLayout, cfl: f64) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::Config(format!("cfl {cfl} not in (0, 1]")));
    }
    let dim = layout.dim();
    let mut s_max: f64 = 0.0;
    for p in 0..field.grid.points() {
        s_max = s_max.max(max_coordinate_speed(&field.point(p)[..dim], layout)?);
    }
    let dx = field.grid.min_spacing();
    Ok(if s_max > 0.0 { cfl * dx / s_max } else { cfl * dx })
}

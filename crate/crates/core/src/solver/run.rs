use serde::Serialize;

use super::diagnostics::{diagnostics, DiagnosticsRow};
use super::evolve::{cfl_dt, rhs_original, rk4_step, Augmented};
use super::grid::{apply_filter, Grid, GridField, StencilOrder};
use super::initial::{initial_state, InitialData};
use crate::error::{Error, Result};
use crate::state::StateLayout;

/// Everything needed for one evolution run.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub m: usize,
    pub n: usize,
    pub grid: Grid,
    pub order: StencilOrder,
    pub cfl: f64,
    pub filter: f64,
    pub t_end: f64,
    /// Emit a diagnostics row every this many steps (and at the end).
    pub output_every: usize,
    pub initial: InitialData,
    pub oracle: bool,
    pub snapshots: bool,
}

impl Simulation {
    pub fn new(m: usize, n: usize, grid: Grid, initial: InitialData) -> Self {
        Self {
            m,
            n,
            grid,
            order: StencilOrder::Second,
            cfl: 0.4,
            filter: 0.0,
            t_end: 1.0,
            output_every: 1,
            initial,
            oracle: false,
            snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.m) || !(1..=2).contains(&self.n) {
            return Err(Error::Config(format!("(m, n) = ({}, {}) outside m ∈ [1, 3], n ∈ [1, 2]", self.m, self.n)));
        }
        if self.grid.n() != self.n {
            return Err(Error::Config(format!("grid dimension {} differs from n = {}", self.grid.n(), self.n)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl {} not in (0, 1]", self.cfl)));
        }
        if !(self.filter.is_finite() && (0.0..=1.0).contains(&self.filter)) {
            return Err(Error::Config(format!("filter strength {} not in [0, 1]", self.filter)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end {} must be finite and non-negative", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_cadence must be at least 1".into()));
        }
        self.initial.validate(self.m, self.n)
    }
}

/// Full `W` field at one time, with its layout spelled out.
#[derive(Clone, Debug, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub m: usize,
    pub n: usize,
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    /// Slot names in order: `tau`, `d1..`, `v1..`, then one per minor.
    pub components: Vec<String>,
    /// `(A, I)` index sets of the minor slots, in order.
    pub layout: Vec<(Vec<usize>, Vec<usize>)>,
    /// Point-major values, axis 1 fastest.
    pub values: Vec<f64>,
}

impl Snapshot {
    fn new(t: f64, step: usize, layout: &StateLayout, field: &GridField) -> Self {
        Self {
            t,
            step,
            m: layout.m(),
            n: layout.n(),
            sizes: field.grid.sizes().to_vec(),
            lengths: field.grid.lengths().to_vec(),
            components: layout.component_names(),
            layout: layout.minors().pairs().iter().map(|p| (p.rows.elements(), p.cols.elements())).collect(),
            values: field.values.clone(),
        }
    }
}

/// Receives output as the run progresses, so partial results survive a
/// blow-up.
pub trait Observer {
    fn row(&mut self, row: &DiagnosticsRow) -> Result<()>;

    fn snapshot(&mut self, _snapshot: &Snapshot) -> Result<()> {
        Ok(())
    }
}

impl Observer for Vec<DiagnosticsRow> {
    fn row(&mut self, row: &DiagnosticsRow) -> Result<()> {
        self.push(row.clone());
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub rows: Vec<DiagnosticsRow>,
    pub dt: f64,
    pub steps: usize,
    pub w: GridField,
    pub oracle: Option<GridField>,
}

/// Runs the simulation and collects the diagnostics.
pub fn run(sim: &Simulation) -> Result<RunOutput> {
    let mut rows = Vec::new();
    let mut out = run_observed(sim, &mut rows)?;
    out.rows = rows;
    Ok(out)
}

/// Fixed step `dt = t_end / ceil(t_end / dt_cfl)` from the initial state.
pub fn run_observed(sim: &Simulation, observer: &mut dyn Observer) -> Result<RunOutput> {
    sim.validate()?;
    let aug = Augmented::new(sim.m, sim.n, sim.order)?;
    let system = aug.system().clone();
    let layout = system.layout().clone();
    let init = initial_state(&layout, &sim.grid, &sim.initial)?;
    let mut w = init.w;
    let mut oracle = sim.oracle.then_some(init.graph);

    let dt_cfl = cfl_dt(&w, &layout, sim.cfl)?;
    let steps = if sim.t_end > 0.0 { (sim.t_end / dt_cfl).ceil() as usize } else { 0 };
    let dt = if steps > 0 { sim.t_end / steps as f64 } else { dt_cfl };

    let emit = |t: f64, step: usize, w: &GridField, oracle: Option<&GridField>, observer: &mut dyn Observer| -> Result<()> {
        observer.row(&diagnostics(t, &system, sim.order, w, oracle)?)?;
        if sim.snapshots {
            observer.snapshot(&Snapshot::new(t, step, &layout, w))?;
        }
        Ok(())
    };
    emit(0.0, 0, &w, oracle.as_ref(), observer)?;
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        w = rk4_step(&w, t0, dt, |f| aug.rhs(f))?;
        apply_filter(&mut w, sim.filter);
        if let Some(o) = oracle.as_mut() {
            *o = rk4_step(o, t0, dt, |f| rhs_original(f, sim.m, sim.n, sim.order))?;
            apply_filter(o, sim.filter);
        }
        if step % sim.output_every == 0 || step == steps {
            emit(step as f64 * dt, step, &w, oracle.as_ref(), observer)?;
        }
    }
    Ok(RunOutput { rows: Vec::new(), dt, steps, w, oracle })
}

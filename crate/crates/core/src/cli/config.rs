use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{Grid, InitialData, Simulation, StencilOrder};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default = "default_order")]
    pub order: StencilOrder,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub filter: f64,
}

fn default_order() -> StencilOrder {
    StencilOrder::Second
}

fn default_cfl() -> f64 {
    0.4
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self { order: default_order(), cfl: default_cfl(), filter: 0.0 }
    }
}

/// Shrinking-circle reference run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub points: usize,
    #[serde(default = "one")]
    pub radius: f64,
    /// `dθ = dtheta_factor · Δu²`.
    #[serde(default = "default_dtheta_factor")]
    pub dtheta_factor: f64,
    /// Portion of the lifetime `R²/2` to follow.
    #[serde(default = "half")]
    pub fraction: f64,
    #[serde(default = "default_every")]
    pub output_every: usize,
}

/// Reference mean-curvature flow of the configured graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFlowConfig {
    pub theta_end: f64,
    #[serde(default = "default_dtheta_factor")]
    pub dtheta_factor: f64,
    #[serde(default = "default_every")]
    pub output_every: usize,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn default_dtheta_factor() -> f64 {
    0.1
}

fn default_every() -> usize {
    100
}

fn default_substeps() -> usize {
    1
}

fn default_mcf_order() -> StencilOrder {
    StencilOrder::Fourth
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McfConfig {
    /// Step sizes of the acceleration comparison, usually a halving sequence.
    pub dt: Vec<f64>,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
    #[serde(default = "default_mcf_order")]
    pub order: StencilOrder,
    #[serde(default)]
    pub circle: Option<CircleConfig>,
    #[serde(default)]
    pub graph_flow: Option<GraphFlowConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub m: usize,
    pub n: usize,
    pub grid: GridConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    pub t_end: f64,
    /// Steps between diagnostics rows.
    #[serde(default = "one_usize")]
    pub output_cadence: usize,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default)]
    pub oracle_compare: bool,
    #[serde(default)]
    pub mcf_compare: bool,
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub mcf: Option<McfConfig>,
}

fn one_usize() -> usize {
    1
}

fn finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite, got {x}")))
    }
}

impl RunConfig {
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema: expected {SCHEMA_VERSION}, got {}", self.schema)));
        }
        if !(1..=3).contains(&self.m) {
            return Err(Error::Config(format!("m: {} not in [1, 3]", self.m)));
        }
        if !(1..=2).contains(&self.n) {
            return Err(Error::Config(format!("n: {} not in [1, 2]", self.n)));
        }
        if self.grid.sizes.len() != self.n {
            return Err(Error::Config(format!("grid.sizes: {} entries for n = {}", self.grid.sizes.len(), self.n)));
        }
        for &l in &self.grid.lengths {
            finite("grid.lengths", l)?;
        }
        finite("scheme.cfl", self.scheme.cfl)?;
        finite("scheme.filter", self.scheme.filter)?;
        finite("t_end", self.t_end)?;
        for mode in self.initial_data.height.iter().chain(&self.initial_data.velocity) {
            finite("initial_data amplitude", mode.amplitude)?;
            finite("initial_data phase", mode.phase)?;
        }
        if let Some(mcf) = &self.mcf {
            if mcf.dt.is_empty() || mcf.dt.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
                return Err(Error::Config("mcf.dt: needs at least one positive finite step".into()));
            }
            if mcf.substeps == 0 {
                return Err(Error::Config("mcf.substeps: must be at least 1".into()));
            }
            if let Some(c) = &mcf.circle {
                finite("mcf.circle.radius", c.radius)?;
                if c.points < Grid::MIN_SIZE || !(c.radius > 0.0) || !(c.dtheta_factor > 0.0) {
                    return Err(Error::Config("mcf.circle: points ≥ 8, radius > 0, dtheta_factor > 0".into()));
                }
                if !(c.fraction > 0.0 && c.fraction < 1.0) || c.output_every == 0 {
                    return Err(Error::Config("mcf.circle: fraction in (0, 1), output_every ≥ 1".into()));
                }
            }
            if let Some(g) = &mcf.graph_flow {
                if !(g.theta_end.is_finite() && g.theta_end >= 0.0 && g.dtheta_factor > 0.0) || g.output_every == 0 {
                    return Err(Error::Config("mcf.graph_flow: theta_end ≥ 0, dtheta_factor > 0, output_every ≥ 1".into()));
                }
            }
        }
        self.simulation()?.validate()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.sizes.clone(), self.grid.lengths.clone())
    }

    pub fn simulation(&self) -> Result<Simulation> {
        let mut sim = Simulation::new(self.m, self.n, self.grid()?, self.initial_data.clone());
        sim.order = self.scheme.order;
        sim.cfl = self.scheme.cfl;
        sim.filter = self.scheme.filter;
        sim.t_end = self.t_end;
        sim.output_every = self.output_cadence;
        sim.oracle = self.oracle_compare;
        sim.snapshots = self.snapshots;
        Ok(sim)
    }
}

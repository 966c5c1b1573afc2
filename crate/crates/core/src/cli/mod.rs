//! Subcommand drivers for the `extremal` command-line tool. All floating
//! output goes through `fmt17`, so files round-trip and compare byte for byte.

mod config;
mod verify;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub use config::{CircleConfig, GraphFlowConfig, GridConfig, McfConfig, RunConfig, SchemeConfig, SCHEMA_VERSION};
pub use verify::{cmd_verify, Reproducer, SuiteCount, VerifyReport, DEFAULT_SAMPLES, DEFAULT_SHAPES, IDENTITIES, MAX_SHAPE};

use crate::error::{Error, Result};
use crate::flux::{char_speeds_n1, linear_degeneracy_residual, wave_speeds};
use crate::mcf::{
    acceleration_limit_test, mcf_step, mean_radius, observed_orders, sine_amplitude, tangency_residual, EmbeddingField,
};
use crate::solver::{fmt17, initial_state, run_observed, DiagnosticsRow, Observer, Snapshot};
use crate::state::StateLayout;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;

/// Stable mapping from errors to process exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BlowUp { .. } | Error::SingularState { .. } | Error::DegenerateMetric { .. } => EXIT_BLOWUP,
        _ => EXIT_CONFIG,
    }
}

/// Sets the worker count for per-point parallel loops (no-op without the
/// `parallel` feature). Must be called before any parallel work.
pub fn configure_threads(threads: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn output_dir(cfg: &RunConfig, override_dir: Option<&Path>) -> PathBuf {
    override_dir.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."))
}

struct CsvObserver {
    csv: BufWriter<File>,
    dir: PathBuf,
    last: Option<DiagnosticsRow>,
    snapshots: usize,
}

impl Observer for CsvObserver {
    fn row(&mut self, row: &DiagnosticsRow) -> Result<()> {
        writeln!(self.csv, "{}", row.to_csv())?;
        self.csv.flush()?;
        self.last = Some(row.clone());
        Ok(())
    }

    fn snapshot(&mut self, snapshot: &Snapshot) -> Result<()> {
        let path = self.dir.join(format!("snapshot_{:06}.json", snapshot.step));
        fs::write(path, serde_json::to_string(snapshot)?)?;
        self.snapshots += 1;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SimulateSummary {
    pub csv: PathBuf,
    pub rows: usize,
    pub snapshots: usize,
    pub last: DiagnosticsRow,
    pub steps: usize,
    pub dt: f64,
}

impl SimulateSummary {
    pub fn line(&self) -> String {
        format!(
            "steps={} dt={} t={} lambda_Linf={} omega_Linf={} phi_Linf={} psi_Linf={} sigma_Linf={}",
            self.steps,
            fmt17(self.dt),
            fmt17(self.last.t),
            fmt17(self.last.lambda_linf),
            fmt17(self.last.omega_linf),
            fmt17(self.last.phi_linf),
            fmt17(self.last.psi_linf),
            fmt17(self.last.sigma_linf)
        )
    }
}

/// Runs the configured evolution, writing `diagnostics.csv` (and snapshots)
/// under the output directory. Rows are flushed as they are produced, so a
/// blow-up leaves the partial series on disk.
pub fn cmd_simulate(config: &Path, override_dir: Option<&Path>) -> Result<SimulateSummary> {
    let cfg = RunConfig::from_path(config)?;
    let sim = cfg.simulation()?;
    let dir = output_dir(&cfg, override_dir);
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join("diagnostics.csv");
    let mut csv = BufWriter::new(File::create(&csv_path)?);
    writeln!(csv, "{}", DiagnosticsRow::CSV_HEADER)?;
    let mut obs = CsvObserver { csv, dir, last: None, snapshots: 0 };
    let out = run_observed(&sim, &mut obs)?;
    let last = obs.last.clone().expect("the initial row is always emitted");
    Ok(SimulateSummary { csv: csv_path, rows: out.steps.div_ceil(sim.output_every) + 1, snapshots: obs.snapshots, last, steps: out.steps, dt: out.dt })
}

/// Input of the characteristics command.
#[derive(Clone, Debug)]
pub enum CharInput {
    Config(PathBuf),
    Inline { m: usize, n: usize, w: Vec<f64>, nu: Option<Vec<f64>> },
}

/// Speeds and degeneracy residuals as a plain-text table.
pub fn cmd_characteristics(input: &CharInput) -> Result<String> {
    match input {
        CharInput::Inline { m, n, w, nu } => {
            let layout = StateLayout::new(*m, *n)?;
            if w.len() != layout.dim() {
                return Err(Error::Config(format!("W has {} entries, (m, n) = ({m}, {n}) needs {}", w.len(), layout.dim())));
            }
            if *n == 1 && nu.is_none() {
                analytic_table(w, &layout)
            } else {
                let nu = nu.clone().unwrap_or_else(|| {
                    let mut e = vec![0.0; *n];
                    e[0] = 1.0;
                    e
                });
                numeric_table(w, &nu, &layout)
            }
        }
        CharInput::Config(path) => {
            let cfg = RunConfig::from_path(path)?;
            let layout = StateLayout::new(cfg.m, cfg.n)?;
            let init = initial_state(&layout, &cfg.grid()?, &cfg.initial_data)?;
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut degeneracy: f64 = 0.0;
            for p in 0..init.w.grid.points() {
                let w = init.w.point(p);
                for axis in 0..cfg.n {
                    let mut nu = vec![0.0; cfg.n];
                    nu[axis] = 1.0;
                    for s in wave_speeds(w, &nu, &layout)? {
                        lo = lo.min(s);
                        hi = hi.max(s);
                    }
                }
                if cfg.n == 1 {
                    degeneracy = degeneracy.max(linear_degeneracy_residual(w, &layout)?);
                }
            }
            let mut out = String::from("quantity,value\n");
            out += &format!("min_speed,{}\nmax_speed,{}\n", fmt17(lo), fmt17(hi));
            if cfg.n == 1 {
                out += &format!("linear_degeneracy_residual,{}\n", fmt17(degeneracy));
            }
            Ok(out)
        }
    }
}

fn analytic_table(w: &[f64], layout: &StateLayout) -> Result<String> {
    let (_, _, fields) = char_speeds_n1(w, layout)?;
    let mut out = String::from("field,speed,multiplicity\n");
    for (name, field) in ["plus", "minus"].iter().zip(&fields) {
        out += &format!("{name},{},{}\n", fmt17(field.speed), field.multiplicity);
    }
    out += &format!("linear_degeneracy_residual,{},\n", fmt17(linear_degeneracy_residual(w, layout)?));
    Ok(out)
}

fn numeric_table(w: &[f64], nu: &[f64], layout: &StateLayout) -> Result<String> {
    let speeds = wave_speeds(w, nu, layout)?;
    let mut out = String::from("index,speed\n");
    for (k, s) in speeds.iter().enumerate() {
        out += &format!("{k},{}\n", fmt17(*s));
    }
    Ok(out)
}

/// Output of the MCF comparison.
#[derive(Clone, Debug)]
pub struct McfSummary {
    pub files: Vec<PathBuf>,
    /// `dt, error, order` rows; the first order is empty, as is any order
    /// undefined because both errors vanish.
    pub table: String,
    pub orders: Vec<f64>,
}

const MCF_HEADER: &str = "t,err_acceleration_Linf,tangency_residual,radius_or_amplitude";

/// Acceleration limit sweep over the configured `dt` values, plus the
/// optional graph-flow and shrinking-circle reference runs.
pub fn cmd_mcf_compare(config: &Path, override_dir: Option<&Path>) -> Result<McfSummary> {
    let cfg = RunConfig::from_path(config)?;
    if cfg.initial_data.has_velocity() {
        return Err(Error::Config("initial_data.velocity: the MCF comparison needs V = 0".into()));
    }
    let mcf = cfg.mcf.clone().ok_or_else(|| Error::Config("mcf: section missing".into()))?;
    let grid = cfg.grid()?;
    let dir = output_dir(&cfg, override_dir);
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();

    let wave = cfg.initial_data.height.first().map(|h| h.wave.clone()).unwrap_or_else(|| vec![1; cfg.n]);
    let layout = StateLayout::new(cfg.m, cfg.n)?;
    let init = initial_state(&layout, &grid, &cfg.initial_data)?;
    let graph0 = EmbeddingField::graph(&init.heights, mcf.order)?;
    let amplitude0 = sine_amplitude(&graph0, &wave);

    let mut csv = String::from(MCF_HEADER) + "\n";
    let mut errors = Vec::new();
    for &dt in &mcf.dt {
        let r = acceleration_limit_test(cfg.m, &grid, &cfg.initial_data, dt, mcf.substeps, mcf.order)?;
        csv += &format!("{},{},{},{}\n", fmt17(dt), fmt17(r.err_linf), fmt17(r.tangency), fmt17(amplitude0));
        errors.push(r.err_linf);
    }
    let path = dir.join("mcf_acceleration.csv");
    fs::write(&path, csv)?;
    files.push(path);

    let orders = observed_orders(&errors);
    let mut table = String::from("dt,err_acceleration_Linf,order\n");
    for (k, (&dt, &err)) in mcf.dt.iter().zip(&errors).enumerate() {
        let order = if k == 0 || !orders[k - 1].is_finite() { String::new() } else { fmt17(orders[k - 1]) };
        table += &format!("{},{},{}\n", fmt17(dt), fmt17(err), order);
    }

    if let Some(flow) = &mcf.graph_flow {
        let mut e = graph0.clone();
        let dx = grid.min_spacing();
        let dtheta = flow.dtheta_factor * dx * dx;
        let steps = (flow.theta_end / dtheta).ceil() as usize;
        let dtheta = if steps > 0 { flow.theta_end / steps as f64 } else { dtheta };
        let mut csv = String::from(MCF_HEADER) + "\n";
        for k in 0..=steps {
            if k > 0 {
                e = mcf_step(&e, dtheta)?;
            }
            if k % flow.output_every == 0 || k == steps {
                csv += &format!("{},,{},{}\n", fmt17(k as f64 * dtheta), fmt17(tangency_residual(&e)?), fmt17(sine_amplitude(&e, &wave)));
            }
        }
        let path = dir.join("mcf_graph.csv");
        fs::write(&path, csv)?;
        files.push(path);
    }

    if let Some(c) = &mcf.circle {
        let mut e = EmbeddingField::circle(c.points, c.radius, mcf.order)?;
        let du = e.grid().spacing(1);
        let dtheta = c.dtheta_factor * du * du;
        let steps = (c.fraction * c.radius * c.radius / 2.0 / dtheta).floor() as usize;
        let mut csv = String::from(MCF_HEADER) + "\n";
        for k in 0..=steps {
            if k > 0 {
                e = mcf_step(&e, dtheta)?;
            }
            if k % c.output_every == 0 || k == steps {
                csv += &format!("{},,{},{}\n", fmt17(k as f64 * dtheta), fmt17(tangency_residual(&e)?), fmt17(mean_radius(&e)));
            }
        }
        let path = dir.join("mcf_circle.csv");
        fs::write(&path, csv)?;
        files.push(path);
    }
    Ok(McfSummary { files, table, orders })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
        assert_eq!(exit_code(&Error::BlowUp { t: 1.0 }), EXIT_BLOWUP);
    }

    #[test]
    fn inline_characteristics() {
        let table = cmd_characteristics(&CharInput::Inline { m: 1, n: 1, w: vec![0.5, 0.0, 0.2, 0.0], nu: None }).unwrap();
        assert!(table.contains("plus,7.0000000000000007e-1,2") || table.contains("plus,6.9999999999999996e-1,2"), "{table}");
        let flat = cmd_characteristics(&CharInput::Inline { m: 1, n: 1, w: vec![1.0, 0.0, 0.0, 0.0], nu: None }).unwrap();
        assert!(flat.contains("plus,1.0000000000000000e0,2") && flat.contains("minus,-1.0000000000000000e0,2"));
        let numeric = cmd_characteristics(&CharInput::Inline { m: 1, n: 2, w: vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0], nu: None }).unwrap();
        assert_eq!(numeric.lines().count(), 7);
        assert!(cmd_characteristics(&CharInput::Inline { m: 1, n: 1, w: vec![1.0], nu: None }).is_err());
    }
}

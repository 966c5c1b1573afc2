use serde::Serialize;

use super::evolve::rhs_augmented;
use super::grid::{derivative, GridField, StencilOrder};
use crate::error::{Error, Result};
use crate::flux::{entropy, entropy_flux, System};
use crate::minors::IndexSet;
use crate::state::{constraint_residuals, to_conservative, ConservativeState, PrimitiveState, StateLayout, DEFAULT_GUARD};

/// One `σ_{A',I}` field.
#[derive(Clone, Debug)]
pub struct SigmaField {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub values: Vec<f64>,
}

/// `σ_{A',I} = Σ_{i∈I} (−1)^{O_I(i)} ∂_i(m_{A',I∖i}/τ)` for
/// `2 ≤ |I| = |A'| + 1 ≤ min(r + 1, n)`; empty when `n = 1`.
pub fn sigma_residual(field: &GridField, layout: &StateLayout, order: StencilOrder) -> Result<Vec<SigmaField>> {
    let (m, n) = (layout.m(), layout.n());
    let r = m.min(n);
    let points = field.grid.points();
    let tau_min = (0..points).map(|p| field.point(p)[StateLayout::TAU].abs()).fold(f64::INFINITY, f64::min);
    if n >= 2 && !(tau_min > DEFAULT_GUARD) {
        return Err(Error::SingularState { what: "tau", value: tau_min, guard: DEFAULT_GUARD });
    }
    let mut out = Vec::new();
    for k in 2..=(r + 1).min(n) {
        for rows in IndexSet::subsets(m, k - 1) {
            for cols in IndexSet::subsets(n, k) {
                let mut values = vec![0.0; points];
                for (q, i) in cols.iter().enumerate() {
                    let slot = layout
                        .minor_slot(&rows, &cols.without(i))
                        .ok_or_else(|| Error::Domain("σ references a minor outside the layout".into()))?;
                    let ratio = GridField::from_fn(&field.grid, 1, |p, x| {
                        let w = field.point(p);
                        x[0] = w[slot] / w[StateLayout::TAU];
                    });
                    let d = derivative(&ratio, i, order)?;
                    let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                    for (v, dv) in values.iter_mut().zip(&d.values) {
                        *v += sign * dv;
                    }
                }
                out.push(SigmaField { rows, cols, values });
            }
        }
    }
    Ok(out)
}

/// Diagnostics at one output time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub total_energy: f64,
    pub entropy_residual_l2: f64,
    pub lambda_linf: f64,
    pub omega_linf: f64,
    pub phi_linf: f64,
    pub psi_linf: f64,
    pub sigma_linf: f64,
    pub oracle_f_err_linf: Option<f64>,
    pub oracle_d_err_linf: Option<f64>,
}

impl DiagnosticsRow {
    pub const CSV_HEADER: &'static str = "t,total_energy,entropy_residual_L2,lambda_Linf,omega_Linf,phi_Linf,psi_Linf,sigma_Linf,oracle_F_err_Linf,oracle_D_err_Linf";

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
        [
            fmt17(self.t),
            fmt17(self.total_energy),
            fmt17(self.entropy_residual_l2),
            fmt17(self.lambda_linf),
            fmt17(self.omega_linf),
            fmt17(self.phi_linf),
            fmt17(self.psi_linf),
            fmt17(self.sigma_linf),
            opt(self.oracle_f_err_linf),
            opt(self.oracle_d_err_linf),
        ]
        .join(",")
    }

    /// Largest of the four algebraic constraint norms.
    pub fn constraint_linf(&self) -> f64 {
        self.lambda_linf.max(self.omega_linf).max(self.phi_linf).max(self.psi_linf)
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn total_energy(field: &GridField) -> f64 {
    let vol = field.grid.cell_volume();
    (0..field.grid.points()).map(|p| vol / field.point(p)[StateLayout::TAU]).sum()
}

fn conservative_at(field: &GridField, layout: &StateLayout, p: usize) -> Result<ConservativeState<f64>> {
    let w = PrimitiveState::from_slice(layout, &field.point(p)[..layout.dim()])?;
    to_conservative(&w, DEFAULT_GUARD)
}

/// Pointwise `∂_t S + Σ_j ∂_j Q_j`, with `∂_t S` from the chain rule through
/// the discrete right-hand side and `∂_j Q_j` from the derivative stencil.
pub fn entropy_residual(system: &System, order: StencilOrder, field: &GridField) -> Result<Vec<f64>> {
    let layout = system.layout();
    let n = layout.n();
    let dim = layout.dim();
    let dw = rhs_augmented(system, order, field)?;
    let points = field.grid.points();
    let mut residual = vec![0.0; points];
    let mut fluxes: Vec<GridField> = (0..n).map(|_| GridField::zeros(&field.grid, 1)).collect();
    for p in 0..points {
        let u = conservative_at(field, layout, p)?;
        let w = field.point(p);
        let tau = w[StateLayout::TAU];
        let uv = u.to_vec();
        let dtau = dw.point(p)[StateLayout::TAU];
        let numerator = u.energy_numerator();
        let mut ds = 0.0;
        for k in 0..dim {
            // h = 1/τ, every other component is W_k/τ
            let (du, grad) = if k == 0 {
                (-dtau / (tau * tau), -numerator / (2.0 * u.h * u.h))
            } else {
                ((dw.point(p)[k] - uv[k] * dtau) / tau, uv[k] / u.h)
            };
            ds += grad * du;
        }
        residual[p] = ds;
        for (j, flux) in fluxes.iter_mut().enumerate() {
            flux.values[p] = entropy_flux(&u, j + 1, layout, DEFAULT_GUARD)?;
        }
    }
    for (j, flux) in fluxes.iter().enumerate() {
        let d = derivative(flux, j + 1, order)?;
        for (r, x) in residual.iter_mut().zip(&d.values) {
            *r += x;
        }
    }
    Ok(residual)
}

/// Total entropy `Σ S Δx`.
pub fn total_entropy(field: &GridField, layout: &StateLayout) -> Result<f64> {
    let vol = field.grid.cell_volume();
    let mut total = 0.0;
    for p in 0..field.grid.points() {
        total += entropy(&conservative_at(field, layout, p)?, DEFAULT_GUARD)? * vol;
    }
    Ok(total)
}

/// Full diagnostics row for the state `field` at time `t`; `oracle` holds
/// the original-system `(F, D)` field to compare against, when present.
pub fn diagnostics(
    t: f64,
    system: &System,
    order: StencilOrder,
    field: &GridField,
    oracle: Option<&GridField>,
) -> Result<DiagnosticsRow> {
    let layout = system.layout();
    let (m, n) = (layout.m(), layout.n());
    let dim = layout.dim();
    let mut row = DiagnosticsRow {
        t,
        total_energy: total_energy(field),
        entropy_residual_l2: 0.0,
        lambda_linf: 0.0,
        omega_linf: 0.0,
        phi_linf: 0.0,
        psi_linf: 0.0,
        sigma_linf: 0.0,
        oracle_f_err_linf: None,
        oracle_d_err_linf: None,
    };
    for p in 0..field.grid.points() {
        let r = constraint_residuals(&field.point(p)[..dim], layout);
        row.lambda_linf = row.lambda_linf.max(r.lambda_abs());
        row.omega_linf = row.omega_linf.max(r.omega_max());
        row.phi_linf = row.phi_linf.max(r.phi_max());
        row.psi_linf = row.psi_linf.max(r.psi_max());
    }
    let vol = field.grid.cell_volume();
    row.entropy_residual_l2 =
        (entropy_residual(system, order, field)?.iter().map(|r| r * r).sum::<f64>() * vol).sqrt();
    row.sigma_linf = sigma_residual(field, layout, order)?
        .iter()
        .flat_map(|s| s.values.iter())
        .fold(0.0, |acc: f64, x| acc.max(x.abs()));
    if let Some(oracle) = oracle {
        let (mut fe, mut de) = (0.0f64, 0.0f64);
        let ml = layout.minors();
        for p in 0..field.grid.points() {
            let w = field.point(p);
            let o = oracle.point(p);
            let tau = w[StateLayout::TAU];
            for a in 1..=m {
                for i in 1..=n {
                    let f = w[layout.minor(ml.entry_index(a, i))] / tau;
                    fe = fe.max((f - o[(a - 1) * n + i - 1]).abs());
                }
                de = de.max((w[layout.d(a)] / tau - o[m * n + a - 1]).abs());
            }
        }
        row.oracle_f_err_linf = Some(fe);
        row.oracle_d_err_linf = Some(de);
    }
    Ok(row)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::grid::Grid;

    #[test]
    fn csv_row_format() {
        let row = DiagnosticsRow {
            t: 0.5,
            total_energy: 1.0,
            entropy_residual_l2: 0.0,
            lambda_linf: 0.0,
            omega_linf: 0.0,
            phi_linf: 0.0,
            psi_linf: 0.0,
            sigma_linf: 0.0,
            oracle_f_err_linf: None,
            oracle_d_err_linf: Some(0.25),
        };
        let line = row.to_csv();
        assert!(line.starts_with("5.0000000000000000e-1,1.0000000000000000e0,"));
        assert!(line.ends_with(",,2.5000000000000000e-1"));
        assert_eq!(line.split(',').count(), DiagnosticsRow::CSV_HEADER.split(',').count());
    }

    #[test]
    fn sigma_ranges() {
        let g1 = Grid::uniform(1, 8, 1.0).unwrap();
        let l1 = StateLayout::new(2, 1).unwrap();
        let w = GridField::from_fn(&g1, l1.dim(), |_, x| x[0] = 1.0);
        assert!(sigma_residual(&w, &l1, StencilOrder::Second).unwrap().is_empty());
        let g2 = Grid::uniform(2, 8, 1.0).unwrap();
        let l2 = StateLayout::new(2, 2).unwrap();
        let w = GridField::from_fn(&g2, l2.dim(), |_, x| {
            x.iter_mut().enumerate().for_each(|(k, v)| *v = 0.1 * k as f64);
            x[0] = 1.0;
        });
        let s = sigma_residual(&w, &l2, StencilOrder::Second).unwrap();
        // k = 2: A' ∈ {{1}, {2}}, I = {1, 2}; k = 3 exceeds n
        assert_eq!(s.len(), 2);
        assert!(s.iter().all(|f| f.values.iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn flat_state_diagnostics() {
        let g = Grid::uniform(2, 8, 2.0).unwrap();
        let system = System::new(1, 2).unwrap();
        let w = GridField::from_fn(&g, system.dim(), |_, x| x[0] = 1.0);
        let row = diagnostics(0.0, &system, StencilOrder::Second, &w, None).unwrap();
        assert!((row.total_energy - 4.0).abs() < 1e-13);
        assert_eq!(row.constraint_linf(), 0.0);
        assert!(row.entropy_residual_l2 <= 1e-12);
        assert_eq!(row.sigma_linf, 0.0);
    }
}

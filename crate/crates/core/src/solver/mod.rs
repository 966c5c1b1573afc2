//! Method-of-lines evolution on periodic grids with central differences of
//! order 2 or 4 and classical RK4 at a fixed CFL step.
//!
//! The augmented non-conservative system is evolved in `W`; the original
//! graph system in `(F, D)` is evolved independently as an oracle. The two
//! share only the grid and stencil code.

mod diagnostics;
mod evolve;
mod grid;
mod initial;
mod run;

pub use diagnostics::{
    diagnostics, entropy_residual, fmt17, sigma_residual, total_energy, total_entropy, DiagnosticsRow, SigmaField,
};
pub use evolve::{cfl_dt, integrate, rhs_augmented, rhs_original, rk4_step, Augmented};
pub use grid::{apply_filter, derivative, derivative_shifted, Grid, GridField, StencilOrder};
pub use initial::{graph_fields, initial_state, momentum_from_velocity, FourierMode, InitialData, InitialState, DEFAULT_TIMELIKE_MARGIN};
pub use run::{run, run_observed, Observer, RunOutput, Simulation, Snapshot};

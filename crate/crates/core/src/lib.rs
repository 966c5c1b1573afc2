//! Extremal time-like submanifolds of Minkowski space in graph gauge. The
//! augmented symmetric hyperbolic system acts on the graph state together
//! with its minors and is evolved on periodic grids; the small-time limit
//! is compared with mean curvature flow.

pub mod cli;
pub mod error;
pub mod flux;
pub mod mcf;
pub mod minors;
pub mod scalar;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
pub use scalar::{Dual, Scalar};

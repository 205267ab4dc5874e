//! Finite-volume simulation of the regularized doubly degenerate nutrient-taxis
//! system
//!
//! ```text
//! u_t = (u v u_x)_x - χ (u² v v_x)_x + u v
//! v_t = v_xx - u v
//! ```
//!
//! on `(-1/ε, 1/ε)` with zero-flux boundaries and initial data `(u₀ + εζ, v₀)`,
//! plus a harness that evaluates the functionals of the a priori estimates along
//! trajectories and across families of `ε`.

pub mod app;
pub mod config;
pub mod cutoff;
pub mod error;
pub mod functionals;
pub mod gn;
pub mod grid;
pub mod harness;
pub mod initial;
pub mod io;
pub mod limit;
pub mod solver;

pub use cutoff::Cutoff;
pub use error::{Error, Result};
pub use functionals::{evaluate_monitors, FunctionalSample, MonitorConfig};
pub use grid::{Boundary, Field, Grid};
pub use harness::InequalityReport;
pub use initial::InitialDataSpec;
pub use limit::{run_sweep, SweepResult};
pub use solver::{simulate, SolverParams, State, Trajectory};

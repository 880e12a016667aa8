//! Linear solvers, stationary and transient drivers, error norms and the
//! verification studies built on them.

pub mod convergence;
pub mod limits;
pub mod linear;
pub mod model;
pub mod norms;
pub mod stationary;
pub mod transient;

pub use convergence::{convergence_study, default_levels, log_slope, ConvergenceCase, RateRow, RateTable};
pub use limits::{limit_sweep, limiting_case_check, scaled_interface, LimitDiagnostics, LimitMode, LimitSample};
pub use linear::{solve_constrained, sparse_solve, Factorization, LinearSolveReport, Method, SolveOptions};
pub use model::{Forcing, FsiModel, InflowField};
pub use norms::{interface_diagnostics, InterfaceDiagnostics};
pub use stationary::{solve_stationary, solve_stationary_with, StationaryLoads, StationarySolution};
pub use transient::{energies, run_transient, run_transient_from, step_transient, Energy, SolutionState, StepDiagnostics, TransientRun, TransientStepper};

//! First-order extraction, SMT-LIB emission and solver processes.

pub mod emit;
pub mod fol;
pub mod solver;

pub use emit::{emit_consistency, emit_smtlib};
pub use fol::{extract_fol, ExtractError, FolProblem};
pub use solver::{run_portfolio, run_solver, SolverAnswer, SolverConfig, SolverRegistry};

//! Lowering of goals in a small dependently typed core language to
//! first-order logic, with a checked justification for every generated
//! hypothesis, and an SMT-LIB 2 back-end.
//!
//! The flow is: [`parse::parse_problem`] reads a problem file,
//! [`pipeline::scope`] runs the transformations in [`transform`] and
//! validates their output with [`certify`], and [`pipeline::prove`]
//! extracts a first-order problem, emits a script and calls a solver
//! through [`smt`].

pub mod certify;
pub mod env;
pub mod eval;
pub mod generate;
pub mod par;
pub mod parse;
pub mod pipeline;
pub mod print;
pub mod reduce;
pub mod smt;
pub mod state;
pub mod syntax;
pub mod transform;
pub mod typing;

pub use env::{GlobalEnv, Problem};
pub use syntax::{Name, Term};

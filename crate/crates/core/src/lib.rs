#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod error;
pub mod figures;
pub mod geometry;
pub mod io;
pub mod mapper;
pub mod model;
pub mod pipeline;
pub mod quadrature;
pub mod solvability;

pub use error::{Error, Result};
pub use model::C64;
pub use pipeline::{override_constants, solve, solve_with_overrides, Overrides, Problem, SolveResult, Verdict};

//! Self-contained LP/MILP engine.
//!
//! The solver stack is deliberately dependency-free: a bounded-variable
//! revised simplex (sparse basis factorization with eta updates) under a
//! depth-first branch-and-bound on binary variables, plus a free-format MPS
//! writer/reader for interchange with external solvers.
//!
//! Entry points: build a [`MilpModel`], then [`solve_lp`] (integrality
//! relaxed) or [`solve_milp`]. Every returned [`Solution`] satisfies the row
//! and bound tolerances in [`tolerances`]; [`check_solution`] re-verifies that
//! claim from the model and values alone.

mod branch;
mod error;
mod model;
mod mps;
mod simplex;

pub use branch::{solve_milp, MilpLimits};
pub use error::{MilpError, Result};
pub use model::{
    check_solution, Certificate, LinConstraint, MilpModel, Sense, SolveStatus, Solution, VarDef,
    VarKind, Violation,
};
pub use mps::{read_mps, write_mps};
pub use simplex::solve_lp;

/// Numerical tolerances honoured by the engine.
pub mod tolerances {
    /// Maximum absolute row residual of a returned solution.
    pub const ROW_FEASIBILITY: f64 = 1e-7;
    /// Maximum bound violation of a returned solution.
    pub const BOUND_FEASIBILITY: f64 = 1e-9;
    /// Distance from {0, 1} below which a binary counts as integral.
    pub const INTEGRALITY: f64 = 1e-6;
    /// Default relative MILP gap proven at termination.
    pub const RELATIVE_GAP: f64 = 1e-6;
    /// Pivots below this magnitude trigger the numerical-breakdown error.
    pub const PIVOT: f64 = 1e-11;
}

//! Reference implementations used as independent test oracles.
//!
//! Nothing in here is shared with the production solver: the LP oracle is a
//! dense textbook tableau simplex with Bland's rule, the flow oracle is a
//! successive-shortest-path min-cost flow. Both favour clarity over speed and
//! are only meant for the small randomized instances the test suites throw at
//! them.

pub mod mcf;
pub mod tableau;

pub use mcf::{min_cost_b_flow, McfEdge, McfResult};
pub use tableau::{solve_dense_lp, Cmp, DenseLp, DenseLpOutcome};

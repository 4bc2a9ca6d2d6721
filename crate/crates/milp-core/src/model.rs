//! Model types shared by the LP and MILP solvers: variables with bounds and
//! integrality, sparse constraints, and the solution record.

use crate::error::{MilpError, Result};

/// Variable integrality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    /// Restricted to {0, 1}; bounds must stay within [0, 1].
    Binary,
}

/// A decision variable with (possibly infinite) bounds.
#[derive(Debug, Clone)]
pub struct VarDef {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// A sparse linear constraint `terms (sense) rhs`.
#[derive(Debug, Clone)]
pub struct LinConstraint {
    pub name: String,
    /// (variable index, coefficient); duplicate indices are rejected.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization model over continuous and binary variables.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub vars: Vec<VarDef>,
    pub constraints: Vec<LinConstraint>,
    /// Sparse objective (variable index, cost); always minimized.
    pub objective: Vec<(usize, f64)>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a continuous variable and returns its index.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> usize {
        self.vars.push(VarDef {
            name: name.into(),
            lower,
            upper,
            kind: VarKind::Continuous,
        });
        self.vars.len() - 1
    }

    /// Adds a binary variable and returns its index.
    pub fn add_binary(&mut self, name: impl Into<String>) -> usize {
        self.vars.push(VarDef {
            name: name.into(),
            lower: 0.0,
            upper: 1.0,
            kind: VarKind::Binary,
        });
        self.vars.len() - 1
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> usize {
        self.constraints.push(LinConstraint {
            name: name.into(),
            terms,
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    /// Adds `cost * var` to the objective.
    pub fn add_objective_term(&mut self, var: usize, cost: f64) {
        self.objective.push((var, cost));
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Checks every structural invariant; returns the first violation found.
    pub fn validate(&self) -> Result<()> {
        if self.vars.is_empty() {
            return Err(MilpError::InvalidModel("model has no variables".into()));
        }
        for (i, v) in self.vars.iter().enumerate() {
            if v.lower.is_nan() || v.upper.is_nan() {
                return Err(MilpError::InvalidModel(format!(
                    "variable '{}' (#{i}) has NaN bounds",
                    v.name
                )));
            }
            if v.lower > v.upper {
                return Err(MilpError::InvalidModel(format!(
                    "variable '{}' (#{i}) has lower {} > upper {}",
                    v.name, v.lower, v.upper
                )));
            }
            if v.kind == VarKind::Binary && (v.lower < -0.0 || v.upper > 1.0) {
                return Err(MilpError::InvalidModel(format!(
                    "binary variable '{}' (#{i}) has bounds [{}, {}] outside [0, 1]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        let mut seen = vec![usize::MAX; self.vars.len()];
        for (ci, c) in self.constraints.iter().enumerate() {
            for &(vi, coeff) in &c.terms {
                if vi >= self.vars.len() {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint '{}' (#{ci}) references variable index {vi} out of range",
                        c.name
                    )));
                }
                if !coeff.is_finite() {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint '{}' (#{ci}) has non-finite coefficient on variable {vi}",
                        c.name
                    )));
                }
                if seen[vi] == ci {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint '{}' (#{ci}) has duplicate term for variable '{}'",
                        c.name, self.vars[vi].name
                    )));
                }
                seen[vi] = ci;
            }
            if !c.rhs.is_finite() {
                return Err(MilpError::InvalidModel(format!(
                    "constraint '{}' (#{ci}) has non-finite rhs",
                    c.name
                )));
            }
        }
        for &(vi, cost) in &self.objective {
            if vi >= self.vars.len() {
                return Err(MilpError::InvalidModel(format!(
                    "objective references variable index {vi} out of range"
                )));
            }
            if !cost.is_finite() {
                return Err(MilpError::InvalidModel(format!(
                    "objective has non-finite cost on variable {vi}"
                )));
            }
        }
        Ok(())
    }

    /// Objective value of an assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }
}

/// Outcome classification of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A limit (nodes/time) stopped the search; incumbent and bound are still valid.
    GapLimit,
}

/// Witness attached to non-optimal outcomes.
#[derive(Debug, Clone)]
pub enum Certificate {
    /// Feasible direction along which the objective decreases without bound
    /// (one entry per model variable).
    UnboundedRay(Vec<f64>),
    /// Constraint indices whose phase-1 duals witness the contradiction.
    InfeasibleRows(Vec<usize>),
}

/// Result of an LP or MILP solve.
#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// One value per model variable (last iterate when not optimal).
    pub values: Vec<f64>,
    pub objective: f64,
    /// Best proven lower bound on the optimum (minimization).
    pub bound: f64,
    /// Relative gap `(objective - bound) / max(1, |objective|)`.
    pub gap: f64,
    /// Branch-and-bound nodes processed (1 for a plain LP solve).
    pub nodes: u64,
    /// Total simplex iterations.
    pub iterations: u64,
    pub certificate: Option<Certificate>,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// One violated row or bound found by [`check_solution`].
#[derive(Debug, Clone)]
pub struct Violation {
    /// Constraint name, or `bound(<var>)` for a bound violation.
    pub what: String,
    pub amount: f64,
}

/// Independent residual checker: reads only the model and the values, never
/// solver internals. Returns every row with residual above `row_tol` and every
/// variable outside its bounds by more than `bound_tol`.
pub fn check_solution(
    model: &MilpModel,
    values: &[f64],
    row_tol: f64,
    bound_tol: f64,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, v) in model.vars.iter().enumerate() {
        let x = values[i];
        let below = v.lower - x;
        let above = x - v.upper;
        let err = below.max(above);
        if err > bound_tol {
            out.push(Violation {
                what: format!("bound({})", v.name),
                amount: err,
            });
        }
    }
    for c in &model.constraints {
        let lhs: f64 = c.terms.iter().map(|&(vi, a)| a * values[vi]).sum();
        let residual = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        if residual > row_tol {
            out.push(Violation {
                what: c.name.clone(),
                amount: residual,
            });
        }
    }
    out
}

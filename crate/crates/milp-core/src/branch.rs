//! Branch-and-bound over binary variables.
//!
//! Nodes are explored depth-first, diving toward the rounded value of the
//! branching variable first; every 64 processed nodes the open pool is
//! re-sorted by bound so the dive restarts from the most promising subtree.
//! Branching picks the most fractional binary (ties to the lowest variable
//! index). Node LPs warm-start from the parent basis.

use std::rc::Rc;
use std::time::{Duration, Instant};

use crate::error::{MilpError, Result};
use crate::model::{
    check_solution, Certificate, MilpModel, SolveStatus, Solution, VarKind,
};
use crate::simplex::{outcome_to_solution, BasisSnapshot, Engine, LpStatus, SimplexOptions};
use crate::tolerances;

/// Search limits for [`solve_milp`].
#[derive(Debug, Clone)]
pub struct MilpLimits {
    pub max_nodes: u64,
    /// Relative gap at which a node (and the search) is considered closed.
    pub rel_gap: f64,
    pub time: Option<Duration>,
}

impl Default for MilpLimits {
    fn default() -> Self {
        Self {
            max_nodes: 1_000_000,
            rel_gap: tolerances::RELATIVE_GAP,
            time: None,
        }
    }
}

struct Node {
    id: u64,
    /// (binary var index, fixed value) along the path from the root.
    fixings: Vec<(usize, f64)>,
    /// Parent LP objective: a valid lower bound for this subtree.
    bound: f64,
    warm: Option<Rc<BasisSnapshot>>,
}

/// Solves the MILP to the requested gap. Binary variables are the only
/// integrality kind supported.
pub fn solve_milp(model: &MilpModel, limits: &MilpLimits) -> Result<Solution> {
    model.validate()?;
    let binaries: Vec<usize> = model
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(i, _)| i)
        .collect();

    let engine = Engine::new(model, SimplexOptions::default());
    let started = Instant::now();

    let mut pool: Vec<Node> = vec![Node {
        id: 0,
        fixings: Vec::new(),
        bound: f64::NEG_INFINITY,
        warm: None,
    }];
    let mut next_id = 1u64;
    let mut nodes_processed = 0u64;
    let mut total_iterations = 0u64;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    // Bounds of subtrees pruned against the incumbent; they cap the final
    // proven bound.
    let mut min_pruned_bound = f64::INFINITY;
    let mut limit_hit = false;

    while let Some(node) = pool.pop() {
        if nodes_processed >= limits.max_nodes {
            limit_hit = true;
            pool.push(node);
            break;
        }
        if let Some(t) = limits.time {
            if started.elapsed() > t {
                limit_hit = true;
                pool.push(node);
                break;
            }
        }
        nodes_processed += 1;
        if nodes_processed.is_multiple_of(64) && !pool.is_empty() {
            // Best bound last, so the DFS pop restarts from it.
            pool.sort_by(|a, b| {
                b.bound
                    .partial_cmp(&a.bound)
                    .unwrap()
                    .then(b.id.cmp(&a.id))
            });
        }

        // Prune against the incumbent before paying for the LP.
        if let Some((inc_obj, _)) = &incumbent {
            if node.bound >= prune_threshold(*inc_obj, limits.rel_gap) {
                min_pruned_bound = min_pruned_bound.min(node.bound);
                continue;
            }
        }

        let is_root = node.fixings.is_empty();
        let overrides: Vec<(usize, f64, f64)> =
            node.fixings.iter().map(|&(j, v)| (j, v, v)).collect();
        let out = engine.solve(&overrides, node.warm.as_deref())?;
        total_iterations += out.iterations;

        match out.status {
            LpStatus::Infeasible { .. } => {
                if is_root {
                    let mut sol = outcome_to_solution(out);
                    sol.nodes = 1;
                    sol.iterations = total_iterations;
                    return Ok(sol);
                }
                continue;
            }
            LpStatus::Unbounded { .. } => {
                // Binaries are boxed, so any unbounded relaxation ray lives in
                // the continuous variables and survives every fixing: the MILP
                // itself is unbounded (or infeasible; bounded models built by
                // this crate's callers never hit this).
                let mut sol = outcome_to_solution(out);
                sol.nodes = nodes_processed;
                sol.iterations = total_iterations;
                return Ok(sol);
            }
            LpStatus::Optimal => {}
        }

        if let Some((inc_obj, _)) = &incumbent {
            if out.objective >= prune_threshold(*inc_obj, limits.rel_gap) {
                min_pruned_bound = min_pruned_bound.min(out.objective);
                continue;
            }
        }

        // Most fractional binary, ties to the lowest index.
        let mut branch_var = None;
        let mut best_frac = tolerances::INTEGRALITY;
        for &j in &binaries {
            let v = out.values[j];
            let frac = (v - v.round()).abs();
            if frac > best_frac {
                best_frac = frac;
                branch_var = Some(j);
            }
        }

        // Rounding heuristic: vertices of this kind of model often carry
        // fractional binaries only because of alternate optima (a big-M row
        // sitting tight, or a free flag pair). Round to nearest, repair by
        // flipping binaries named in violated rows, and verify the result
        // independently. A verified candidate becomes an incumbent; when it
        // matches this node's LP bound the subtree is solved and branching
        // is pointless.
        if branch_var.is_some() {
            if let Some(rounded) = round_and_repair(model, &binaries, &node.fixings, &out.values) {
                let obj = model.objective_value(&rounded);
                let better = incumbent
                    .as_ref()
                    .is_none_or(|(inc_obj, _)| obj < *inc_obj);
                if better {
                    incumbent = Some((obj, rounded));
                }
                if obj <= out.objective + limits.rel_gap * f64::max(1.0, obj.abs()) {
                    continue; // the subtree's bound is attained
                }
            }
        }

        match branch_var {
            None => {
                // Integral: candidate incumbent. Snap binaries onto {0,1} and
                // re-verify feasibility independently before accepting.
                let mut values = out.values.clone();
                for &j in &binaries {
                    values[j] = values[j].round();
                }
                let violations = check_solution(
                    model,
                    &values,
                    tolerances::ROW_FEASIBILITY,
                    tolerances::BOUND_FEASIBILITY,
                );
                if !violations.is_empty() {
                    return Err(MilpError::NumericalBreakdown(format!(
                        "integral node solution violates '{}' by {:e}",
                        violations[0].what, violations[0].amount
                    )));
                }
                let obj = model.objective_value(&values);
                let accept = incumbent
                    .as_ref()
                    .is_none_or(|(inc_obj, _)| obj < *inc_obj);
                if accept {
                    incumbent = Some((obj, values));
                }
            }
            Some(j) => {
                let preferred = out.values[j].round();
                let other = 1.0 - preferred;
                let warm = Rc::new(out.basis);
                let mut mk = |val: f64| {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, val));
                    let n = Node {
                        id: next_id,
                        fixings,
                        bound: out.objective,
                        warm: Some(Rc::clone(&warm)),
                    };
                    next_id += 1;
                    n
                };
                let far = mk(other);
                let near = mk(preferred);
                pool.push(far);
                pool.push(near); // popped first: dive toward the LP value
            }
        }
    }

    // Final bound: everything still open or pruned caps what was proven.
    let mut bound = min_pruned_bound;
    for n in &pool {
        bound = bound.min(n.bound);
    }

    match incumbent {
        Some((obj, values)) => {
            bound = bound.min(obj);
            let gap = ((obj - bound) / f64::max(1.0, obj.abs())).max(0.0);
            let status = if limit_hit && gap > limits.rel_gap {
                SolveStatus::GapLimit
            } else {
                SolveStatus::Optimal
            };
            Ok(Solution {
                status,
                objective: obj,
                bound,
                gap,
                values,
                nodes: nodes_processed,
                iterations: total_iterations,
                certificate: None,
            })
        }
        None => {
            if limit_hit {
                Ok(Solution {
                    status: SolveStatus::GapLimit,
                    objective: f64::INFINITY,
                    bound: if bound.is_finite() { bound } else { f64::NEG_INFINITY },
                    gap: f64::INFINITY,
                    values: vec![0.0; model.num_vars()],
                    nodes: nodes_processed,
                    iterations: total_iterations,
                    certificate: None,
                })
            } else {
                // Every leaf was LP-infeasible.
                Ok(Solution {
                    status: SolveStatus::Infeasible,
                    objective: f64::INFINITY,
                    bound: f64::INFINITY,
                    gap: 0.0,
                    values: vec![0.0; model.num_vars()],
                    nodes: nodes_processed,
                    iterations: total_iterations,
                    certificate: Some(Certificate::InfeasibleRows(Vec::new())),
                })
            }
        }
    }
}

fn prune_threshold(incumbent: f64, rel_gap: f64) -> f64 {
    incumbent - rel_gap * f64::max(1.0, incumbent.abs())
}

/// Rounds every fractional binary to its nearest value, then repairs row
/// violations by flipping (at most once each, lowest index first) the
/// fractional binaries named in the first violated row. Returns the candidate
/// only if the independent checker accepts it. Node fixings are never touched.
fn round_and_repair(
    model: &MilpModel,
    binaries: &[usize],
    fixings: &[(usize, f64)],
    lp_values: &[f64],
) -> Option<Vec<f64>> {
    let mut cand = lp_values.to_vec();
    let mut flippable: Vec<usize> = Vec::new();
    for &j in binaries {
        let r = cand[j].round();
        if (cand[j] - r).abs() > tolerances::INTEGRALITY
            && !fixings.iter().any(|&(f, _)| f == j)
        {
            flippable.push(j);
        }
        cand[j] = r;
    }

    for _ in 0..=flippable.len() {
        match first_violated_row(model, &cand) {
            None => {
                let clean = check_solution(
                    model,
                    &cand,
                    tolerances::ROW_FEASIBILITY,
                    tolerances::BOUND_FEASIBILITY,
                )
                .is_empty();
                return clean.then_some(cand);
            }
            Some(row) => {
                let flip = model.constraints[row]
                    .terms
                    .iter()
                    .map(|&(v, _)| v)
                    .filter(|v| flippable.contains(v))
                    .min();
                let j = flip?;
                cand[j] = 1.0 - cand[j];
                flippable.retain(|&v| v != j);
            }
        }
    }
    None
}

fn first_violated_row(model: &MilpModel, values: &[f64]) -> Option<usize> {
    for (ri, c) in model.constraints.iter().enumerate() {
        let lhs: f64 = c.terms.iter().map(|&(vi, a)| a * values[vi]).sum();
        let residual = match c.sense {
            crate::model::Sense::Le => lhs - c.rhs,
            crate::model::Sense::Ge => c.rhs - lhs,
            crate::model::Sense::Eq => (lhs - c.rhs).abs(),
        };
        if residual > tolerances::ROW_FEASIBILITY {
            return Some(ri);
        }
    }
    None
}

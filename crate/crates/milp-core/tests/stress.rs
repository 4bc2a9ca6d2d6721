//! Heavier randomized stress against the tableau oracle: more rows, more
//! equalities, tighter boxes, degenerate right-hand sides.

use milp_core::{check_solution, solve_lp, MilpModel, Sense, SolveStatus};
use oracles::{solve_dense_lp, Cmp, DenseLp, DenseLpOutcome};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize, eq_bias: f64) -> MilpModel {
    let mut model = MilpModel::new();
    for j in 0..n {
        let (lo, up) = match rng.random_range(0..8) {
            0 => (f64::NEG_INFINITY, f64::INFINITY),
            1 => (f64::NEG_INFINITY, rng.random_range(-1.0..4.0)),
            2 | 3 => {
                let l = rng.random_range(-3.0..0.5);
                (l, l + rng.random_range(0.0..4.0)) // possibly fixed
            }
            _ => (0.0, rng.random_range(0.5..6.0)),
        };
        model.add_var(format!("x{j}"), lo, up);
        model.add_objective_term(j, rng.random_range(-2.0..2.0));
    }
    for i in 0..m {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.35) {
                terms.push((j, rng.random_range(-3.0..3.0)));
            }
        }
        if terms.is_empty() {
            terms.push((i % n, 1.0));
        }
        let sense = if rng.random_bool(eq_bias) {
            Sense::Eq
        } else if rng.random_bool(0.6) {
            Sense::Le
        } else {
            Sense::Ge
        };
        // Degenerate ties: small integer right-hand sides repeat a lot.
        let rhs = f64::from(rng.random_range(-2i32..3));
        model.add_constraint(format!("r{i}"), terms, sense, rhs);
    }
    model
}

fn to_dense(model: &MilpModel) -> DenseLp {
    let n = model.num_vars();
    let mut objective = vec![0.0; n];
    for &(j, c) in &model.objective {
        objective[j] += c;
    }
    DenseLp {
        objective,
        lower: model.vars.iter().map(|v| v.lower).collect(),
        upper: model.vars.iter().map(|v| v.upper).collect(),
        rows: model
            .constraints
            .iter()
            .map(|c| {
                let mut dense = vec![0.0; n];
                for &(j, a) in &c.terms {
                    dense[j] += a;
                }
                let cmp = match c.sense {
                    Sense::Le => Cmp::Le,
                    Sense::Ge => Cmp::Ge,
                    Sense::Eq => Cmp::Eq,
                };
                (dense, cmp, c.rhs)
            })
            .collect(),
    }
}

#[test]
fn wide_degenerate_lps_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xDEAD5EED);
    let mut tallies = [0usize; 3];
    for case in 0..80 {
        let n = rng.random_range(12..=24);
        let m = rng.random_range(6..=14);
        let model = random_model(&mut rng, n, m, 0.2);
        let sol = solve_lp(&model).unwrap_or_else(|e| panic!("case {case}: {e}"));
        let oracle = solve_dense_lp(&to_dense(&model));
        match (&sol.status, &oracle) {
            (SolveStatus::Optimal, DenseLpOutcome::Optimal { objective, .. }) => {
                tallies[0] += 1;
                let scale = 1.0f64.max(objective.abs());
                assert!(
                    (sol.objective - objective).abs() <= 1e-6 * scale,
                    "case {case} (n={n}, m={m}): {} vs {objective}",
                    sol.objective
                );
                let bad = check_solution(&model, &sol.values, 1e-7, 1e-9);
                assert!(bad.is_empty(), "case {case}: {bad:?}");
            }
            (SolveStatus::Infeasible, DenseLpOutcome::Infeasible) => tallies[1] += 1,
            (SolveStatus::Unbounded, DenseLpOutcome::Unbounded) => tallies[2] += 1,
            (got, want) => panic!("case {case} (n={n}, m={m}): {got:?} vs oracle {want:?}"),
        }
    }
    assert!(tallies[0] >= 20, "optimal cases: {tallies:?}");
    assert!(tallies[1] >= 10, "infeasible cases: {tallies:?}");
}

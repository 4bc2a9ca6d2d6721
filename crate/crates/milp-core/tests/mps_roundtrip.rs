//! Write/read/solve round trips through the MPS codec.

use milp_core::{read_mps, solve_milp, write_mps, MilpLimits, MilpModel, Sense, SolveStatus};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

#[test]
fn knapsack_roundtrip_solves_identically() {
    let mut m = MilpModel::new();
    let y1 = m.add_binary("y1");
    let y2 = m.add_binary("y2");
    m.add_objective_term(y1, -3.0);
    m.add_objective_term(y2, -2.0);
    m.add_constraint("cap", vec![(y1, 2.0), (y2, 2.0)], Sense::Le, 3.0);

    let text = write_mps(&m).unwrap();
    let back = read_mps(&text).unwrap();
    let a = solve_milp(&m, &MilpLimits::default()).unwrap();
    let b = solve_milp(&back, &MilpLimits::default()).unwrap();
    assert_eq!(a.status, SolveStatus::Optimal);
    assert!((a.objective - b.objective).abs() <= 1e-9);
}

#[test]
fn random_models_roundtrip_within_1e9() {
    let mut rng = ChaCha8Rng::seed_from_u64(314159);
    let mut solved = 0;
    for case in 0..40 {
        let mut m = MilpModel::new();
        let nb = rng.random_range(0..4);
        let nc = rng.random_range(1..6);
        for b in 0..nb {
            let y = m.add_binary(format!("y{b}"));
            m.add_objective_term(y, rng.random_range(-4.0..4.0));
        }
        for c in 0..nc {
            let class = rng.random_range(0..4);
            let (lo, up) = match class {
                0 => (f64::NEG_INFINITY, f64::INFINITY),
                1 => (rng.random_range(-3.0..0.0), rng.random_range(0.0..4.0)),
                2 => (0.0, rng.random_range(1.0..5.0)),
                _ => (0.0, f64::INFINITY),
            };
            let x = m.add_var(format!("x{c}"), lo, up);
            m.add_objective_term(x, rng.random_range(-1.0..3.0));
        }
        let n = nb + nc;
        for r in 0..rng.random_range(2..7) {
            let mut terms = Vec::new();
            for j in 0..n {
                if rng.random_bool(0.6) {
                    terms.push((j, rng.random_range(-3.0..3.0)));
                }
            }
            if terms.is_empty() {
                terms.push((r % n, 1.0));
            }
            let sense = match rng.random_range(0..4) {
                0 => Sense::Ge,
                1 => Sense::Eq,
                _ => Sense::Le,
            };
            m.add_constraint(format!("r{r}"), terms, sense, rng.random_range(-2.0..5.0));
        }

        let text = write_mps(&m).unwrap();
        let back = read_mps(&text).unwrap();
        let a = solve_milp(&m, &MilpLimits::default()).unwrap();
        let b = solve_milp(&back, &MilpLimits::default()).unwrap();
        assert_eq!(a.status, b.status, "case {case}");
        if a.status == SolveStatus::Optimal {
            solved += 1;
            assert!(
                (a.objective - b.objective).abs() <= 1e-9,
                "case {case}: {} vs {}",
                a.objective,
                b.objective
            );
        }
        // Full-precision numbers survive a second pass byte-identically.
        let text2 = write_mps(&back).unwrap();
        assert_eq!(text, text2, "case {case}: writer not canonical");
    }
    assert!(solved >= 15, "only {solved} optimal cases");
}

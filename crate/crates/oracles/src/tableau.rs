//! Dense two-phase tableau simplex with Bland's rule.
//!
//! General bounds are handled by substitution (shift, mirror, or free-variable
//! split) plus explicit upper-bound rows, so the tableau itself only ever sees
//! `x >= 0`. Slow and allocation-happy by design; it exists to cross-check the
//! production solver on small instances.

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// A bounded LP in dense form, always minimized.
#[derive(Debug, Clone)]
pub struct DenseLp {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// (dense coefficients, sense, rhs)
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
}

#[derive(Debug, Clone)]
pub enum DenseLpOutcome {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

enum Subst {
    /// x = l + x'
    Shift { base: f64, col: usize },
    /// x = u - x'
    Mirror { base: f64, col: usize },
    /// x = x+ - x-
    Split { plus: usize, minus: usize },
}

/// Solves the LP by reduction to standard form and a two-phase dense tableau.
pub fn solve_dense_lp(lp: &DenseLp) -> DenseLpOutcome {
    let n = lp.objective.len();
    assert!(lp.lower.len() == n && lp.upper.len() == n);

    // Standard-form columns and the substitution that maps them back.
    let mut substs = Vec::with_capacity(n);
    let mut num_cols = 0usize;
    let mut extra_rows: Vec<(Vec<(usize, f64)>, Cmp, f64)> = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        if l > u {
            return DenseLpOutcome::Infeasible;
        }
        if l.is_finite() {
            let col = num_cols;
            num_cols += 1;
            if u.is_finite() {
                extra_rows.push((vec![(col, 1.0)], Cmp::Le, u - l));
            }
            substs.push(Subst::Shift { base: l, col });
        } else if u.is_finite() {
            let col = num_cols;
            num_cols += 1;
            substs.push(Subst::Mirror { base: u, col });
        } else {
            let plus = num_cols;
            let minus = num_cols + 1;
            num_cols += 2;
            substs.push(Subst::Split { plus, minus });
        }
    }

    // Objective over standard columns plus the constant from substitution.
    let mut cost = vec![0.0; num_cols];
    let mut obj_const = 0.0;
    for j in 0..n {
        let c = lp.objective[j];
        match substs[j] {
            Subst::Shift { base, col } => {
                cost[col] += c;
                obj_const += c * base;
            }
            Subst::Mirror { base, col } => {
                cost[col] -= c;
                obj_const += c * base;
            }
            Subst::Split { plus, minus } => {
                cost[plus] += c;
                cost[minus] -= c;
            }
        }
    }

    // Rows over standard columns.
    let mut rows: Vec<(Vec<f64>, Cmp, f64)> = Vec::new();
    for (coeffs, cmp, rhs) in &lp.rows {
        let mut dense = vec![0.0; num_cols];
        let mut b = *rhs;
        for j in 0..n {
            let a = coeffs[j];
            if a == 0.0 {
                continue;
            }
            match substs[j] {
                Subst::Shift { base, col } => {
                    dense[col] += a;
                    b -= a * base;
                }
                Subst::Mirror { base, col } => {
                    dense[col] -= a;
                    b -= a * base;
                }
                Subst::Split { plus, minus } => {
                    dense[plus] += a;
                    dense[minus] -= a;
                }
            }
        }
        rows.push((dense, *cmp, b));
    }
    for (sparse, cmp, rhs) in extra_rows {
        let mut dense = vec![0.0; num_cols];
        for (col, a) in sparse {
            dense[col] = a;
        }
        rows.push((dense, cmp, rhs));
    }

    match tableau_solve(num_cols, &cost, &rows) {
        StdOutcome::Infeasible => DenseLpOutcome::Infeasible,
        StdOutcome::Unbounded => DenseLpOutcome::Unbounded,
        StdOutcome::Optimal(std_values) => {
            let mut values = vec![0.0; n];
            for j in 0..n {
                values[j] = match substs[j] {
                    Subst::Shift { base, col } => base + std_values[col],
                    Subst::Mirror { base, col } => base - std_values[col],
                    Subst::Split { plus, minus } => std_values[plus] - std_values[minus],
                };
            }
            let objective: f64 = obj_const
                + (0..num_cols).map(|c| cost[c] * std_values[c]).sum::<f64>();
            DenseLpOutcome::Optimal { objective, values }
        }
    }
}

enum StdOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

/// min c.x  s.t.  rows, x >= 0, via two-phase tableau with artificials.
fn tableau_solve(n: usize, cost: &[f64], rows: &[(Vec<f64>, Cmp, f64)]) -> StdOutcome {
    let m = rows.len();
    // Columns: n structural, then one slack per inequality row, then one
    // artificial per row. The tableau stores [coeffs | rhs].
    let num_slack = rows.iter().filter(|r| r.1 != Cmp::Eq).count();
    let total = n + num_slack + m;
    let mut t = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut slack_at = n;
    for (i, (coeffs, cmp, rhs)) in rows.iter().enumerate() {
        let flip = *rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * coeffs[j];
        }
        t[i][total] = sign * rhs;
        match cmp {
            Cmp::Le => {
                t[i][slack_at] = sign;
                slack_at += 1;
            }
            Cmp::Ge => {
                t[i][slack_at] = -sign;
                slack_at += 1;
            }
            Cmp::Eq => {}
        }
        let art = n + num_slack + i;
        t[i][art] = 1.0;
        basis[i] = art;
    }

    let art_start = n + num_slack;

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![0.0; total];
    for c in phase1_cost.iter_mut().skip(art_start) {
        *c = 1.0;
    }
    if !run_simplex(&mut t, &mut basis, &phase1_cost, total, None) {
        // Phase-1 objective is bounded below by zero; never unbounded.
        unreachable!("phase 1 cannot be unbounded");
    }
    let infeas: f64 = (0..m)
        .filter(|&i| basis[i] >= art_start)
        .map(|i| t[i][total])
        .sum();
    if infeas > 1e-7 {
        return StdOutcome::Infeasible;
    }

    // Drive out artificials still basic at zero; drop dependent rows.
    let mut keep = vec![true; m];
    for i in 0..m {
        if basis[i] < art_start {
            continue;
        }
        let pivot_col = (0..art_start).find(|&j| t[i][j].abs() > EPS);
        match pivot_col {
            Some(j) => pivot(&mut t, &mut basis, i, j, total),
            None => keep[i] = false,
        }
    }
    let mut t: Vec<Vec<f64>> = t
        .into_iter()
        .zip(keep.iter())
        .filter(|(_, &k)| k)
        .map(|(r, _)| r)
        .collect();
    let mut basis: Vec<usize> = basis
        .into_iter()
        .zip(keep.iter())
        .filter(|(_, &k)| k)
        .map(|(b, _)| b)
        .collect();

    // Phase 2 over structural + slack columns only.
    let mut phase2_cost = vec![0.0; total];
    phase2_cost[..n].copy_from_slice(&cost[..n]);
    if !run_simplex(&mut t, &mut basis, &phase2_cost, total, Some(art_start)) {
        return StdOutcome::Unbounded;
    }

    let mut values = vec![0.0; n];
    let rhs_col = total;
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            values[b] = t[i][rhs_col];
        }
    }
    StdOutcome::Optimal(values)
}

/// Bland-rule simplex on a tableau; returns false when unbounded.
fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    total: usize,
    forbid_from: Option<usize>,
) -> bool {
    let m = t.len();
    loop {
        // Reduced costs: c_j - c_B . B^-1 A_j, read off the tableau.
        let mut entering = None;
        for j in 0..total {
            if let Some(limit) = forbid_from {
                if j >= limit {
                    break;
                }
            }
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost[j];
            for i in 0..m {
                d -= cost[basis[i]] * t[i][j];
            }
            if d < -EPS {
                entering = Some(j);
                break; // Bland: lowest eligible index
            }
        }
        let q = match entering {
            Some(q) => q,
            None => return true,
        };

        // Ratio test, Bland tie-break on the basic variable index.
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if t[i][q] > EPS {
                let ratio = t[i][total] / t[i][q];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS
                            || (ratio < lr + EPS && basis[i] < basis[li])
                        {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let (r, _) = match leave {
            Some(x) => x,
            None => return false,
        };
        pivot(t, basis, r, q, total);
    }
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, q: usize, total: usize) {
    let p = t[r][q];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i == r {
            continue;
        }
        let factor = t[i][q];
        if factor == 0.0 {
            continue;
        }
        for j in 0..=total {
            t[i][j] -= factor * t[r][j];
        }
    }
    basis[r] = q;
}

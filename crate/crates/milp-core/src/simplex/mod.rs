//! Bounded-variable revised simplex.
//!
//! Standard form used internally: every constraint `a.x (cmp) b` becomes
//! `a.x + s = b` with the slack bounded by `[0, inf)` (Le), `(-inf, 0]` (Ge)
//! or `[0, 0]` (Eq), giving `min c.x  s.t.  [A I] (x, s) = b,  l <= (x,s) <= u`.
//!
//! Phase 1 minimizes the composite sum of bound infeasibilities of the basic
//! variables (no artificial columns, no big-M), with a long-step ratio test
//! that lets basics cross violated bounds while total infeasibility still
//! drops. Phase 2 is the usual bounded ratio test with bound flips. Pricing is
//! Dantzig with a Bland's-rule fallback when no progress is made for
//! `2 (m + n)` iterations. The basis is refactorized every
//! [`SimplexOptions::refactor_every`] pivots.

mod lu;

use crate::error::{MilpError, Result};
use crate::model::{Certificate, MilpModel, Sense, SolveStatus, Solution};
use lu::Lu;

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    /// Bound violation below which a point counts as primal feasible.
    pub bound_tol: f64,
    /// Reduced-cost threshold for optimality.
    pub dual_tol: f64,
    /// Pivots below this magnitude are refused; persisting triggers breakdown.
    pub pivot_tol: f64,
    pub refactor_every: usize,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            bound_tol: 1e-9,
            dual_tol: 1e-9,
            pivot_tol: crate::tolerances::PIVOT,
            refactor_every: 100,
            max_iterations: 400_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic(u32),
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    FreeZero,
}

/// Basis snapshot used to warm-start sibling solves in branch-and-bound.
#[derive(Debug, Clone)]
pub(crate) struct BasisSnapshot {
    basis: Vec<u32>,
    status: Vec<VarStatus>,
}

#[derive(Debug)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible { rows: Vec<usize> },
    Unbounded { ray: Vec<f64> },
}

pub(crate) struct LpOutcome {
    pub status: LpStatus,
    /// One value per structural variable (last iterate when not optimal).
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: u64,
    pub basis: BasisSnapshot,
}

/// Immutable problem data shared by every solve (including all B&B nodes).
pub(crate) struct Engine {
    m: usize,
    n_struct: usize,
    n_total: usize,
    // CSC of [A | I].
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    col_val: Vec<f64>,
    cost: Vec<f64>,
    base_lower: Vec<f64>,
    base_upper: Vec<f64>,
    rhs: Vec<f64>,
    opts: SimplexOptions,
}

impl Engine {
    pub fn new(model: &MilpModel, opts: SimplexOptions) -> Engine {
        let n = model.num_vars();
        let m = model.num_constraints();
        let n_total = n + m;

        let mut counts = vec![0usize; n];
        for c in &model.constraints {
            for &(vi, _) in &c.terms {
                counts[vi] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n_total + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        for j in n..n_total {
            col_ptr[j + 1] = col_ptr[j] + 1;
        }
        let nnz = col_ptr[n_total];
        let mut row_idx = vec![0u32; nnz];
        let mut col_val = vec![0.0f64; nnz];
        let mut fill = col_ptr.clone();
        for (ri, c) in model.constraints.iter().enumerate() {
            for &(vi, a) in &c.terms {
                row_idx[fill[vi]] = ri as u32;
                col_val[fill[vi]] = a;
                fill[vi] += 1;
            }
        }
        for (ri, _) in model.constraints.iter().enumerate() {
            let j = n + ri;
            row_idx[fill[j]] = ri as u32;
            col_val[fill[j]] = 1.0;
            fill[j] += 1;
        }

        let mut cost = vec![0.0; n_total];
        for &(vi, c) in &model.objective {
            cost[vi] += c;
        }
        let mut base_lower = vec![0.0; n_total];
        let mut base_upper = vec![0.0; n_total];
        for (j, v) in model.vars.iter().enumerate() {
            base_lower[j] = v.lower;
            base_upper[j] = v.upper;
        }
        let mut rhs = vec![0.0; m];
        for (ri, c) in model.constraints.iter().enumerate() {
            let j = n + ri;
            let (lo, up) = match c.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            base_lower[j] = lo;
            base_upper[j] = up;
            rhs[ri] = c.rhs;
        }

        Engine {
            m,
            n_struct: n,
            n_total,
            col_ptr,
            row_idx,
            col_val,
            cost,
            base_lower,
            base_upper,
            rhs,
            opts,
        }
    }

    fn column(&self, j: usize) -> (&[u32], &[f64]) {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[range.clone()], &self.col_val[range])
    }

    /// Solves with optional bound overrides (structural indices) and an
    /// optional warm-start basis.
    pub fn solve(
        &self,
        overrides: &[(usize, f64, f64)],
        warm: Option<&BasisSnapshot>,
    ) -> Result<LpOutcome> {
        let mut lower = self.base_lower.clone();
        let mut upper = self.base_upper.clone();
        for &(j, lo, up) in overrides {
            lower[j] = lo;
            upper[j] = up;
        }
        for j in 0..self.n_total {
            if lower[j] > upper[j] {
                return Ok(LpOutcome {
                    status: LpStatus::Infeasible { rows: Vec::new() },
                    values: vec![0.0; self.n_struct],
                    objective: f64::INFINITY,
                    iterations: 0,
                    basis: self.cold_basis(&lower, &upper),
                });
            }
        }

        let mut state = Solve::new(self, lower, upper, warm)?;
        state.run()
    }

    fn cold_basis(&self, lower: &[f64], upper: &[f64]) -> BasisSnapshot {
        let mut status = Vec::with_capacity(self.n_total);
        for j in 0..self.n_total {
            status.push(if j >= self.n_struct {
                VarStatus::Basic((j - self.n_struct) as u32)
            } else {
                nonbasic_status(lower[j], upper[j])
            });
        }
        BasisSnapshot {
            basis: (self.n_struct..self.n_total).map(|j| j as u32).collect(),
            status,
        }
    }
}

fn nonbasic_status(l: f64, u: f64) -> VarStatus {
    if l.is_finite() {
        VarStatus::AtLower
    } else if u.is_finite() {
        VarStatus::AtUpper
    } else {
        VarStatus::FreeZero
    }
}

struct Eta {
    pos: u32,
    pivot: f64,
    /// Off-pivot direction entries (basis position, value).
    entries: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

/// Everything mutable during one solve.
struct Solve<'a> {
    eng: &'a Engine,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<VarStatus>,
    basis: Vec<u32>,
    lu: Lu,
    etas: Vec<Eta>,
    xb: Vec<f64>,
    iterations: u64,
    pivots_since_refactor: usize,
    stall: usize,
    bland: bool,
    // Scratch buffers.
    w_pos: Vec<f64>,
    y_row: Vec<f64>,
    scratch: Vec<f64>,
    cb: Vec<f64>,
}

enum StepOutcome {
    Moved,
    OptimalOrFeasible,
    Unbounded { entering: usize, direction: f64 },
}

impl<'a> Solve<'a> {
    fn new(
        eng: &'a Engine,
        lower: Vec<f64>,
        upper: Vec<f64>,
        warm: Option<&BasisSnapshot>,
    ) -> Result<Solve<'a>> {
        let m = eng.m;
        let mut solve = Solve {
            eng,
            lower,
            upper,
            status: Vec::new(),
            basis: Vec::new(),
            lu: Lu::factorize(0, &[]).unwrap_or_else(|_| unreachable!("empty basis")),
            etas: Vec::new(),
            xb: vec![0.0; m],
            iterations: 0,
            pivots_since_refactor: 0,
            stall: 0,
            bland: false,
            w_pos: vec![0.0; m],
            y_row: vec![0.0; m],
            scratch: vec![0.0; m],
            cb: vec![0.0; m],
        };

        let mut installed = false;
        if let Some(snap) = warm {
            if snap.basis.len() == m && snap.status.len() == eng.n_total {
                let mut status = snap.status.clone();
                for (j, s) in status.iter_mut().enumerate() {
                    // Re-anchor nonbasic statuses against the effective bounds.
                    *s = match *s {
                        VarStatus::Basic(p) => VarStatus::Basic(p),
                        VarStatus::AtLower if solve.lower[j].is_finite() => VarStatus::AtLower,
                        VarStatus::AtUpper if solve.upper[j].is_finite() => VarStatus::AtUpper,
                        _ => nonbasic_status(solve.lower[j], solve.upper[j]),
                    };
                }
                solve.basis = snap.basis.clone();
                solve.status = status;
                if solve.refactorize().is_ok() {
                    installed = true;
                }
            }
        }
        if !installed {
            let snap = eng.cold_basis(&solve.lower, &solve.upper);
            solve.basis = snap.basis;
            solve.status = snap.status;
            solve
                .refactorize()
                .map_err(|_| MilpError::NumericalBreakdown("slack basis is singular".into()))?;
        }
        Ok(solve)
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            VarStatus::FreeZero => 0.0,
            VarStatus::Basic(_) => unreachable!("basic variable has no nonbasic value"),
        }
    }

    fn refactorize(&mut self) -> std::result::Result<(), ()> {
        let cols: Vec<Vec<(u32, f64)>> = self
            .basis
            .iter()
            .map(|&j| {
                let (rows, vals) = self.eng.column(j as usize);
                rows.iter().copied().zip(vals.iter().copied()).collect()
            })
            .collect();
        match Lu::factorize(self.eng.m, &cols) {
            Ok(lu) => {
                self.lu = lu;
                self.etas.clear();
                self.pivots_since_refactor = 0;
                self.recompute_xb();
                Ok(())
            }
            Err(_) => Err(()),
        }
    }

    fn recompute_xb(&mut self) {
        let mut v = self.eng.rhs.clone();
        for j in 0..self.eng.n_total {
            if matches!(self.status[j], VarStatus::Basic(_)) {
                continue;
            }
            let xj = self.nonbasic_value(j);
            if xj != 0.0 {
                let (rows, vals) = self.eng.column(j);
                for (r, a) in rows.iter().zip(vals.iter()) {
                    v[*r as usize] -= a * xj;
                }
            }
        }
        let mut out = vec![0.0; self.eng.m];
        self.ftran(&v, &mut out);
        self.xb = out;
    }

    fn ftran(&mut self, v: &[f64], out: &mut [f64]) {
        self.lu.ftran(v, out, &mut self.scratch);
        for eta in &self.etas {
            let t = out[eta.pos as usize] / eta.pivot;
            out[eta.pos as usize] = t;
            if t != 0.0 {
                for &(i, d) in &eta.entries {
                    out[i as usize] -= d * t;
                }
            }
        }
    }

    fn btran(&mut self, c: &[f64], out: &mut [f64]) {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut s = c[eta.pos as usize];
            for &(i, d) in &eta.entries {
                s -= d * c[i as usize];
            }
            c[eta.pos as usize] = s / eta.pivot;
        }
        self.lu.btran(&c, out, &mut self.scratch);
    }

    /// Total bound violation of the basic variables.
    fn infeasibility(&self) -> f64 {
        let mut sum = 0.0;
        for (pos, &j) in self.basis.iter().enumerate() {
            let x = self.xb[pos];
            let l = self.lower[j as usize];
            let u = self.upper[j as usize];
            if x < l {
                sum += l - x;
            } else if x > u {
                sum += x - u;
            }
        }
        sum
    }

    fn run(&mut self) -> Result<LpOutcome> {
        for _round in 0..6 {
            if let Some(out) = self.run_phase(Phase::One)? {
                return Ok(out); // infeasible
            }
            if let Some(out) = self.run_phase(Phase::Two)? {
                return Ok(out); // unbounded
            }
            // Phase 2 priced optimal on the eta-updated factors; confirm on a
            // fresh factorization before declaring victory.
            if self.refactorize().is_err() {
                return Err(MilpError::NumericalBreakdown(
                    "basis became singular at finalization".into(),
                ));
            }
            if self.infeasibility() > self.eng.opts.bound_tol {
                continue;
            }
            if self.price_and_check_optimal(Phase::Two) {
                return Ok(self.finish_optimal());
            }
        }
        Err(MilpError::NumericalBreakdown(
            "could not stabilize an optimal basis".into(),
        ))
    }

    /// Runs one phase to completion. Returns Some(outcome) when the solve is
    /// finished (infeasible/unbounded/optimal), None when the phase completed
    /// and the next one should run (phase 1 reaching feasibility, or phase 2
    /// needing a re-check).
    fn run_phase(&mut self, phase: Phase) -> Result<Option<LpOutcome>> {
        loop {
            if self.iterations as usize > self.eng.opts.max_iterations {
                return Err(MilpError::IterationLimit(self.iterations as usize));
            }
            if phase == Phase::One && self.infeasibility() <= self.eng.opts.bound_tol {
                return Ok(None);
            }
            match self.step(phase)? {
                StepOutcome::Moved => continue,
                StepOutcome::OptimalOrFeasible => {
                    return match phase {
                        Phase::One => {
                            // No improving direction left but still infeasible.
                            // If a direction exists below the pricing tolerance
                            // but above the pivot tolerance, the verdict would
                            // rest on numerically meaningless data.
                            if self
                                .price_with_tol(phase, self.eng.opts.pivot_tol)
                                .is_some()
                            {
                                return Err(MilpError::NumericalBreakdown(format!(
                                    "infeasibility verdict depends on reduced costs between \
                                     the pivot tolerance {:e} and the pricing tolerance {:e}",
                                    self.eng.opts.pivot_tol, self.eng.opts.dual_tol
                                )));
                            }
                            let rows = self.infeasible_row_certificate();
                            Ok(Some(self.finish(
                                LpStatus::Infeasible { rows },
                                f64::INFINITY,
                            )))
                        }
                        Phase::Two => Ok(None),
                    };
                }
                StepOutcome::Unbounded { entering, direction } => {
                    debug_assert_eq!(phase, Phase::Two);
                    let ray = self.build_ray(entering, direction);
                    return Ok(Some(self.finish(
                        LpStatus::Unbounded { ray },
                        f64::NEG_INFINITY,
                    )));
                }
            }
        }
    }

    /// One pricing + ratio-test + update cycle.
    fn step(&mut self, phase: Phase) -> Result<StepOutcome> {
        let before = match phase {
            Phase::One => self.infeasibility(),
            Phase::Two => self.current_objective(),
        };

        let (entering, direction) = match self.price(phase) {
            Some(e) => e,
            None => return Ok(StepOutcome::OptimalOrFeasible),
        };

        // Direction through the basis.
        let (rows, vals) = self.eng.column(entering);
        let mut aq = vec![0.0; self.eng.m];
        for (r, a) in rows.iter().zip(vals.iter()) {
            aq[*r as usize] = *a;
        }
        let mut w = std::mem::take(&mut self.w_pos);
        self.ftran(&aq, &mut w);

        let step = match phase {
            Phase::One => self.ratio_test_phase1(entering, direction, &w),
            Phase::Two => self.ratio_test_phase2(entering, direction, &w),
        };

        let outcome = match step {
            RatioOutcome::Unbounded => {
                self.w_pos = w;
                return Ok(StepOutcome::Unbounded { entering, direction });
            }
            RatioOutcome::NoDirection => {
                // Numerical dead end: refactorize once, then give up.
                self.w_pos = w;
                if self.pivots_since_refactor > 0 {
                    self.refactorize().map_err(|_| {
                        MilpError::NumericalBreakdown("singular basis during recovery".into())
                    })?;
                    return Ok(StepOutcome::Moved);
                }
                return Err(MilpError::NumericalBreakdown(format!(
                    "no usable pivot for entering column {entering} (all candidates below {:e})",
                    self.eng.opts.pivot_tol
                )));
            }
            RatioOutcome::BoundFlip { theta } => {
                for (pos, &wv) in w.iter().enumerate() {
                    if wv != 0.0 {
                        self.xb[pos] -= direction * wv * theta;
                    }
                }
                self.status[entering] = match self.status[entering] {
                    VarStatus::AtLower => VarStatus::AtUpper,
                    VarStatus::AtUpper => VarStatus::AtLower,
                    s => s,
                };
                self.iterations += 1;
                Ok(StepOutcome::Moved)
            }
            RatioOutcome::Pivot {
                theta,
                leaving_pos,
                to_upper,
            } => {
                let leaving = self.basis[leaving_pos] as usize;
                let entering_val = match self.status[entering] {
                    VarStatus::AtLower => self.lower[entering],
                    VarStatus::AtUpper => self.upper[entering],
                    VarStatus::FreeZero => 0.0,
                    VarStatus::Basic(_) => unreachable!(),
                } + direction * theta;

                for (pos, &wv) in w.iter().enumerate() {
                    if wv != 0.0 {
                        self.xb[pos] -= direction * wv * theta;
                    }
                }
                self.status[leaving] = if to_upper {
                    VarStatus::AtUpper
                } else {
                    VarStatus::AtLower
                };
                self.status[entering] = VarStatus::Basic(leaving_pos as u32);
                self.basis[leaving_pos] = entering as u32;
                self.xb[leaving_pos] = entering_val;

                let pivot = w[leaving_pos];
                let entries: Vec<(u32, f64)> = w
                    .iter()
                    .enumerate()
                    .filter(|&(pos, &v)| pos != leaving_pos && v.abs() > 1e-13)
                    .map(|(pos, &v)| (pos as u32, v))
                    .collect();
                self.etas.push(Eta {
                    pos: leaving_pos as u32,
                    pivot,
                    entries,
                });
                self.pivots_since_refactor += 1;
                self.iterations += 1;
                if self.pivots_since_refactor >= self.eng.opts.refactor_every {
                    self.refactorize().map_err(|_| {
                        MilpError::NumericalBreakdown("singular basis after update".into())
                    })?;
                }
                Ok(StepOutcome::Moved)
            }
        };

        self.w_pos = w;

        // Stall bookkeeping drives the Bland fallback.
        let after = match phase {
            Phase::One => self.infeasibility(),
            Phase::Two => self.current_objective(),
        };
        if before - after > 1e-12 * (1.0 + before.abs()) {
            self.stall = 0;
            self.bland = false;
        } else {
            self.stall += 1;
            if self.stall > 2 * (self.eng.m + self.eng.n_total) {
                self.bland = true;
            }
        }
        outcome
    }

    fn current_objective(&self) -> f64 {
        let mut obj = 0.0;
        for (pos, &j) in self.basis.iter().enumerate() {
            obj += self.eng.cost[j as usize] * self.xb[pos];
        }
        for j in 0..self.eng.n_total {
            if !matches!(self.status[j], VarStatus::Basic(_)) {
                let c = self.eng.cost[j];
                if c != 0.0 {
                    obj += c * self.nonbasic_value(j);
                }
            }
        }
        obj
    }

    /// Phase-dependent pricing. Returns the entering column and its movement
    /// direction (+1 = increase).
    fn price(&mut self, phase: Phase) -> Option<(usize, f64)> {
        self.price_with_tol(phase, self.eng.opts.dual_tol)
    }

    fn price_with_tol(&mut self, phase: Phase, tol: f64) -> Option<(usize, f64)> {
        match phase {
            Phase::One => {
                for pos in 0..self.eng.m {
                    let j = self.basis[pos] as usize;
                    let x = self.xb[pos];
                    self.cb[pos] = if x < self.lower[j] - self.eng.opts.bound_tol {
                        -1.0
                    } else if x > self.upper[j] + self.eng.opts.bound_tol {
                        1.0
                    } else {
                        0.0
                    };
                }
            }
            Phase::Two => {
                for pos in 0..self.eng.m {
                    self.cb[pos] = self.eng.cost[self.basis[pos] as usize];
                }
            }
        }
        let cb = std::mem::take(&mut self.cb);
        let mut y = std::mem::take(&mut self.y_row);
        self.btran(&cb, &mut y);
        self.cb = cb;

        let mut best: Option<(usize, f64, f64)> = None; // (col, direction, score)
        for j in 0..self.eng.n_total {
            let (eligible_up, eligible_down) = match self.status[j] {
                VarStatus::Basic(_) => (false, false),
                VarStatus::AtLower => (self.lower[j] < self.upper[j], false),
                VarStatus::AtUpper => (false, self.lower[j] < self.upper[j]),
                VarStatus::FreeZero => (true, true),
            };
            if !eligible_up && !eligible_down {
                continue;
            }
            let (rows, vals) = self.eng.column(j);
            let mut d = match phase {
                Phase::One => 0.0,
                Phase::Two => self.eng.cost[j],
            };
            for (r, a) in rows.iter().zip(vals.iter()) {
                d -= y[*r as usize] * a;
            }
            let candidate = if eligible_up && d < -tol {
                Some((1.0, -d))
            } else if eligible_down && d > tol {
                Some((-1.0, d))
            } else {
                None
            };
            if let Some((dir, score)) = candidate {
                if self.bland {
                    best = Some((j, dir, score));
                    break; // lowest index eligible
                }
                if best.is_none_or(|(_, _, s)| score > s) {
                    best = Some((j, dir, score));
                }
            }
        }
        self.y_row = y;
        best.map(|(j, dir, _)| (j, dir))
    }

    /// True when phase-2 pricing finds no eligible entering column.
    fn price_and_check_optimal(&mut self, phase: Phase) -> bool {
        self.price(phase).is_none()
    }

    fn ratio_test_phase2(&self, entering: usize, direction: f64, w: &[f64]) -> RatioOutcome {
        let ptol = self.eng.opts.pivot_tol;
        let span = self.upper[entering] - self.lower[entering];
        let mut theta = f64::INFINITY;
        let mut blocking: Option<(usize, bool, f64)> = None; // (pos, to_upper, |pivot|)

        for (pos, &wv) in w.iter().enumerate() {
            if wv.abs() <= ptol {
                continue;
            }
            let rate = -direction * wv;
            let j = self.basis[pos] as usize;
            let x = self.xb[pos];
            let (limit, to_upper) = if rate > 0.0 {
                (self.upper[j], true)
            } else {
                (self.lower[j], false)
            };
            if !limit.is_finite() {
                continue;
            }
            let t = ((limit - x) / rate).max(0.0);
            let take = match blocking {
                None => true,
                Some((bpos, _, babs)) => {
                    if self.bland {
                        // Bland: smallest column id among the min-ratio ties.
                        t < theta - 1e-12
                            || (t <= theta + 1e-12 && self.basis[pos] < self.basis[bpos])
                    } else {
                        // Stability: largest pivot among the near-ties.
                        t < theta - 1e-10 || (t < theta + 1e-10 && wv.abs() > babs)
                    }
                }
            };
            if take {
                theta = theta.min(t);
                blocking = Some((pos, to_upper, wv.abs()));
            }
        }

        if span.is_finite() && span < theta {
            return RatioOutcome::BoundFlip { theta: span };
        }
        match blocking {
            None => RatioOutcome::Unbounded,
            Some((pos, to_upper, pivot_abs)) => {
                if pivot_abs <= ptol {
                    RatioOutcome::NoDirection
                } else {
                    RatioOutcome::Pivot {
                        theta,
                        leaving_pos: pos,
                        to_upper,
                    }
                }
            }
        }
    }

    /// Long-step phase-1 ratio test: walk the breakpoints of the piecewise
    /// linear infeasibility along the entering direction until its slope turns
    /// nonnegative. In Bland mode it degrades to the classic first-breakpoint
    /// rule.
    fn ratio_test_phase1(&self, entering: usize, direction: f64, w: &[f64]) -> RatioOutcome {
        let ptol = self.eng.opts.pivot_tol;
        let btol = self.eng.opts.bound_tol;

        // Initial slope: the phase-1 reduced cost of the entering column in
        // its movement direction. Recompute locally from sigma to avoid
        // carrying state: slope = sum over infeasible basics of
        // sigma_i * (-direction * w_i).
        let mut slope = 0.0;
        for (pos, &wv) in w.iter().enumerate() {
            let j = self.basis[pos] as usize;
            let x = self.xb[pos];
            let sigma = if x < self.lower[j] - btol {
                -1.0
            } else if x > self.upper[j] + btol {
                1.0
            } else {
                0.0
            };
            if sigma != 0.0 {
                slope += sigma * (-direction) * wv;
            }
        }
        if slope >= 0.0 {
            // Pricing and the recomputed slope disagree (drift); treat as
            // a dead end so the caller refactorizes.
            return RatioOutcome::NoDirection;
        }

        #[derive(Clone, Copy)]
        struct Bp {
            theta: f64,
            gain: f64,
            pos: usize,
            to_upper: bool,
            pivot_abs: f64,
        }
        let mut bps: Vec<Bp> = Vec::new();
        for (pos, &wv) in w.iter().enumerate() {
            if wv.abs() <= ptol {
                continue;
            }
            let rate = -direction * wv;
            let j = self.basis[pos] as usize;
            let x = self.xb[pos];
            let l = self.lower[j];
            let u = self.upper[j];
            let mut push = |bound: f64, to_upper: bool| {
                if bound.is_finite() {
                    let t = ((bound - x) / rate).max(0.0);
                    bps.push(Bp {
                        theta: t,
                        gain: rate.abs(),
                        pos,
                        to_upper,
                        pivot_abs: wv.abs(),
                    });
                }
            };
            if rate > 0.0 {
                if x < l - btol {
                    push(l, false);
                    push(u, true);
                } else if x <= u + btol {
                    push(u, true);
                }
                // already above u: worsening, no breakpoint
            } else {
                if x > u + btol {
                    push(u, true);
                    push(l, false);
                } else if x >= l - btol {
                    push(l, false);
                }
            }
        }

        let span = self.upper[entering] - self.lower[entering];
        if bps.is_empty() {
            if span.is_finite() {
                return RatioOutcome::BoundFlip { theta: span };
            }
            // Infeasibility would decrease forever: numerically impossible.
            return RatioOutcome::NoDirection;
        }

        if self.bland {
            bps.sort_by(|a, b| {
                a.theta
                    .partial_cmp(&b.theta)
                    .unwrap()
                    .then(self.basis[a.pos].cmp(&self.basis[b.pos]))
            });
        } else {
            bps.sort_by(|a, b| {
                a.theta
                    .partial_cmp(&b.theta)
                    .unwrap()
                    .then(b.pivot_abs.partial_cmp(&a.pivot_abs).unwrap())
                    .then(a.pos.cmp(&b.pos))
            });
        }

        let mut chosen: Option<Bp> = None;
        if self.bland {
            chosen = Some(bps[0]);
        } else {
            for bp in &bps {
                slope += bp.gain;
                if slope >= -1e-12 {
                    chosen = Some(*bp);
                    break;
                }
            }
            if chosen.is_none() {
                // Slope stays negative through every basic breakpoint; the
                // entering variable's own span must stop the step.
                if span.is_finite() && span >= bps.last().unwrap().theta {
                    return RatioOutcome::BoundFlip { theta: span };
                }
                chosen = Some(*bps.last().unwrap());
            }
        }
        let bp = chosen.unwrap();
        if span.is_finite() && span < bp.theta {
            return RatioOutcome::BoundFlip { theta: span };
        }
        if bp.pivot_abs <= ptol {
            return RatioOutcome::NoDirection;
        }
        RatioOutcome::Pivot {
            theta: bp.theta,
            leaving_pos: bp.pos,
            to_upper: bp.to_upper,
        }
    }

    /// Rows with a nonzero phase-1 dual form the infeasibility witness.
    fn infeasible_row_certificate(&mut self) -> Vec<usize> {
        for pos in 0..self.eng.m {
            let j = self.basis[pos] as usize;
            let x = self.xb[pos];
            self.cb[pos] = if x < self.lower[j] - self.eng.opts.bound_tol {
                -1.0
            } else if x > self.upper[j] + self.eng.opts.bound_tol {
                1.0
            } else {
                0.0
            };
        }
        let cb = std::mem::take(&mut self.cb);
        let mut y = std::mem::take(&mut self.y_row);
        self.btran(&cb, &mut y);
        let max = y.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let rows = y
            .iter()
            .enumerate()
            .filter(|(_, &v)| v.abs() > 1e-9 * max.max(1.0))
            .map(|(i, _)| i)
            .collect();
        self.cb = cb;
        self.y_row = y;
        rows
    }

    fn build_ray(&self, entering: usize, direction: f64) -> Vec<f64> {
        // Structural components of the improving ray.
        let mut ray = vec![0.0; self.eng.n_struct];
        if entering < self.eng.n_struct {
            ray[entering] = direction;
        }
        let (rows, vals) = self.eng.column(entering);
        let mut aq = vec![0.0; self.eng.m];
        for (r, a) in rows.iter().zip(vals.iter()) {
            aq[*r as usize] = *a;
        }
        let mut w = vec![0.0; self.eng.m];
        let mut scratch = vec![0.0; self.eng.m];
        self.lu.ftran(&aq, &mut w, &mut scratch);
        // Note: etas are not applied here; the ray is built right after a
        // refactorize-free detection, so apply them manually.
        let mut w_full = w;
        for eta in &self.etas {
            let t = w_full[eta.pos as usize] / eta.pivot;
            w_full[eta.pos as usize] = t;
            if t != 0.0 {
                for &(i, d) in &eta.entries {
                    w_full[i as usize] -= d * t;
                }
            }
        }
        for (pos, &j) in self.basis.iter().enumerate() {
            if (j as usize) < self.eng.n_struct {
                ray[j as usize] = -direction * w_full[pos];
            }
        }
        ray
    }

    fn values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.eng.n_struct];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = match self.status[j] {
                VarStatus::Basic(pos) => self.xb[pos as usize],
                _ => self.nonbasic_value(j),
            };
        }
        out
    }

    fn snapshot(&self) -> BasisSnapshot {
        BasisSnapshot {
            basis: self.basis.clone(),
            status: self.status.clone(),
        }
    }

    fn finish(&mut self, status: LpStatus, objective: f64) -> LpOutcome {
        LpOutcome {
            status,
            values: self.values(),
            objective,
            iterations: self.iterations,
            basis: self.snapshot(),
        }
    }

    fn finish_optimal(&mut self) -> LpOutcome {
        let obj = self.current_objective();
        LpOutcome {
            status: LpStatus::Optimal,
            values: self.values(),
            objective: obj,
            iterations: self.iterations,
            basis: self.snapshot(),
        }
    }
}

enum RatioOutcome {
    Pivot {
        theta: f64,
        leaving_pos: usize,
        to_upper: bool,
    },
    BoundFlip {
        theta: f64,
    },
    Unbounded,
    /// No pivot of acceptable magnitude.
    NoDirection,
}

/// Solves the LP relaxation of `model` (binary kinds are treated as
/// continuous within their bounds).
pub fn solve_lp(model: &MilpModel) -> Result<Solution> {
    model.validate()?;
    let engine = Engine::new(model, SimplexOptions::default());
    let out = engine.solve(&[], None)?;
    Ok(outcome_to_solution(out))
}

pub(crate) fn outcome_to_solution(out: LpOutcome) -> Solution {
    match out.status {
        LpStatus::Optimal => Solution {
            status: SolveStatus::Optimal,
            objective: out.objective,
            bound: out.objective,
            gap: 0.0,
            values: out.values,
            nodes: 1,
            iterations: out.iterations,
            certificate: None,
        },
        LpStatus::Infeasible { rows } => Solution {
            status: SolveStatus::Infeasible,
            objective: f64::INFINITY,
            bound: f64::INFINITY,
            gap: 0.0,
            values: out.values,
            nodes: 1,
            iterations: out.iterations,
            certificate: Some(Certificate::InfeasibleRows(rows)),
        },
        LpStatus::Unbounded { ray } => Solution {
            status: SolveStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            bound: f64::NEG_INFINITY,
            gap: 0.0,
            values: out.values,
            nodes: 1,
            iterations: out.iterations,
            certificate: Some(Certificate::UnboundedRay(ray)),
        },
    }
}


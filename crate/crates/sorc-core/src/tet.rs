//! Community trade clearing: match per-prosumer surplus and need at minimal
//! transmission cost, with the grid as the virtual counterparty that absorbs
//! whatever the community cannot place internally.
//!
//! The model is a transportation LP per step (no binaries, no inter-temporal
//! rows): sellers must place exactly their surplus, buyers must receive
//! exactly their need, and each ordered pair carries a directed nonnegative
//! flux within its configured bounds.

use milp_core::{solve_lp, MilpModel, Sense, SolveStatus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_network, MicrogridScenario, TradeNetwork};
use crate::exec::{map_indexed, map_range, ExecMode};
use crate::sorc::{solve_sorc, DegradationMode, SorcError, SorcSchedule};
use milp_core::MilpLimits;

/// Per-participant, per-step imbalance signals handed from the scheduling
/// stage to the clearing stage (kWh).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceSet {
    pub participants: Vec<String>,
    /// `export_offer[j][t]`: energy participant j can sell.
    pub export_offer: Vec<Vec<f64>>,
    /// `import_need[j][t]`: energy participant j must source.
    pub import_need: Vec<Vec<f64>>,
}

impl ImbalanceSet {
    /// Extracts the imbalances from solved schedules. Any same-step overlap
    /// of import and export (possible when buy and sell prices tie) is
    /// netted so at most one side is positive per participant and step.
    pub fn from_schedules(schedules: &[SorcSchedule]) -> ImbalanceSet {
        let participants = schedules.iter().map(|s| s.id.clone()).collect();
        let mut export_offer = Vec::with_capacity(schedules.len());
        let mut import_need = Vec::with_capacity(schedules.len());
        for sched in schedules {
            let mut exp = Vec::with_capacity(sched.steps.len());
            let mut imp = Vec::with_capacity(sched.steps.len());
            for st in &sched.steps {
                let net = st.grid_import_kwh - st.grid_export_kwh;
                imp.push(net.max(0.0));
                exp.push((-net).max(0.0));
            }
            export_offer.push(exp);
            import_need.push(imp);
        }
        ImbalanceSet {
            participants,
            export_offer,
            import_need,
        }
    }

    pub fn horizon(&self) -> usize {
        self.export_offer.first().map_or(0, |v| v.len())
    }

    pub fn validate(&self) -> Result<(), TetError> {
        let n = self.participants.len();
        if self.export_offer.len() != n || self.import_need.len() != n {
            return Err(TetError::Shape(format!(
                "imbalance tables must have {n} rows"
            )));
        }
        let t = self.horizon();
        for (j, (exp, imp)) in self.export_offer.iter().zip(self.import_need.iter()).enumerate() {
            if exp.len() != t || imp.len() != t {
                return Err(TetError::Shape(format!(
                    "participant {} series length mismatch",
                    self.participants[j]
                )));
            }
            for (step, (&e, &i)) in exp.iter().zip(imp.iter()).enumerate() {
                if e < 0.0 || i < 0.0 {
                    return Err(TetError::NegativeImbalance {
                        participant: self.participants[j].clone(),
                        step,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Cleared trades: flux per (seller, buyer, step) plus the grid reconciliation
/// flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeClearing {
    pub participants: Vec<String>,
    /// `flux[t][i][j]`, kWh sold by i to j during step t (diagonal unused).
    pub flux: Vec<Vec<Vec<f64>>>,
    /// `grid_sales[t][i]`, kWh sold by i to the grid.
    pub grid_sales: Vec<Vec<f64>>,
    /// `grid_purchases[t][j]`, kWh bought by j from the grid.
    pub grid_purchases: Vec<Vec<f64>>,
    /// Per-step totals bought from the grid: `h_in[t] = sum_j grid_purchases`.
    pub h_in: Vec<f64>,
    /// Per-step totals sold to the grid: `h_out[t] = sum_i grid_sales`.
    pub h_out: Vec<f64>,
    pub objective: f64,
}

impl TradeClearing {
    /// Total peer-to-peer volume, kWh.
    pub fn p2p_volume(&self) -> f64 {
        self.flux
            .iter()
            .flat_map(|m| m.iter().flatten())
            .sum()
    }

    /// Re-prices the clearing from its flows alone.
    pub fn repriced_objective(&self, net: &TradeNetwork) -> f64 {
        let n = self.participants.len();
        let mut cost = 0.0;
        for (t, m) in self.flux.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        cost += net.transmission_cost[i][j][t] * m[i][j];
                    }
                }
                cost += net.grid_sell_cost[i][t] * self.grid_sales[t][i];
                cost += net.grid_buy_cost[i][t] * self.grid_purchases[t][i];
            }
        }
        cost
    }
}

#[derive(Debug, Error)]
pub enum TetError {
    #[error("network is invalid: {}", errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Network { errors: Vec<crate::domain::FieldViolation> },

    #[error("participant sets do not match: {0}")]
    ParticipantMismatch(String),

    #[error("{0}")]
    Shape(String),

    #[error("negative imbalance for {participant} at step {step}")]
    NegativeImbalance { participant: String, step: usize },

    #[error("clearing model infeasible at step {step}")]
    Infeasible { step: usize },

    #[error("solver error: {0}")]
    Solver(#[from] milp_core::MilpError),

    #[error("scheduling stage failed for prosumer '{id}': {source}")]
    Stage1 {
        id: String,
        #[source]
        source: SorcError,
    },
}

/// Variable indices of one whole-horizon clearing model.
#[derive(Debug, Clone)]
pub struct TetVariableMap {
    /// `flux[t][i][j]` -> column (diagonal None).
    pub flux: Vec<Vec<Vec<Option<usize>>>>,
    /// `grid_sale[t][i]` -> column.
    pub grid_sale: Vec<Vec<usize>>,
    /// `grid_purchase[t][j]` -> column.
    pub grid_purchase: Vec<Vec<usize>>,
}

fn check_alignment(imb: &ImbalanceSet, net: &TradeNetwork) -> Result<(), TetError> {
    imb.validate()?;
    validate_network(net, imb.horizon()).map_err(|errors| TetError::Network { errors })?;
    if imb.participants != net.participants {
        return Err(TetError::ParticipantMismatch(format!(
            "imbalances carry [{}], network carries [{}]",
            imb.participants.join(", "),
            net.participants.join(", ")
        )));
    }
    Ok(())
}

/// Builds the whole-horizon clearing LP (block diagonal in t).
pub fn build_tet_model(
    imb: &ImbalanceSet,
    net: &TradeNetwork,
) -> Result<(MilpModel, TetVariableMap), TetError> {
    check_alignment(imb, net)?;
    let horizon = imb.horizon();
    let mut model = MilpModel::new();
    let mut map = TetVariableMap {
        flux: Vec::with_capacity(horizon),
        grid_sale: Vec::with_capacity(horizon),
        grid_purchase: Vec::with_capacity(horizon),
    };
    for t in 0..horizon {
        let block = add_step_block(&mut model, imb, net, t);
        map.flux.push(block.0);
        map.grid_sale.push(block.1);
        map.grid_purchase.push(block.2);
    }
    Ok((model, map))
}

type StepBlock = (Vec<Vec<Option<usize>>>, Vec<usize>, Vec<usize>);

/// Appends one step's variables and balance rows to `model`.
fn add_step_block(
    model: &mut MilpModel,
    imb: &ImbalanceSet,
    net: &TradeNetwork,
    t: usize,
) -> StepBlock {
    let n = net.num_participants();
    let mut flux = vec![vec![None; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            // Directed nonnegative arc; a configured negative f_min only
            // widens the free-signed pair, which the opposite arc carries.
            let lo = net.f_min[i][j].max(0.0);
            let up = net.f_max[i][j];
            let var = model.add_var(format!("f_{t}_{i}_{j}"), lo, up);
            model.add_objective_term(var, net.transmission_cost[i][j][t]);
            flux[i][j] = Some(var);
        }
    }
    let grid_sale: Vec<usize> = (0..n)
        .map(|i| {
            let var = model.add_var(format!("gs_{t}_{i}"), 0.0, f64::INFINITY);
            model.add_objective_term(var, net.grid_sell_cost[i][t]);
            var
        })
        .collect();
    let grid_purchase: Vec<usize> = (0..n)
        .map(|j| {
            let var = model.add_var(format!("gp_{t}_{j}"), 0.0, f64::INFINITY);
            model.add_objective_term(var, net.grid_buy_cost[j][t]);
            var
        })
        .collect();

    for i in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..n)
            .filter_map(|j| flux[i][j].map(|v| (v, 1.0)))
            .collect();
        terms.push((grid_sale[i], 1.0));
        model.add_constraint(
            format!("seller_{t}_{i}"),
            terms,
            Sense::Eq,
            imb.export_offer[i][t],
        );
    }
    for j in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..n)
            .filter_map(|i| flux[i][j].map(|v| (v, 1.0)))
            .collect();
        terms.push((grid_purchase[j], 1.0));
        model.add_constraint(
            format!("buyer_{t}_{j}"),
            terms,
            Sense::Eq,
            imb.import_need[j][t],
        );
    }
    (flux, grid_sale, grid_purchase)
}

/// Solves the clearing. The model is block diagonal in t, so each step is
/// solved independently (in parallel under [`ExecMode::Parallel`]) and the
/// results are assembled in step order.
pub fn solve_tet(
    imb: &ImbalanceSet,
    net: &TradeNetwork,
    mode: ExecMode,
) -> Result<TradeClearing, TetError> {
    check_alignment(imb, net)?;
    let horizon = imb.horizon();
    let n = net.num_participants();

    let blocks = map_range(mode, horizon, |t| -> Result<_, TetError> {
        let mut model = MilpModel::new();
        let (flux, grid_sale, grid_purchase) = add_step_block(&mut model, imb, net, t);
        let sol = solve_lp(&model)?;
        match sol.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Err(TetError::Infeasible { step: t }),
            other => {
                return Err(TetError::Shape(format!(
                    "unexpected clearing status {other:?} at step {t}"
                )))
            }
        }
        let mut fm = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if let Some(var) = flux[i][j] {
                    fm[i][j] = sol.values[var];
                }
            }
        }
        let sales: Vec<f64> = grid_sale.iter().map(|&v| sol.values[v]).collect();
        let purchases: Vec<f64> = grid_purchase.iter().map(|&v| sol.values[v]).collect();
        Ok((fm, sales, purchases, sol.objective))
    });

    let mut clearing = TradeClearing {
        participants: net.participants.clone(),
        flux: Vec::with_capacity(horizon),
        grid_sales: Vec::with_capacity(horizon),
        grid_purchases: Vec::with_capacity(horizon),
        h_in: Vec::with_capacity(horizon),
        h_out: Vec::with_capacity(horizon),
        objective: 0.0,
    };
    for block in blocks {
        let (fm, sales, purchases, obj) = block?;
        clearing.h_out.push(sales.iter().sum());
        clearing.h_in.push(purchases.iter().sum());
        clearing.flux.push(fm);
        clearing.grid_sales.push(sales);
        clearing.grid_purchases.push(purchases);
        clearing.objective += obj;
    }
    Ok(clearing)
}

/// Cost of settling every imbalance over the grid arcs alone (peer arcs
/// forced to zero). This assignment is always feasible, so it upper-bounds
/// the optimal clearing.
pub fn grid_only_cost(imb: &ImbalanceSet, net: &TradeNetwork) -> f64 {
    let mut cost = 0.0;
    for j in 0..net.num_participants() {
        for t in 0..imb.horizon() {
            cost += net.grid_sell_cost[j][t] * imb.export_offer[j][t];
            cost += net.grid_buy_cost[j][t] * imb.import_need[j][t];
        }
    }
    cost
}

/// Community-level report assembled by [`run_pipeline`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub per_prosumer: Vec<ProsumerKpi>,
    /// Optimal clearing cost (stage 2 objective).
    pub trading_cost: f64,
    /// Stage-2 cost when every imbalance settles over the grid arcs.
    pub baseline_grid_only_trading: f64,
    /// Total community cost when all demand is bought at the tariff and no
    /// plant runs at all.
    pub baseline_no_orc: f64,
    /// Production and cycling cost plus the clearing cost. The stage-1 tariff
    /// settlement of the imbalances is replaced by the clearing, not added on
    /// top of it.
    pub total_cost: f64,
    /// `(baseline_grid_only_trading - trading_cost) / baseline` (0 when the
    /// baseline is 0).
    pub savings_vs_grid_only: f64,
    /// `(baseline_no_orc - total_cost) / baseline` (0 when the baseline is 0).
    pub savings_vs_no_orc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProsumerKpi {
    pub id: String,
    /// Stage-1 objective (production, cycling and tariff settlement).
    pub sorc_cost: f64,
    /// Tariff value of the imbalances (buy minus sell), the part of
    /// `sorc_cost` superseded by the clearing.
    pub imbalance_settlement: f64,
    pub grid_import_kwh: f64,
    pub grid_export_kwh: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineResult {
    pub schedules: Vec<SorcSchedule>,
    pub clearing: TradeClearing,
    pub kpi: KpiReport,
}

/// Two-stage community solve: per-prosumer scheduling (independent, run in
/// parallel under [`ExecMode::Parallel`]) feeding its imbalance signals into
/// the trade clearing. Any stage-1 failure aborts with the failing prosumer's
/// id before stage 2 starts.
pub fn run_pipeline(
    scenarios: &[MicrogridScenario],
    net: &TradeNetwork,
    degradation: DegradationMode,
    limits: &MilpLimits,
    mode: ExecMode,
) -> Result<PipelineResult, TetError> {
    let ids: Vec<String> = scenarios.iter().map(|s| s.id.clone()).collect();
    if ids != net.participants {
        return Err(TetError::ParticipantMismatch(format!(
            "scenarios carry [{}], network carries [{}]",
            ids.join(", "),
            net.participants.join(", ")
        )));
    }
    if let Some(first) = scenarios.first() {
        for s in scenarios {
            if s.time.horizon != first.time.horizon || s.time.step_hours != first.time.step_hours {
                return Err(TetError::Shape(format!(
                    "prosumer '{}' uses a different time grid",
                    s.id
                )));
            }
        }
    }

    let stage1 = map_indexed(mode, scenarios, |_, s| solve_sorc(s, degradation, limits));
    let mut schedules = Vec::with_capacity(scenarios.len());
    for (s, result) in scenarios.iter().zip(stage1) {
        match result {
            Ok(sched) => schedules.push(sched),
            Err(source) => {
                return Err(TetError::Stage1 {
                    id: s.id.clone(),
                    source,
                })
            }
        }
    }

    let imbalances = ImbalanceSet::from_schedules(&schedules);
    let clearing = solve_tet(&imbalances, net, mode)?;

    let kpi = build_kpi(scenarios, &schedules, &imbalances, net, &clearing);
    Ok(PipelineResult {
        schedules,
        clearing,
        kpi,
    })
}

fn build_kpi(
    scenarios: &[MicrogridScenario],
    schedules: &[SorcSchedule],
    imbalances: &ImbalanceSet,
    net: &TradeNetwork,
    clearing: &TradeClearing,
) -> KpiReport {
    let mut per_prosumer = Vec::with_capacity(scenarios.len());
    let mut production_and_cycling = 0.0;
    let mut baseline_no_orc = 0.0;
    for (s, sched) in scenarios.iter().zip(schedules.iter()) {
        let settlement: f64 = sched
            .steps
            .iter()
            .enumerate()
            .map(|(t, st)| {
                s.tariff.price_buy[t] * st.grid_import_kwh
                    - s.tariff.price_sell[t] * st.grid_export_kwh
            })
            .sum();
        production_and_cycling += sched.total_cost - settlement;
        baseline_no_orc += s
            .demand
            .iter()
            .zip(s.tariff.price_buy.iter())
            .map(|(&d, &p)| d * p)
            .sum::<f64>();
        per_prosumer.push(ProsumerKpi {
            id: s.id.clone(),
            sorc_cost: sched.total_cost,
            imbalance_settlement: settlement,
            grid_import_kwh: sched.grid_import_total(),
            grid_export_kwh: sched.grid_export_total(),
        });
    }
    let baseline_grid_only_trading = grid_only_cost(imbalances, net);
    let total_cost = production_and_cycling + clearing.objective;
    let savings_vs_grid_only = if baseline_grid_only_trading > 0.0 {
        (baseline_grid_only_trading - clearing.objective) / baseline_grid_only_trading
    } else {
        0.0
    };
    let savings_vs_no_orc = if baseline_no_orc > 0.0 {
        (baseline_no_orc - total_cost) / baseline_no_orc
    } else {
        0.0
    };
    KpiReport {
        per_prosumer,
        trading_cost: clearing.objective,
        baseline_grid_only_trading,
        baseline_no_orc,
        total_cost,
        savings_vs_grid_only,
        savings_vs_no_orc,
    }
}

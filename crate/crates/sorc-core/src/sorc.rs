//! Solar-ORC weekly scheduling: translate a [`MicrogridScenario`] into a MILP,
//! solve it, and extract the hourly dispatch plus the grid imbalance signals
//! consumed by the community trading stage.
//!
//! Flow variables (x, z, g, q, m, b_in, b_out, e_in, e_out) are average power
//! over a step; energy stocks (state of charge, wear) pick up `step_hours`
//! where power enters them, so the formulation stays dimensionally consistent
//! for step lengths other than one hour.

use milp_core::{check_solution, solve_milp, MilpLimits, MilpModel, Sense, SolveStatus, Solution};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{FluidProperties, MicrogridScenario};

/// How battery degradation couples to the usable capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DegradationMode {
    /// Wear accumulates and shrinks the usable capacity: per-step wear
    /// `w_t >= (fade / throughput) |b_t - b_{t-1}|`, cumulative wear `W_t`,
    /// and `soc, charge, discharge <= (1 - W_t) b_max`.
    #[default]
    RemainingCapacity,
    /// The literal degradation rows: `(fade / throughput) |b_t - b_{t-1}|
    /// <= d_t`, `bcap_t <= d_t b_max`, `charge, discharge <= bcap_t`. Kept
    /// for auditability; the degradation variable relaxes rather than
    /// tightens the capacity in this form.
    PaperLiteral,
}

/// Indices of every model variable, per step (t = 1..=T unless noted).
#[derive(Debug, Clone)]
pub struct SorcVariableMap {
    /// x^t, turbine power (kW).
    pub production: Vec<usize>,
    /// z^t, pump power (kW).
    pub pump: Vec<usize>,
    /// g^t, net injection (kW), free-signed within the tariff box.
    pub grid: Vec<usize>,
    /// q_in^t, heat delivered to the cycle (kW).
    pub hx_heat: Vec<usize>,
    /// q_solar^t, collector output (kW).
    pub solar_heat: Vec<usize>,
    /// m^t, working-fluid mass flow (kg/s).
    pub mass_flow: Vec<usize>,
    /// A^t, regulated section area (m2).
    pub section_area: Vec<usize>,
    /// b^t, state of charge (kWh), t = 0..=T.
    pub soc: Vec<usize>,
    /// b_in^t, charging power (kW).
    pub charge: Vec<usize>,
    /// b_out^t, discharging power (kW).
    pub discharge: Vec<usize>,
    /// y_in^t binary.
    pub charge_flag: Vec<usize>,
    /// y_out^t binary.
    pub discharge_flag: Vec<usize>,
    /// e_in^t, electricity taken from the grid (kW).
    pub grid_import: Vec<usize>,
    /// e_out^t, electricity sold to the grid (kW).
    pub grid_export: Vec<usize>,
    pub degradation: DegradationVars,
}

#[derive(Debug, Clone)]
pub enum DegradationVars {
    RemainingCapacity {
        /// w^t, per-step wear fraction.
        wear: Vec<usize>,
        /// W^t, cumulative wear fraction, t = 0..=T.
        cum_wear: Vec<usize>,
    },
    PaperLiteral {
        /// d^t, degradation factor.
        degradation: Vec<usize>,
        /// b_max^t, per-step capacity variable (kWh).
        cap: Vec<usize>,
    },
}

/// One step of the extracted dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SorcStep {
    pub production_kw: f64,
    pub pump_kw: f64,
    pub net_grid_kw: f64,
    pub solar_thermal_kw: f64,
    pub hx_thermal_kw: f64,
    pub mass_flow_kg_s: f64,
    pub section_area_m2: f64,
    /// State of charge at the END of the step, kWh.
    pub soc_kwh: f64,
    pub charge_kwh: f64,
    pub discharge_kwh: f64,
    /// Usable capacity after degradation, kWh.
    pub cap_available_kwh: f64,
    /// Per-step degradation figure (wear fraction, or the literal d^t).
    pub degradation: f64,
    pub grid_import_kwh: f64,
    pub grid_export_kwh: f64,
}

/// Full dispatch of one prosumer over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SorcSchedule {
    pub id: String,
    pub step_hours: f64,
    pub steps: Vec<SorcStep>,
    pub total_cost: f64,
    pub nodes: u64,
    pub iterations: u64,
}

impl SorcSchedule {
    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    /// Total energy drawn from the grid, kWh.
    pub fn grid_import_total(&self) -> f64 {
        self.steps.iter().map(|s| s.grid_import_kwh).sum()
    }

    /// Total energy sold to the grid, kWh.
    pub fn grid_export_total(&self) -> f64 {
        self.steps.iter().map(|s| s.grid_export_kwh).sum()
    }

    /// Total energy discharged from the battery, kWh.
    pub fn battery_throughput(&self) -> f64 {
        self.steps.iter().map(|s| s.discharge_kwh).sum()
    }

    pub fn peak_mass_flow(&self) -> f64 {
        self.steps.iter().map(|s| s.mass_flow_kg_s).fold(0.0, f64::max)
    }
}

#[derive(Debug, Error)]
pub enum SorcError {
    /// The plant data alone makes the model infeasible; caught before solving.
    #[error("model is infeasible by construction: {}", reasons.join("; "))]
    InfeasibleByConstruction { reasons: Vec<String> },

    #[error("scheduling model is infeasible (conflicting rows: {})", rows.join(", "))]
    Infeasible { rows: Vec<String> },

    #[error("solver stopped at gap {gap:.3e} before proving optimality")]
    GapLimit { gap: f64 },

    #[error("solver error: {0}")]
    Solver(#[from] milp_core::MilpError),

    #[error("internal error: {0}")]
    Internal(String),
}

/// Builds the scheduling MILP. The scenario must already be validated.
pub fn build_sorc_model(
    s: &MicrogridScenario,
    mode: DegradationMode,
) -> Result<(MilpModel, SorcVariableMap), SorcError> {
    precheck_feasibility(s)?;

    let t_count = s.time.horizon;
    let dt = s.time.step_hours;
    let fluid = &s.fluid;
    let area_max = s.effective_section_area_max();
    let wear_rate = s.battery.wear_per_kwh();

    let mut m = MilpModel::new();

    let mut map = SorcVariableMap {
        production: Vec::with_capacity(t_count),
        pump: Vec::with_capacity(t_count),
        grid: Vec::with_capacity(t_count),
        hx_heat: Vec::with_capacity(t_count),
        solar_heat: Vec::with_capacity(t_count),
        mass_flow: Vec::with_capacity(t_count),
        section_area: Vec::with_capacity(t_count),
        soc: Vec::with_capacity(t_count + 1),
        charge: Vec::with_capacity(t_count),
        discharge: Vec::with_capacity(t_count),
        charge_flag: Vec::with_capacity(t_count),
        discharge_flag: Vec::with_capacity(t_count),
        grid_import: Vec::with_capacity(t_count),
        grid_export: Vec::with_capacity(t_count),
        degradation: match mode {
            DegradationMode::RemainingCapacity => DegradationVars::RemainingCapacity {
                wear: Vec::with_capacity(t_count),
                cum_wear: Vec::with_capacity(t_count + 1),
            },
            DegradationMode::PaperLiteral => DegradationVars::PaperLiteral {
                degradation: Vec::with_capacity(t_count),
                cap: Vec::with_capacity(t_count),
            },
        },
    };

    // Boundary conditions: b^0 = 0 and (RemainingCapacity) W^0 = 0.
    map.soc.push(m.add_var("b_0", 0.0, 0.0));
    if let DegradationVars::RemainingCapacity { cum_wear, .. } = &mut map.degradation {
        cum_wear.push(m.add_var("cw_0", 0.0, 0.0));
    }

    for t in 1..=t_count {
        let i = t - 1;
        let x = m.add_var(format!("x_{t}"), s.orc.x_min, s.orc.x_max);
        let z = m.add_var(format!("z_{t}"), s.orc.z_min, s.orc.z_max);
        let g = m.add_var(format!("g_{t}"), s.tariff.g_min, s.tariff.g_max);
        let q_in = m.add_var(format!("qin_{t}"), 0.0, f64::INFINITY);
        let q_solar = m.add_var(format!("qsol_{t}"), 0.0, f64::INFINITY);
        let mass = m.add_var(format!("m_{t}"), 0.0, f64::INFINITY);
        let area = m.add_var(format!("area_{t}"), 0.0, area_max);
        let soc = m.add_var(format!("b_{t}"), 0.0, f64::INFINITY);
        let b_in = m.add_var(format!("bin_{t}"), s.battery.b_min, f64::INFINITY);
        let b_out = m.add_var(format!("bout_{t}"), s.battery.b_min, f64::INFINITY);
        let y_in = m.add_binary(format!("yin_{t}"));
        let y_out = m.add_binary(format!("yout_{t}"));
        let e_in = m.add_var(format!("ein_{t}"), 0.0, f64::INFINITY);
        let e_out = m.add_var(format!("eout_{t}"), 0.0, f64::INFINITY);

        let soc_prev = map.soc[i];

        // Grid balance: g = x - z - eta_b b_in + b_out / eta_b.
        m.add_constraint(
            format!("balance_{t}"),
            vec![
                (g, 1.0),
                (x, -1.0),
                (z, 1.0),
                (b_in, s.battery.eta_round),
                (b_out, -1.0 / s.battery.eta_round),
            ],
            Sense::Eq,
            0.0,
        );
        // Demand cover: g + e_in - e_out >= D / dt (all in kW).
        m.add_constraint(
            format!("demand_{t}"),
            vec![(g, 1.0), (e_in, 1.0), (e_out, -1.0)],
            Sense::Ge,
            s.demand[i] / dt,
        );
        // Net production: x - z = eta_I q_in.
        m.add_constraint(
            format!("net_production_{t}"),
            vec![(x, 1.0), (z, -1.0), (q_in, -s.orc.eta_cycle)],
            Sense::Eq,
            0.0,
        );
        // Turbine and pump energetics: x = m dh_T, z = m dh_P.
        m.add_constraint(
            format!("turbine_{t}"),
            vec![(x, 1.0), (mass, -fluid.dh_turbine)],
            Sense::Eq,
            0.0,
        );
        m.add_constraint(
            format!("pump_{t}"),
            vec![(z, 1.0), (mass, -fluid.dh_pump)],
            Sense::Eq,
            0.0,
        );
        // Lamination: m = rho A v.
        m.add_constraint(
            format!("lamination_{t}"),
            vec![(mass, 1.0), (area, -fluid.density * fluid.velocity)],
            Sense::Eq,
            0.0,
        );
        // Heat exchanger ceiling and collector output.
        m.add_constraint(
            format!("hx_limit_{t}"),
            vec![(q_in, 1.0), (q_solar, -s.orc.eta_hx)],
            Sense::Le,
            0.0,
        );
        m.add_constraint(
            format!("solar_{t}"),
            vec![(q_solar, 1.0)],
            Sense::Eq,
            s.collector.efficiency * s.collector.area * s.irradiation[i],
        );
        // Battery state recursion: b_t = b_{t-1} + dt (eta_b b_in - b_out / eta_b).
        m.add_constraint(
            format!("soc_{t}"),
            vec![
                (soc, 1.0),
                (soc_prev, -1.0),
                (b_in, -dt * s.battery.eta_round),
                (b_out, dt / s.battery.eta_round),
            ],
            Sense::Eq,
            0.0,
        );
        // No simultaneous charge and discharge.
        m.add_constraint(
            format!("exclusion_{t}"),
            vec![(y_in, 1.0), (y_out, 1.0)],
            Sense::Eq,
            1.0,
        );
        m.add_constraint(
            format!("charge_flag_{t}"),
            vec![(b_in, dt), (y_in, -s.battery.b_max)],
            Sense::Le,
            0.0,
        );
        m.add_constraint(
            format!("discharge_flag_{t}"),
            vec![(b_out, dt), (y_out, -s.battery.b_max)],
            Sense::Le,
            0.0,
        );

        match &mut map.degradation {
            DegradationVars::RemainingCapacity { wear, cum_wear } => {
                let w = m.add_var(format!("wear_{t}"), 0.0, f64::INFINITY);
                let cw = m.add_var(format!("cw_{t}"), 0.0, f64::INFINITY);
                let cw_prev = cum_wear[i];
                // w >= k (b_t - b_{t-1}) and w >= -k (b_t - b_{t-1}).
                m.add_constraint(
                    format!("wear_pos_{t}"),
                    vec![(w, 1.0), (soc, -wear_rate), (soc_prev, wear_rate)],
                    Sense::Ge,
                    0.0,
                );
                m.add_constraint(
                    format!("wear_neg_{t}"),
                    vec![(w, 1.0), (soc, wear_rate), (soc_prev, -wear_rate)],
                    Sense::Ge,
                    0.0,
                );
                m.add_constraint(
                    format!("cum_wear_{t}"),
                    vec![(cw, 1.0), (cw_prev, -1.0), (w, -1.0)],
                    Sense::Eq,
                    0.0,
                );
                // Remaining capacity caps state and both flows:
                // value + b_max W_t <= b_max.
                m.add_constraint(
                    format!("cap_soc_{t}"),
                    vec![(soc, 1.0), (cw, s.battery.b_max)],
                    Sense::Le,
                    s.battery.b_max,
                );
                m.add_constraint(
                    format!("cap_charge_{t}"),
                    vec![(b_in, dt), (cw, s.battery.b_max)],
                    Sense::Le,
                    s.battery.b_max,
                );
                m.add_constraint(
                    format!("cap_discharge_{t}"),
                    vec![(b_out, dt), (cw, s.battery.b_max)],
                    Sense::Le,
                    s.battery.b_max,
                );
                wear.push(w);
                cum_wear.push(cw);
            }
            DegradationVars::PaperLiteral { degradation, cap } => {
                let d = m.add_var(format!("deg_{t}"), 0.0, f64::INFINITY);
                let bcap = m.add_var(format!("bcap_{t}"), 0.0, f64::INFINITY);
                // k (b_t - b_{t-1}) <= d and -k (b_t - b_{t-1}) <= d.
                m.add_constraint(
                    format!("wear_pos_{t}"),
                    vec![(d, 1.0), (soc, -wear_rate), (soc_prev, wear_rate)],
                    Sense::Ge,
                    0.0,
                );
                m.add_constraint(
                    format!("wear_neg_{t}"),
                    vec![(d, 1.0), (soc, wear_rate), (soc_prev, -wear_rate)],
                    Sense::Ge,
                    0.0,
                );
                // bcap_t <= d_t b_max.
                m.add_constraint(
                    format!("cap_link_{t}"),
                    vec![(bcap, 1.0), (d, -s.battery.b_max)],
                    Sense::Le,
                    0.0,
                );
                // Flows limited by the per-step capacity variable.
                m.add_constraint(
                    format!("cap_charge_{t}"),
                    vec![(b_in, dt), (bcap, -1.0)],
                    Sense::Le,
                    0.0,
                );
                m.add_constraint(
                    format!("cap_discharge_{t}"),
                    vec![(b_out, dt), (bcap, -1.0)],
                    Sense::Le,
                    0.0,
                );
                degradation.push(d);
                cap.push(bcap);
            }
        }

        // Objective: production and cycling costs plus grid settlement.
        m.add_objective_term(x, s.production_cost * dt);
        m.add_objective_term(b_in, s.battery.cost_cycle * dt);
        m.add_objective_term(b_out, s.battery.cost_cycle * dt);
        m.add_objective_term(e_in, s.tariff.price_buy[i] * dt);
        m.add_objective_term(e_out, -s.tariff.price_sell[i] * dt);

        map.production.push(x);
        map.pump.push(z);
        map.grid.push(g);
        map.hx_heat.push(q_in);
        map.solar_heat.push(q_solar);
        map.mass_flow.push(mass);
        map.section_area.push(area);
        map.soc.push(soc);
        map.charge.push(b_in);
        map.discharge.push(b_out);
        map.charge_flag.push(y_in);
        map.discharge_flag.push(y_out);
        map.grid_import.push(e_in);
        map.grid_export.push(e_out);
    }

    Ok((m, map))
}

/// Detects instances that no dispatch can satisfy before handing them to the
/// solver: per step, the turbine's feasible power interval must be nonempty.
fn precheck_feasibility(s: &MicrogridScenario) -> Result<(), SorcError> {
    let fluid = &s.fluid;
    let area_max = s.effective_section_area_max();
    let mut reasons = Vec::new();

    let mut x_floor = s.orc.x_min;
    if fluid.dh_pump > 0.0 {
        x_floor = x_floor.max(s.orc.z_min * fluid.dh_turbine / fluid.dh_pump);
    } else if s.orc.z_min > 0.0 {
        reasons.push(format!(
            "z_min = {} can never be met: dh_pump = 0 forces z = 0",
            s.orc.z_min
        ));
    }

    if x_floor > 0.0 {
        let section_cap = fluid.density * fluid.velocity * area_max * fluid.dh_turbine;
        let pump_cap = if fluid.dh_pump > 0.0 {
            s.orc.z_max * fluid.dh_turbine / fluid.dh_pump
        } else {
            f64::INFINITY
        };
        let net_frac = (fluid.dh_turbine - fluid.dh_pump) / fluid.dh_turbine;
        for (t, &irr) in s.irradiation.iter().enumerate() {
            let q_solar = s.collector.efficiency * s.collector.area * irr;
            let thermal_cap = s.orc.eta_cycle * s.orc.eta_hx * q_solar / net_frac;
            let x_cap = s.orc.x_max.min(section_cap).min(pump_cap).min(thermal_cap);
            if x_cap < x_floor - 1e-9 {
                reasons.push(format!(
                    "step {}: turbine floor {:.6} kW exceeds achievable {:.6} kW",
                    t + 1,
                    x_floor,
                    x_cap
                ));
                if reasons.len() >= 8 {
                    break;
                }
            }
        }
    }

    if reasons.is_empty() {
        Ok(())
    } else {
        Err(SorcError::InfeasibleByConstruction { reasons })
    }
}

/// Builds, solves and extracts the schedule in one call.
pub fn solve_sorc(
    s: &MicrogridScenario,
    mode: DegradationMode,
    limits: &MilpLimits,
) -> Result<SorcSchedule, SorcError> {
    let (model, map) = build_sorc_model(s, mode)?;
    let solution = solve_milp(&model, limits)?;
    extract_schedule(s, mode, &model, &map, solution)
}

fn extract_schedule(
    s: &MicrogridScenario,
    mode: DegradationMode,
    model: &MilpModel,
    map: &SorcVariableMap,
    mut solution: Solution,
) -> Result<SorcSchedule, SorcError> {
    match solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => {
            let rows = match &solution.certificate {
                Some(milp_core::Certificate::InfeasibleRows(rows)) => rows
                    .iter()
                    .map(|&r| model.constraints[r].name.clone())
                    .collect(),
                _ => Vec::new(),
            };
            return Err(SorcError::Infeasible { rows });
        }
        SolveStatus::GapLimit => {
            return Err(SorcError::GapLimit { gap: solution.gap });
        }
        SolveStatus::Unbounded => {
            return Err(SorcError::Internal(
                "scheduling model reported unbounded; tariff invariants exclude this".into(),
            ));
        }
    }

    // Wear variables carry no objective pressure, so the solver may leave them
    // above their floor. Normalize to the exact wear implied by the state of
    // charge; this only relaxes the capacity rows, so feasibility is
    // preserved (and re-checked below).
    if let DegradationVars::RemainingCapacity { wear, cum_wear } = &map.degradation {
        let k = s.battery.wear_per_kwh();
        let mut cum = 0.0;
        for t in 0..s.time.horizon {
            let delta = solution.values[map.soc[t + 1]] - solution.values[map.soc[t]];
            let w = k * delta.abs();
            cum += w;
            solution.values[wear[t]] = w;
            solution.values[cum_wear[t + 1]] = cum;
        }
        let violations = check_solution(
            model,
            &solution.values,
            milp_core::tolerances::ROW_FEASIBILITY,
            milp_core::tolerances::BOUND_FEASIBILITY,
        );
        if !violations.is_empty() {
            return Err(SorcError::Internal(format!(
                "wear normalization broke feasibility at '{}'",
                violations[0].what
            )));
        }
    }

    let dt = s.time.step_hours;
    let v = &solution.values;
    let mut steps = Vec::with_capacity(s.time.horizon);
    for t in 0..s.time.horizon {
        let (cap_available, degradation) = match (&map.degradation, mode) {
            (DegradationVars::RemainingCapacity { wear, cum_wear }, _) => (
                s.battery.b_max * (1.0 - v[cum_wear[t + 1]]),
                v[wear[t]],
            ),
            (DegradationVars::PaperLiteral { degradation, cap }, _) => {
                (v[cap[t]], v[degradation[t]])
            }
        };
        steps.push(SorcStep {
            production_kw: v[map.production[t]],
            pump_kw: v[map.pump[t]],
            net_grid_kw: v[map.grid[t]],
            solar_thermal_kw: v[map.solar_heat[t]],
            hx_thermal_kw: v[map.hx_heat[t]],
            mass_flow_kg_s: v[map.mass_flow[t]],
            section_area_m2: v[map.section_area[t]],
            soc_kwh: v[map.soc[t + 1]],
            charge_kwh: v[map.charge[t]] * dt,
            discharge_kwh: v[map.discharge[t]] * dt,
            cap_available_kwh: cap_available,
            degradation,
            grid_import_kwh: v[map.grid_import[t]] * dt,
            grid_export_kwh: v[map.grid_export[t]] * dt,
        });
    }

    Ok(SorcSchedule {
        id: s.id.clone(),
        step_hours: dt,
        steps,
        total_cost: solution.objective,
        nodes: solution.nodes,
        iterations: solution.iterations,
    })
}

/// Re-prices a schedule from its fields alone (production, cycling and grid
/// settlement): every exported cost is re-derivable without the solver.
pub fn schedule_cost(s: &MicrogridScenario, sched: &SorcSchedule) -> f64 {
    let dt = s.time.step_hours;
    sched
        .steps
        .iter()
        .enumerate()
        .map(|(t, st)| {
            s.production_cost * st.production_kw * dt
                + s.battery.cost_cycle * (st.charge_kwh + st.discharge_kwh)
                + s.tariff.price_buy[t] * st.grid_import_kwh
                - s.tariff.price_sell[t] * st.grid_export_kwh
        })
        .sum()
}

/// Per-step and peak mass flow reproduced from the schedule's section areas.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFlowReport {
    pub per_step_kg_s: Vec<f64>,
    pub peak_kg_s: f64,
}

pub fn mass_flow_report(sched: &SorcSchedule, fluid: &FluidProperties) -> MassFlowReport {
    let per_step_kg_s: Vec<f64> = sched
        .steps
        .iter()
        .map(|st| fluid.density * st.section_area_m2 * fluid.velocity)
        .collect();
    let peak_kg_s = per_step_kg_s.iter().copied().fold(0.0, f64::max);
    MassFlowReport {
        per_step_kg_s,
        peak_kg_s,
    }
}

/// Verifies every model equation against the extracted schedule (not against
/// solver internals). Returns the violated relations, empty when the schedule
/// is clean within `tol`.
pub fn verify_schedule(
    s: &MicrogridScenario,
    sched: &SorcSchedule,
    mode: DegradationMode,
    tol: f64,
) -> Vec<String> {
    let mut bad = Vec::new();
    let dt = s.time.step_hours;
    let eta_b = s.battery.eta_round;
    let mut prev_soc = 0.0;
    let mut prev_cap = s.battery.b_max;
    let mut cum_abs_delta = 0.0;

    let mut check = |name: String, residual: f64| {
        if residual > tol {
            bad.push(format!("{name} (residual {residual:.3e})"));
        }
    };

    for (t, st) in sched.steps.iter().enumerate() {
        let charge_kw = st.charge_kwh / dt;
        let discharge_kw = st.discharge_kwh / dt;

        check(
            format!("balance_{}", t + 1),
            (st.net_grid_kw - st.production_kw + st.pump_kw + eta_b * charge_kw
                - discharge_kw / eta_b)
                .abs(),
        );
        check(
            format!("demand_{}", t + 1),
            s.demand[t] / dt
                - (st.net_grid_kw + st.grid_import_kwh / dt - st.grid_export_kwh / dt),
        );
        check(
            format!("net_production_{}", t + 1),
            (st.production_kw - st.pump_kw - s.orc.eta_cycle * st.hx_thermal_kw).abs(),
        );
        check(
            format!("turbine_{}", t + 1),
            (st.production_kw - s.fluid.dh_turbine * st.mass_flow_kg_s).abs(),
        );
        check(
            format!("pump_{}", t + 1),
            (st.pump_kw - s.fluid.dh_pump * st.mass_flow_kg_s).abs(),
        );
        check(
            format!("lamination_{}", t + 1),
            (st.mass_flow_kg_s - s.fluid.density * st.section_area_m2 * s.fluid.velocity).abs(),
        );
        check(
            format!("hx_limit_{}", t + 1),
            st.hx_thermal_kw - s.orc.eta_hx * st.solar_thermal_kw,
        );
        check(
            format!("solar_{}", t + 1),
            (st.solar_thermal_kw - s.collector.efficiency * s.collector.area * s.irradiation[t])
                .abs(),
        );
        check(
            format!("soc_{}", t + 1),
            (st.soc_kwh - prev_soc - eta_b * st.charge_kwh + st.discharge_kwh / eta_b).abs(),
        );
        check(
            format!("mutual_exclusion_{}", t + 1),
            st.charge_kwh.min(st.discharge_kwh),
        );
        check(format!("x_bounds_{}", t + 1), s.orc.x_min - st.production_kw);
        check(format!("x_bounds_hi_{}", t + 1), st.production_kw - s.orc.x_max);
        check(format!("z_bounds_{}", t + 1), s.orc.z_min - st.pump_kw);
        check(format!("z_bounds_hi_{}", t + 1), st.pump_kw - s.orc.z_max);
        check(format!("g_bounds_{}", t + 1), s.tariff.g_min - st.net_grid_kw);
        check(format!("g_bounds_hi_{}", t + 1), st.net_grid_kw - s.tariff.g_max);
        check(format!("nonneg_soc_{}", t + 1), -st.soc_kwh);
        check(format!("nonneg_charge_{}", t + 1), -st.charge_kwh);
        check(format!("nonneg_discharge_{}", t + 1), -st.discharge_kwh);
        check(format!("nonneg_import_{}", t + 1), -st.grid_import_kwh);
        check(format!("nonneg_export_{}", t + 1), -st.grid_export_kwh);

        if mode == DegradationMode::RemainingCapacity {
            let k = s.battery.wear_per_kwh();
            let delta = (st.soc_kwh - prev_soc).abs();
            cum_abs_delta += delta;
            check(
                format!("wear_exact_{}", t + 1),
                (st.degradation - k * delta).abs(),
            );
            check(
                format!("cap_monotone_{}", t + 1),
                st.cap_available_kwh - prev_cap,
            );
            check(format!("cap_soc_{}", t + 1), st.soc_kwh - st.cap_available_kwh);
            check(
                format!("cap_charge_{}", t + 1),
                st.charge_kwh - st.cap_available_kwh,
            );
            check(
                format!("cap_discharge_{}", t + 1),
                st.discharge_kwh - st.cap_available_kwh,
            );
            prev_cap = st.cap_available_kwh;
        }
        prev_soc = st.soc_kwh;
    }

    if mode == DegradationMode::RemainingCapacity && cum_abs_delta <= s.battery.throughput {
        let floor = (1.0 - s.battery.fade) * s.battery.b_max;
        if let Some(last) = sched.steps.last() {
            check("cap_fade_floor".to_string(), floor - last.cap_available_kwh);
        }
    }

    let repriced = schedule_cost(s, sched);
    check(
        "objective_consistency".to_string(),
        (repriced - sched.total_cost).abs() / 1.0f64.max(sched.total_cost.abs()),
    );

    bad
}

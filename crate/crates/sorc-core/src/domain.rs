//! Domain types: plant, storage, tariff and trading-network descriptions,
//! scenario validation, and the built-in fluid/collector/size catalog.

use serde::{Deserialize, Serialize};

/// Hourly (by default) discretization of the planning horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    /// Length of one step in hours.
    pub step_hours: f64,
    /// Number of steps.
    pub horizon: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            step_hours: 1.0,
            horizon: 168,
        }
    }
}

/// Thermodynamic description of the working fluid.
///
/// `dh_turbine`/`dh_pump` are the enthalpy drops (kJ/kg) across the turbine
/// and pump; when only temperature differences are known, derive them with
/// [`enthalpy_drops`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidProperties {
    pub name: String,
    /// kg/mol
    pub molecular_weight: f64,
    /// Critical temperature, degrees C.
    pub t_crit: f64,
    /// Critical pressure, MPa.
    pub p_crit: f64,
    /// Specific heat, J/(kg K).
    pub cp: f64,
    /// kg/m3
    pub density: f64,
    /// Fluid velocity through the regulated section, m/s.
    pub velocity: f64,
    /// kJ/kg
    pub dh_turbine: f64,
    /// kJ/kg
    pub dh_pump: f64,
}

/// Derives the turbine/pump enthalpy drops (kJ/kg) from temperature
/// differences and machine efficiencies: `dh_T = cp dT_T eta_T / 1000`,
/// `dh_P = cp dT_P / (eta_P 1000)`.
pub fn enthalpy_drops(
    cp: f64,
    dt_turbine: f64,
    eta_turbine: f64,
    dt_pump: f64,
    eta_pump: f64,
) -> (f64, f64) {
    (
        cp * dt_turbine * eta_turbine / 1000.0,
        cp * dt_pump / (eta_pump * 1000.0),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollectorTechnology {
    /// Flat-plate collector.
    FPC,
    /// Evacuated tube collector.
    ETC,
    /// Compound parabolic collector.
    CPC,
    /// Parabolic trough collector.
    PTC,
    /// Linear Fresnel reflector.
    LFR,
    Custom,
}

/// Solar collector feeding the cycle's heat exchanger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollectorSpec {
    pub technology: CollectorTechnology,
    /// Optical/thermal efficiency, fraction of beam irradiation captured.
    pub efficiency: f64,
    /// Aperture area, m2.
    pub area: f64,
}

/// Cycle-level parameters of the ORC plant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrcSpec {
    /// Cycle efficiency (net electric out per unit heat in).
    pub eta_cycle: f64,
    /// Heat-exchanger efficiency between collector and cycle.
    pub eta_hx: f64,
    /// Turbine power bounds, kW.
    pub x_min: f64,
    pub x_max: f64,
    /// Pump power bounds, kW.
    pub z_min: f64,
    pub z_max: f64,
    /// Upper bound for the regulated section area, m2. When absent it is
    /// derived so the section never limits rated power:
    /// `rho * A * v * dh_turbine >= x_max`.
    #[serde(default)]
    pub section_area_max: Option<f64>,
}

/// Battery storage with lifetime-throughput degradation accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    /// Charge/discharge efficiency applied on each leg.
    pub eta_round: f64,
    /// kWh
    pub b_min: f64,
    /// Rated capacity, kWh.
    pub b_max: f64,
    /// Capacity fraction lost over one lifetime throughput.
    pub fade: f64,
    /// Lifetime throughput, kWh.
    pub throughput: f64,
    /// Cost per kWh charged or discharged.
    pub cost_cycle: f64,
}

impl BatterySpec {
    /// Wear fraction per kWh of state-of-charge movement.
    pub fn wear_per_kwh(&self) -> f64 {
        self.fade / self.throughput
    }
}

/// Grid connection limits and energy prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridTariff {
    /// Net-injection bounds, kW.
    pub g_min: f64,
    pub g_max: f64,
    /// Price paid per kWh imported, one entry per step.
    pub price_buy: Vec<f64>,
    /// Price received per kWh exported, one entry per step.
    pub price_sell: Vec<f64>,
}

/// One prosumer's plant plus its exogenous series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicrogridScenario {
    pub id: String,
    pub time: TimeGrid,
    pub fluid: FluidProperties,
    pub collector: CollectorSpec,
    pub orc: OrcSpec,
    pub battery: BatterySpec,
    pub tariff: GridTariff,
    /// Demand per step, kWh.
    pub demand: Vec<f64>,
    /// Beam irradiation per step, kW/m2.
    pub irradiation: Vec<f64>,
    /// Cost per kWh produced by the turbine.
    pub production_cost: f64,
}

impl MicrogridScenario {
    /// Section-area bound actually used by the model builder (D4 rule).
    pub fn effective_section_area_max(&self) -> f64 {
        match self.orc.section_area_max {
            Some(a) => a,
            None => {
                let denom = self.fluid.density * self.fluid.velocity * self.fluid.dh_turbine;
                if denom > 0.0 {
                    self.orc.x_max / denom
                } else {
                    0.0
                }
            }
        }
    }
}

/// Community trading topology and costs. Ordered pairs `(i, j)` describe the
/// directed sale from participant `i` to participant `j`; diagonal entries
/// are ignored (no self-arcs). The grid is modeled as a virtual counterparty
/// with per-participant arc costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeNetwork {
    pub participants: Vec<String>,
    /// kWh bounds per ordered pair, `f_min[i][j] <= flux <= f_max[i][j]`.
    /// In JSON an unbounded entry is `null`.
    #[serde(with = "unbounded_below")]
    pub f_min: Vec<Vec<f64>>,
    #[serde(with = "unbounded_above")]
    pub f_max: Vec<Vec<f64>>,
    /// currency/kWh per ordered pair per step: `transmission_cost[i][j][t]`.
    pub transmission_cost: Vec<Vec<Vec<f64>>>,
    /// currency/kWh per participant per step on the grid->buyer arc.
    pub grid_buy_cost: Vec<Vec<f64>>,
    /// currency/kWh per participant per step on the seller->grid arc.
    pub grid_sell_cost: Vec<Vec<f64>>,
}

impl TradeNetwork {
    /// Network with uniform costs, no pair bounds (`[0, inf)`), for `horizon`
    /// steps.
    pub fn uniform(
        participants: Vec<String>,
        transmission_cost: f64,
        grid_buy_cost: f64,
        grid_sell_cost: f64,
        horizon: usize,
    ) -> Self {
        let n = participants.len();
        TradeNetwork {
            participants,
            f_min: vec![vec![0.0; n]; n],
            f_max: vec![vec![f64::INFINITY; n]; n],
            transmission_cost: vec![vec![vec![transmission_cost; horizon]; n]; n],
            grid_buy_cost: vec![vec![grid_buy_cost; horizon]; n],
            grid_sell_cost: vec![vec![grid_sell_cost; horizon]; n],
        }
    }

    pub fn num_participants(&self) -> usize {
        self.participants.len()
    }
}

/// JSON codecs for bound matrices where `null` stands for "no bound".
macro_rules! unbounded_matrix {
    ($name:ident, $missing:expr) => {
        mod $name {
            use serde::{Deserialize, Deserializer, Serialize, Serializer};

            pub fn serialize<S: Serializer>(
                m: &[Vec<f64>],
                ser: S,
            ) -> Result<S::Ok, S::Error> {
                let view: Vec<Vec<Option<f64>>> = m
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|&v| if v.is_finite() { Some(v) } else { None })
                            .collect()
                    })
                    .collect();
                view.serialize(ser)
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(
                de: D,
            ) -> Result<Vec<Vec<f64>>, D::Error> {
                let view: Vec<Vec<Option<f64>>> = Deserialize::deserialize(de)?;
                Ok(view
                    .into_iter()
                    .map(|row| row.into_iter().map(|v| v.unwrap_or($missing)).collect())
                    .collect())
            }
        }
    };
}

unbounded_matrix!(unbounded_above, f64::INFINITY);
unbounded_matrix!(unbounded_below, f64::NEG_INFINITY);

/// One violated invariant found by [`validate_scenario`] or
/// [`validate_network`].
#[derive(Debug, Clone, PartialEq)]
pub struct FieldViolation {
    /// Dotted path of the offending field, e.g. `collector.area`.
    pub path: String,
    /// Constraint text including the observed value.
    pub message: String,
}

impl std::fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}", self.path, self.message)
    }
}

struct Check {
    violations: Vec<FieldViolation>,
}

impl Check {
    fn new() -> Self {
        Self {
            violations: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, path: &str, message: String) {
        if !ok {
            self.violations.push(FieldViolation {
                path: path.to_string(),
                message,
            });
        }
    }

    fn finite(&mut self, value: f64, path: &str) {
        self.require(value.is_finite(), path, format!("must be finite (got {value})"));
    }

    fn series_nonneg(&mut self, series: &[f64], path: &str) {
        for (t, &v) in series.iter().enumerate() {
            if v.is_nan() || v < 0.0 || !v.is_finite() {
                self.violations.push(FieldViolation {
                    path: format!("{path}[{t}]"),
                    message: format!("must be >= 0 (got {v})"),
                });
            }
        }
    }
}

/// Checks every scenario invariant and returns the scenario unchanged when it
/// holds; otherwise returns all violations, not just the first.
pub fn validate_scenario(raw: MicrogridScenario) -> Result<MicrogridScenario, Vec<FieldViolation>> {
    let mut c = Check::new();
    let s = &raw;

    c.require(
        s.time.step_hours > 0.0 && s.time.step_hours.is_finite(),
        "time.step_hours",
        format!("must be > 0 (got {})", s.time.step_hours),
    );
    c.require(
        s.time.horizon >= 1,
        "time.horizon",
        format!("must be >= 1 (got {})", s.time.horizon),
    );

    c.require(
        s.fluid.density > 0.0 && s.fluid.density.is_finite(),
        "fluid.density",
        format!("must be > 0 (got {})", s.fluid.density),
    );
    c.require(
        s.fluid.velocity > 0.0 && s.fluid.velocity.is_finite(),
        "fluid.velocity",
        format!("must be > 0 (got {})", s.fluid.velocity),
    );
    c.require(
        s.fluid.dh_pump >= 0.0,
        "fluid.dh_pump",
        format!("must be >= 0 (got {})", s.fluid.dh_pump),
    );
    c.require(
        s.fluid.dh_turbine > s.fluid.dh_pump && s.fluid.dh_turbine.is_finite(),
        "fluid.dh_turbine",
        format!(
            "must be > dh_pump (got {} vs {})",
            s.fluid.dh_turbine, s.fluid.dh_pump
        ),
    );
    c.finite(s.fluid.molecular_weight, "fluid.molecular_weight");
    c.finite(s.fluid.cp, "fluid.cp");
    c.finite(s.fluid.t_crit, "fluid.t_crit");
    c.finite(s.fluid.p_crit, "fluid.p_crit");

    c.require(
        s.collector.efficiency > 0.0 && s.collector.efficiency <= 1.0,
        "collector.efficiency",
        format!("must be in (0, 1] (got {})", s.collector.efficiency),
    );
    c.require(
        s.collector.area > 0.0 && s.collector.area.is_finite(),
        "collector.area",
        format!("must be > 0 and finite (got {})", s.collector.area),
    );

    c.require(
        s.orc.eta_cycle > 0.0 && s.orc.eta_cycle <= 1.0,
        "orc.eta_cycle",
        format!("must be in (0, 1] (got {})", s.orc.eta_cycle),
    );
    c.require(
        s.orc.eta_hx > 0.0 && s.orc.eta_hx <= 1.0,
        "orc.eta_hx",
        format!("must be in (0, 1] (got {})", s.orc.eta_hx),
    );
    c.finite(s.orc.x_max, "orc.x_max");
    c.finite(s.orc.z_max, "orc.z_max");
    c.require(
        s.orc.x_min >= 0.0 && s.orc.x_min <= s.orc.x_max,
        "orc.x_min",
        format!("must satisfy 0 <= x_min <= x_max (got {} vs {})", s.orc.x_min, s.orc.x_max),
    );
    c.require(
        s.orc.z_min >= 0.0 && s.orc.z_min <= s.orc.z_max,
        "orc.z_min",
        format!("must satisfy 0 <= z_min <= z_max (got {} vs {})", s.orc.z_min, s.orc.z_max),
    );
    if let Some(a) = s.orc.section_area_max {
        c.require(
            a > 0.0 && a.is_finite(),
            "orc.section_area_max",
            format!("must be > 0 and finite when given (got {a})"),
        );
    }

    c.require(
        s.battery.eta_round > 0.0 && s.battery.eta_round <= 1.0,
        "battery.eta_round",
        format!("must be in (0, 1] (got {})", s.battery.eta_round),
    );
    c.finite(s.battery.b_max, "battery.b_max");
    c.require(
        s.battery.b_min >= 0.0 && s.battery.b_min <= s.battery.b_max,
        "battery.b_min",
        format!(
            "must satisfy 0 <= b_min <= b_max (got {} vs {})",
            s.battery.b_min, s.battery.b_max
        ),
    );
    c.require(
        s.battery.fade >= 0.0 && s.battery.fade < 1.0,
        "battery.fade",
        format!("must be in [0, 1) (got {})", s.battery.fade),
    );
    c.require(
        s.battery.throughput > 0.0 && s.battery.throughput.is_finite(),
        "battery.throughput",
        format!("must be > 0 and finite (got {})", s.battery.throughput),
    );
    c.finite(s.battery.cost_cycle, "battery.cost_cycle");

    c.finite(s.tariff.g_min, "tariff.g_min");
    c.finite(s.tariff.g_max, "tariff.g_max");
    c.require(
        s.tariff.g_min <= s.tariff.g_max,
        "tariff.g_min",
        format!("must be <= g_max (got {} vs {})", s.tariff.g_min, s.tariff.g_max),
    );
    let horizon = s.time.horizon;
    c.require(
        s.tariff.price_buy.len() == horizon,
        "tariff.price_buy",
        format!("length {} does not match horizon {horizon}", s.tariff.price_buy.len()),
    );
    c.require(
        s.tariff.price_sell.len() == horizon,
        "tariff.price_sell",
        format!("length {} does not match horizon {horizon}", s.tariff.price_sell.len()),
    );
    if s.tariff.price_buy.len() == s.tariff.price_sell.len() {
        for (t, (&pb, &ps)) in s
            .tariff
            .price_buy
            .iter()
            .zip(s.tariff.price_sell.iter())
            .enumerate()
        {
            if !(pb >= ps && ps >= 0.0 && pb.is_finite()) {
                c.violations.push(FieldViolation {
                    path: format!("tariff.price_buy[{t}]"),
                    message: format!(
                        "must satisfy price_buy >= price_sell >= 0 (got {pb} vs {ps})"
                    ),
                });
            }
        }
    }

    c.require(
        s.demand.len() == horizon,
        "demand",
        format!("length {} does not match horizon {horizon}", s.demand.len()),
    );
    c.series_nonneg(&s.demand, "demand");
    c.require(
        s.irradiation.len() == horizon,
        "irradiation",
        format!("length {} does not match horizon {horizon}", s.irradiation.len()),
    );
    c.series_nonneg(&s.irradiation, "irradiation");
    c.require(
        s.production_cost >= 0.0 && s.production_cost.is_finite(),
        "production_cost",
        format!("must be >= 0 (got {})", s.production_cost),
    );

    if c.violations.is_empty() {
        Ok(raw)
    } else {
        Err(c.violations)
    }
}

/// Checks the trading-network invariants against a set of participants and a
/// horizon.
pub fn validate_network(
    net: &TradeNetwork,
    horizon: usize,
) -> Result<(), Vec<FieldViolation>> {
    let mut c = Check::new();
    let n = net.participants.len();
    c.require(n >= 1, "participants", "must not be empty".to_string());
    for (i, id) in net.participants.iter().enumerate() {
        if net.participants[..i].contains(id) {
            c.violations.push(FieldViolation {
                path: format!("participants[{i}]"),
                message: format!("duplicate id '{id}'"),
            });
        }
    }
    let dim_ok = net.f_min.len() == n
        && net.f_max.len() == n
        && net.transmission_cost.len() == n
        && net.grid_buy_cost.len() == n
        && net.grid_sell_cost.len() == n
        && net.f_min.iter().all(|r| r.len() == n)
        && net.f_max.iter().all(|r| r.len() == n)
        && net.transmission_cost.iter().all(|r| r.len() == n);
    c.require(
        dim_ok,
        "network",
        format!("pair tables must be {n} x {n} and participant tables length {n}"),
    );
    if dim_ok {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if net.f_min[i][j] > net.f_max[i][j] {
                    c.violations.push(FieldViolation {
                        path: format!("f_min[{i}][{j}]"),
                        message: format!(
                            "must be <= f_max (got {} vs {})",
                            net.f_min[i][j], net.f_max[i][j]
                        ),
                    });
                }
                if net.f_max[i][j] < 0.0 {
                    c.violations.push(FieldViolation {
                        path: format!("f_max[{i}][{j}]"),
                        message: format!("must be >= 0 (got {})", net.f_max[i][j]),
                    });
                }
                if net.transmission_cost[i][j].len() != horizon {
                    c.violations.push(FieldViolation {
                        path: format!("transmission_cost[{i}][{j}]"),
                        message: format!(
                            "length {} does not match horizon {horizon}",
                            net.transmission_cost[i][j].len()
                        ),
                    });
                } else {
                    for (t, &v) in net.transmission_cost[i][j].iter().enumerate() {
                        if v.is_nan() || v < 0.0 {
                            c.violations.push(FieldViolation {
                                path: format!("transmission_cost[{i}][{j}][{t}]"),
                                message: format!("must be >= 0 (got {v})"),
                            });
                        }
                    }
                }
            }
            for (label, table) in [("grid_buy_cost", &net.grid_buy_cost), ("grid_sell_cost", &net.grid_sell_cost)] {
                if table[i].len() != horizon {
                    c.violations.push(FieldViolation {
                        path: format!("{label}[{i}]"),
                        message: format!(
                            "length {} does not match horizon {horizon}",
                            table[i].len()
                        ),
                    });
                } else {
                    for (t, &v) in table[i].iter().enumerate() {
                        if v.is_nan() || v < 0.0 {
                            c.violations.push(FieldViolation {
                                path: format!("{label}[{i}][{t}]"),
                                message: format!("must be >= 0 (got {v})"),
                            });
                        }
                    }
                }
            }
        }
    }
    if c.violations.is_empty() {
        Ok(())
    } else {
        Err(c.violations)
    }
}

/// Built-in catalog: working fluids, collector templates and plant sizes.
#[derive(Debug, Clone)]
pub struct Catalog {
    pub fluids: Vec<FluidProperties>,
    /// Collector templates carry a 1 m2 placeholder area.
    pub collectors: Vec<CollectorSpec>,
    /// Rated plant sizes, kW.
    pub sizes_kw: Vec<f64>,
}

// Defaults for quantities the catalog tables do not publish: a 2 m/s section
// velocity and enthalpy drops derived from a 35 K / 5 K temperature split at
// 85% / 80% machine efficiency.
const CATALOG_VELOCITY: f64 = 2.0;
const CATALOG_DT_TURBINE: f64 = 35.0;
const CATALOG_ETA_TURBINE: f64 = 0.85;
const CATALOG_DT_PUMP: f64 = 5.0;
const CATALOG_ETA_PUMP: f64 = 0.8;

/// (name, molecular weight, t_crit, p_crit, cp, density)
const CATALOG_FLUIDS: [(&str, f64, f64, f64, f64, f64); 9] = [
    ("Ethanol", 0.046, 240.8, 6.148, 2432.0, 0.253100481),
    ("Methanol", 0.032, 240.2, 8.104, 2512.0, 0.369822485),
    ("Cyclohexane", 0.084, 280.5, 4.075, 154.37, 0.632911392),
    ("R134a", 0.102, 101.0, 4.059, 1268.0, 0.8838),
    ("R141b", 0.11695, 204.2, 4.249, 895.0, 0.195),
    ("RC318", 0.2, 115.2, 2.778, 898.0, 0.028),
    ("R114", 0.17, 145.7, 3.289, 845.0, 0.05),
    ("R113", 0.187, 214.1, 3.439, 867.0, 0.215),
    ("R32", 0.052, 78.11, 5.784, 848.0, 0.011),
];

const CATALOG_COLLECTORS: [(CollectorTechnology, f64); 5] = [
    (CollectorTechnology::FPC, 0.65),
    (CollectorTechnology::ETC, 0.87),
    (CollectorTechnology::CPC, 0.65),
    (CollectorTechnology::PTC, 0.85),
    (CollectorTechnology::LFR, 0.66),
];

const CATALOG_SIZES_KW: [f64; 9] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5];

/// Returns the built-in 9 fluids, 5 collector technologies and 9 plant sizes.
pub fn builtin_catalog() -> Catalog {
    let fluids = CATALOG_FLUIDS
        .iter()
        .map(|&(name, mw, t_crit, p_crit, cp, density)| {
            let (dh_turbine, dh_pump) = enthalpy_drops(
                cp,
                CATALOG_DT_TURBINE,
                CATALOG_ETA_TURBINE,
                CATALOG_DT_PUMP,
                CATALOG_ETA_PUMP,
            );
            FluidProperties {
                name: name.to_string(),
                molecular_weight: mw,
                t_crit,
                p_crit,
                cp,
                density,
                velocity: CATALOG_VELOCITY,
                dh_turbine,
                dh_pump,
            }
        })
        .collect();
    let collectors = CATALOG_COLLECTORS
        .iter()
        .map(|&(technology, efficiency)| CollectorSpec {
            technology,
            efficiency,
            area: 1.0,
        })
        .collect();
    Catalog {
        fluids,
        collectors,
        sizes_kw: CATALOG_SIZES_KW.to_vec(),
    }
}

impl Catalog {
    pub fn fluid(&self, name: &str) -> Option<&FluidProperties> {
        self.fluids.iter().find(|f| f.name == name)
    }

    pub fn collector(&self, technology: CollectorTechnology) -> Option<&CollectorSpec> {
        self.collectors.iter().find(|c| c.technology == technology)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::small_scenario;

    #[test]
    fn catalog_pins_every_published_number() {
        let cat = builtin_catalog();
        assert_eq!(cat.fluids.len(), 9);
        assert_eq!(cat.collectors.len(), 5);
        assert_eq!(cat.sizes_kw.len(), 9);

        let expect: [(&str, f64, f64, f64, f64, f64); 9] = [
            ("Ethanol", 0.046, 240.8, 6.148, 2432.0, 0.253100481),
            ("Methanol", 0.032, 240.2, 8.104, 2512.0, 0.369822485),
            ("Cyclohexane", 0.084, 280.5, 4.075, 154.37, 0.632911392),
            ("R134a", 0.102, 101.0, 4.059, 1268.0, 0.8838),
            ("R141b", 0.11695, 204.2, 4.249, 895.0, 0.195),
            ("RC318", 0.2, 115.2, 2.778, 898.0, 0.028),
            ("R114", 0.17, 145.7, 3.289, 845.0, 0.05),
            ("R113", 0.187, 214.1, 3.439, 867.0, 0.215),
            ("R32", 0.052, 78.11, 5.784, 848.0, 0.011),
        ];
        for (f, e) in cat.fluids.iter().zip(expect.iter()) {
            assert_eq!(f.name, e.0);
            assert_eq!(f.molecular_weight, e.1);
            assert_eq!(f.t_crit, e.2);
            assert_eq!(f.p_crit, e.3);
            assert_eq!(f.cp, e.4);
            assert_eq!(f.density, e.5);
            assert!(f.velocity > 0.0 && f.dh_turbine > f.dh_pump && f.dh_pump >= 0.0);
        }

        let eff: Vec<(CollectorTechnology, f64)> = cat
            .collectors
            .iter()
            .map(|c| (c.technology, c.efficiency))
            .collect();
        assert_eq!(
            eff,
            vec![
                (CollectorTechnology::FPC, 0.65),
                (CollectorTechnology::ETC, 0.87),
                (CollectorTechnology::CPC, 0.65),
                (CollectorTechnology::PTC, 0.85),
                (CollectorTechnology::LFR, 0.66),
            ]
        );

        assert_eq!(
            cat.sizes_kw,
            vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5]
        );
        assert_eq!(cat.sizes_kw.first(), Some(&0.5));
        assert_eq!(cat.sizes_kw.last(), Some(&4.5));
    }

    #[test]
    fn catalog_lookup_by_name_and_technology() {
        let cat = builtin_catalog();
        assert_eq!(cat.fluid("Ethanol").unwrap().density, 0.253100481);
        assert_eq!(cat.fluid("Ethanol").unwrap().cp, 2432.0);
        assert_eq!(
            cat.collector(CollectorTechnology::PTC).unwrap().efficiency,
            0.85
        );
        assert!(cat.fluid("Water").is_none());
    }

    #[test]
    fn zero_area_is_rejected_with_field_path() {
        let mut s = small_scenario(1);
        s.collector.area = 0.0;
        let errs = validate_scenario(s).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.to_string().contains("collector.area must be > 0")));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let mut s = small_scenario(168);
        s.demand.pop(); // 167 entries against horizon 168
        let errs = validate_scenario(s).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| e.path == "demand" && e.message.contains("167")));
    }

    #[test]
    fn all_violations_are_collected() {
        let mut s = small_scenario(4);
        s.collector.area = 0.0;
        s.collector.efficiency = 1.5;
        s.battery.throughput = 0.0;
        let errs = validate_scenario(s).unwrap_err();
        assert!(errs.len() >= 3, "expected all violations, got {errs:?}");
    }

    #[test]
    fn weekly_etc_scenario_is_accepted_and_validation_is_idempotent() {
        let mut s = small_scenario(168);
        s.collector = CollectorSpec {
            technology: CollectorTechnology::ETC,
            efficiency: 0.87,
            area: 12.0,
        };
        let validated = validate_scenario(s.clone()).expect("valid scenario");
        assert_eq!(validated, s);
        let again = validate_scenario(validated.clone()).expect("still valid");
        assert_eq!(again, validated);
    }

    #[test]
    fn buy_below_sell_price_is_rejected() {
        let mut s = small_scenario(2);
        s.tariff.price_buy = vec![0.1, 0.1];
        s.tariff.price_sell = vec![0.2, 0.05];
        let errs = validate_scenario(s).unwrap_err();
        assert!(errs.iter().any(|e| e.path == "tariff.price_buy[0]"));
    }

    #[test]
    fn enthalpy_helper_matches_formula() {
        let (dh_t, dh_p) = enthalpy_drops(2432.0, 35.0, 0.85, 5.0, 0.8);
        assert!((dh_t - 2432.0 * 35.0 * 0.85 / 1000.0).abs() < 1e-12);
        assert!((dh_p - 2432.0 * 5.0 / (0.8 * 1000.0)).abs() < 1e-12);
        assert!(dh_t > dh_p);
    }

    /// Audit: every scenario-side parameter symbol of the formulation is
    /// reachable from the domain types. Touching each field keeps the
    /// checklist honest at compile time.
    #[test]
    fn parameter_symbol_checklist() {
        let s = small_scenario(2);
        let net = TradeNetwork::uniform(vec!["a".into(), "b".into()], 0.01, 0.2, 0.05, 2);
        let reachable: Vec<(&str, f64)> = vec![
            ("eta_th (heat exchanger)", s.orc.eta_hx),
            ("eta_b (storage)", s.battery.eta_round),
            ("eta_I (cycle)", s.orc.eta_cycle),
            ("eta_solar (panels)", s.collector.efficiency),
            ("c_p (production cost)", s.production_cost),
            ("c_T (transmission cost)", net.transmission_cost[0][1][0]),
            ("c_b (cycling cost)", s.battery.cost_cycle),
            ("x_min", s.orc.x_min),
            ("x_max", s.orc.x_max),
            ("z_min", s.orc.z_min),
            ("z_max", s.orc.z_max),
            ("g_min", s.tariff.g_min),
            ("g_max", s.tariff.g_max),
            ("b_min", s.battery.b_min),
            ("b_max", s.battery.b_max),
            ("D^t (demand)", s.demand[0]),
            ("v (velocity)", s.fluid.velocity),
            ("A_solar", s.collector.area),
            ("I_solar^t", s.irradiation[0]),
            ("f_max", net.f_max[0][1]),
            ("f_min", net.f_min[0][1]),
            ("rho (density)", s.fluid.density),
            ("dh_P", s.fluid.dh_pump),
            ("dh_T", s.fluid.dh_turbine),
            ("B_fade", s.battery.fade),
            ("B_throughput", s.battery.throughput),
        ];
        assert_eq!(reachable.len(), 26);
        for (symbol, value) in reachable {
            // f_max legitimately defaults to +inf (unbounded pair).
            assert!(!value.is_nan(), "symbol {symbol} must carry a value");
        }
    }
}

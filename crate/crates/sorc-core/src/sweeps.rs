//! Sensitivity sweeps over the scheduling model: working fluid, plant size,
//! collector technology and weather, plus the synthetic clear-sky irradiation
//! generator used by the shipped demo data.

use milp_core::MilpLimits;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{validate_scenario, CollectorSpec, FluidProperties, MicrogridScenario};
use crate::exec::{map_indexed, ExecMode};
use crate::sorc::{mass_flow_report, schedule_cost, solve_sorc, DegradationMode, SorcError};

/// Labeled irradiation series for weather sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub label: String,
    /// kW/m2 per step.
    pub irradiation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    Fluid(Vec<FluidProperties>),
    /// Rated plant sizes in kW; scales `x_max`, scales `z_max` in proportion
    /// and re-derives the section-area bound.
    Size(Vec<f64>),
    /// Replaces technology and efficiency, keeping the base aperture area.
    Collector(Vec<CollectorSpec>),
    Weather(Vec<WeatherSeries>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Fluid(v) => v.len(),
            SweepAxis::Size(v) => v.len(),
            SweepAxis::Collector(v) => v.len(),
            SweepAxis::Weather(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Total cost re-priced from the schedule.
    Objective,
    /// kg/s.
    PeakMassFlow,
    /// kWh over the horizon.
    GridImportTotal,
    /// kWh discharged over the horizon.
    BatteryThroughput,
    /// Collector aperture area (m2) required to reach rated power at the
    /// variant's peak irradiation; the plant-sizing proxy for collector
    /// comparisons.
    RequiredSizingArea,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: MicrogridScenario,
    pub axis: SweepAxis,
    pub outputs: Vec<Metric>,
}

/// One sweep result row: metric values in `outputs` order, or the failure
/// text for that variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub values: Result<Vec<f64>, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub metrics: Vec<Metric>,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("sweep axis is empty")]
    EmptyAxis,

    #[error("variant '{label}' is invalid: {details}")]
    InvalidVariant { label: String, details: String },

    #[error("weather series '{label}' has length {got}, horizon needs {want}")]
    HorizonMismatch {
        label: String,
        got: usize,
        want: usize,
    },
}

/// Materializes the scenario variants along the axis, in axis order.
pub fn axis_variants(
    base: &MicrogridScenario,
    axis: &SweepAxis,
) -> Result<Vec<(String, MicrogridScenario)>, SweepError> {
    if axis.is_empty() {
        return Err(SweepError::EmptyAxis);
    }
    let mut out = Vec::with_capacity(axis.len());
    match axis {
        SweepAxis::Fluid(fluids) => {
            for f in fluids {
                let mut s = base.clone();
                s.fluid = f.clone();
                // Fluid geometry changed: let the D4 rule re-derive the bound.
                s.orc.section_area_max = None;
                out.push((f.name.clone(), s));
            }
        }
        SweepAxis::Size(sizes) => {
            for &kw in sizes {
                let mut s = base.clone();
                let scale = if base.orc.x_max > 0.0 {
                    kw / base.orc.x_max
                } else {
                    1.0
                };
                s.orc.x_max = kw;
                s.orc.z_max = base.orc.z_max * scale;
                s.orc.section_area_max = None;
                out.push((format!("{kw}kW"), s));
            }
        }
        SweepAxis::Collector(specs) => {
            for c in specs {
                let mut s = base.clone();
                s.collector.technology = c.technology;
                s.collector.efficiency = c.efficiency;
                out.push((format!("{:?}", c.technology), s));
            }
        }
        SweepAxis::Weather(series) => {
            for w in series {
                if w.irradiation.len() != base.time.horizon {
                    return Err(SweepError::HorizonMismatch {
                        label: w.label.clone(),
                        got: w.irradiation.len(),
                        want: base.time.horizon,
                    });
                }
                let mut s = base.clone();
                s.irradiation = w.irradiation.clone();
                out.push((w.label.clone(), s));
            }
        }
    }
    for (label, s) in &out {
        if let Err(errors) = validate_scenario(s.clone()) {
            return Err(SweepError::InvalidVariant {
                label: label.clone(),
                details: errors
                    .iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
    }
    Ok(out)
}

/// Runs one scheduling solve per variant. Per-variant failures land in their
/// row and the sweep continues. Metrics are recomputed from the extracted
/// schedules, never from solver internals.
pub fn run_sweep(
    spec: &SweepSpec,
    degradation: DegradationMode,
    limits: &MilpLimits,
    mode: ExecMode,
) -> Result<SweepTable, SweepError> {
    let variants = axis_variants(&spec.base, &spec.axis)?;
    let rows = map_indexed(mode, &variants, |_, (label, scenario)| {
        let values = solve_sorc(scenario, degradation, limits)
            .map(|sched| {
                spec.outputs
                    .iter()
                    .map(|metric| compute_metric(*metric, scenario, &sched))
                    .collect::<Vec<f64>>()
            })
            .map_err(|e: SorcError| e.to_string());
        SweepRow {
            label: label.clone(),
            values,
        }
    });
    Ok(SweepTable {
        metrics: spec.outputs.clone(),
        rows,
    })
}

fn compute_metric(metric: Metric, s: &MicrogridScenario, sched: &crate::sorc::SorcSchedule) -> f64 {
    match metric {
        Metric::Objective => schedule_cost(s, sched),
        Metric::PeakMassFlow => mass_flow_report(sched, &s.fluid).peak_kg_s,
        Metric::GridImportTotal => sched.grid_import_total(),
        Metric::BatteryThroughput => sched.battery_throughput(),
        Metric::RequiredSizingArea => required_sizing_area(s),
    }
}

/// Collector aperture area needed to drive the plant at rated power under the
/// scenario's peak irradiation: `x_max (1 - dh_P/dh_T) / (eta_I eta_th
/// eta_solar I_peak)`. Scales as 1/efficiency, which is what makes collector
/// technologies comparable as a sizing question.
pub fn required_sizing_area(s: &MicrogridScenario) -> f64 {
    let peak_irr = s.irradiation.iter().copied().fold(0.0, f64::max);
    if peak_irr <= 0.0 {
        return f64::INFINITY;
    }
    let net_frac = (s.fluid.dh_turbine - s.fluid.dh_pump) / s.fluid.dh_turbine;
    s.orc.x_max * net_frac
        / (s.orc.eta_cycle * s.orc.eta_hx * s.collector.efficiency * peak_irr)
}

/// One row of a location/weather comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationRow {
    pub label: String,
    pub objective: f64,
    /// Savings against buying every kWh of demand at the buy tariff.
    pub savings_vs_grid_only: f64,
}

/// Solves the base scenario once per labeled irradiation series (identical
/// tariffs across labels) and reports objective and savings against the
/// grid-only cost.
pub fn compare_locations(
    base: &MicrogridScenario,
    weathers: &[WeatherSeries],
    degradation: DegradationMode,
    limits: &MilpLimits,
    mode: ExecMode,
) -> Result<Vec<LocationRow>, SweepError> {
    let spec = SweepSpec {
        base: base.clone(),
        axis: SweepAxis::Weather(weathers.to_vec()),
        outputs: vec![Metric::Objective],
    };
    let table = run_sweep(&spec, degradation, limits, mode)?;
    let grid_only: f64 = base
        .demand
        .iter()
        .zip(base.tariff.price_buy.iter())
        .map(|(&d, &p)| d * p)
        .sum();
    Ok(table
        .rows
        .into_iter()
        .map(|row| {
            let objective = match &row.values {
                Ok(v) => v[0],
                Err(_) => f64::NAN,
            };
            let savings = if grid_only > 0.0 && objective.is_finite() {
                (grid_only - objective) / grid_only
            } else {
                0.0
            };
            LocationRow {
                label: row.label,
                objective,
                savings_vs_grid_only: savings,
            }
        })
        .collect())
}

/// Season anchor for the synthetic generator (mid-season solar declination).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Autumn,
}

impl Season {
    fn declination_deg(self) -> f64 {
        match self {
            Season::Winter => -23.44,
            Season::Spring | Season::Autumn => 0.0,
            Season::Summer => 23.44,
        }
    }
}

/// Synthetic clear-sky irradiation (kW/m2, hourly): solar elevation from
/// latitude and mid-season declination, scaled by a 0.75 clear-sky factor on
/// a 1 kW/m2 extraterrestrial constant. Polar night yields all zeros. This is
/// generator output, not measured weather.
pub fn synthetic_irradiation(latitude_deg: f64, season: Season, horizon: usize) -> Vec<f64> {
    let phi = latitude_deg.to_radians();
    let delta = season.declination_deg().to_radians();
    let clear_sky = 0.75;
    (0..horizon)
        .map(|t| {
            let hour = (t % 24) as f64 + 0.5;
            let omega = ((hour - 12.0) * 15.0).to_radians();
            let sin_elev =
                phi.sin() * delta.sin() + phi.cos() * delta.cos() * omega.cos();
            (clear_sky * sin_elev).max(0.0)
        })
        .collect()
}

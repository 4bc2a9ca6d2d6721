//! Solar-ORC microgrid scheduling and community peer-to-peer trade clearing.
//!
//! The crate implements a two-stage bottom-up optimization: each prosumer's
//! solar organic Rankine cycle, battery and grid connection are scheduled by a
//! weekly MILP ([`sorc`]), and the resulting per-hour surplus/need signals are
//! cleared across the community by a transportation LP with the grid as
//! virtual counterparty ([`tet`]). Sensitivity sweeps over fluids, plant
//! sizes, collectors and weather live in [`sweeps`]. All solves run on the
//! in-tree [`milp_core`] engine.
//!
//! Per-prosumer solves, per-step clearing blocks and sweep variants are
//! independent; with the default `parallel` feature they fan out through
//! rayon (see [`exec::ExecMode`]), and a sequential fallback is always
//! available.

pub mod domain;
pub mod exec;
pub mod sorc;
pub mod sweeps;
pub mod tet;

#[doc(hidden)]
pub mod testutil;

pub use domain::{
    builtin_catalog, enthalpy_drops, validate_network, validate_scenario, BatterySpec, Catalog,
    CollectorSpec, CollectorTechnology, FieldViolation, FluidProperties, GridTariff,
    MicrogridScenario, OrcSpec, TimeGrid, TradeNetwork,
};
pub use exec::ExecMode;
pub use milp_core::MilpLimits;
pub use sorc::{
    build_sorc_model, mass_flow_report, schedule_cost, solve_sorc, verify_schedule,
    DegradationMode, SorcError, SorcSchedule, SorcStep, SorcVariableMap,
};
pub use sweeps::{
    compare_locations, run_sweep, synthetic_irradiation, Metric, Season, SweepAxis, SweepSpec,
    SweepTable, WeatherSeries,
};
pub use tet::{
    build_tet_model, grid_only_cost, run_pipeline, solve_tet, ImbalanceSet, KpiReport,
    PipelineResult, ProsumerKpi, TetError, TradeClearing,
};

//! Scenario-file ingestion and result export.
//!
//! Scenario documents are JSON (schema version 1) with optional CSV sidecars
//! for long series. Loading resolves catalog references, joins CSV columns by
//! hour index, validates every domain invariant, and produces a canonical
//! serialization whose SHA-256 is the input digest carried by every result
//! bundle. Exports are deterministic: stable row order, numbers with 9
//! significant digits, LF line endings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use sorc_core::sweeps::{LocationRow, SweepRow};
use sorc_core::{
    builtin_catalog, validate_network, validate_scenario, CollectorSpec, FluidProperties,
    GridTariff, KpiReport, Metric, MicrogridScenario, OrcSpec, SorcSchedule, SweepAxis,
    SweepSpec, SweepTable, TimeGrid, TradeClearing, TradeNetwork, WeatherSeries,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {detail}")]
    Schema { path: PathBuf, detail: String },

    #[error("{path}: unsupported version {got} (this tool reads version {SCHEMA_VERSION})")]
    UnsupportedVersion { path: PathBuf, got: u32 },

    #[error("{path}: {detail}")]
    Csv { path: PathBuf, detail: String },

    #[error("{path}: validation failed: {}", violations.join("; "))]
    Validation {
        path: PathBuf,
        violations: Vec<String>,
    },

    #[error("{path}: {detail}")]
    Semantics { path: PathBuf, detail: String },
}

// ---------------------------------------------------------------------------
// Document model (schema v1)
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFileDoc {
    version: u32,
    #[serde(default)]
    currency: Option<String>,
    #[serde(default)]
    scenario: Option<ScenarioDoc>,
    #[serde(default)]
    scenarios: Option<Vec<ScenarioDoc>>,
    #[serde(default)]
    network: Option<NetworkDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    id: String,
    time: TimeGrid,
    fluid: FluidRef,
    collector: CollectorSpec,
    orc: OrcSpec,
    battery: sorc_core::BatterySpec,
    tariff: TariffDoc,
    demand: SeriesSource,
    irradiation: SeriesSource,
    production_cost: f64,
}

/// Catalog name or a full fluid definition.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FluidRef {
    Name(String),
    Full(FluidProperties),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TariffDoc {
    g_min: f64,
    g_max: f64,
    price_buy: SeriesSource,
    price_sell: SeriesSource,
}

/// A per-step series: a scalar (broadcast over the horizon), an inline array,
/// or a CSV sidecar reference joined by the hour index.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum SeriesSource {
    Scalar(f64),
    Inline(Vec<f64>),
    Csv(CsvRef),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CsvRef {
    csv: String,
    column: String,
}

/// Network: either the compact defaults-plus-overrides form or the full
/// matrix form produced by the canonical writer.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NetworkDoc {
    Full(TradeNetwork),
    Compact(CompactNetworkDoc),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompactNetworkDoc {
    /// Defaults to the scenario ids in file order.
    #[serde(default)]
    participants: Option<Vec<String>>,
    transmission_cost: SeriesSource,
    grid_buy_cost: SeriesSource,
    grid_sell_cost: SeriesSource,
    /// Per-ordered-pair overrides.
    #[serde(default)]
    pairs: Vec<PairDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    from: String,
    to: String,
    #[serde(default)]
    f_min: Option<f64>,
    #[serde(default)]
    f_max: Option<f64>,
    #[serde(default)]
    transmission_cost: Option<f64>,
}

// ---------------------------------------------------------------------------
// Loaded form
// ---------------------------------------------------------------------------

/// Fully resolved and validated content of one scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedFile {
    pub currency: Option<String>,
    pub scenarios: Vec<MicrogridScenario>,
    pub network: Option<TradeNetwork>,
    /// True when the document used the singular `scenario` key.
    pub single: bool,
}

/// Canonical on-disk form: every reference resolved, every series inline.
#[derive(Serialize)]
struct CanonicalFile<'a> {
    version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    currency: &'a Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<&'a MicrogridScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenarios: Option<&'a [MicrogridScenario]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    network: &'a Option<TradeNetwork>,
}

impl LoadedFile {
    /// Canonical serialization: loading this text again reproduces the same
    /// canonical text byte for byte.
    pub fn canonical_json(&self) -> String {
        let doc = CanonicalFile {
            version: SCHEMA_VERSION,
            currency: &self.currency,
            scenario: if self.single {
                Some(&self.scenarios[0])
            } else {
                None
            },
            scenarios: if self.single {
                None
            } else {
                Some(&self.scenarios)
            },
            network: &self.network,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("canonical serialization");
        text.push('\n');
        text
    }

    /// SHA-256 of the canonical serialization, hex-encoded.
    pub fn input_digest(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        let mut out = String::with_capacity(64);
        for byte in digest {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_doc<'de, T: Deserialize<'de>>(
    text: &'de str,
    path: &Path,
) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let pointer = e.path().to_string();
        IoError::Schema {
            path: path.to_path_buf(),
            detail: if pointer == "." {
                e.inner().to_string()
            } else {
                format!("at {pointer}: {}", e.inner())
            },
        }
    })
}

/// Loads, resolves and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<LoadedFile, IoError> {
    let text = read_to_string(path)?;
    let doc: ScenarioFileDoc = parse_doc(&text, path)?;
    if doc.version != SCHEMA_VERSION {
        return Err(IoError::UnsupportedVersion {
            path: path.to_path_buf(),
            got: doc.version,
        });
    }
    let base_dir = path.parent().unwrap_or(Path::new("."));

    let (docs, single) = match (doc.scenario, doc.scenarios) {
        (Some(one), None) => (vec![one], true),
        (None, Some(many)) if !many.is_empty() => (many, false),
        (None, Some(_)) => {
            return Err(IoError::Semantics {
                path: path.to_path_buf(),
                detail: "'scenarios' must not be empty".into(),
            })
        }
        (Some(_), Some(_)) => {
            return Err(IoError::Semantics {
                path: path.to_path_buf(),
                detail: "give either 'scenario' or 'scenarios', not both".into(),
            })
        }
        (None, None) => {
            return Err(IoError::Semantics {
                path: path.to_path_buf(),
                detail: "missing 'scenario' (or 'scenarios')".into(),
            })
        }
    };

    let catalog = builtin_catalog();
    let mut scenarios = Vec::with_capacity(docs.len());
    for sd in docs {
        let horizon = sd.time.horizon;
        let fluid = match sd.fluid {
            FluidRef::Full(f) => f,
            FluidRef::Name(name) => catalog
                .fluid(&name)
                .cloned()
                .ok_or_else(|| IoError::Semantics {
                    path: path.to_path_buf(),
                    detail: format!(
                        "unknown catalog fluid '{name}' (known: {})",
                        catalog
                            .fluids
                            .iter()
                            .map(|f| f.name.as_str())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                })?,
        };
        let scenario = MicrogridScenario {
            id: sd.id,
            time: sd.time,
            fluid,
            collector: sd.collector,
            orc: sd.orc,
            battery: sd.battery,
            tariff: GridTariff {
                g_min: sd.tariff.g_min,
                g_max: sd.tariff.g_max,
                price_buy: resolve_series(sd.tariff.price_buy, horizon, base_dir)?,
                price_sell: resolve_series(sd.tariff.price_sell, horizon, base_dir)?,
            },
            demand: resolve_series(sd.demand, horizon, base_dir)?,
            irradiation: resolve_series(sd.irradiation, horizon, base_dir)?,
            production_cost: sd.production_cost,
        };
        let scenario = validate_scenario(scenario).map_err(|violations| IoError::Validation {
            path: path.to_path_buf(),
            violations: violations.iter().map(|v| v.to_string()).collect(),
        })?;
        scenarios.push(scenario);
    }

    for (i, s) in scenarios.iter().enumerate() {
        if scenarios[..i].iter().any(|other| other.id == s.id) {
            return Err(IoError::Semantics {
                path: path.to_path_buf(),
                detail: format!("duplicate scenario id '{}'", s.id),
            });
        }
    }

    let horizon = scenarios[0].time.horizon;
    let ids: Vec<String> = scenarios.iter().map(|s| s.id.clone()).collect();
    let network = match doc.network {
        None => None,
        Some(NetworkDoc::Full(net)) => Some(net),
        Some(NetworkDoc::Compact(c)) => Some(build_network(c, &ids, horizon, base_dir, path)?),
    };
    if let Some(net) = &network {
        validate_network(net, horizon).map_err(|violations| IoError::Validation {
            path: path.to_path_buf(),
            violations: violations.iter().map(|v| v.to_string()).collect(),
        })?;
    }

    Ok(LoadedFile {
        currency: doc.currency,
        scenarios,
        network,
        single,
    })
}

fn build_network(
    c: CompactNetworkDoc,
    scenario_ids: &[String],
    horizon: usize,
    base_dir: &Path,
    path: &Path,
) -> Result<TradeNetwork, IoError> {
    let participants = c.participants.unwrap_or_else(|| scenario_ids.to_vec());
    let n = participants.len();
    let transmission = resolve_series(c.transmission_cost, horizon, base_dir)?;
    let buy = resolve_series(c.grid_buy_cost, horizon, base_dir)?;
    let sell = resolve_series(c.grid_sell_cost, horizon, base_dir)?;
    let mut net = TradeNetwork {
        participants: participants.clone(),
        f_min: vec![vec![0.0; n]; n],
        f_max: vec![vec![f64::INFINITY; n]; n],
        transmission_cost: vec![vec![transmission.clone(); n]; n],
        grid_buy_cost: vec![buy; n],
        grid_sell_cost: vec![sell; n],
    };
    for pair in c.pairs {
        let find = |id: &str| {
            participants
                .iter()
                .position(|p| p == id)
                .ok_or_else(|| IoError::Semantics {
                    path: path.to_path_buf(),
                    detail: format!("pair references unknown participant '{id}'"),
                })
        };
        let i = find(&pair.from)?;
        let j = find(&pair.to)?;
        if i == j {
            return Err(IoError::Semantics {
                path: path.to_path_buf(),
                detail: format!("self-arc '{}' -> '{}' is not allowed", pair.from, pair.to),
            });
        }
        if let Some(v) = pair.f_min {
            net.f_min[i][j] = v;
        }
        if let Some(v) = pair.f_max {
            net.f_max[i][j] = v;
        }
        if let Some(v) = pair.transmission_cost {
            net.transmission_cost[i][j] = vec![v; horizon];
        }
    }
    Ok(net)
}

fn resolve_series(
    source: SeriesSource,
    horizon: usize,
    base_dir: &Path,
) -> Result<Vec<f64>, IoError> {
    match source {
        SeriesSource::Scalar(v) => Ok(vec![v; horizon]),
        SeriesSource::Inline(values) => Ok(values),
        SeriesSource::Csv(r) => read_csv_column(&base_dir.join(&r.csv), &r.column, horizon),
    }
}

/// Reads one named column from a CSV sidecar. The file must carry a header
/// with a `step` column counting 0..horizon-1 in order; violations report
/// 1-based line numbers.
pub fn read_csv_column(path: &Path, column: &str, horizon: usize) -> Result<Vec<f64>, IoError> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            detail: format!("cannot read header: {e}"),
        })?
        .clone();
    let step_at = headers
        .iter()
        .position(|h| h == "step")
        .ok_or_else(|| IoError::Csv {
            path: path.to_path_buf(),
            detail: "missing 'step' column".into(),
        })?;
    let value_at = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| IoError::Csv {
            path: path.to_path_buf(),
            detail: format!("missing '{column}' column (found: {})", headers.iter().collect::<Vec<_>>().join(", ")),
        })?;

    let mut values = Vec::with_capacity(horizon);
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // 1-based, after the header
        let record = record.map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            detail: format!("line {line}: {e}"),
        })?;
        let step: usize = record
            .get(step_at)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| IoError::Csv {
                path: path.to_path_buf(),
                detail: format!("line {line}: step must be an integer"),
            })?;
        if step != idx {
            return Err(IoError::Csv {
                path: path.to_path_buf(),
                detail: format!("line {line}: step {step} out of order (expected {idx})"),
            });
        }
        let value: f64 = record
            .get(value_at)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| IoError::Csv {
                path: path.to_path_buf(),
                detail: format!("line {line}: '{column}' must be a number"),
            })?;
        values.push(value);
    }
    if values.len() != horizon {
        return Err(IoError::Csv {
            path: path.to_path_buf(),
            detail: format!("{} data rows, horizon needs {horizon}", values.len()),
        });
    }
    Ok(values)
}

// ---------------------------------------------------------------------------
// Sweep specification file
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFileDoc {
    version: u32,
    base: BaseRef,
    axis: AxisDoc,
    #[serde(default)]
    outputs: Option<Vec<Metric>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum BaseRef {
    Path { path: String },
    Inline(Box<ScenarioDoc>),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum AxisDoc {
    Fluid(Vec<FluidRef>),
    Size(Vec<f64>),
    Collector(Vec<CollectorRef>),
    Weather(Vec<WeatherDoc>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum CollectorRef {
    Technology(String),
    Full(CollectorSpec),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeatherDoc {
    label: String,
    irradiation: SeriesSource,
}

/// Loads a sweep-specification file (axis variants over a base scenario).
pub fn load_sweepspec(path: &Path) -> Result<SweepSpec, IoError> {
    let text = read_to_string(path)?;
    let doc: SweepFileDoc = parse_doc(&text, path)?;
    if doc.version != SCHEMA_VERSION {
        return Err(IoError::UnsupportedVersion {
            path: path.to_path_buf(),
            got: doc.version,
        });
    }
    let base_dir = path.parent().unwrap_or(Path::new("."));

    let base = match doc.base {
        BaseRef::Path { path: rel } => {
            let loaded = load_scenario(&base_dir.join(rel))?;
            if loaded.scenarios.len() != 1 {
                return Err(IoError::Semantics {
                    path: path.to_path_buf(),
                    detail: "sweep base file must hold exactly one scenario".into(),
                });
            }
            loaded.scenarios.into_iter().next().unwrap()
        }
        BaseRef::Inline(sd) => {
            // Reuse the scenario loader by wrapping the doc: simplest is to
            // resolve inline here with the same helpers.
            resolve_inline_scenario(*sd, base_dir, path)?
        }
    };

    let catalog = builtin_catalog();
    let horizon = base.time.horizon;
    let axis = match doc.axis {
        AxisDoc::Size(sizes) => SweepAxis::Size(sizes),
        AxisDoc::Fluid(refs) => {
            let mut fluids = Vec::with_capacity(refs.len());
            for r in refs {
                fluids.push(match r {
                    FluidRef::Full(f) => f,
                    FluidRef::Name(name) => {
                        catalog
                            .fluid(&name)
                            .cloned()
                            .ok_or_else(|| IoError::Semantics {
                                path: path.to_path_buf(),
                                detail: format!("unknown catalog fluid '{name}'"),
                            })?
                    }
                });
            }
            SweepAxis::Fluid(fluids)
        }
        AxisDoc::Collector(refs) => {
            let mut specs = Vec::with_capacity(refs.len());
            for r in refs {
                specs.push(match r {
                    CollectorRef::Full(c) => c,
                    CollectorRef::Technology(name) => {
                        let tech = parse_technology(&name).ok_or_else(|| IoError::Semantics {
                            path: path.to_path_buf(),
                            detail: format!("unknown collector technology '{name}'"),
                        })?;
                        catalog
                            .collector(tech)
                            .cloned()
                            .ok_or_else(|| IoError::Semantics {
                                path: path.to_path_buf(),
                                detail: format!("no catalog entry for '{name}'"),
                            })?
                    }
                });
            }
            SweepAxis::Collector(specs)
        }
        AxisDoc::Weather(docs) => {
            let mut series = Vec::with_capacity(docs.len());
            for w in docs {
                series.push(WeatherSeries {
                    label: w.label,
                    irradiation: resolve_series(w.irradiation, horizon, base_dir)?,
                });
            }
            SweepAxis::Weather(series)
        }
    };

    let outputs = doc.outputs.unwrap_or_else(|| default_outputs(&axis));
    Ok(SweepSpec {
        base,
        axis,
        outputs,
    })
}

fn parse_technology(name: &str) -> Option<sorc_core::CollectorTechnology> {
    use sorc_core::CollectorTechnology::*;
    match name {
        "FPC" => Some(FPC),
        "ETC" => Some(ETC),
        "CPC" => Some(CPC),
        "PTC" => Some(PTC),
        "LFR" => Some(LFR),
        "Custom" => Some(Custom),
        _ => None,
    }
}

fn default_outputs(axis: &SweepAxis) -> Vec<Metric> {
    match axis {
        SweepAxis::Fluid(_) => vec![Metric::PeakMassFlow, Metric::Objective],
        SweepAxis::Size(_) => vec![Metric::Objective, Metric::GridImportTotal],
        SweepAxis::Collector(_) => vec![Metric::RequiredSizingArea, Metric::Objective],
        SweepAxis::Weather(_) => vec![Metric::Objective, Metric::GridImportTotal],
    }
}

fn resolve_inline_scenario(
    sd: ScenarioDoc,
    base_dir: &Path,
    path: &Path,
) -> Result<MicrogridScenario, IoError> {
    let catalog = builtin_catalog();
    let horizon = sd.time.horizon;
    let fluid = match sd.fluid {
        FluidRef::Full(f) => f,
        FluidRef::Name(name) => catalog
            .fluid(&name)
            .cloned()
            .ok_or_else(|| IoError::Semantics {
                path: path.to_path_buf(),
                detail: format!("unknown catalog fluid '{name}'"),
            })?,
    };
    let scenario = MicrogridScenario {
        id: sd.id,
        time: sd.time,
        fluid,
        collector: sd.collector,
        orc: sd.orc,
        battery: sd.battery,
        tariff: GridTariff {
            g_min: sd.tariff.g_min,
            g_max: sd.tariff.g_max,
            price_buy: resolve_series(sd.tariff.price_buy, horizon, base_dir)?,
            price_sell: resolve_series(sd.tariff.price_sell, horizon, base_dir)?,
        },
        demand: resolve_series(sd.demand, horizon, base_dir)?,
        irradiation: resolve_series(sd.irradiation, horizon, base_dir)?,
        production_cost: sd.production_cost,
    };
    validate_scenario(scenario).map_err(|violations| IoError::Validation {
        path: path.to_path_buf(),
        violations: violations.iter().map(|v| v.to_string()).collect(),
    })
}

// ---------------------------------------------------------------------------
// Result bundle and export
// ---------------------------------------------------------------------------

/// Everything a run produced, self-describing and re-derivable.
#[derive(Debug, Clone, Serialize)]
pub struct ResultBundle {
    pub tool_version: String,
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub currency: Option<String>,
    pub schedules: Vec<SorcSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clearing: Option<TradeClearing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kpi: Option<KpiReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepExport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub locations: Option<Vec<LocationRow>>,
    pub stats: SolveStats,
    /// Wall time is reported on stderr only; exported files must be
    /// byte-identical across reruns.
    #[serde(skip)]
    pub wall: Option<std::time::Duration>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub iterations: u64,
}

/// Sweep table plus the labels of the axis it ran over.
#[derive(Debug, Clone, Serialize)]
pub struct SweepExport {
    pub axis: String,
    pub metrics: Vec<Metric>,
    pub rows: Vec<SweepRow>,
}

impl ResultBundle {
    pub fn new(input_digest: String, currency: Option<String>) -> Self {
        ResultBundle {
            tool_version: TOOL_VERSION.to_string(),
            input_digest,
            currency,
            schedules: Vec::new(),
            clearing: None,
            kpi: None,
            sweep: None,
            locations: None,
            stats: SolveStats::default(),
            wall: None,
        }
    }

    pub fn collect_stats(&mut self) {
        self.stats = SolveStats {
            nodes: self.schedules.iter().map(|s| s.nodes).sum(),
            iterations: self.schedules.iter().map(|s| s.iterations).sum(),
        };
    }
}

/// 9 significant digits, deterministic.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.8e}")
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, IoError> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|source| IoError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

const SCHEDULE_HEADER: &str =
    "step,x_kw,z_kw,g_kw,q_solar_kw,q_in_kw,m_kg_s,soc_kwh,charge_kwh,discharge_kwh,e_in_kwh,e_out_kwh";

fn schedule_csv(sched: &SorcSchedule) -> String {
    let mut out = String::new();
    out.push_str(SCHEDULE_HEADER);
    out.push('\n');
    for (t, st) in sched.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "{t},{},{},{},{},{},{},{},{},{},{},{}",
            fmt9(st.production_kw),
            fmt9(st.pump_kw),
            fmt9(st.net_grid_kw),
            fmt9(st.solar_thermal_kw),
            fmt9(st.hx_thermal_kw),
            fmt9(st.mass_flow_kg_s),
            fmt9(st.soc_kwh),
            fmt9(st.charge_kwh),
            fmt9(st.discharge_kwh),
            fmt9(st.grid_import_kwh),
            fmt9(st.grid_export_kwh),
        );
    }
    out
}

fn trades_csv(clearing: &TradeClearing, net: &TradeNetwork) -> String {
    let mut out = String::from("step,seller,buyer,kwh,cost\n");
    let n = clearing.participants.len();
    for (t, flux) in clearing.flux.iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let kwh = flux[i][j];
                if kwh > 1e-12 {
                    let cost = net.transmission_cost[i][j][t] * kwh;
                    let _ = writeln!(
                        out,
                        "{t},{},{},{},{}",
                        clearing.participants[i],
                        clearing.participants[j],
                        fmt9(kwh),
                        fmt9(cost)
                    );
                }
            }
        }
        for i in 0..n {
            let kwh = clearing.grid_sales[t][i];
            if kwh > 1e-12 {
                let cost = net.grid_sell_cost[i][t] * kwh;
                let _ = writeln!(
                    out,
                    "{t},{},grid,{},{}",
                    clearing.participants[i],
                    fmt9(kwh),
                    fmt9(cost)
                );
            }
        }
        for j in 0..n {
            let kwh = clearing.grid_purchases[t][j];
            if kwh > 1e-12 {
                let cost = net.grid_buy_cost[j][t] * kwh;
                let _ = writeln!(
                    out,
                    "{t},grid,{},{},{}",
                    clearing.participants[j],
                    fmt9(kwh),
                    fmt9(cost)
                );
            }
        }
    }
    out
}

/// Writes the bundle into `dir`: schedule CSVs, trades.csv, kpi.json and the
/// per-figure plot-data CSVs that apply to what the bundle contains. Returns
/// the written paths in a deterministic order.
pub fn export_results(
    bundle: &ResultBundle,
    net: Option<&TradeNetwork>,
    dir: &Path,
) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    match bundle.schedules.len() {
        0 => {}
        1 => {
            written.push(write_file(dir, "schedule.csv", &schedule_csv(&bundle.schedules[0]))?);
        }
        _ => {
            for sched in &bundle.schedules {
                let name = format!("schedule_{}.csv", sanitize(&sched.id));
                written.push(write_file(dir, &name, &schedule_csv(sched))?);
            }
        }
    }

    if let (Some(clearing), Some(net)) = (&bundle.clearing, net) {
        written.push(write_file(dir, "trades.csv", &trades_csv(clearing, net))?);
    }

    // kpi.json: per-run summary, deterministic (no wall time).
    #[derive(Serialize)]
    struct KpiFile<'a> {
        tool_version: &'a str,
        input_digest: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        currency: &'a Option<String>,
        stats: &'a SolveStats,
        per_prosumer_cost: BTreeMap<&'a str, f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        kpi: &'a Option<KpiReport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        sweep: &'a Option<SweepExport>,
        #[serde(skip_serializing_if = "Option::is_none")]
        locations: &'a Option<Vec<LocationRow>>,
    }
    let kpi_file = KpiFile {
        tool_version: &bundle.tool_version,
        input_digest: &bundle.input_digest,
        currency: &bundle.currency,
        stats: &bundle.stats,
        per_prosumer_cost: bundle
            .schedules
            .iter()
            .map(|s| (s.id.as_str(), s.total_cost))
            .collect(),
        kpi: &bundle.kpi,
        sweep: &bundle.sweep,
        locations: &bundle.locations,
    };
    let mut kpi_text =
        serde_json::to_string_pretty(&kpi_file).expect("kpi serialization");
    kpi_text.push('\n');
    written.push(write_file(dir, "kpi.json", &kpi_text)?);

    // Figure plot data recomputable from the bundle contents.
    if let Some(sched) = bundle.schedules.first() {
        let mut prod = String::from("step,x_kw,e_in_kwh\n");
        let mut batt = String::from("step,charge_kwh,discharge_kwh\n");
        for (t, st) in sched.steps.iter().enumerate() {
            let _ = writeln!(prod, "{t},{},{}", fmt9(st.production_kw), fmt9(st.grid_import_kwh));
            let _ = writeln!(batt, "{t},{},{}", fmt9(st.charge_kwh), fmt9(st.discharge_kwh));
        }
        written.push(write_file(dir, "plot_production_vs_grid.csv", &prod)?);
        written.push(write_file(dir, "plot_battery.csv", &batt)?);
    }

    if let Some(sweep) = &bundle.sweep {
        let (file, value_header, metric) = match sweep.axis.as_str() {
            "fluid" => ("plot_fluid_mass_flow.csv", "peak_mass_flow_kg_s", Metric::PeakMassFlow),
            "size" => ("plot_size_objective.csv", "objective", Metric::Objective),
            "collector" => (
                "plot_collector_sizing.csv",
                "required_area_m2",
                Metric::RequiredSizingArea,
            ),
            _ => ("plot_weather_objective.csv", "objective", Metric::Objective),
        };
        if let Some(col) = sweep.metrics.iter().position(|&m| m == metric) {
            let mut out = format!("label,{value_header}\n");
            for row in &sweep.rows {
                match &row.values {
                    Ok(values) => {
                        let _ = writeln!(out, "{},{}", row.label, fmt9(values[col]));
                    }
                    Err(err) => {
                        let _ = writeln!(out, "{},error: {}", row.label, err.replace(',', ";"));
                    }
                }
            }
            written.push(write_file(dir, file, &out)?);
        }
    }

    if let Some(rows) = &bundle.locations {
        let mut out = String::from("label,objective,savings_vs_grid_only\n");
        for row in rows {
            let _ = writeln!(
                out,
                "{},{},{}",
                row.label,
                fmt9(row.objective),
                fmt9(row.savings_vs_grid_only)
            );
        }
        written.push(write_file(dir, "plot_location_objective.csv", &out)?);
    }

    Ok(written)
}

/// Attaches a sweep table to the export form.
pub fn sweep_export(axis: &SweepAxis, table: SweepTable) -> SweepExport {
    let axis_name = match axis {
        SweepAxis::Fluid(_) => "fluid",
        SweepAxis::Size(_) => "size",
        SweepAxis::Collector(_) => "collector",
        SweepAxis::Weather(_) => "weather",
    };
    SweepExport {
        axis: axis_name.to_string(),
        metrics: table.metrics,
        rows: table.rows,
    }
}

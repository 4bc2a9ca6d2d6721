//! Command-line surface.
//!
//! Exit codes: 0 success, 1 input/usage error, 2 infeasible model, 3 solver
//! limit reached before proving optimality.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use milp_core::{write_mps, MilpLimits};
use sorc_core::{
    build_sorc_model, build_tet_model, builtin_catalog, run_pipeline, run_sweep, solve_sorc,
    DegradationMode, ExecMode, ImbalanceSet, SorcError, SweepAxis, TetError,
};

use crate::io::{
    export_results, fmt9, load_scenario, load_sweepspec, sweep_export, IoError, ResultBundle,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Parser)]
#[command(
    name = "sorc",
    version,
    about = "Solar-ORC microgrid scheduling and community peer-to-peer trade clearing",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one prosumer's weekly schedule.
    SolveSorc(SolveSorcArgs),
    /// Solve every prosumer, then clear the community trades.
    SolveCommunity(SolveCommunityArgs),
    /// Run a sensitivity sweep from a sweep-specification file.
    Sweep(SweepArgs),
    /// Write the scheduling or trading model as free-format MPS.
    ExportMps(ExportMpsArgs),
    /// Print the built-in fluid, collector and plant-size catalog.
    Catalog,
}

#[derive(Args)]
struct SolveSorcArgs {
    /// Scenario file (JSON, schema version 1).
    scenario: PathBuf,
    /// Directory for result files; omit to print a summary only.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the literal degradation rows (d_t relaxes the capacity bound).
    #[arg(long)]
    paper_literal_degradation: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct SolveCommunityArgs {
    /// Scenario file holding `scenarios` and a `network`.
    scenario: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paper_literal_degradation: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep-specification file (JSON, schema version 1).
    sweepspec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paper_literal_degradation: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct ExportMpsArgs {
    scenario: PathBuf,
    /// Which stage's model to export.
    #[arg(long, value_enum, default_value_t = Stage::Sorc)]
    stage: Stage,
    /// Output file; omit for stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paper_literal_degradation: bool,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Stage {
    Sorc,
    Tet,
}

#[derive(Args)]
struct LimitArgs {
    /// Branch-and-bound node limit.
    #[arg(long, default_value_t = 1_000_000)]
    max_nodes: u64,
    /// Wall-clock limit in seconds (off by default).
    #[arg(long)]
    time_limit_secs: Option<f64>,
}

impl LimitArgs {
    fn to_limits(&self) -> MilpLimits {
        MilpLimits {
            max_nodes: self.max_nodes,
            time: self.time_limit_secs.map(Duration::from_secs_f64),
            ..MilpLimits::default()
        }
    }
}

enum CliError {
    Input(String),
    Infeasible(String),
    Limit(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Limit(_) => EXIT_LIMIT,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Infeasible(m) | CliError::Limit(m) => m,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<SorcError> for CliError {
    fn from(e: SorcError) -> Self {
        match e {
            SorcError::InfeasibleByConstruction { .. } | SorcError::Infeasible { .. } => {
                CliError::Infeasible(e.to_string())
            }
            SorcError::GapLimit { .. } => CliError::Limit(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<TetError> for CliError {
    fn from(e: TetError) -> Self {
        match e {
            TetError::Stage1 { ref source, .. } => match source {
                SorcError::InfeasibleByConstruction { .. } | SorcError::Infeasible { .. } => {
                    CliError::Infeasible(e.to_string())
                }
                SorcError::GapLimit { .. } => CliError::Limit(e.to_string()),
                _ => CliError::Input(e.to_string()),
            },
            TetError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<milp_core::MilpError> for CliError {
    fn from(e: milp_core::MilpError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn degradation_mode(paper_literal: bool) -> DegradationMode {
    if paper_literal {
        DegradationMode::PaperLiteral
    } else {
        DegradationMode::RemainingCapacity
    }
}

/// Parses `argv` and runs the requested command, returning the process exit
/// code.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders --help/--version as "errors" with success status.
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::SolveSorc(args) => cmd_solve_sorc(args),
        Command::SolveCommunity(args) => cmd_solve_community(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ExportMps(args) => cmd_export_mps(args),
        Command::Catalog => cmd_catalog(),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn cmd_solve_sorc(args: SolveSorcArgs) -> Result<(), CliError> {
    let loaded = load_scenario(&args.scenario)?;
    if loaded.scenarios.len() != 1 {
        return Err(CliError::Input(format!(
            "solve-sorc expects one scenario, file holds {} (use solve-community)",
            loaded.scenarios.len()
        )));
    }
    let scenario = &loaded.scenarios[0];
    let mode = degradation_mode(args.paper_literal_degradation);
    let limits = args.limits.to_limits();

    let started = Instant::now();
    let sched = solve_sorc(scenario, mode, &limits)?;
    let wall = started.elapsed();

    println!("prosumer {}: total cost {}", sched.id, fmt9(sched.total_cost));
    println!(
        "  grid import {} kWh, export {} kWh, battery throughput {} kWh",
        fmt9(sched.grid_import_total()),
        fmt9(sched.grid_export_total()),
        fmt9(sched.battery_throughput())
    );
    println!(
        "  peak mass flow {} kg/s over {} steps",
        fmt9(sched.peak_mass_flow()),
        sched.horizon()
    );
    eprintln!(
        "solved in {wall:.2?} ({} nodes, {} simplex iterations)",
        sched.nodes, sched.iterations
    );

    if let Some(dir) = args.out {
        let mut bundle = ResultBundle::new(loaded.input_digest(), loaded.currency.clone());
        bundle.schedules.push(sched);
        bundle.collect_stats();
        bundle.wall = Some(wall);
        let written = export_results(&bundle, loaded.network.as_ref(), &dir)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_solve_community(args: SolveCommunityArgs) -> Result<(), CliError> {
    let loaded = load_scenario(&args.scenario)?;
    let net = loaded.network.clone().ok_or_else(|| {
        CliError::Input("solve-community needs a 'network' section in the scenario file".into())
    })?;
    let mode = degradation_mode(args.paper_literal_degradation);
    let limits = args.limits.to_limits();

    let started = Instant::now();
    let result = run_pipeline(&loaded.scenarios, &net, mode, &limits, ExecMode::default())?;
    let wall = started.elapsed();

    println!("community of {} prosumers:", loaded.scenarios.len());
    for kpi in &result.kpi.per_prosumer {
        println!("  {}: scheduling cost {}", kpi.id, fmt9(kpi.sorc_cost));
    }
    println!("  trading cost {}", fmt9(result.kpi.trading_cost));
    println!(
        "  grid-only trading baseline {} (savings {})",
        fmt9(result.kpi.baseline_grid_only_trading),
        fmt9(result.kpi.savings_vs_grid_only)
    );
    println!(
        "  no-plant baseline {} vs total {} (savings {})",
        fmt9(result.kpi.baseline_no_orc),
        fmt9(result.kpi.total_cost),
        fmt9(result.kpi.savings_vs_no_orc)
    );
    eprintln!("pipeline finished in {wall:.2?}");

    if let Some(dir) = args.out {
        let mut bundle = ResultBundle::new(loaded.input_digest(), loaded.currency.clone());
        bundle.schedules = result.schedules;
        bundle.clearing = Some(result.clearing);
        bundle.kpi = Some(result.kpi);
        bundle.collect_stats();
        bundle.wall = Some(wall);
        let written = export_results(&bundle, Some(&net), &dir)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let spec = load_sweepspec(&args.sweepspec)?;
    let mode = degradation_mode(args.paper_literal_degradation);
    let limits = args.limits.to_limits();

    let started = Instant::now();
    let table = run_sweep(&spec, mode, &limits, ExecMode::default())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let wall = started.elapsed();

    let metric_names: Vec<String> = table
        .metrics
        .iter()
        .map(|m| format!("{m:?}"))
        .collect();
    println!("variant,{}", metric_names.join(","));
    for row in &table.rows {
        match &row.values {
            Ok(values) => {
                let rendered: Vec<String> = values.iter().map(|&v| fmt9(v)).collect();
                println!("{},{}", row.label, rendered.join(","));
            }
            Err(e) => println!("{},error: {}", row.label, e.replace(',', ";")),
        }
    }
    eprintln!("{} variants in {wall:.2?}", table.rows.len());

    if let Some(dir) = args.out {
        // The sweep file's digest stands in for the resolved inputs.
        let text = std::fs::read_to_string(&args.sweepspec).map_err(|source| IoError::Read {
            path: args.sweepspec.clone(),
            source,
        })?;
        let digest = {
            use sha2::{Digest, Sha256};
            let d = Sha256::digest(text.as_bytes());
            d.iter().map(|b| format!("{b:02x}")).collect::<String>()
        };
        let mut bundle = ResultBundle::new(digest, None);
        bundle.sweep = Some(sweep_export(&spec.axis, table));
        bundle.wall = Some(wall);
        if let SweepAxis::Weather(series) = &spec.axis {
            let rows = sorc_core::compare_locations(
                &spec.base,
                series,
                mode,
                &limits,
                ExecMode::default(),
            )
            .map_err(|e| CliError::Input(e.to_string()))?;
            bundle.locations = Some(rows);
        }
        let written = export_results(&bundle, None, &dir)?;
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn cmd_export_mps(args: ExportMpsArgs) -> Result<(), CliError> {
    let loaded = load_scenario(&args.scenario)?;
    let mode = degradation_mode(args.paper_literal_degradation);
    let text = match args.stage {
        Stage::Sorc => {
            if loaded.scenarios.len() != 1 {
                return Err(CliError::Input(
                    "export-mps --stage sorc expects a single-scenario file".into(),
                ));
            }
            let (model, _) = build_sorc_model(&loaded.scenarios[0], mode)?;
            write_mps(&model)?
        }
        Stage::Tet => {
            let net = loaded.network.clone().ok_or_else(|| {
                CliError::Input("export-mps --stage tet needs a 'network' section".into())
            })?;
            // Stage 1 produces the imbalance parameters the trading model
            // needs.
            let limits = args.limits.to_limits();
            let result = run_pipeline(
                &loaded.scenarios,
                &net,
                mode,
                &limits,
                ExecMode::default(),
            )?;
            let imb = ImbalanceSet::from_schedules(&result.schedules);
            let (model, _) = build_tet_model(&imb, &net)?;
            write_mps(&model)?
        }
    };
    match args.out {
        Some(path) => {
            std::fs::write(&path, &text).map_err(|source| IoError::Write {
                path: path.clone(),
                source,
            })?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_catalog() -> Result<(), CliError> {
    let cat = builtin_catalog();
    println!("Working fluids:");
    println!(
        "  {:<12} {:>9} {:>8} {:>7} {:>8} {:>12} {:>8} {:>8}",
        "name", "MW[kg/mol]", "Tc[C]", "Pc[MPa]", "Cp[J/kgC]", "rho[kg/m3]", "dhT[kJ]", "dhP[kJ]"
    );
    for f in &cat.fluids {
        println!(
            "  {:<12} {:>9} {:>8} {:>7} {:>8} {:>12} {:>8.3} {:>8.3}",
            f.name, f.molecular_weight, f.t_crit, f.p_crit, f.cp, f.density, f.dh_turbine, f.dh_pump
        );
    }
    println!("Solar collectors:");
    for c in &cat.collectors {
        println!("  {:<4} efficiency {:.2}", format!("{:?}", c.technology), c.efficiency);
    }
    println!("Plant sizes [kW]:");
    let sizes: Vec<String> = cat.sizes_kw.iter().map(|s| format!("{s}")).collect();
    println!("  {}", sizes.join(", "));
    Ok(())
}

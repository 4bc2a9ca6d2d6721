//! Library half of the command-line tool: file ingestion, result export and
//! the command dispatcher. The `sorc` binary is a thin wrapper around
//! [`cli_main`].

pub mod cli;
pub mod io;

pub use cli::{cli_main, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT, EXIT_OK};
pub use io::{
    export_results, load_scenario, load_sweepspec, read_csv_column, IoError, LoadedFile,
    ResultBundle, SCHEMA_VERSION, TOOL_VERSION,
};

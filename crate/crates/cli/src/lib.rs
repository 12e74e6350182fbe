//! Batch front-end: parameter documents in, CSV/JSON/SVG artifacts out.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;

pub use commands::{config_hash, dispatch, run_command, Outcome};
pub use config::{parse_config, Command, Params, RunConfig};
pub use error::{CliError, EXIT_NUMERICAL, EXIT_PASS, EXIT_VALIDATION, EXIT_VERDICT};

//! File formats and the command-line front end for the core crate:
//! JSON structure configs, CSV/JSON artifacts, and the subcommand dispatch.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_structure, SchemaError};
pub use run::{run, Cli};

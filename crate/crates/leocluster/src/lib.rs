//! Command-line front end for the leader–follower cluster toolkit: config
//! files, CSV output and a parallel Monte Carlo driver.

pub mod commands;
pub mod config;
pub mod csv;
pub mod driver;

pub use commands::{run, Command, ExperimentSpec, RunError, SweepRange};
pub use config::{load_config, parse_config, ConfigError};

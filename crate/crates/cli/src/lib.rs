//! Command-line front end for `stixel-core`: configuration, synthetic scenes,
//! timing and the `stixels` subcommands.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod fuzz;
pub mod pipeline;
pub mod synth;

pub use commands::{run, Cli, Command};
pub use config::{ParamFlags, RunConfig, CONFIG_KEYS};
pub use error::CliError;
pub use pipeline::{collect_inputs, estimate_files, Estimator, FrameInput};

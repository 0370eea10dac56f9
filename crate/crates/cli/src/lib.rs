//! Scene files and subcommands of the `sweepkit` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use config::{load_scene, LoadedScene, SceneConfig};
pub use error::CliError;

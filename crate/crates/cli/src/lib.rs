//! Command-line pipeline: corpus → labels → CNN → feature vectors →
//! similarity reports, clusters and patent maps, all as files in one
//! output directory.

pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod svg;

pub use config::PipelineConfig;
pub use error::{CliError, CliResult};
pub use manifest::RunManifest;
pub use pipeline::{Pipeline, Stage};

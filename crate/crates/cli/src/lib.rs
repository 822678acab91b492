//! Phase-by-phase thematic analysis runs: configuration, artifact layout,
//! manifests and fixture generation.

pub mod config;
pub mod fixtures;
pub mod manifest;
pub mod phases;

pub use config::{BackendMode, RunConfig};
pub use phases::{BackendChoice, Context, Phase};

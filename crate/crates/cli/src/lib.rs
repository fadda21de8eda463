//! Configuration loading, presets and run orchestration for the `arbcheck`
//! command-line tool.

pub mod app;
pub mod config;
pub mod presets;

//! Monte Carlo harness for the pointer-field collapse simulator: strict JSON
//! configuration, seeded path-parallel runs, statistics, and CSV/JSON/SVG
//! artifacts. The `pointer-collapse` binary is a thin layer over
//! [`commands`].

pub mod checks;
pub mod commands;
pub mod config;
mod error;
pub mod experiment;
pub mod mc;
pub mod output;
pub mod stats;

pub use config::RunConfig;
pub use error::{HarnessError, Result};

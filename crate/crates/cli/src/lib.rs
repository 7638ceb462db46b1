//! Config-driven experiment runner for [`kinterp`].
//!
//! [`config`] parses and validates experiment files, [`runner`] executes them and
//! emits CSV reports, [`svg`] draws static charts and [`plot`] turns report columns
//! into charts.

pub mod config;
pub mod plot;
pub mod runner;
pub mod svg;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use runner::{execute, run, Outputs, RunError};
pub use svg::emit_svg;

/// Environment variable that overrides the worker thread count.
pub const THREADS_ENV: &str = "KINTERP_THREADS";

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Config, input or output error.
    pub const CONFIG: i32 = 1;
    /// Every level of the study failed numerically.
    pub const ALL_LEVELS_FAILED: i32 = 2;
}

//! Scenario-driven front end for the squeezed-state pipeline.

pub mod config;
pub mod pipeline;

pub use config::{load, Diagnostic, Overrides, Scenario, Severity};
pub use pipeline::{run, write_outputs, RunResult};

/// Exit status: every residual within tolerance.
pub const EXIT_OK: i32 = 0;
/// Exit status: the run finished but a residual breached its tolerance, or a
/// numerical error stopped it.
pub const EXIT_BREACH: i32 = 1;
/// Exit status: invalid scenario or command line.
pub const EXIT_CONFIG: i32 = 2;

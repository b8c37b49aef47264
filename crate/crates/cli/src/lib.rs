//! Scenario engine and command-line front end for the steady-state
//! response solver: figure presets, occupation sweeps, field-decay
//! threshold scans, CSV/JSON output and plot-script generation.

pub mod cli;
pub mod kappa;
pub mod output;
pub mod presets;
pub mod spec;
pub mod sweep;

pub use cli::cli_main;
pub use output::{OutputRecord, CSV_HEADER};
pub use spec::{GridSpec, OutputFormat, SweepMode, SweepSpec};
pub use sweep::{run_sweep, run_sweep_seq};

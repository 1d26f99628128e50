//! Command-line front end: analytic BER curves, Monte Carlo sweeps, CSV
//! export and the simulation/analysis agreement check.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Args, ConfigError, Mode, RunConfig};
pub use output::{emit_csv, BpskPoint, Kind, Row, RunManifest};
pub use run::{run, verify, RunOutcome, VerifyReport};

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const GATE_FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;
}

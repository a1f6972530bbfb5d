//! File formats and command implementations behind the `hinf-energy` binary.

pub mod bench;
pub mod coeff_file;
pub mod commands;
pub mod error;
pub mod grid;
pub mod model_file;

pub use error::{CliError, CliResult};

/// Default `--max-bytes`.
pub const DEFAULT_MAX_BYTES: u64 = 8 << 30;

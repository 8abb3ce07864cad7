//! Benchmark experiments, sweeps and their CSV and plot output.

mod config;
mod optimize;
mod output;
mod run;

pub use config::*;
pub use optimize::{nelder_mead, Minimum};
pub use output::*;
pub use run::*;

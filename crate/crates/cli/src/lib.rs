//! Experiment runner for the `neurocart` library: configs, runs, sweeps,
//! controller comparisons and plots.

pub mod config;
pub mod io;
pub mod plot;
pub mod run;
pub mod sweep;

/// Environment variable giving the default output root.
pub const OUT_ENV: &str = "NEUROCART_OUT";

/// Exit status of a run in which at least one seed lost the plant.
pub const EXIT_POLE_FELL: i32 = 2;

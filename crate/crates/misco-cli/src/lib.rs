//! Scenario generation, configuration, experiment sweeps, and CSV emission
//! around the `misco-core` optimizers.

pub mod config;
pub mod csvout;
pub mod scenario;
pub mod sweep;
pub mod validate;

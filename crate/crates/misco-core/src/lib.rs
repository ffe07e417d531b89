//! Joint sensing / sampling / offloading optimization for AoI-aware status
//! updates in an edge-computing fleet.
//!
//! The crate models a fleet of sensing devices that periodically generate
//! status updates, retry failed sensing passes, and either process updates
//! locally or offload them to a shared edge server over an interference-
//! limited uplink. On top of the physical model sit closed-form AoI and
//! energy expressions with a Monte Carlo renewal simulator that validates
//! them, per-stage optimizers for the sampling interval and the sensing
//! attempt count, a potential-game best-response scheduler for the offload
//! assignment, and an outer block-coordinate loop that cycles the three
//! stages to a fixed point. Exhaustive oracles (brute-force argmin, full
//! equilibrium enumeration) ship alongside the fast paths so every stage can
//! be cross-checked at desk scale.
//!
//! Everything is `no_std + alloc` and deterministic: float math goes through
//! `libm` and randomness through the seeded [`rng::SimRng`], so a given seed
//! reproduces bit-identical results on any platform.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cost;
pub mod error;
pub mod game;
pub mod math;
pub mod model;
pub mod orchestrator;
pub mod renewal;
pub mod rng;
pub mod sampling;
pub mod sensing;

pub use error::Error;

/// Outcome of a single per-device optimization stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageResult<T> {
    /// The optimized decision (interval in seconds, or attempt count).
    pub value: T,
    /// Full per-device weighted cost evaluated at the returned decision.
    pub cost_at_optimum: f64,
    /// True when the stage had to adjust the decision beyond its own
    /// variable to restore joint feasibility (or clamp an unbounded
    /// optimum); see the individual stage docs for what was adjusted.
    pub feasibility_repair_applied: bool,
}

/// How stages react when the sensing-quality floor conflicts with the
/// number of attempts that fit inside the sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityMode {
    /// Extend the sampling interval so the required attempts fit, and flag
    /// the result as repaired.
    Repair,
    /// Return an infeasibility error instead.
    Strict,
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::model::{CpuEnergyModel, DeviceProfile, Environment};

    /// Reference environment used across module tests: 100 MHz uplink,
    /// -100 dBm noise floor, 20 GHz edge CPU, equal cost weights.
    pub fn env() -> Environment {
        Environment {
            bandwidth_hz: 1.0e8,
            noise_power_w: 1.0e-13,
            sensing_decay_per_m: 0.08,
            edge_cpu_hz: 2.0e10,
            cpu_energy: CpuEnergyModel::FrequencySquaredGhz { coeff: 1.0e-11 },
            edge_data_threshold_bits: 2.0e7,
            p_min: 0.7,
            tau_min_s: 0.5,
            tau_max_s: 3_600.0,
            weight_aoi: 0.5,
            weight_energy: 0.5,
            path_loss_exponent: 4.0,
        }
    }

    /// A device at `server_distance_m` from the edge node with an event
    /// `event_distance_m` away, otherwise on reference parameters.
    pub fn device(id: usize, server_distance_m: f64, event_distance_m: f64) -> DeviceProfile {
        DeviceProfile {
            id,
            event_distance_m,
            unit_sense_time_s: 0.2,
            data_size_bits: 4.0e6,
            cpu_cycles: 1.0e9,
            sense_energy_per_bit_j: 1.0e-9,
            tx_power_w: 0.1,
            local_cpu_hz: 1.0e9,
            server_distance_m,
        }
    }
}

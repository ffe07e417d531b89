//! Closed-form average AoI, average energy, and the weighted per-device and
//! fleet cost built from them.
//!
//! The average AoI of a device is half its sampling interval plus the
//! expected duration of the geometric retry chain (one pass time divided by
//! the multi-attempt success probability). Average energy amortizes one
//! pass's energy over the sampling interval. The Monte Carlo oracle in
//! [`crate::renewal`] validates both.

use crate::error::Error;
use crate::model::{
    computation_cost, multi_attempt_success_prob, per_pass_energy, sensing_cost,
    sensing_success_prob, single_pass_time, transmission_cost, transmission_rate, DecisionState,
    DeviceProfile, Environment,
};

/// Per-device cost decomposition. `weighted_cost` is exactly
/// `weight_aoi * avg_aoi_s + weight_energy * avg_energy_w`; the component
/// fields break one pass into its sensing / transmission / compute shares.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    pub avg_aoi_s: f64,
    /// Joules per second of operation.
    pub avg_energy_w: f64,
    pub weighted_cost: f64,
    pub sense_time_s: f64,
    pub transmit_time_s: f64,
    pub compute_time_s: f64,
    pub sense_energy_j: f64,
    pub transmit_energy_j: f64,
    pub compute_energy_j: f64,
}

impl CostBreakdown {
    /// Fraction of one pass spent sensing (the rest is transmission plus
    /// task processing).
    pub fn sense_time_share(&self) -> f64 {
        let total = self.sense_time_s + self.transmit_time_s + self.compute_time_s;
        self.sense_time_s / total
    }
}

/// Expected duration of the retry chain: each pass takes `single_pass_s`
/// and succeeds independently with probability `success_prob`, so the
/// expectation is the geometric mean count `1/P` times the pass time.
pub fn expected_completion_time(single_pass_s: f64, success_prob: f64) -> Result<f64, Error> {
    if single_pass_s <= 0.0 || single_pass_s.is_nan() {
        return Err(Error::Domain("pass time must be positive"));
    }
    if success_prob <= 0.0 || success_prob > 1.0 || success_prob.is_nan() {
        return Err(Error::Domain("success probability must lie in (0, 1]"));
    }
    Ok(single_pass_s / success_prob)
}

/// Average AoI of device `idx` under the given decisions, seconds.
pub fn average_aoi(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    interval_s: f64,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    let single = sensing_success_prob(&fleet[idx], env);
    let p = multi_attempt_success_prob(single, attempts).expect("attempts >= 1, prob in (0,1]");
    let pass = single_pass_time(fleet, idx, attempts, offload, env);
    interval_s / 2.0 + pass / p
}

/// Average device-side power draw: one pass's energy amortized over the
/// sampling interval, joules per second.
pub fn average_energy(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    interval_s: f64,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    per_pass_energy(fleet, idx, attempts, offload, env) / interval_s
}

/// Weighted per-device cost with its component decomposition.
pub fn device_cost(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    interval_s: f64,
    offload: &[bool],
    env: &Environment,
) -> CostBreakdown {
    let device = &fleet[idx];
    let (sense_time_s, sense_energy_j) = sensing_cost(device, attempts);
    let (transmit_time_s, transmit_energy_j, compute_time_s, compute_energy_j) = if offload[idx] {
        let rate = transmission_rate(fleet, idx, offload, env);
        let (t_tx, e_tx) = transmission_cost(device, rate);
        let (t_edge, _) = computation_cost(device, env, true);
        (t_tx, e_tx, t_edge, 0.0)
    } else {
        let (t_local, e_local) = computation_cost(device, env, false);
        (0.0, 0.0, t_local, e_local)
    };

    let single = sensing_success_prob(device, env);
    let p = multi_attempt_success_prob(single, attempts).expect("attempts >= 1, prob in (0,1]");
    let pass_time = sense_time_s + transmit_time_s + compute_time_s;
    let avg_aoi_s = interval_s / 2.0 + pass_time / p;
    let avg_energy_w = (sense_energy_j + transmit_energy_j + compute_energy_j) / interval_s;

    CostBreakdown {
        avg_aoi_s,
        avg_energy_w,
        weighted_cost: env.weight_aoi * avg_aoi_s + env.weight_energy * avg_energy_w,
        sense_time_s,
        transmit_time_s,
        compute_time_s,
        sense_energy_j,
        transmit_energy_j,
        compute_energy_j,
    }
}

/// Total fleet cost: the sum of every device's weighted cost.
pub fn system_cost(fleet: &[DeviceProfile], decisions: &DecisionState, env: &Environment) -> f64 {
    let mut total = 0.0;
    for idx in 0..fleet.len() {
        total += device_cost(
            fleet,
            idx,
            decisions.attempts[idx],
            decisions.intervals_s[idx],
            &decisions.offload,
            env,
        )
        .weighted_cost;
    }
    total
}

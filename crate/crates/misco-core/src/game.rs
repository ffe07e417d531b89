//! Decentralized computation-offloading game.
//!
//! Offloading is worthwhile for a device exactly when the interference it
//! receives at the edge server stays below a per-device threshold derived
//! from its latency/energy trade-off, which makes the binary offload choice
//! a threshold test. The resulting game is a potential game: the weighted
//! pairwise-interference function below strictly drops with every strictly
//! improving unilateral flip, so sequential best responses reach a pure
//! equilibrium in finitely many steps.
//!
//! The dynamics let one device update per slot (the one with the largest
//! improvement), start from all-local, and honor the edge server's data
//! capacity: at each slot start the admission filter evicts the largest
//! updates until the requested load fits, and an evicted device is treated
//! as granted zero edge capacity: it stays local and only re-enters the
//! game once capacity would genuinely accommodate it again.

use alloc::vec;
use alloc::vec::Vec;

use crate::cost::device_cost;
use crate::error::Error;
use crate::math;
use crate::model::{
    computation_cost, multi_attempt_success_prob, received_interference_w, sensing_cost,
    sensing_success_prob, transmission_cost, transmission_rate_with_interference, DeviceProfile,
    Environment,
};

/// Interference level below which offloading beats local processing, or the
/// signal that no interference level makes offloading attractive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffloadThreshold {
    /// Offload wins strictly below this received interference, watts. May
    /// be negative, in which case local wins even on a silent channel.
    Level(f64),
    /// Offloading cannot beat local on either latency or energy.
    NeverBeneficial,
}

impl OffloadThreshold {
    /// Numeric level used inside the potential function; the never-beneficial
    /// case takes its limiting value of minus the noise floor.
    fn potential_level(&self, env: &Environment) -> f64 {
        match *self {
            OffloadThreshold::Level(l) => l,
            OffloadThreshold::NeverBeneficial => -env.noise_power_w,
        }
    }
}

/// Summed received power of every other offloading device, watts.
pub fn interference_at(
    fleet: &[DeviceProfile],
    idx: usize,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    received_interference_w(fleet, idx, offload, env)
}

/// Per-device interference threshold under the current attempts/interval.
/// Does not depend on anyone's offload bits, so one value per device serves
/// a whole dynamics run.
pub fn offload_threshold(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    interval_s: f64,
    env: &Environment,
) -> OffloadThreshold {
    let device = &fleet[idx];
    let p = multi_attempt_success_prob(sensing_success_prob(device, env), attempts)
        .expect("attempts >= 1, prob in (0,1]");
    let (t_local, e_local) = computation_cost(device, env, false);
    let (t_edge, _) = computation_cost(device, env, true);
    let d = device.data_size_bits;

    let required_rate_numer =
        env.weight_aoi * d * interval_s + env.weight_energy * device.tx_power_w * d * p;
    let required_rate_denom = env.weight_aoi * interval_s * (t_local - t_edge)
        + env.weight_energy * p * e_local;
    if required_rate_denom <= 0.0 {
        return OffloadThreshold::NeverBeneficial;
    }
    // SINR that delivers the required rate, inverted through the log
    let exponent = required_rate_numer / (env.bandwidth_hz * required_rate_denom);
    let min_sinr = math::exp2_m1(exponent);
    OffloadThreshold::Level(device.rx_power_w(env) / min_sinr - env.noise_power_w)
}

/// Offload / local costs for one device under an explicit interference
/// level, with sensing and sampling fixed. Useful for threshold cross-checks
/// and mean-field best responses.
pub fn costs_at_interference(
    device: &DeviceProfile,
    attempts: u32,
    interval_s: f64,
    interference_w: f64,
    env: &Environment,
) -> (f64, f64) {
    let p = multi_attempt_success_prob(sensing_success_prob(device, env), attempts)
        .expect("attempts >= 1, prob in (0,1]");
    let (t_sense, e_sense) = sensing_cost(device, attempts);
    let rate = transmission_rate_with_interference(device, interference_w, env);
    let (t_tx, e_tx) = transmission_cost(device, rate);
    let (t_edge, _) = computation_cost(device, env, true);
    let (t_local, e_local) = computation_cost(device, env, false);
    let offload_cost = env.weight_aoi * (interval_s / 2.0 + (t_sense + t_tx + t_edge) / p)
        + env.weight_energy * (e_sense + e_tx) / interval_s;
    let local_cost = env.weight_aoi * (interval_s / 2.0 + (t_sense + t_local) / p)
        + env.weight_energy * (e_sense + e_local) / interval_s;
    (offload_cost, local_cost)
}

/// Best response of device `idx` against the others' offload bits: offload
/// exactly when the received interference lies strictly below the device's
/// threshold. Ties and never-beneficial thresholds go local.
pub fn best_response(
    fleet: &[DeviceProfile],
    idx: usize,
    offload: &[bool],
    attempts: u32,
    interval_s: f64,
    env: &Environment,
) -> bool {
    match offload_threshold(fleet, idx, attempts, interval_s, env) {
        OffloadThreshold::NeverBeneficial => false,
        OffloadThreshold::Level(level) => interference_at(fleet, idx, offload, env) < level,
    }
}

/// Enforce the edge server's data capacity on a requested offload pattern:
/// while the requested load exceeds the threshold, evict the served update
/// with the largest data size (largest id on ties).
pub fn admission_filter(
    fleet: &[DeviceProfile],
    requested: &[bool],
    env: &Environment,
) -> Vec<bool> {
    debug_assert_eq!(fleet.len(), requested.len());
    let mut admitted = requested.to_vec();
    loop {
        let load: f64 = fleet
            .iter()
            .zip(admitted.iter())
            .filter(|(_, &x)| x)
            .map(|(d, _)| d.data_size_bits)
            .sum();
        if load <= env.edge_data_threshold_bits {
            return admitted;
        }
        let victim = (0..fleet.len())
            .filter(|&i| admitted[i])
            .max_by(|&a, &b| {
                fleet[a]
                    .data_size_bits
                    .partial_cmp(&fleet[b].data_size_bits)
                    .expect("data sizes are finite")
                    .then(a.cmp(&b))
            })
            .expect("excess load implies a served device");
        admitted[victim] = false;
    }
}

/// Potential function of the offload game: half the summed pairwise received
/// powers of offloading devices, plus each local device's received power
/// times its threshold. Every strictly improving unilateral flip strictly
/// decreases it.
pub fn potential(
    fleet: &[DeviceProfile],
    attempts: &[u32],
    intervals_s: &[f64],
    offload: &[bool],
    env: &Environment,
) -> f64 {
    let n = fleet.len();
    let rx: Vec<f64> = fleet.iter().map(|d| d.rx_power_w(env)).collect();
    let mut phi = 0.0;
    for i in 0..n {
        if offload[i] {
            for m in 0..n {
                if m != i && offload[m] {
                    phi += 0.5 * rx[i] * rx[m];
                }
            }
        } else {
            let level = offload_threshold(fleet, i, attempts[i], intervals_s[i], env)
                .potential_level(env);
            phi += rx[i] * level;
        }
    }
    phi
}

/// One accepted strategy update in the dynamics trace.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponseStep {
    pub slot: u32,
    pub device: usize,
    /// Own-cost change of the flip (strictly negative).
    pub cost_delta: f64,
    pub potential_before: f64,
    pub potential_after: f64,
    /// Offload pattern after the flip, bit `i` for device `i` (devices
    /// beyond 128 are not representable and are left out).
    pub offload_mask: u128,
}

/// Result of one best-response dynamics run.
#[derive(Debug, Clone, PartialEq)]
pub struct GameOutcome {
    /// Equilibrium offload pattern (admission-feasible).
    pub offload: Vec<bool>,
    /// Slots the run used.
    pub slots: u32,
    /// Accepted updates in order.
    pub steps: Vec<BestResponseStep>,
    /// (slot, device) pairs evicted by the admission filter.
    pub evictions: Vec<(u32, usize)>,
    /// Devices that ended the run with a zero capacity grant.
    pub denied: Vec<bool>,
}

/// Default slot cap for the dynamics: generous against the observed two
/// flips per device, tiny next to the exhaustive alternative.
pub fn default_slot_cap(fleet_size: usize) -> usize {
    (10 * fleet_size).max(20)
}

fn offload_mask(offload: &[bool]) -> u128 {
    let mut mask = 0u128;
    for (i, &x) in offload.iter().take(128).enumerate() {
        if x {
            mask |= 1u128 << i;
        }
    }
    mask
}

/// Run sequential best-response dynamics from all-local to a pure Nash
/// equilibrium of the admission-constrained game.
///
/// Per slot: the admission filter first evicts overload (evicted devices are
/// denied edge capacity and forced local), then every non-denied device
/// computes its threshold best response, and the strictly improving
/// candidate with the largest improvement flips (lowest id on ties). When
/// nobody wants to move, denied devices whose return now both fits the
/// capacity and strictly improves their cost are re-admitted one at a time;
/// the run ends when none are left.
pub fn run_best_response_dynamics(
    fleet: &[DeviceProfile],
    attempts: &[u32],
    intervals_s: &[f64],
    env: &Environment,
    slot_cap: usize,
) -> Result<GameOutcome, Error> {
    let n = fleet.len();
    debug_assert_eq!(n, attempts.len());
    debug_assert_eq!(n, intervals_s.len());

    let thresholds: Vec<OffloadThreshold> = (0..n)
        .map(|i| offload_threshold(fleet, i, attempts[i], intervals_s[i], env))
        .collect();
    let mut offload = vec![false; n];
    let mut denied = vec![false; n];
    let mut steps = Vec::new();
    let mut evictions = Vec::new();
    let mut slot: u32 = 0;

    loop {
        if slot as usize >= slot_cap {
            return Err(Error::GameIterationCap {
                cap: slot_cap,
                steps,
            });
        }
        slot += 1;

        // admission at slot start: evict overload, deny the victims
        let admitted = admission_filter(fleet, &offload, env);
        for i in 0..n {
            if offload[i] && !admitted[i] {
                offload[i] = false;
                denied[i] = true;
                evictions.push((slot, i));
            }
        }

        // threshold best responses; keep the strictest improver
        let mut winner: Option<(usize, f64)> = None;
        for i in 0..n {
            if denied[i] {
                continue;
            }
            let response = match thresholds[i] {
                OffloadThreshold::NeverBeneficial => false,
                OffloadThreshold::Level(level) => {
                    interference_at(fleet, i, &offload, env) < level
                }
            };
            if response != offload[i] {
                let delta = flip_cost_delta(fleet, i, attempts, intervals_s, &mut offload, env);
                if delta < 0.0 && winner.is_none_or(|(_, best)| delta < best) {
                    winner = Some((i, delta));
                }
            }
        }

        match winner {
            Some((device, cost_delta)) => {
                let before = potential(fleet, attempts, intervals_s, &offload, env);
                offload[device] = !offload[device];
                let after = potential(fleet, attempts, intervals_s, &offload, env);
                steps.push(BestResponseStep {
                    slot,
                    device,
                    cost_delta,
                    potential_before: before,
                    potential_after: after,
                    offload_mask: offload_mask(&offload),
                });
            }
            None => {
                // nobody moves; see whether a denied device genuinely fits again
                let load: f64 = fleet
                    .iter()
                    .zip(offload.iter())
                    .filter(|(_, &x)| x)
                    .map(|(d, _)| d.data_size_bits)
                    .sum();
                let mut revived = false;
                for i in 0..n {
                    if !denied[i] {
                        continue;
                    }
                    let fits = load + fleet[i].data_size_bits <= env.edge_data_threshold_bits;
                    if !fits {
                        continue;
                    }
                    let wants = match thresholds[i] {
                        OffloadThreshold::NeverBeneficial => false,
                        OffloadThreshold::Level(level) => {
                            interference_at(fleet, i, &offload, env) < level
                        }
                    };
                    if wants
                        && flip_cost_delta(fleet, i, attempts, intervals_s, &mut offload, env)
                            < 0.0
                    {
                        denied[i] = false;
                        revived = true;
                        break;
                    }
                }
                if !revived {
                    break;
                }
            }
        }
    }

    Ok(GameOutcome {
        offload,
        slots: slot,
        steps,
        evictions,
        denied,
    })
}

/// Own-cost change if device `i` flipped its bit, others fixed.
fn flip_cost_delta(
    fleet: &[DeviceProfile],
    i: usize,
    attempts: &[u32],
    intervals_s: &[f64],
    offload: &mut [bool],
    env: &Environment,
) -> f64 {
    let current =
        device_cost(fleet, i, attempts[i], intervals_s[i], offload, env).weighted_cost;
    offload[i] = !offload[i];
    let flipped =
        device_cost(fleet, i, attempts[i], intervals_s[i], offload, env).weighted_cost;
    offload[i] = !offload[i];
    flipped - current
}

/// Exhaustive equilibrium oracle for small fleets.
#[derive(Debug, Clone, PartialEq)]
pub struct OffloadOracle {
    /// Feasible pattern with the lowest total cost.
    pub optimum: Vec<bool>,
    pub optimum_cost: f64,
    /// Every feasible pattern where no device has a feasible strictly
    /// improving unilateral flip, with its total cost.
    pub nash_vectors: Vec<Vec<bool>>,
    pub nash_costs: Vec<f64>,
}

impl OffloadOracle {
    pub fn nash_contains(&self, offload: &[bool]) -> bool {
        self.nash_vectors.iter().any(|v| v == offload)
    }
}

/// Enumerate every admission-feasible offload pattern (at most 16 devices):
/// the total-cost minimizer and the full set of pure Nash equilibria, where
/// a deviation only counts if the deviated pattern is itself feasible.
pub fn exhaustive_offload_oracle(
    fleet: &[DeviceProfile],
    attempts: &[u32],
    intervals_s: &[f64],
    env: &Environment,
) -> Result<OffloadOracle, Error> {
    let n = fleet.len();
    if n > 16 {
        return Err(Error::Domain(
            "exhaustive enumeration supports at most 16 devices",
        ));
    }
    let sizes: Vec<f64> = fleet.iter().map(|d| d.data_size_bits).collect();
    let fits = |mask: u32| -> bool {
        let mut load = 0.0;
        for (i, size) in sizes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                load += size;
            }
        }
        load <= env.edge_data_threshold_bits
    };

    let mut pattern = vec![false; n];
    let mut optimum: Option<(u32, f64)> = None;
    let mut nash_vectors = Vec::new();
    let mut nash_costs = Vec::new();

    for mask in 0u32..(1 << n) {
        if !fits(mask) {
            continue;
        }
        for (i, slot) in pattern.iter_mut().enumerate() {
            *slot = mask & (1 << i) != 0;
        }
        let mut total = 0.0;
        let mut is_nash = true;
        for i in 0..n {
            let own =
                device_cost(fleet, i, attempts[i], intervals_s[i], &pattern, env).weighted_cost;
            total += own;
            if is_nash && fits(mask ^ (1 << i)) {
                let delta =
                    flip_cost_delta(fleet, i, attempts, intervals_s, &mut pattern, env);
                if delta < 0.0 {
                    is_nash = false;
                }
            }
        }
        if optimum.is_none_or(|(_, best)| total < best) {
            optimum = Some((mask, total));
        }
        if is_nash {
            nash_vectors.push(pattern.clone());
            nash_costs.push(total);
        }
    }

    let (best_mask, optimum_cost) = optimum.expect("all-local is always feasible");
    let optimum = (0..n).map(|i| best_mask & (1 << i) != 0).collect();
    Ok(OffloadOracle {
        optimum,
        optimum_cost,
        nash_vectors,
        nash_costs,
    })
}

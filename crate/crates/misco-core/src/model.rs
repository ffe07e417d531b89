//! Static parameters and the elementary per-device formulas: sensing
//! success, sensing/transmission/computation time and energy, and the
//! single-pass processing time they add up to.

use alloc::vec::Vec;

use crate::error::Error;
use crate::math;

/// Static per-device parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceProfile {
    /// Index of the device; unique within a fleet and equal to its position.
    pub id: usize,
    /// Distance to the status-changing event, meters. Zero is allowed and
    /// means certain sensing.
    pub event_distance_m: f64,
    /// Duration of one sensing attempt, seconds.
    pub unit_sense_time_s: f64,
    /// Size of one status update, bits.
    pub data_size_bits: f64,
    /// CPU cycles needed to process one update.
    pub cpu_cycles: f64,
    /// Sensing energy per sensed bit, joules.
    pub sense_energy_per_bit_j: f64,
    /// Uplink transmit power, watts.
    pub tx_power_w: f64,
    /// Local CPU frequency, hertz.
    pub local_cpu_hz: f64,
    /// Distance to the edge server, meters (sets the channel gain).
    pub server_distance_m: f64,
}

impl DeviceProfile {
    pub fn validate(&self) -> Result<(), Error> {
        if self.event_distance_m < 0.0 || !self.event_distance_m.is_finite() {
            return Err(Error::Domain("event distance must be nonnegative"));
        }
        let positives = [
            self.unit_sense_time_s,
            self.data_size_bits,
            self.cpu_cycles,
            self.sense_energy_per_bit_j,
            self.tx_power_w,
            self.local_cpu_hz,
            self.server_distance_m,
        ];
        if positives.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
            return Err(Error::Domain("device parameters must be positive"));
        }
        Ok(())
    }

    /// Path-loss channel gain toward the edge server.
    pub fn channel_gain(&self, env: &Environment) -> f64 {
        math::powf(self.server_distance_m, -env.path_loss_exponent)
    }

    /// Received power `g * p` this device contributes when transmitting.
    pub fn rx_power_w(&self, env: &Environment) -> f64 {
        self.channel_gain(env) * self.tx_power_w
    }
}

/// How the per-cycle CPU energy coefficient is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CpuEnergyModel {
    /// `coeff * (f / 1 GHz)^2` joules per cycle. The quadratic frequency
    /// scaling only gives sane magnitudes with the frequency in GHz, so
    /// that convention is baked into the variant name.
    FrequencySquaredGhz { coeff: f64 },
    /// Flat joules per cycle, independent of the CPU frequency.
    PerCycle { joules: f64 },
}

impl CpuEnergyModel {
    /// Energy per CPU cycle for a local CPU running at `cpu_hz`.
    pub fn joules_per_cycle(&self, cpu_hz: f64) -> f64 {
        match *self {
            CpuEnergyModel::FrequencySquaredGhz { coeff } => {
                let ghz = cpu_hz / 1.0e9;
                coeff * ghz * ghz
            }
            CpuEnergyModel::PerCycle { joules } => joules,
        }
    }

    fn coeff(&self) -> f64 {
        match *self {
            CpuEnergyModel::FrequencySquaredGhz { coeff } => coeff,
            CpuEnergyModel::PerCycle { joules } => joules,
        }
    }
}

/// Shared system parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    /// Uplink channel bandwidth, hertz.
    pub bandwidth_hz: f64,
    /// Background noise power, watts.
    pub noise_power_w: f64,
    /// Per-meter decay of the sensing success probability.
    pub sensing_decay_per_m: f64,
    /// Edge server CPU frequency, hertz.
    pub edge_cpu_hz: f64,
    /// Local CPU energy model.
    pub cpu_energy: CpuEnergyModel,
    /// Total update bits the edge server admits concurrently.
    pub edge_data_threshold_bits: f64,
    /// Floor on the multi-attempt sensing success probability.
    pub p_min: f64,
    /// Floor on the sampling interval, seconds.
    pub tau_min_s: f64,
    /// Ceiling used when the interval optimum is unbounded (zero AoI
    /// weight), seconds.
    pub tau_max_s: f64,
    /// Cost weight on average AoI.
    pub weight_aoi: f64,
    /// Cost weight on average energy.
    pub weight_energy: f64,
    /// Path-loss exponent for the channel gain.
    pub path_loss_exponent: f64,
}

impl Environment {
    pub fn validate(&self) -> Result<(), Error> {
        if self.p_min <= 0.0 || self.p_min >= 1.0 || self.p_min.is_nan() {
            return Err(Error::Domain("p_min must lie strictly between 0 and 1"));
        }
        if !(self.weight_aoi >= 0.0 && self.weight_energy >= 0.0) {
            return Err(Error::Domain("cost weights must be nonnegative"));
        }
        let weight_sum = self.weight_aoi + self.weight_energy;
        if weight_sum <= 0.0 || weight_sum.is_nan() {
            return Err(Error::Domain("at least one cost weight must be positive"));
        }
        let positives = [
            self.bandwidth_hz,
            self.noise_power_w,
            self.sensing_decay_per_m,
            self.edge_cpu_hz,
            self.cpu_energy.coeff(),
            self.tau_min_s,
            self.tau_max_s,
            self.path_loss_exponent,
        ];
        if positives.iter().any(|v| *v <= 0.0 || !v.is_finite()) {
            return Err(Error::Domain("environment parameters must be positive"));
        }
        if self.edge_data_threshold_bits < 0.0 {
            return Err(Error::Domain("edge data threshold must be nonnegative"));
        }
        if self.tau_max_s < self.tau_min_s {
            return Err(Error::Domain("tau_max must not be below tau_min"));
        }
        Ok(())
    }
}

/// The optimization variables for a fleet: attempts, intervals, offload bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionState {
    pub attempts: Vec<u32>,
    pub intervals_s: Vec<f64>,
    pub offload: Vec<bool>,
}

impl DecisionState {
    pub fn new(attempts: Vec<u32>, intervals_s: Vec<f64>, offload: Vec<bool>) -> Self {
        Self {
            attempts,
            intervals_s,
            offload,
        }
    }

    pub fn len(&self) -> usize {
        self.attempts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attempts.is_empty()
    }
}

/// Check a fleet for structural validity: nonempty, per-device parameters in
/// range, ids equal to positions.
pub fn validate_fleet(fleet: &[DeviceProfile]) -> Result<(), Error> {
    if fleet.is_empty() {
        return Err(Error::Domain("fleet must not be empty"));
    }
    for (idx, dev) in fleet.iter().enumerate() {
        dev.validate()?;
        if dev.id != idx {
            return Err(Error::Domain("device ids must equal their fleet position"));
        }
    }
    Ok(())
}

/// Path-loss channel gain `v^-o` for a transmitter at distance `v`.
pub fn channel_gain(server_distance_m: f64, path_loss_exponent: f64) -> Result<f64, Error> {
    if server_distance_m <= 0.0 || server_distance_m.is_nan() {
        return Err(Error::Domain("channel gain needs a positive distance"));
    }
    Ok(math::powf(server_distance_m, -path_loss_exponent))
}

/// Probability that a single sensing attempt succeeds: exponential decay in
/// the event distance.
pub fn sensing_success_prob(device: &DeviceProfile, env: &Environment) -> f64 {
    math::exp(-env.sensing_decay_per_m * device.event_distance_m)
}

/// Probability that at least one of `attempts` independent sensing attempts
/// succeeds: `1 - (1 - p)^s`.
pub fn multi_attempt_success_prob(single_success: f64, attempts: u32) -> Result<f64, Error> {
    if attempts < 1 {
        return Err(Error::Domain("attempt count must be at least 1"));
    }
    if single_success <= 0.0 || single_success > 1.0 || single_success.is_nan() {
        return Err(Error::Domain("single-attempt success must lie in (0, 1]"));
    }
    Ok(1.0 - math::powi(1.0 - single_success, attempts))
}

/// Time and energy of one sensing round of `attempts` attempts: both linear
/// in the attempt count.
pub fn sensing_cost(device: &DeviceProfile, attempts: u32) -> (f64, f64) {
    debug_assert!(attempts >= 1);
    let s = attempts as f64;
    (
        device.unit_sense_time_s * s,
        device.sense_energy_per_bit_j * device.data_size_bits * s,
    )
}

/// Interference received at the edge server when decoding device `idx`:
/// the summed received power of every *other* device currently offloading.
pub(crate) fn received_interference_w(
    fleet: &[DeviceProfile],
    idx: usize,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    debug_assert_eq!(fleet.len(), offload.len());
    let mut sum = 0.0;
    for (m, dev) in fleet.iter().enumerate() {
        if m != idx && offload[m] {
            sum += dev.rx_power_w(env);
        }
    }
    sum
}

/// Uplink rate device `idx` gets against the given offload pattern. The
/// device's own bit is ignored, so the result is also the hypothetical rate
/// a currently-local device would see if it started transmitting.
pub fn transmission_rate(
    fleet: &[DeviceProfile],
    idx: usize,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    let interference = received_interference_w(fleet, idx, offload, env);
    transmission_rate_with_interference(&fleet[idx], interference, env)
}

/// Uplink rate under an explicit interference level, bits/second.
pub fn transmission_rate_with_interference(
    device: &DeviceProfile,
    interference_w: f64,
    env: &Environment,
) -> f64 {
    let sinr = device.rx_power_w(env) / (env.noise_power_w + interference_w);
    env.bandwidth_hz * math::log2(1.0 + sinr)
}

/// Transmission latency and energy at the given uplink rate. A zero rate
/// yields infinite latency, which downstream cost comparisons treat as
/// "must process locally".
pub fn transmission_cost(device: &DeviceProfile, rate_bps: f64) -> (f64, f64) {
    let latency = device.data_size_bits / rate_bps;
    (latency, device.tx_power_w * latency)
}

/// Processing latency and device-side energy for one update, either on the
/// local CPU or on the edge server. Edge execution costs the device no
/// processing energy.
pub fn computation_cost(device: &DeviceProfile, env: &Environment, offloaded: bool) -> (f64, f64) {
    if offloaded {
        (device.cpu_cycles / env.edge_cpu_hz, 0.0)
    } else {
        let delta = env.cpu_energy.joules_per_cycle(device.local_cpu_hz);
        (
            device.cpu_cycles / device.local_cpu_hz,
            device.cpu_cycles * delta,
        )
    }
}

/// Duration of one full sensing-and-processing pass for device `idx`:
/// sensing round plus either (transmit + edge compute) or local compute.
pub fn single_pass_time(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    let device = &fleet[idx];
    let (t_sense, _) = sensing_cost(device, attempts);
    if offload[idx] {
        let rate = transmission_rate(fleet, idx, offload, env);
        let (t_tx, _) = transmission_cost(device, rate);
        let (t_edge, _) = computation_cost(device, env, true);
        t_sense + t_tx + t_edge
    } else {
        let (t_local, _) = computation_cost(device, env, false);
        t_sense + t_local
    }
}

/// Device-side energy of one full pass: sensing round plus either
/// transmission or local compute energy.
pub fn per_pass_energy(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    offload: &[bool],
    env: &Environment,
) -> f64 {
    let device = &fleet[idx];
    let (_, e_sense) = sensing_cost(device, attempts);
    if offload[idx] {
        let rate = transmission_rate(fleet, idx, offload, env);
        let (_, e_tx) = transmission_cost(device, rate);
        e_sense + e_tx
    } else {
        let (_, e_local) = computation_cost(device, env, false);
        e_sense + e_local
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(1.0e-300)
    }

    #[test]
    fn channel_gain_cases() {
        assert_eq!(channel_gain(1.0, 4.0).unwrap(), 1.0);
        assert!(close(channel_gain(25.0, 4.0).unwrap(), 2.56e-6, 1e-14));
        assert!(close(channel_gain(50.0, 4.0).unwrap(), 1.6e-7, 1e-14));
        assert!(channel_gain(0.0, 4.0).is_err());
        assert!(channel_gain(-3.0, 4.0).is_err());
    }

    #[test]
    fn sensing_prob_cases() {
        let env = testutil::env();
        assert_eq!(sensing_success_prob(&testutil::device(0, 25.0, 0.0), &env), 1.0);
        assert!(close(
            sensing_success_prob(&testutil::device(0, 25.0, 10.0), &env),
            0.449329,
            1e-6
        ));
        assert!(close(
            sensing_success_prob(&testutil::device(0, 25.0, 50.0), &env),
            0.018316,
            1e-4
        ));
    }

    #[test]
    fn multi_attempt_cases() {
        assert_eq!(multi_attempt_success_prob(0.5, 1).unwrap(), 0.5);
        assert_eq!(multi_attempt_success_prob(0.5, 2).unwrap(), 0.75);
        assert_eq!(multi_attempt_success_prob(1.0, 3).unwrap(), 1.0);
        assert!(multi_attempt_success_prob(0.5, 0).is_err());
        assert!(multi_attempt_success_prob(0.0, 2).is_err());
    }

    #[test]
    fn multi_attempt_matches_complement_product_and_increases() {
        let p = 0.37;
        let mut complement = 1.0;
        let mut prev = 0.0;
        for s in 1..=64u32 {
            complement *= 1.0 - p;
            let got = multi_attempt_success_prob(p, s).unwrap();
            assert_eq!(got, 1.0 - complement);
            assert!(got > prev);
            prev = got;
        }
    }

    #[test]
    fn sensing_cost_cases() {
        let dev = testutil::device(0, 25.0, 10.0);
        let (t1, e1) = sensing_cost(&dev, 1);
        assert!(close(t1, 0.2, 1e-15) && close(e1, 4.0e-3, 1e-15));
        let (t3, e3) = sensing_cost(&dev, 3);
        assert!(close(t3, 0.6, 1e-15) && close(e3, 1.2e-2, 1e-15));
        // doubling attempts doubles both outputs
        let (t2, e2) = sensing_cost(&dev, 2);
        assert_eq!(t2, 2.0 * t1);
        assert_eq!(e2, 2.0 * e1);
    }

    #[test]
    fn single_offloader_rate() {
        let env = testutil::env();
        let fleet = [testutil::device(0, 25.0, 10.0)];
        let rate = transmission_rate(&fleet, 0, &[true], &env);
        assert!(close(rate, 2.129e9, 1e-3), "rate = {rate}");
    }

    #[test]
    fn symmetric_offloaders_rate_below_bandwidth() {
        let env = testutil::env();
        let fleet = [
            testutil::device(0, 25.0, 10.0),
            testutil::device(1, 25.0, 10.0),
        ];
        let offload = [true, true];
        let solo = transmission_rate(&fleet, 0, &[true, false], &env);
        let shared = transmission_rate(&fleet, 0, &offload, &env);
        let sinr = fleet[0].rx_power_w(&env) / (env.noise_power_w + fleet[1].rx_power_w(&env));
        assert!(sinr < 1.0);
        assert!(shared < env.bandwidth_hz);
        assert!(shared < solo);
    }

    #[test]
    fn rate_decreases_with_each_added_interferer() {
        let env = testutil::env();
        let fleet: Vec<DeviceProfile> = (0..6).map(|i| testutil::device(i, 20.0 + i as f64, 5.0)).collect();
        let mut offload = vec![true, false, false, false, false, false];
        let mut prev = transmission_rate(&fleet, 0, &offload, &env);
        for m in 1..6 {
            offload[m] = true;
            let next = transmission_rate(&fleet, 0, &offload, &env);
            assert!(next < prev);
            prev = next;
        }
    }

    #[test]
    fn transmission_cost_cases() {
        let dev = testutil::device(0, 25.0, 10.0);
        let (t, e) = transmission_cost(&dev, 2.129e9);
        assert!(close(t, 1.879e-3, 1e-3));
        assert!(close(e, 1.879e-4, 1e-3));
        // halving the rate doubles both outputs
        let (t2, e2) = transmission_cost(&dev, 2.129e9 / 2.0);
        assert!(close(t2, 2.0 * t, 1e-12) && close(e2, 2.0 * e, 1e-12));
        let (tinf, einf) = transmission_cost(&dev, 0.0);
        assert!(tinf.is_infinite() && einf.is_infinite());
    }

    #[test]
    fn computation_cost_cases() {
        let env = testutil::env();
        let dev = testutil::device(0, 25.0, 10.0);
        let (t_local, e_local) = computation_cost(&dev, &env, false);
        assert!(close(t_local, 1.0, 1e-15));
        assert!(close(e_local, 0.01, 1e-12));
        let (t_edge, e_edge) = computation_cost(&dev, &env, true);
        assert!(close(t_edge, 0.05, 1e-15));
        assert_eq!(e_edge, 0.0);
    }

    #[test]
    fn cpu_energy_conventions() {
        let quad = CpuEnergyModel::FrequencySquaredGhz { coeff: 1.0e-11 };
        assert!(close(quad.joules_per_cycle(1.0e9), 1.0e-11, 1e-12));
        assert!(close(quad.joules_per_cycle(0.8e9), 0.64e-11, 1e-12));
        let flat = CpuEnergyModel::PerCycle { joules: 3.0e-11 };
        assert_eq!(flat.joules_per_cycle(0.8e9), 3.0e-11);
    }

    #[test]
    fn single_pass_time_cases() {
        let env = testutil::env();
        let fleet = [testutil::device(0, 25.0, 10.0)];
        let local = single_pass_time(&fleet, 0, 1, &[false], &env);
        assert!(close(local, 1.2, 1e-12));
        let edge = single_pass_time(&fleet, 0, 1, &[true], &env);
        assert!(close(edge, 0.2519, 1e-3));
    }

    #[test]
    fn local_pass_ignores_other_devices() {
        let env = testutil::env();
        let mut fleet = vec![
            testutil::device(0, 25.0, 10.0),
            testutil::device(1, 30.0, 5.0),
            testutil::device(2, 12.0, 20.0),
        ];
        let t_before = single_pass_time(&fleet, 0, 2, &[false, true, true], &env);
        // other devices' offload bits are irrelevant to a local pass
        assert_eq!(
            single_pass_time(&fleet, 0, 2, &[false, false, false], &env),
            t_before
        );
        // permute the *other* devices' profiles (ids stay positional)
        fleet.swap(1, 2);
        fleet[1].id = 1;
        fleet[2].id = 2;
        let t_after = single_pass_time(&fleet, 0, 2, &[false, true, true], &env);
        assert_eq!(t_before, t_after);
    }

    #[test]
    fn times_and_energies_finite_nonnegative() {
        let env = testutil::env();
        let fleet = [
            testutil::device(0, 25.0, 10.0),
            testutil::device(1, 40.0, 3.0),
        ];
        for offload in [[false, false], [true, false], [true, true], [false, true]] {
            for idx in 0..2 {
                let t = single_pass_time(&fleet, idx, 3, &offload, &env);
                let e = per_pass_energy(&fleet, idx, 3, &offload, &env);
                assert!(t.is_finite() && t >= 0.0);
                assert!(e.is_finite() && e >= 0.0);
            }
        }
    }

    #[test]
    fn validation_catches_bad_parameters() {
        let env = testutil::env();
        assert!(env.validate().is_ok());
        let mut bad = env.clone();
        bad.p_min = 1.0;
        assert!(bad.validate().is_err());
        let mut bad = env.clone();
        bad.weight_aoi = 0.0;
        bad.weight_energy = 0.0;
        assert!(bad.validate().is_err());

        let dev = testutil::device(0, 25.0, 10.0);
        assert!(dev.validate().is_ok());
        let mut bad = dev.clone();
        bad.tx_power_w = 0.0;
        assert!(bad.validate().is_err());
        let mut ok_zero_event = dev.clone();
        ok_zero_event.event_distance_m = 0.0;
        assert!(ok_zero_event.validate().is_ok());
    }
}

//! Sampling-interval stage: closed-form optimum of the AoI / energy
//! trade-off for one device, everything else held fixed.
//!
//! With the attempt count and offload pattern fixed, the interval enters the
//! cost as `w_aoi * tau / 2 + w_energy * E_pass / tau`, whose stationary
//! point is `sqrt(2 * w_energy * E_pass / w_aoi)`; below the configured
//! floor the floor is optimal because the objective is increasing past the
//! stationary point.

use crate::cost::device_cost;
use crate::math;
use crate::model::{per_pass_energy, DeviceProfile, Environment};
use crate::StageResult;

/// Optimal sampling interval for device `idx` under the current attempts
/// and offload pattern.
///
/// A zero AoI weight makes longer always better; the result is then clamped
/// to the configured ceiling and flagged via `feasibility_repair_applied`.
pub fn optimal_sampling_interval(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    offload: &[bool],
    env: &Environment,
) -> StageResult<f64> {
    let pass_energy = per_pass_energy(fleet, idx, attempts, offload, env);
    let (interval, clamped_unbounded) = if env.weight_aoi == 0.0 {
        (env.tau_max_s, true)
    } else {
        let stationary = math::sqrt(2.0 * env.weight_energy * pass_energy / env.weight_aoi);
        (stationary.max(env.tau_min_s), false)
    };
    let cost = device_cost(fleet, idx, attempts, interval, offload, env).weighted_cost;
    StageResult {
        value: interval,
        cost_at_optimum: cost,
        feasibility_repair_applied: clamped_unbounded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CpuEnergyModel;
    use crate::rng::SimRng;
    use crate::testutil;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Device/env pair whose per-pass energy is exactly `e_total` (flat CPU
    /// energy, all sensing energy folded away).
    fn fixture(e_total: f64, tau_min: f64) -> (Vec<crate::model::DeviceProfile>, Environment) {
        let mut env = testutil::env();
        env.tau_min_s = tau_min;
        env.weight_aoi = 1.0;
        env.weight_energy = 1.0;
        let mut dev = testutil::device(0, 25.0, 10.0);
        dev.sense_energy_per_bit_j = 1.0e-30; // negligible sensing energy
        env.cpu_energy = CpuEnergyModel::PerCycle {
            joules: e_total / dev.cpu_cycles,
        };
        (vec![dev], env)
    }

    type Environment = crate::model::Environment;

    #[test]
    fn stationary_point_case() {
        let (fleet, env) = fixture(2.0, 0.1);
        let r = optimal_sampling_interval(&fleet, 0, 1, &[false], &env);
        assert!((r.value - 2.0).abs() < 1e-9, "tau = {}", r.value);
        assert!(!r.feasibility_repair_applied);
    }

    #[test]
    fn clamps_to_floor() {
        let (fleet, env) = fixture(2.0, 3.0);
        let r = optimal_sampling_interval(&fleet, 0, 1, &[false], &env);
        assert_eq!(r.value, 3.0);
    }

    #[test]
    fn zero_aoi_weight_returns_ceiling_with_flag() {
        let (fleet, mut env) = fixture(2.0, 0.1);
        env.weight_aoi = 0.0;
        let r = optimal_sampling_interval(&fleet, 0, 1, &[false], &env);
        assert_eq!(r.value, env.tau_max_s);
        assert!(r.feasibility_repair_applied);
    }

    #[test]
    fn zero_energy_weight_returns_floor() {
        let (fleet, mut env) = fixture(2.0, 0.4);
        env.weight_energy = 0.0;
        let r = optimal_sampling_interval(&fleet, 0, 1, &[false], &env);
        assert_eq!(r.value, 0.4);
    }

    #[test]
    fn stationarity_residual_vanishes_when_unclamped() {
        let env = testutil::env();
        let mut rng = SimRng::new(2024);
        for _ in 0..200 {
            let dev = testutil::device(0, rng.range_f64(5.0, 35.0), rng.range_f64(0.5, 25.0));
            let fleet = [dev];
            let attempts = rng.range_u32(1, 8);
            let r = optimal_sampling_interval(&fleet, 0, attempts, &[false], &env);
            if r.value > env.tau_min_s {
                let e = per_pass_energy(&fleet, 0, attempts, &[false], &env);
                let residual =
                    env.weight_aoi / 2.0 - env.weight_energy * e / (r.value * r.value);
                assert!(residual.abs() <= 1e-9, "residual = {residual}");
            }
        }
    }

    #[test]
    fn perturbing_the_interval_does_not_help() {
        let env = testutil::env();
        let mut rng = SimRng::new(77);
        for _ in 0..100 {
            let dev = testutil::device(0, rng.range_f64(5.0, 35.0), rng.range_f64(0.5, 25.0));
            let fleet = [dev];
            let attempts = rng.range_u32(1, 8);
            let r = optimal_sampling_interval(&fleet, 0, attempts, &[false], &env);
            for factor in [0.99, 1.01] {
                let nearby = (r.value * factor).max(env.tau_min_s);
                let c = device_cost(&fleet, 0, attempts, nearby, &[false], &env).weighted_cost;
                assert!(r.cost_at_optimum <= c + 1e-12);
            }
        }
    }

    #[test]
    fn matches_golden_section_search() {
        // independent 1-d minimizer over the same objective
        fn golden_section(mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64) -> f64 {
            let inv_phi = 0.618_033_988_749_894_8;
            let mut c = hi - inv_phi * (hi - lo);
            let mut d = lo + inv_phi * (hi - lo);
            let (mut fc, mut fd) = (f(c), f(d));
            for _ in 0..200 {
                if fc < fd {
                    hi = d;
                    d = c;
                    fd = fc;
                    c = hi - inv_phi * (hi - lo);
                    fc = f(c);
                } else {
                    lo = c;
                    c = d;
                    fc = fd;
                    d = lo + inv_phi * (hi - lo);
                    fd = f(d);
                }
            }
            0.5 * (lo + hi)
        }

        let env = testutil::env();
        let mut rng = SimRng::new(4242);
        for _ in 0..50 {
            let dev = testutil::device(0, rng.range_f64(5.0, 35.0), rng.range_f64(0.5, 25.0));
            let fleet = [dev];
            let attempts = rng.range_u32(1, 8);
            let r = optimal_sampling_interval(&fleet, 0, attempts, &[false], &env);
            let objective =
                |tau: f64| device_cost(&fleet, 0, attempts, tau, &[false], &env).weighted_cost;
            let upper = 10.0 * r.value.max(env.tau_min_s);
            let numeric = golden_section(env.tau_min_s, upper, &objective);
            // boundary optima collapse to tau_min in both paths
            let numeric = numeric.max(env.tau_min_s);
            assert!(
                (numeric - r.value).abs() <= 1e-6 * r.value.max(1.0) + 1e-4 * env.tau_min_s,
                "closed form {} vs numeric {}",
                r.value,
                numeric
            );
        }
    }
}

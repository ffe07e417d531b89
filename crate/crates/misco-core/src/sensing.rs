//! Sensing-attempt stage: pick how many attempts each sensing round makes.
//!
//! More attempts raise the success probability (fewer retry chains, lower
//! AoI) but stretch and energize every round. The per-device cost is
//! unimodal in the attempt count, so a greedy climb from one attempt stops
//! at the optimum; an exhaustive scan ships alongside as the oracle. Both
//! honor the quality floor (minimum attempts for the success-probability
//! threshold) and the cap from the sampling interval.

use crate::cost::device_cost;
use crate::error::Error;
use crate::math;
use crate::model::{multi_attempt_success_prob, sensing_success_prob, DeviceProfile, Environment};
use crate::{FeasibilityMode, StageResult};

/// Attempt count plus the (possibly extended) interval it lives in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingChoice {
    pub attempts: u32,
    pub interval_s: f64,
}

/// Attempts that fit into `interval_s`. The epsilon keeps intervals that
/// were constructed as an exact multiple of the unit time from rounding
/// down one attempt.
pub(crate) fn attempts_that_fit(interval_s: f64, unit_sense_time_s: f64) -> u32 {
    math::floor(interval_s / unit_sense_time_s + 1.0e-9) as u32
}

/// Smallest attempt count whose multi-attempt success probability reaches
/// `p_min`.
pub fn min_attempts_for_pmin(single_success: f64, p_min: f64) -> Result<u32, Error> {
    if p_min <= 0.0 || p_min >= 1.0 || p_min.is_nan() {
        return Err(Error::Domain("p_min must lie strictly between 0 and 1"));
    }
    if single_success <= 0.0 || single_success > 1.0 || single_success.is_nan() {
        return Err(Error::Domain("single-attempt success must lie in (0, 1]"));
    }
    if single_success >= p_min {
        return Ok(1);
    }
    let estimate = math::ceil(math::ln(1.0 - p_min) / math::ln(1.0 - single_success));
    if estimate > 1.0e6 || estimate.is_nan() {
        return Err(Error::Domain("attempt floor exceeds the supported range"));
    }
    let mut s = if estimate >= 1.0 { estimate as u32 } else { 1 };
    // settle float edges against the defining inequality
    while multi_attempt_success_prob(single_success, s)? < p_min {
        s += 1;
    }
    while s > 1 && multi_attempt_success_prob(single_success, s - 1)? >= p_min {
        s -= 1;
    }
    Ok(s)
}

/// Greedy attempt-count optimization for device `idx` at a fixed interval
/// and offload pattern.
///
/// Climbs from one attempt while the cost still drops (sound because the
/// cost is unimodal in the count), then raises the result to the quality
/// floor. When the floor itself does not fit the interval, `Repair` extends
/// the interval to exactly fit the floor and flags the result; `Strict`
/// errors instead.
pub fn optimize_sensing(
    fleet: &[DeviceProfile],
    idx: usize,
    interval_s: f64,
    offload: &[bool],
    env: &Environment,
    mode: FeasibilityMode,
) -> Result<StageResult<SensingChoice>, Error> {
    let device = &fleet[idx];
    let cap = attempts_that_fit(interval_s, device.unit_sense_time_s);
    if cap < 1 {
        return Err(Error::Infeasible {
            device: idx,
            reason: "interval admits no sensing attempt",
        });
    }
    let cost_at =
        |s: u32, tau: f64| device_cost(fleet, idx, s, tau, offload, env).weighted_cost;

    let mut attempts = 1u32;
    let mut cost = cost_at(1, interval_s);
    while attempts < cap {
        let next = cost_at(attempts + 1, interval_s);
        if next < cost {
            attempts += 1;
            cost = next;
        } else {
            break;
        }
    }

    let floor = min_attempts_for_pmin(sensing_success_prob(device, env), env.p_min)?;
    let mut interval = interval_s;
    let mut repaired = false;
    if floor > cap {
        match mode {
            FeasibilityMode::Strict => {
                return Err(Error::Infeasible {
                    device: idx,
                    reason: "quality floor needs more attempts than fit the interval",
                })
            }
            FeasibilityMode::Repair => {
                interval = floor as f64 * device.unit_sense_time_s;
                attempts = floor;
                repaired = true;
            }
        }
    } else if attempts < floor {
        attempts = floor;
    }

    Ok(StageResult {
        cost_at_optimum: cost_at(attempts, interval),
        value: SensingChoice {
            attempts,
            interval_s: interval,
        },
        feasibility_repair_applied: repaired,
    })
}

/// Exhaustive oracle: evaluate every feasible attempt count and return the
/// argmin, smallest count on ties. Never repairs; an empty feasible range
/// is an error.
pub fn brute_force_sensing(
    fleet: &[DeviceProfile],
    idx: usize,
    interval_s: f64,
    offload: &[bool],
    env: &Environment,
) -> Result<StageResult<SensingChoice>, Error> {
    let device = &fleet[idx];
    let cap = attempts_that_fit(interval_s, device.unit_sense_time_s);
    if cap < 1 {
        return Err(Error::Infeasible {
            device: idx,
            reason: "interval admits no sensing attempt",
        });
    }
    let floor = min_attempts_for_pmin(sensing_success_prob(device, env), env.p_min)?;
    if floor > cap {
        return Err(Error::Infeasible {
            device: idx,
            reason: "empty feasible attempt range",
        });
    }
    let mut best = floor.max(1);
    let mut best_cost =
        device_cost(fleet, idx, best, interval_s, offload, env).weighted_cost;
    for s in (floor.max(1) + 1)..=cap {
        let c = device_cost(fleet, idx, s, interval_s, offload, env).weighted_cost;
        if c < best_cost {
            best = s;
            best_cost = c;
        }
    }
    Ok(StageResult {
        value: SensingChoice {
            attempts: best,
            interval_s,
        },
        cost_at_optimum: best_cost,
        feasibility_repair_applied: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use crate::testutil;
    use alloc::vec::Vec;

    #[test]
    fn attempt_floor_cases() {
        assert_eq!(min_attempts_for_pmin(0.9, 0.5).unwrap(), 1);
        // 0.449329: two attempts give 0.6968 < 0.7, three give 0.8330
        assert_eq!(min_attempts_for_pmin(0.449329, 0.7).unwrap(), 3);
        // equality counts as satisfying the floor
        assert_eq!(min_attempts_for_pmin(0.5, 0.75).unwrap(), 2);
        assert!(min_attempts_for_pmin(0.0, 0.5).is_err());
        assert!(min_attempts_for_pmin(0.5, 1.0).is_err());
    }

    #[test]
    fn attempt_floor_is_tight_and_monotone_in_pmin() {
        let mut rng = SimRng::new(11);
        for _ in 0..500 {
            let single = rng.range_f64(0.05, 0.95);
            let p_min = rng.range_f64(0.05, 0.99);
            let s = min_attempts_for_pmin(single, p_min).unwrap();
            assert!(multi_attempt_success_prob(single, s).unwrap() >= p_min);
            if s > 1 {
                assert!(multi_attempt_success_prob(single, s - 1).unwrap() < p_min);
            }
            // raising the floor never lowers the attempt count
            let higher = (p_min + 0.5 * (0.995 - p_min)).min(0.995);
            assert!(min_attempts_for_pmin(single, higher).unwrap() >= s);
        }
    }

    #[test]
    fn immediate_stop_when_cost_rises_from_one() {
        // certain sensing: more attempts only add time and energy
        let mut env = testutil::env();
        env.p_min = 0.5;
        let fleet = [testutil::device(0, 25.0, 0.0)];
        let r = optimize_sensing(&fleet, 0, 2.0, &[false], &env, FeasibilityMode::Strict).unwrap();
        assert_eq!(r.value.attempts, 1);
        assert!(!r.feasibility_repair_applied);
    }

    #[test]
    fn infeasible_when_no_attempt_fits() {
        let env = testutil::env();
        let fleet = [testutil::device(0, 25.0, 10.0)];
        let r = optimize_sensing(&fleet, 0, 0.1, &[false], &env, FeasibilityMode::Repair);
        assert!(matches!(r, Err(Error::Infeasible { .. })));
        assert!(brute_force_sensing(&fleet, 0, 0.1, &[false], &env).is_err());
    }

    #[test]
    fn repair_extends_interval_to_fit_the_floor() {
        let env = testutil::env(); // p_min = 0.7
        let fleet = [testutil::device(0, 25.0, 24.0)]; // single success ~ 0.147
        let floor = min_attempts_for_pmin(sensing_success_prob(&fleet[0], &env), 0.7).unwrap();
        assert!(floor as f64 * 0.2 > 1.0);
        let r = optimize_sensing(&fleet, 0, 1.0, &[false], &env, FeasibilityMode::Repair).unwrap();
        assert!(r.feasibility_repair_applied);
        assert_eq!(r.value.attempts, floor);
        assert!((r.value.interval_s - floor as f64 * 0.2).abs() < 1e-12);
        // the repaired interval really fits the floor
        assert_eq!(attempts_that_fit(r.value.interval_s, 0.2), floor);

        let strict = optimize_sensing(&fleet, 0, 1.0, &[false], &env, FeasibilityMode::Strict);
        assert!(matches!(strict, Err(Error::Infeasible { .. })));
        assert!(brute_force_sensing(&fleet, 0, 1.0, &[false], &env).is_err());
    }

    #[test]
    fn greedy_climb_equals_exhaustive_scan() {
        let env = testutil::env();
        let mut rng = SimRng::new(314);
        for trial in 0..300 {
            let n = rng.range_u32(1, 5) as usize;
            let fleet: Vec<_> = (0..n)
                .map(|i| testutil::device(i, rng.range_f64(5.0, 35.0), rng.range_f64(0.5, 25.0)))
                .collect();
            let offload: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
            let idx = rng.range_u32(0, n as u32) as usize;
            let floor =
                min_attempts_for_pmin(sensing_success_prob(&fleet[idx], &env), env.p_min).unwrap();
            // draw an interval that keeps the floor feasible
            let interval = floor as f64 * 0.2 + rng.range_f64(0.0, 3.0);
            let fast =
                optimize_sensing(&fleet, idx, interval, &offload, &env, FeasibilityMode::Strict)
                    .unwrap();
            let slow = brute_force_sensing(&fleet, idx, interval, &offload, &env).unwrap();
            assert_eq!(
                fast.value.attempts, slow.value.attempts,
                "trial {trial}: climb {} vs scan {}",
                fast.value.attempts, slow.value.attempts
            );
            assert_eq!(fast.cost_at_optimum, slow.cost_at_optimum);
        }
    }

    #[test]
    fn perfect_sensing_picks_one_attempt() {
        let mut env = testutil::env();
        env.p_min = 0.9;
        let fleet = [testutil::device(0, 25.0, 0.0)]; // single success = 1
        let r = optimize_sensing(&fleet, 0, 3.0, &[false], &env, FeasibilityMode::Strict).unwrap();
        assert_eq!(r.value.attempts, 1);
    }

    #[test]
    fn raising_pmin_never_lowers_the_choice() {
        let fleet = [testutil::device(0, 25.0, 15.0)];
        let mut prev = 0u32;
        for p_min in [0.3, 0.5, 0.7, 0.9, 0.99] {
            let mut env = testutil::env();
            env.p_min = p_min;
            let r =
                optimize_sensing(&fleet, 0, 6.0, &[false], &env, FeasibilityMode::Repair).unwrap();
            assert!(r.value.attempts >= prev, "p_min {p_min}");
            prev = r.value.attempts;
        }
    }
}

//! Event-driven Monte Carlo oracle for the closed-form AoI and energy
//! expressions.
//!
//! Samples are triggered on a fixed grid every `interval` seconds. Each
//! sensing-and-processing pass occupies the device for one pass time and
//! succeeds independently with the multi-attempt probability. A failed pass
//! restarts sensing immediately; if a newer sample was generated while the
//! failed chain ran, the stale chain is dropped and the newest sample is
//! processed instead, so at most one update is ever in flight. AoI follows
//! the resulting sawtooth (age of the owning sample at delivery), integrated
//! exactly between events; the first 1% of the horizon is discarded as
//! warm-up. Energy accrues per executed pass and is averaged over the whole
//! horizon.

use alloc::vec::Vec;

use crate::model::{
    multi_attempt_success_prob, per_pass_energy, sensing_success_prob, single_pass_time,
    DeviceProfile, Environment,
};
use crate::rng::SimRng;

const RENEWAL_STREAM_SALT: u64 = 0x5245_4E45_5741_4C00;
/// Expected renewal cycles below which estimates are flagged unstable.
const MIN_EXPECTED_CYCLES: f64 = 1.0e4;
const WARMUP_FRACTION: f64 = 0.01;

/// One completed renewal cycle of the simulated sawtooth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalCycle {
    /// Seconds between this update's generation and the previous delivered
    /// update's generation.
    pub inter_generation_s: f64,
    /// Seconds from this update's generation to its delivery.
    pub system_time_s: f64,
    /// Passes the delivering retry chain used.
    pub attempts: u32,
}

/// The delivered-update sequence of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalTrace {
    pub cycles: Vec<RenewalCycle>,
    pub horizon_s: f64,
}

/// Simulation estimates with the trace that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct RenewalOutcome {
    pub trace: RenewalTrace,
    /// Time-averaged AoI over the post-warm-up horizon, seconds.
    pub avg_aoi_s: f64,
    /// Energy per second over the whole horizon.
    pub avg_energy_w: f64,
    /// Mean passes per delivered update.
    pub mean_attempts: f64,
    /// True when the horizon covers too few expected cycles for stable
    /// estimates.
    pub low_confidence: bool,
}

/// The four numbers that fully determine one device's renewal process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassModel {
    pub pass_time_s: f64,
    pub success_prob: f64,
    pub interval_s: f64,
    pub pass_energy_j: f64,
}

/// Simulate device `idx` of the fleet under the given decisions.
#[allow(clippy::too_many_arguments)]
pub fn simulate_renewal(
    fleet: &[DeviceProfile],
    idx: usize,
    attempts: u32,
    interval_s: f64,
    offload: &[bool],
    env: &Environment,
    horizon_s: f64,
    seed: u64,
) -> RenewalOutcome {
    let single = sensing_success_prob(&fleet[idx], env);
    let model = PassModel {
        pass_time_s: single_pass_time(fleet, idx, attempts, offload, env),
        success_prob: multi_attempt_success_prob(single, attempts)
            .expect("attempts >= 1, prob in (0,1]"),
        interval_s,
        pass_energy_j: per_pass_energy(fleet, idx, attempts, offload, env),
    };
    simulate_renewal_raw(&model, horizon_s, seed)
}

/// Simulate an abstract pass model. Deterministic: a fixed seed reproduces
/// the trace bit for bit.
pub fn simulate_renewal_raw(model: &PassModel, horizon_s: f64, seed: u64) -> RenewalOutcome {
    assert!(model.pass_time_s > 0.0, "pass time must be positive");
    assert!(
        model.success_prob > 0.0 && model.success_prob <= 1.0,
        "success probability must lie in (0, 1]"
    );
    assert!(model.interval_s > 0.0, "interval must be positive");
    assert!(model.pass_energy_j >= 0.0, "pass energy must be nonnegative");
    assert!(horizon_s > 0.0, "horizon must be positive");

    let tau = model.interval_s;
    let pass = model.pass_time_s;
    let warmup = WARMUP_FRACTION * horizon_s;
    let mut rng = SimRng::stream(seed, RENEWAL_STREAM_SALT);

    let mut cycles = Vec::new();
    let mut aoi_integral = 0.0;
    let mut energy_j = 0.0;
    let mut origin = 0.0; // generation time of the last delivered update
    let mut cursor = 0.0; // AoI integration front
    let mut prev_gen: Option<f64> = None;
    let mut total_attempts: u64 = 0;
    let mut deliveries: u64 = 0;

    // in-flight chain: trigger index and the start time of the next pass
    let mut gen_index: u64 = 0;
    let mut t = 0.0;
    let mut chain_attempts: u32 = 0;

    loop {
        let pass_end = t + pass;
        if pass_end > horizon_s {
            break;
        }
        chain_attempts += 1;
        energy_j += model.pass_energy_j;
        let newest = crate::math::floor(pass_end / tau) as u64;
        if rng.next_f64() < model.success_prob {
            let generated_at = gen_index as f64 * tau;
            integrate_aoi(&mut aoi_integral, cursor, pass_end, origin, warmup, horizon_s);
            cursor = pass_end;
            if let Some(prev) = prev_gen {
                cycles.push(RenewalCycle {
                    inter_generation_s: generated_at - prev,
                    system_time_s: pass_end - generated_at,
                    attempts: chain_attempts,
                });
            }
            total_attempts += chain_attempts as u64;
            deliveries += 1;
            origin = generated_at;
            prev_gen = Some(generated_at);
            chain_attempts = 0;
            if newest > gen_index {
                // a newer sample is already waiting; process it right away
                gen_index = newest;
                t = pass_end;
            } else {
                gen_index += 1;
                t = gen_index as f64 * tau;
            }
        } else if newest > gen_index {
            // stale chain: drop it and start on the newest sample
            gen_index = newest;
            t = pass_end;
            chain_attempts = 0;
        } else {
            // no fresher sample yet: re-sense immediately
            t = pass_end;
        }
    }
    integrate_aoi(&mut aoi_integral, cursor, horizon_s, origin, warmup, horizon_s);

    let mean_attempts = if deliveries > 0 {
        total_attempts as f64 / deliveries as f64
    } else {
        0.0
    };
    RenewalOutcome {
        trace: RenewalTrace {
            cycles,
            horizon_s,
        },
        avg_aoi_s: aoi_integral / (horizon_s - warmup),
        avg_energy_w: energy_j / horizon_s,
        mean_attempts,
        low_confidence: horizon_s / tau < MIN_EXPECTED_CYCLES,
    }
}

/// Add the exact integral of `t - origin` over `[from, to]` clipped to the
/// measured window `[warmup, horizon]`.
fn integrate_aoi(acc: &mut f64, from: f64, to: f64, origin: f64, warmup: f64, horizon: f64) {
    let a = if from > warmup { from } else { warmup };
    let b = if to < horizon { to } else { horizon };
    if b > a {
        *acc += (b - a) * (0.5 * (a + b) - origin);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;
    use alloc::vec;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs()
    }

    #[test]
    fn fixed_seed_reproduces_trace_bit_for_bit() {
        let model = PassModel {
            pass_time_s: 0.3,
            success_prob: 0.6,
            interval_s: 1.0,
            pass_energy_j: 2.0e-3,
        };
        let a = simulate_renewal_raw(&model, 5.0e3, 99);
        let b = simulate_renewal_raw(&model, 5.0e3, 99);
        assert_eq!(a, b);
        let c = simulate_renewal_raw(&model, 5.0e3, 100);
        assert_ne!(a, c);
    }

    #[test]
    fn deterministic_passes_match_closed_form_within_one_percent() {
        // P = 1 and pass <= interval: avg AoI -> interval/2 + pass, for
        // every tested configuration
        for (pass_time_s, interval_s) in
            [(0.4, 1.25), (0.2, 0.5), (0.9, 1.0), (0.05, 2.0), (1.0, 1.0)]
        {
            let model = PassModel {
                pass_time_s,
                success_prob: 1.0,
                interval_s,
                pass_energy_j: 1.0e-3,
            };
            let out = simulate_renewal_raw(&model, interval_s * 1.0e5, 7);
            assert!(!out.low_confidence);
            let analytical = interval_s / 2.0 + pass_time_s;
            assert!(
                rel_err(out.avg_aoi_s, analytical) < 0.01,
                "pass {pass_time_s}, interval {interval_s}: aoi = {}",
                out.avg_aoi_s
            );
            // one pass per interval: energy matches up to horizon edges
            assert!(rel_err(out.avg_energy_w, 1.0e-3 / interval_s) < 0.01);
            assert_eq!(out.mean_attempts, 1.0);
        }
    }

    #[test]
    fn retrying_process_matches_closed_form_within_two_percent() {
        // P = 0.5 with 2 * pass < interval
        let model = PassModel {
            pass_time_s: 0.3,
            success_prob: 0.5,
            interval_s: 2.0,
            pass_energy_j: 0.0,
        };
        let out = simulate_renewal_raw(&model, 2.0 * 1.0e5, 31);
        let analytical = 2.0 / 2.0 + 0.3 / 0.5;
        assert!(rel_err(out.avg_aoi_s, analytical) < 0.02, "aoi = {}", out.avg_aoi_s);
    }

    #[test]
    fn retry_counts_are_geometric() {
        // far from the stale-drop regime the chain lengths are plain
        // geometric draws: mean ~= 1/P
        let model = PassModel {
            pass_time_s: 0.05,
            success_prob: 0.4,
            interval_s: 2.0,
            pass_energy_j: 0.0,
        };
        let out = simulate_renewal_raw(&model, 2.0 * 1.0e5, 13);
        assert!(rel_err(out.mean_attempts, 1.0 / 0.4) < 0.02, "mean = {}", out.mean_attempts);
    }

    #[test]
    fn trace_invariants_hold() {
        let model = PassModel {
            pass_time_s: 0.3,
            success_prob: 0.7,
            interval_s: 1.0,
            pass_energy_j: 1.0e-4,
        };
        let out = simulate_renewal_raw(&model, 2.0e4, 5);
        assert!(!out.trace.cycles.is_empty());
        for c in &out.trace.cycles {
            assert!(c.inter_generation_s > 0.0);
            assert!(c.system_time_s > 0.0);
            assert!(c.attempts >= 1);
        }
    }

    #[test]
    fn collision_free_regime_generates_on_the_grid() {
        let model = PassModel {
            pass_time_s: 0.2,
            success_prob: 1.0,
            interval_s: 1.0,
            pass_energy_j: 0.0,
        };
        let out = simulate_renewal_raw(&model, 1.0e4, 3);
        for c in &out.trace.cycles {
            assert!((c.inter_generation_s - 1.0).abs() < 1e-9);
            assert!((c.system_time_s - 0.2).abs() < 1e-9);
        }
    }

    #[test]
    fn short_horizon_is_flagged() {
        let model = PassModel {
            pass_time_s: 0.2,
            success_prob: 0.9,
            interval_s: 1.0,
            pass_energy_j: 0.0,
        };
        assert!(simulate_renewal_raw(&model, 50.0, 1).low_confidence);
        assert!(!simulate_renewal_raw(&model, 2.0e4, 1).low_confidence);
    }

    #[test]
    fn fleet_wrapper_matches_closed_forms_in_regime() {
        let env = testutil::env();
        let fleet = vec![testutil::device(0, 25.0, 5.0)]; // single success ~ 0.67
        let attempts = 3;
        let interval = 4.0;
        let out = simulate_renewal(&fleet, 0, attempts, interval, &[false], &env, 4.0 * 5.0e4, 17);
        let aoi = crate::cost::average_aoi(&fleet, 0, attempts, interval, &[false], &env);
        assert!(rel_err(out.avg_aoi_s, aoi) < 0.02, "sim {} vs analytic {}", out.avg_aoi_s, aoi);
    }
}

//! Oracle suites: independent cross-checks of every analytical formula and
//! optimizer stage, at desk scale.
//!
//! Each suite draws random instances from the default scenario ranges,
//! checks the fast path against an independent route (Monte Carlo
//! simulation, direct draws, exhaustive scans, numerical minimization,
//! enumeration of equilibria), and reports per-case failures.

use misco_core::cost::{average_aoi, device_cost, expected_completion_time};
use misco_core::game::{
    best_response, exhaustive_offload_oracle, interference_at, offload_threshold,
    run_best_response_dynamics, OffloadThreshold,
};
use misco_core::model::{
    multi_attempt_success_prob, sensing_success_prob, single_pass_time, DeviceProfile,
    Environment,
};
use misco_core::renewal::{simulate_renewal, RenewalTrace};
use misco_core::rng::SimRng;
use misco_core::sampling::optimal_sampling_interval;
use misco_core::sensing::{brute_force_sensing, min_attempts_for_pmin, optimize_sensing};
use misco_core::FeasibilityMode;

use crate::scenario::{generate_scenario, ScenarioSpec};

/// Result of one suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    /// One-line extra statistics (price of anarchy, worst deviation, ...).
    pub detail: String,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn scenario_fleet(n: usize, seed: u64) -> (Vec<DeviceProfile>, Environment) {
    let spec = ScenarioSpec {
        device_count: n,
        seed,
        ..ScenarioSpec::default()
    };
    generate_scenario(&spec).expect("default scenario parameters are valid")
}

/// Analytical average AoI versus the event-driven simulation, on
/// single-device configurations inside the regime where the closed form is
/// tight (success probability at least one half, expected completion within
/// half the interval).
pub fn aoi_suite(configs: usize, cycles: f64, tolerance: f64, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut rng = SimRng::stream(seed, 0xA01);
    let mut worst = 0.0f64;
    for case in 0..configs {
        let (fleet, env) = scenario_fleet(1, rng.next_u64());
        let offload = [rng.gen_bool(0.5)];
        let single = sensing_success_prob(&fleet[0], &env);
        let mut attempts = rng.range_u32(1, 4);
        while multi_attempt_success_prob(single, attempts).unwrap() < 0.5 && attempts < 64 {
            attempts += 1;
        }
        let p = multi_attempt_success_prob(single, attempts).unwrap();
        let pass = single_pass_time(&fleet, 0, attempts, &offload, &env);
        let interval = (2.0 * pass / p) * rng.range_f64(1.0, 4.0);
        let horizon = cycles * interval;

        let analytical = average_aoi(&fleet, 0, attempts, interval, &offload, &env);
        let sim = simulate_renewal(
            &fleet,
            0,
            attempts,
            interval,
            &offload,
            &env,
            horizon,
            rng.next_u64(),
        );
        let rel = (sim.avg_aoi_s - analytical).abs() / analytical;
        worst = worst.max(rel);
        if rel > tolerance {
            failures.push(format!(
                "case {case}: analytic {analytical:.6} vs simulated {:.6} (rel {rel:.4})",
                sim.avg_aoi_s
            ));
        }
    }
    SuiteOutcome {
        name: "aoi",
        cases: configs,
        failures,
        detail: format!("worst relative deviation {worst:.5}"),
    }
}

/// Expected completion time versus the mean of independent geometric retry
/// draws.
pub fn retry_suite(draws: u64, tolerance: f64, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut rng = SimRng::stream(seed, 0xA02);
    let pass_time = 1.7;
    let mut worst = 0.0f64;
    for &p in &[0.25, 0.5, 0.75, 0.9] {
        let mut total_passes: u64 = 0;
        for _ in 0..draws {
            let mut k = 1u64;
            while rng.next_f64() >= p {
                k += 1;
            }
            total_passes += k;
        }
        let empirical = total_passes as f64 / draws as f64 * pass_time;
        let analytical = expected_completion_time(pass_time, p).unwrap();
        let rel = (empirical - analytical).abs() / analytical;
        worst = worst.max(rel);
        if rel > tolerance {
            failures.push(format!(
                "p = {p}: analytic {analytical:.6} vs sampled {empirical:.6} (rel {rel:.5})"
            ));
        }
    }
    SuiteOutcome {
        name: "retry",
        cases: 4,
        failures,
        detail: format!("worst relative deviation {worst:.5}"),
    }
}

/// Greedy attempt optimization versus the exhaustive scan; exact equality
/// of both the argmin and its cost.
pub fn sensing_suite(instances: usize, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut rng = SimRng::stream(seed, 0xA03);
    for case in 0..instances {
        let n = rng.range_u32(1, 7) as usize;
        let (fleet, env) = scenario_fleet(n, rng.next_u64());
        let offload: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let idx = rng.range_u32(0, n as u32) as usize;
        let floor =
            min_attempts_for_pmin(sensing_success_prob(&fleet[idx], &env), env.p_min).unwrap();
        let interval = floor as f64 * fleet[idx].unit_sense_time_s + rng.range_f64(0.0, 3.0);
        let fast = optimize_sensing(&fleet, idx, interval, &offload, &env, FeasibilityMode::Strict);
        let slow = brute_force_sensing(&fleet, idx, interval, &offload, &env);
        match (fast, slow) {
            (Ok(a), Ok(b)) => {
                if a.value.attempts != b.value.attempts || a.cost_at_optimum != b.cost_at_optimum {
                    failures.push(format!(
                        "case {case}: greedy {} @ {} vs scan {} @ {}",
                        a.value.attempts, a.cost_at_optimum, b.value.attempts, b.cost_at_optimum
                    ));
                }
            }
            (Err(_), Err(_)) => {}
            (a, b) => failures.push(format!("case {case}: feasibility disagreement {a:?} vs {b:?}")),
        }
    }
    SuiteOutcome {
        name: "sensing",
        cases: instances,
        failures,
        detail: String::new(),
    }
}

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

/// Closed-form interval optimum versus golden-section minimization of the
/// same per-device cost.
pub fn sampling_suite(instances: usize, tolerance: f64, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut rng = SimRng::stream(seed, 0xA04);
    let mut worst = 0.0f64;
    for case in 0..instances {
        let n = rng.range_u32(1, 5) as usize;
        let (fleet, env) = scenario_fleet(n, rng.next_u64());
        let offload: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        let idx = rng.range_u32(0, n as u32) as usize;
        let attempts = rng.range_u32(1, 9);
        let closed = optimal_sampling_interval(&fleet, idx, attempts, &offload, &env);
        let objective =
            |tau: f64| device_cost(&fleet, idx, attempts, tau, &offload, &env).weighted_cost;
        let numeric = golden_section(
            env.tau_min_s,
            10.0 * closed.value.max(env.tau_min_s),
            &objective,
        )
        .max(env.tau_min_s);
        let rel = (numeric - closed.value).abs() / closed.value;
        worst = worst.max(rel);
        if rel > tolerance {
            failures.push(format!(
                "case {case}: closed {} vs numeric {} (rel {rel:.2e})",
                closed.value, numeric
            ));
        }
    }
    SuiteOutcome {
        name: "sampling",
        cases: instances,
        failures,
        detail: format!("worst relative deviation {worst:.2e}"),
    }
}

/// Best-response dynamics versus exhaustive equilibrium enumeration:
/// termination, membership of the returned pattern in the Nash set, and a
/// strictly decreasing potential at every accepted update. Also reports the
/// price-of-anarchy statistics.
pub fn game_suite(instances: usize, max_devices: usize, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut rng = SimRng::stream(seed, 0xA05);
    let mut poa_sum = 0.0;
    let mut poa_max = 0.0f64;
    for case in 0..instances {
        let n = rng.range_u32(2, max_devices as u32 + 1) as usize;
        let (fleet, env) = scenario_fleet(n, rng.next_u64());
        let attempts: Vec<u32> = (0..n).map(|_| rng.range_u32(1, 7)).collect();
        let intervals: Vec<f64> = (0..n).map(|_| rng.range_f64(0.6, 2.5)).collect();
        let outcome = match run_best_response_dynamics(
            &fleet,
            &attempts,
            &intervals,
            &env,
            misco_core::game::default_slot_cap(n),
        ) {
            Ok(o) => o,
            Err(e) => {
                failures.push(format!("case {case}: dynamics failed: {e}"));
                continue;
            }
        };
        for step in &outcome.steps {
            if step.potential_after >= step.potential_before
                || step.potential_after.is_nan()
            {
                failures.push(format!(
                    "case {case}: potential rose at slot {} ({} -> {})",
                    step.slot, step.potential_before, step.potential_after
                ));
            }
        }
        let oracle = exhaustive_offload_oracle(&fleet, &attempts, &intervals, &env)
            .expect("instance sizes stay within the oracle bound");
        if !oracle.nash_contains(&outcome.offload) {
            failures.push(format!(
                "case {case}: returned pattern is not a Nash equilibrium"
            ));
            continue;
        }
        let achieved: f64 = (0..n)
            .map(|i| {
                device_cost(&fleet, i, attempts[i], intervals[i], &outcome.offload, &env)
                    .weighted_cost
            })
            .sum();
        let ratio = achieved / oracle.optimum_cost;
        poa_sum += ratio;
        poa_max = poa_max.max(ratio);
    }
    SuiteOutcome {
        name: "game",
        cases: instances,
        failures,
        detail: format!(
            "price of anarchy: mean {:.4}, max {:.4}",
            poa_sum / instances as f64,
            poa_max
        ),
    }
}

/// Threshold-form best response versus the direct two-way cost comparison,
/// knife edges excluded.
pub fn threshold_suite(instances: usize, seed: u64) -> SuiteOutcome {
    let mut failures = Vec::new();
    let mut rng = SimRng::stream(seed, 0xA06);
    let mut checked = 0usize;
    for case in 0..instances {
        let n = rng.range_u32(2, 9) as usize;
        let (fleet, env) = scenario_fleet(n, rng.next_u64());
        let mut offload: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let idx = rng.range_u32(0, n as u32) as usize;
        let attempts = rng.range_u32(1, 9);
        let interval = rng.range_f64(0.5, 3.0);
        if let OffloadThreshold::Level(level) =
            offload_threshold(&fleet, idx, attempts, interval, &env)
        {
            let interference = interference_at(&fleet, idx, &offload, &env);
            if (interference - level).abs() <= 1.0e-9 {
                continue; // knife edge, excluded by contract
            }
        }
        checked += 1;
        let via_threshold = best_response(&fleet, idx, &offload, attempts, interval, &env);
        offload[idx] = true;
        let c_off = device_cost(&fleet, idx, attempts, interval, &offload, &env).weighted_cost;
        offload[idx] = false;
        let c_local = device_cost(&fleet, idx, attempts, interval, &offload, &env).weighted_cost;
        if via_threshold != (c_off < c_local) {
            failures.push(format!(
                "case {case}: threshold says {via_threshold}, costs say {} ({c_off} vs {c_local})",
                c_off < c_local
            ));
        }
    }
    SuiteOutcome {
        name: "threshold",
        cases: checked,
        failures,
        detail: format!("{checked} of {instances} instances off the knife edge"),
    }
}

/// A small deterministic renewal trace for the flat-table export.
pub fn sample_renewal_trace(seed: u64) -> RenewalTrace {
    let (fleet, env) = scenario_fleet(1, seed);
    simulate_renewal(&fleet, 0, 2, 2.0, &[false], &env, 2.0e4, seed).trace
}

/// Run the named suites ("all" for everything) at reduced or full scale.
pub fn run_suites(which: &str, seed: u64, quick: bool) -> Result<Vec<SuiteOutcome>, String> {
    let (aoi_configs, cycles) = if quick { (10, 2.0e4) } else { (50, 1.0e5) };
    let draws = if quick { 100_000 } else { 1_000_000 };
    let instances = if quick { 200 } else { 1000 };
    let game_instances = if quick { 40 } else { 200 };
    let pair_instances = 200;

    let mut outcomes = Vec::new();
    let run_all = which == "all";
    if run_all || which == "aoi" {
        outcomes.push(aoi_suite(aoi_configs, cycles, 0.02, seed));
    }
    if run_all || which == "retry" {
        outcomes.push(retry_suite(draws, 0.01, seed));
    }
    if run_all || which == "sensing" {
        outcomes.push(sensing_suite(instances, seed));
    }
    if run_all || which == "sampling" {
        outcomes.push(sampling_suite(instances, 1.0e-6, seed));
    }
    if run_all || which == "game" {
        outcomes.push(game_suite(game_instances, if quick { 8 } else { 12 }, seed));
    }
    if run_all || which == "threshold" {
        outcomes.push(threshold_suite(pair_instances, seed));
    }
    if outcomes.is_empty() {
        return Err(format!(
            "unknown suite '{which}' (expected all, aoi, retry, sensing, sampling, game, threshold)"
        ));
    }
    Ok(outcomes)
}

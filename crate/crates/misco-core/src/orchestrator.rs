//! Outer block-coordinate loop and the comparison policies.
//!
//! The main loop cycles three stages (sampling interval in closed form,
//! sensing attempts by greedy enumeration, offload bits by best-response
//! dynamics) from a random feasible start until the total cost settles.
//! Four simpler policies share the same machinery for benchmarking:
//!
//! * `gsa` pins every device to the fewest attempts that hit the quality
//!   floor, then tunes intervals and offloading once.
//! * `isa` replaces the interval optimum with the zero-wait rule (sample as
//!   soon as the previous update is expected to finish) and iterates.
//! * `brco` tunes intervals/attempts under all-local, then plays damped
//!   probabilistic best responses on mean-field interference and rounds the
//!   converged probabilities.
//! * `aeco` offloads everyone the admission filter lets in, then tunes
//!   intervals/attempts for that assignment.

use alloc::vec;
use alloc::vec::Vec;

use crate::cost::system_cost;
use crate::error::Error;
use crate::game::{admission_filter, costs_at_interference, default_slot_cap, run_best_response_dynamics};
use crate::math;
use crate::model::{
    multi_attempt_success_prob, sensing_success_prob, single_pass_time, validate_fleet,
    DecisionState, DeviceProfile, Environment,
};
use crate::rng::SimRng;
use crate::sampling::optimal_sampling_interval;
use crate::sensing::{attempts_that_fit, min_attempts_for_pmin, optimize_sensing};
use crate::FeasibilityMode;

const INIT_STREAM_SALT: u64 = 0x4D49_5343_4F00_0001;

/// One accepted outer iterate: intervals, attempts, offload bits, repair
/// flags.
type Iterate = (Vec<f64>, Vec<u32>, Vec<bool>, Vec<bool>);

/// The five decision policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Misco,
    Gsa,
    Isa,
    Brco,
    Aeco,
}

impl Policy {
    pub const ALL: [Policy; 5] = [
        Policy::Misco,
        Policy::Gsa,
        Policy::Isa,
        Policy::Brco,
        Policy::Aeco,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Policy::Misco => "misco",
            Policy::Gsa => "gsa",
            Policy::Isa => "isa",
            Policy::Brco => "brco",
            Policy::Aeco => "aeco",
        }
    }

    pub fn from_label(label: &str) -> Option<Policy> {
        Policy::ALL.iter().copied().find(|p| p.label() == label)
    }
}

/// Knobs of the outer loop (and of the policies that reuse parts of it).
#[derive(Debug, Clone, PartialEq)]
pub struct MiscoConfig {
    /// Stop once consecutive total costs differ by less than this.
    pub epsilon: f64,
    pub max_outer_iterations: u32,
    /// Seed for the random initial decisions.
    pub rng_seed: u64,
    pub feasibility: FeasibilityMode,
    /// Damping of the probabilistic best-response updates (`brco`).
    pub brco_damping: f64,
    /// Probability-vector convergence tolerance (`brco`).
    pub brco_tolerance: f64,
    pub brco_max_rounds: u32,
}

impl Default for MiscoConfig {
    fn default() -> Self {
        Self {
            epsilon: 1.0e-4,
            max_outer_iterations: 100,
            rng_seed: 0,
            feasibility: FeasibilityMode::Repair,
            brco_damping: 0.5,
            brco_tolerance: 1.0e-4,
            brco_max_rounds: 500,
        }
    }
}

impl MiscoConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(Error::Domain("epsilon must be positive"));
        }
        if self.max_outer_iterations < 1 {
            return Err(Error::Domain("need at least one outer iteration"));
        }
        if self.brco_damping <= 0.0 || self.brco_damping > 1.0 || self.brco_damping.is_nan() {
            return Err(Error::Domain("brco damping must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// What one policy run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub policy: Policy,
    pub decisions: DecisionState,
    /// Total cost after each outer iteration (single entry for one-pass
    /// policies).
    pub cost_trajectory: Vec<f64>,
    /// Offload-stage slots (or probability rounds) per outer iteration.
    pub inner_iterations: Vec<u32>,
    pub converged: bool,
    /// Per-device flag: the sensing stage had to extend the interval to fit
    /// the quality floor.
    pub repaired: Vec<bool>,
    /// Filled by callers that time the run; the library leaves it at zero
    /// to stay deterministic.
    pub wall_clock_s: f64,
}

impl RunReport {
    pub fn final_cost(&self) -> f64 {
        *self
            .cost_trajectory
            .last()
            .expect("every run records at least one cost")
    }

    pub fn outer_iterations(&self) -> u32 {
        self.cost_trajectory.len() as u32
    }

    pub fn total_inner_iterations(&self) -> u32 {
        self.inner_iterations.iter().sum()
    }
}

/// Post-hoc constraint check of a full decision state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstraintReport {
    /// Devices whose attempt count is zero or does not fit the interval.
    pub attempts_outside_interval: Vec<usize>,
    /// Devices sampling faster than the configured floor.
    pub interval_below_min: Vec<usize>,
    /// Devices whose success probability misses the quality floor.
    pub sensing_floor_unmet: Vec<usize>,
    /// Offloaded data exceeds the edge capacity.
    pub edge_capacity_exceeded: bool,
}

impl ConstraintReport {
    pub fn all_satisfied(&self) -> bool {
        self.attempts_outside_interval.is_empty()
            && self.interval_below_min.is_empty()
            && self.sensing_floor_unmet.is_empty()
            && !self.edge_capacity_exceeded
    }
}

pub fn check_constraints(
    fleet: &[DeviceProfile],
    env: &Environment,
    decisions: &DecisionState,
) -> ConstraintReport {
    let mut report = ConstraintReport::default();
    let mut load = 0.0;
    for (i, device) in fleet.iter().enumerate() {
        let s = decisions.attempts[i];
        let interval = decisions.intervals_s[i];
        if s < 1 || s > attempts_that_fit(interval, device.unit_sense_time_s) {
            report.attempts_outside_interval.push(i);
        }
        if interval < env.tau_min_s {
            report.interval_below_min.push(i);
        }
        let p = multi_attempt_success_prob(sensing_success_prob(device, env), s.max(1))
            .expect("probability in (0,1]");
        if p < env.p_min {
            report.sensing_floor_unmet.push(i);
        }
        if decisions.offload[i] {
            load += device.data_size_bits;
        }
    }
    report.edge_capacity_exceeded = load > env.edge_data_threshold_bits;
    report
}

/// Run the full multi-stage loop.
pub fn run_misco(
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
) -> Result<RunReport, Error> {
    run_policy(Policy::Misco, fleet, env, config)
}

/// Run one of the comparison policies (or the main loop via
/// [`Policy::Misco`]).
pub fn run_baseline(
    policy: Policy,
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
) -> Result<RunReport, Error> {
    run_policy(policy, fleet, env, config)
}

pub fn run_policy(
    policy: Policy,
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
) -> Result<RunReport, Error> {
    validate_fleet(fleet)?;
    env.validate()?;
    config.validate()?;
    match policy {
        Policy::Misco => iterate_stages(fleet, env, config, Policy::Misco),
        Policy::Isa => iterate_stages(fleet, env, config, Policy::Isa),
        Policy::Gsa => run_gsa(fleet, env, config),
        Policy::Brco => run_brco(fleet, env, config),
        Policy::Aeco => run_aeco(fleet, env, config),
    }
}

/// Random feasible starting point: intervals uniform just above the floor,
/// one to five attempts clipped to fit, offload bits by fair coin pushed
/// through the admission filter.
fn random_init(
    fleet: &[DeviceProfile],
    env: &Environment,
    rng: &mut SimRng,
) -> (Vec<f64>, Vec<u32>, Vec<bool>) {
    let n = fleet.len();
    let mut intervals = Vec::with_capacity(n);
    let mut attempts = Vec::with_capacity(n);
    for device in fleet {
        let mut interval = rng.range_f64(env.tau_min_s, 4.0 * env.tau_min_s);
        if interval < device.unit_sense_time_s {
            interval = device.unit_sense_time_s;
        }
        let cap = attempts_that_fit(interval, device.unit_sense_time_s).max(1);
        intervals.push(interval);
        attempts.push(rng.range_u32(1, 6).min(cap));
    }
    let coins: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let offload = admission_filter(fleet, &coins, env);
    (intervals, attempts, offload)
}

/// The shared outer loop; the interval stage is the closed form for the
/// main policy and the zero-wait rule for `isa`.
fn iterate_stages(
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
    policy: Policy,
) -> Result<RunReport, Error> {
    let n = fleet.len();
    let mut rng = SimRng::stream(config.rng_seed, INIT_STREAM_SALT);
    let (mut intervals, mut attempts, mut offload) = random_init(fleet, env, &mut rng);
    let mut repaired = vec![false; n];

    let mut trajectory: Vec<f64> = Vec::new();
    let mut inner = Vec::new();
    let mut converged = false;
    let mut best: Option<(f64, DecisionState, Vec<bool>)> = None;
    let mut accepted: Option<Iterate> = None;

    for _ in 0..config.max_outer_iterations {
        // interval stage
        for i in 0..n {
            intervals[i] = match policy {
                Policy::Isa => {
                    let p = multi_attempt_success_prob(
                        sensing_success_prob(&fleet[i], env),
                        attempts[i],
                    )
                    .expect("probability in (0,1]");
                    let pass = single_pass_time(fleet, i, attempts[i], &offload, env);
                    (pass / p).max(env.tau_min_s)
                }
                _ => optimal_sampling_interval(fleet, i, attempts[i], &offload, env).value,
            };
        }
        // attempts stage (may extend intervals to fit the quality floor)
        for i in 0..n {
            let stage =
                optimize_sensing(fleet, i, intervals[i], &offload, env, config.feasibility)?;
            attempts[i] = stage.value.attempts;
            intervals[i] = stage.value.interval_s;
            repaired[i] = stage.feasibility_repair_applied;
        }
        // offload stage, cold-started from all-local
        let game =
            run_best_response_dynamics(fleet, &attempts, &intervals, env, default_slot_cap(n))?;
        inner.push(game.slots);

        // Selfish dynamics select among multiple equilibria with no
        // total-cost guarantee, so a refreshed equilibrium can cost more
        // than the incumbent pattern under the new intervals/attempts.
        // Keep whichever is cheaper; if even that would raise the total
        // (interval rules that are policies rather than minimizers can do
        // this), revert to the previous iterate and stop.
        let fresh = DecisionState::new(attempts.clone(), intervals.clone(), game.offload.clone());
        let fresh_cost = system_cost(fleet, &fresh, env);
        let (cost, decisions) = if trajectory.is_empty() {
            (fresh_cost, fresh)
        } else {
            let incumbent =
                DecisionState::new(attempts.clone(), intervals.clone(), offload.clone());
            let incumbent_cost = system_cost(fleet, &incumbent, env);
            if fresh_cost <= incumbent_cost {
                (fresh_cost, fresh)
            } else {
                (incumbent_cost, incumbent)
            }
        };
        if let Some(&previous) = trajectory.last() {
            if cost > previous {
                let (pi, pa, po, pr) = accepted.expect("a previous iterate was accepted");
                intervals = pi;
                attempts = pa;
                offload = po;
                repaired = pr;
                converged = true;
                break;
            }
        }
        offload = decisions.offload.clone();
        trajectory.push(cost);
        accepted = Some((
            intervals.clone(),
            attempts.clone(),
            offload.clone(),
            repaired.clone(),
        ));
        if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
            best = Some((cost, decisions, repaired.clone()));
        }
        let len = trajectory.len();
        if len >= 2 && math::abs(trajectory[len - 1] - trajectory[len - 2]) < config.epsilon {
            converged = true;
            break;
        }
    }

    let (decisions, repaired) = if converged {
        (DecisionState::new(attempts, intervals, offload), repaired)
    } else {
        // cap hit: hand back the best decisions seen
        let (_, decisions, repaired) = best.expect("at least one outer iteration ran");
        (decisions, repaired)
    };
    Ok(RunReport {
        policy,
        decisions,
        cost_trajectory: trajectory,
        inner_iterations: inner,
        converged,
        repaired,
        wall_clock_s: 0.0,
    })
}

/// Greedy sensing: the fewest attempts that reach the quality floor, the
/// closed-form interval for that count (extended if the floor does not
/// fit), one dynamics pass for the offload bits.
fn run_gsa(
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
) -> Result<RunReport, Error> {
    let n = fleet.len();
    let all_local = vec![false; n];
    let mut attempts = Vec::with_capacity(n);
    let mut intervals = Vec::with_capacity(n);
    let mut repaired = vec![false; n];
    for (i, device) in fleet.iter().enumerate() {
        let floor = min_attempts_for_pmin(sensing_success_prob(device, env), env.p_min)?;
        attempts.push(floor);
        let mut interval = optimal_sampling_interval(fleet, i, floor, &all_local, env).value;
        if attempts_that_fit(interval, device.unit_sense_time_s) < floor {
            match config.feasibility {
                FeasibilityMode::Strict => {
                    return Err(Error::Infeasible {
                        device: i,
                        reason: "quality floor needs more attempts than fit the interval",
                    })
                }
                FeasibilityMode::Repair => {
                    interval = floor as f64 * device.unit_sense_time_s;
                    repaired[i] = true;
                }
            }
        }
        intervals.push(interval);
    }
    let game =
        run_best_response_dynamics(fleet, &attempts, &intervals, env, default_slot_cap(n))?;
    let decisions = DecisionState::new(attempts, intervals, game.offload);
    let cost = system_cost(fleet, &decisions, env);
    Ok(RunReport {
        policy: Policy::Gsa,
        decisions,
        cost_trajectory: vec![cost],
        inner_iterations: vec![game.slots],
        converged: true,
        repaired,
        wall_clock_s: 0.0,
    })
}

/// Intervals, attempts, repair flags at a stage fixed point.
type StageFixedPoint = (Vec<f64>, Vec<u32>, Vec<bool>);

/// Interval/attempt fixed point for a frozen offload pattern. The attempt
/// count only grows along the loop, so this settles in a few rounds.
fn converge_intervals_attempts(
    fleet: &[DeviceProfile],
    env: &Environment,
    offload: &[bool],
    mode: FeasibilityMode,
) -> Result<StageFixedPoint, Error> {
    let n = fleet.len();
    let mut attempts = vec![1u32; n];
    let mut intervals = vec![0.0f64; n];
    let mut repaired = vec![false; n];
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..n {
            let interval = optimal_sampling_interval(fleet, i, attempts[i], offload, env).value;
            let stage = optimize_sensing(fleet, i, interval, offload, env, mode)?;
            if stage.value.attempts != attempts[i] || stage.value.interval_s != intervals[i] {
                changed = true;
            }
            attempts[i] = stage.value.attempts;
            intervals[i] = stage.value.interval_s;
            repaired[i] = stage.feasibility_repair_applied;
        }
        if !changed {
            break;
        }
    }
    Ok((intervals, attempts, repaired))
}

/// Probabilistic best responses: every device holds an offload probability,
/// repeatedly best-responds to the mean-field interference implied by the
/// others' probabilities (damped), and finally offloads when its converged
/// probability exceeds one half.
fn run_brco(
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
) -> Result<RunReport, Error> {
    let n = fleet.len();
    let all_local = vec![false; n];
    let (intervals, attempts, repaired) =
        converge_intervals_attempts(fleet, env, &all_local, config.feasibility)?;

    let rx: Vec<f64> = fleet.iter().map(|d| d.rx_power_w(env)).collect();
    let mut probs = vec![0.5f64; n];
    let mut rounds = 0u32;
    let mut settled = false;
    while rounds < config.brco_max_rounds {
        rounds += 1;
        let previous = probs.clone();
        let mut max_delta = 0.0f64;
        for i in 0..n {
            let mean_interference: f64 = (0..n)
                .filter(|&m| m != i)
                .map(|m| previous[m] * rx[m])
                .sum();
            let (c_off, c_local) = costs_at_interference(
                &fleet[i],
                attempts[i],
                intervals[i],
                mean_interference,
                env,
            );
            let target = if c_off < c_local { 1.0 } else { 0.0 };
            probs[i] = previous[i] + config.brco_damping * (target - previous[i]);
            max_delta = max_delta.max(math::abs(probs[i] - previous[i]));
        }
        if max_delta < config.brco_tolerance {
            settled = true;
            break;
        }
    }
    let requested: Vec<bool> = probs.iter().map(|&q| q > 0.5).collect();
    let offload = admission_filter(fleet, &requested, env);
    let decisions = DecisionState::new(attempts, intervals, offload);
    let cost = system_cost(fleet, &decisions, env);
    Ok(RunReport {
        policy: Policy::Brco,
        decisions,
        cost_trajectory: vec![cost],
        inner_iterations: vec![rounds],
        converged: settled,
        repaired,
        wall_clock_s: 0.0,
    })
}

/// Offload everything the admission filter accepts, then tune intervals and
/// attempts for that assignment.
fn run_aeco(
    fleet: &[DeviceProfile],
    env: &Environment,
    config: &MiscoConfig,
) -> Result<RunReport, Error> {
    let n = fleet.len();
    let requested = vec![true; n];
    let offload = admission_filter(fleet, &requested, env);
    let (intervals, attempts, repaired) =
        converge_intervals_attempts(fleet, env, &offload, config.feasibility)?;
    let decisions = DecisionState::new(attempts, intervals, offload);
    let cost = system_cost(fleet, &decisions, env);
    Ok(RunReport {
        policy: Policy::Aeco,
        decisions,
        cost_trajectory: vec![cost],
        inner_iterations: vec![0],
        converged: true,
        repaired,
        wall_clock_s: 0.0,
    })
}

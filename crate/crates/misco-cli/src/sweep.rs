//! Experiment sweeps: run a grid of scenarios x policies x replications and
//! collect one result row per run.
//!
//! Rows come out in deterministic order (sweep value, then policy, then
//! replication) with per-run RNG streams keyed by the sweep point and
//! replication only, so every policy sees the identical fleet and paired
//! comparisons are meaningful.

use std::time::Instant;

use misco_core::cost::device_cost;
use misco_core::model::{DeviceProfile, Environment};
use misco_core::orchestrator::{run_policy, MiscoConfig, Policy, RunReport};
use misco_core::rng::SimRng;

use crate::config::{validate_sweep_value, ConfigError, SweepAxis};
use crate::scenario::{generate_scenario, ScenarioSpec};

/// One run's results. `status` is `ok`, `non-converged`, or `error: ...`;
/// metric fields of failed runs are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub policy: &'static str,
    pub sweep_value: f64,
    pub system_cost: f64,
    pub mean_aoi_s: f64,
    pub mean_energy_w: f64,
    pub sense_time_share: f64,
    pub process_time_share: f64,
    pub inner_iterations: u32,
    pub outer_iterations: u32,
    pub seed: u64,
    pub status: String,
}

/// Derive the per-run scenario seed from the replication index alone:
/// policies compete on identical fleets, and sweep points are paired (the
/// same replication sees the same fleet at every sweep value), which keeps
/// cross-point curve comparisons free of placement noise.
pub fn scenario_seed(base_seed: u64, replication: u32) -> u64 {
    let mut rng = SimRng::stream(base_seed, 0x5357_4545_5000_0000);
    for _ in 0..replication {
        rng.next_u64();
    }
    rng.next_u64()
}

/// Apply one sweep value to a scenario spec.
pub fn apply_axis(
    spec: &ScenarioSpec,
    axis: SweepAxis,
    value: f64,
) -> Result<ScenarioSpec, ConfigError> {
    validate_sweep_value(axis, value)?;
    let mut spec = spec.clone();
    match axis {
        SweepAxis::DeviceCount => spec.device_count = value as usize,
        SweepAxis::CpuCycles => spec.overrides.cpu_cycles = Some(value),
        SweepAxis::PMin => spec.overrides.p_min = Some(value),
        SweepAxis::TauMin => spec.overrides.tau_min_s = Some(value),
        SweepAxis::DataSize => spec.overrides.data_size_bits = Some(value),
    }
    Ok(spec)
}

/// Fleet-averaged metrics of a finished run.
pub fn fleet_metrics(
    fleet: &[DeviceProfile],
    env: &Environment,
    report: &RunReport,
) -> (f64, f64, f64) {
    let n = fleet.len() as f64;
    let mut aoi = 0.0;
    let mut energy = 0.0;
    let mut sense_share = 0.0;
    for idx in 0..fleet.len() {
        let b = device_cost(
            fleet,
            idx,
            report.decisions.attempts[idx],
            report.decisions.intervals_s[idx],
            &report.decisions.offload,
            env,
        );
        aoi += b.avg_aoi_s;
        energy += b.avg_energy_w;
        sense_share += b.sense_time_share();
    }
    (aoi / n, energy / n, sense_share / n)
}

/// Run one policy on one scenario and fill a row. Run failures become rows
/// with an error marker instead of aborting the sweep.
pub fn run_one(
    scenario_id: String,
    sweep_value: f64,
    policy: Policy,
    fleet: &[DeviceProfile],
    env: &Environment,
    opt: &MiscoConfig,
    seed: u64,
) -> ResultRow {
    let config = MiscoConfig {
        rng_seed: seed,
        ..opt.clone()
    };
    let started = Instant::now();
    match run_policy(policy, fleet, env, &config) {
        Ok(mut report) => {
            report.wall_clock_s = started.elapsed().as_secs_f64();
            let (mean_aoi_s, mean_energy_w, sense_time_share) =
                fleet_metrics(fleet, env, &report);
            ResultRow {
                scenario_id,
                policy: policy.label(),
                sweep_value,
                system_cost: report.final_cost(),
                mean_aoi_s,
                mean_energy_w,
                sense_time_share,
                process_time_share: 1.0 - sense_time_share,
                inner_iterations: report.total_inner_iterations(),
                outer_iterations: report.outer_iterations(),
                seed,
                status: if report.converged {
                    "ok".to_string()
                } else {
                    "non-converged".to_string()
                },
            }
        }
        Err(e) => ResultRow {
            scenario_id,
            policy: policy.label(),
            sweep_value,
            system_cost: f64::NAN,
            mean_aoi_s: f64::NAN,
            mean_energy_w: f64::NAN,
            sense_time_share: f64::NAN,
            process_time_share: f64::NAN,
            inner_iterations: 0,
            outer_iterations: 0,
            seed,
            status: format!("error: {e}"),
        },
    }
}

/// The full grid: values x policies x replications, in that order.
pub fn run_sweep(
    base: &ScenarioSpec,
    axis: SweepAxis,
    values: &[f64],
    policies: &[Policy],
    replications: u32,
    opt: &MiscoConfig,
) -> Result<Vec<ResultRow>, ConfigError> {
    let mut rows = Vec::new();
    for &value in values {
        let spec = apply_axis(base, axis, value)?;
        for &policy in policies {
            for replication in 0..replications {
                let seed = scenario_seed(base.seed, replication);
                let spec = ScenarioSpec {
                    seed,
                    ..spec.clone()
                };
                let scenario_id =
                    format!("{}={}/rep{}", axis.label(), format_value(value), replication);
                match generate_scenario(&spec) {
                    Ok((fleet, env)) => {
                        rows.push(run_one(
                            scenario_id,
                            value,
                            policy,
                            &fleet,
                            &env,
                            opt,
                            seed,
                        ));
                    }
                    Err(e) => rows.push(ResultRow {
                        scenario_id,
                        policy: policy.label(),
                        sweep_value: value,
                        system_cost: f64::NAN,
                        mean_aoi_s: f64::NAN,
                        mean_energy_w: f64::NAN,
                        sense_time_share: f64::NAN,
                        process_time_share: f64::NAN,
                        inner_iterations: 0,
                        outer_iterations: 0,
                        seed,
                        status: format!("error: {e}"),
                    }),
                }
            }
        }
    }
    Ok(rows)
}

fn format_value(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1.0e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_come_out_in_grid_order() {
        let base = ScenarioSpec {
            device_count: 3,
            seed: 5,
            ..ScenarioSpec::default()
        };
        let rows = run_sweep(
            &base,
            SweepAxis::DeviceCount,
            &[3.0, 4.0],
            &[Policy::Misco, Policy::Aeco],
            2,
            &MiscoConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].scenario_id, "device_count=3/rep0");
        assert_eq!(rows[0].policy, "misco");
        assert_eq!(rows[1].scenario_id, "device_count=3/rep1");
        assert_eq!(rows[2].policy, "aeco");
        assert_eq!(rows[4].sweep_value, 4.0);
        // same sweep point, same replication, different policy: same seed
        assert_eq!(rows[0].seed, rows[2].seed);
        assert_ne!(rows[0].seed, rows[1].seed);
        for row in &rows {
            assert_eq!(row.status, "ok");
            assert!(row.system_cost.is_finite());
            assert!(row.sense_time_share >= 0.0 && row.sense_time_share <= 1.0);
            assert!((row.sense_time_share + row.process_time_share - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let base = ScenarioSpec {
            device_count: 4,
            seed: 11,
            ..ScenarioSpec::default()
        };
        let args = (
            SweepAxis::PMin,
            [0.6, 0.8],
            [Policy::Misco],
            2u32,
            MiscoConfig::default(),
        );
        let a = run_sweep(&base, args.0, &args.1, &args.2, args.3, &args.4).unwrap();
        let b = run_sweep(&base, args.0, &args.1, &args.2, args.3, &args.4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failed_runs_become_error_rows_and_the_sweep_continues() {
        use misco_core::FeasibilityMode;
        // strict mode + a harsh quality floor: far devices are infeasible
        let mut base = ScenarioSpec {
            device_count: 10,
            seed: 3,
            ..ScenarioSpec::default()
        };
        base.overrides.p_min = Some(0.95);
        let strict = MiscoConfig {
            feasibility: FeasibilityMode::Strict,
            ..MiscoConfig::default()
        };
        let rows = run_sweep(
            &base,
            SweepAxis::DeviceCount,
            &[10.0, 4.0],
            &[Policy::Misco],
            2,
            &strict,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().any(|r| r.status.starts_with("error: ")));
        for row in rows.iter().filter(|r| r.status.starts_with("error: ")) {
            assert!(row.system_cost.is_nan());
        }
    }

    #[test]
    fn invalid_sweep_value_is_a_config_error() {
        let base = ScenarioSpec::default();
        let err = run_sweep(
            &base,
            SweepAxis::PMin,
            &[0.5, 1.2],
            &[Policy::Misco],
            1,
            &MiscoConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("outside the valid range"));
    }
}

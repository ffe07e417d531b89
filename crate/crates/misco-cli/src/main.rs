//! Command-line front end: single runs, experiment sweeps, oracle suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use misco_cli::config::{load_config, ConfigError, FileConfig};
use misco_cli::csvout::{write_game_trace, write_renewal_trace, write_results};
use misco_cli::scenario::{generate_scenario, ScenarioSpec};
use misco_cli::sweep::{fleet_metrics, run_sweep, scenario_seed, ResultRow};
use misco_cli::validate::{run_suites, sample_renewal_trace};
use misco_core::game::{default_slot_cap, run_best_response_dynamics};
use misco_core::orchestrator::{run_policy, MiscoConfig, Policy};
use misco_core::FeasibilityMode;

#[derive(Parser)]
#[command(
    name = "misco",
    version,
    about = "AoI-aware sensing/sampling/offloading optimizer for edge fleets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario under one or more policies and print a summary
    Run(RunArgs),
    /// Run an experiment sweep over a config-defined axis and write a CSV
    Sweep(SweepArgs),
    /// Cross-check formulas and optimizers against independent oracles
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Key-value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed (overrides scenario.seed from the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Error out instead of repairing infeasible sensing floors; exit 3 on
    /// non-convergence
    #[arg(long)]
    strict_feasibility: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Policy to run (repeatable; default: misco)
    #[arg(long = "policy")]
    policies: Vec<String>,
    /// Write per-run result rows as CSV
    #[arg(long)]
    out: Option<PathBuf>,
    /// Independent replications
    #[arg(long)]
    replications: Option<u32>,
    /// Write the final offload-dynamics trace of the first policy run
    #[arg(long)]
    game_trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Policy to include (repeatable; default: all five)
    #[arg(long = "policy")]
    policies: Vec<String>,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Replications per sweep point
    #[arg(long)]
    replications: Option<u32>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite to run: all, aoi, retry, sensing, sampling, game, threshold
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Smaller instance counts for a fast smoke pass
    #[arg(long)]
    quick: bool,
    /// Write a sample renewal trace as a flat CSV table
    #[arg(long)]
    renewal_trace_out: Option<PathBuf>,
}

enum CliError {
    Config(ConfigError),
    Strict(String),
    Other(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(CliError::Strict(msg)) => {
            eprintln!("strict mode: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Other(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        Some(p) => Ok(load_config(p)?),
        None => Ok(FileConfig::default()),
    }
}

fn build_spec(file: &FileConfig, seed_flag: Option<u64>) -> ScenarioSpec {
    ScenarioSpec {
        device_count: file.device_count.unwrap_or(20),
        area_side_m: file.area_side_m.unwrap_or(50.0),
        event_distance_max_m: file.event_distance_max_m,
        seed: seed_flag.or(file.seed).unwrap_or(0),
        overrides: file.overrides.clone(),
    }
}

fn build_opt(file: &FileConfig, strict: bool) -> MiscoConfig {
    MiscoConfig {
        epsilon: file.epsilon.unwrap_or(1.0e-4),
        max_outer_iterations: file.max_outer_iterations.unwrap_or(100),
        rng_seed: 0,
        feasibility: if strict {
            FeasibilityMode::Strict
        } else {
            FeasibilityMode::Repair
        },
        brco_damping: file.brco_damping.unwrap_or(0.5),
        brco_tolerance: file.brco_tolerance.unwrap_or(1.0e-4),
        brco_max_rounds: file.brco_max_rounds.unwrap_or(500),
    }
}

fn parse_policies(
    flags: &[String],
    file: &FileConfig,
    default_all: bool,
) -> Result<Vec<Policy>, CliError> {
    if !flags.is_empty() {
        let mut policies = Vec::new();
        for label in flags {
            policies.push(Policy::from_label(label).ok_or_else(|| {
                ConfigError::new(format!("--policy: unknown policy '{label}'"))
            })?);
        }
        return Ok(policies);
    }
    if let Some(p) = &file.policies {
        return Ok(p.clone());
    }
    Ok(if default_all {
        Policy::ALL.to_vec()
    } else {
        vec![Policy::Misco]
    })
}

fn cmd_run(args: RunArgs) -> Result<ExitCode, CliError> {
    let file = load_file_config(&args.common.config)?;
    let spec = build_spec(&file, args.common.seed);
    let policies = parse_policies(&args.policies, &file, false)?;
    let replications = args.replications.or(file.replications).unwrap_or(1);
    let opt = build_opt(&file, args.common.strict_feasibility);

    println!(
        "scenario: {} devices, seed {}, {} replication(s)",
        spec.device_count, spec.seed, replications
    );
    println!(
        "{:<8} {:<4} {:>14} {:>12} {:>14} {:>8} {:>6} {:>6} {:>8}  status",
        "policy",
        "rep",
        "system_cost",
        "mean_aoi_s",
        "mean_energy_w",
        "sense%",
        "outer",
        "inner",
        "wall_s"
    );

    let mut rows: Vec<ResultRow> = Vec::new();
    let mut any_nonconverged = false;
    let mut trace_written = false;
    for replication in 0..replications {
        let seed = scenario_seed(spec.seed, replication);
        let rep_spec = ScenarioSpec {
            seed,
            ..spec.clone()
        };
        let (fleet, env) = generate_scenario(&rep_spec)?;
        for &policy in &policies {
            let config = MiscoConfig {
                rng_seed: seed,
                ..opt.clone()
            };
            let started = Instant::now();
            match run_policy(policy, &fleet, &env, &config) {
                Ok(mut report) => {
                    report.wall_clock_s = started.elapsed().as_secs_f64();
                    let (mean_aoi, mean_energy, sense_share) =
                        fleet_metrics(&fleet, &env, &report);
                    let status = if report.converged { "ok" } else { "non-converged" };
                    any_nonconverged |= !report.converged;
                    println!(
                        "{:<8} {:<4} {:>14.6e} {:>12.6} {:>14.6e} {:>8.4} {:>6} {:>6} {:>8.3}  {}",
                        policy.label(),
                        replication,
                        report.final_cost(),
                        mean_aoi,
                        mean_energy,
                        sense_share,
                        report.outer_iterations(),
                        report.total_inner_iterations(),
                        report.wall_clock_s,
                        status
                    );
                    rows.push(ResultRow {
                        scenario_id: format!("run/rep{replication}"),
                        policy: policy.label(),
                        sweep_value: spec.device_count as f64,
                        system_cost: report.final_cost(),
                        mean_aoi_s: mean_aoi,
                        mean_energy_w: mean_energy,
                        sense_time_share: sense_share,
                        process_time_share: 1.0 - sense_share,
                        inner_iterations: report.total_inner_iterations(),
                        outer_iterations: report.outer_iterations(),
                        seed,
                        status: status.to_string(),
                    });
                    if let (Some(path), false) = (&args.game_trace_out, trace_written) {
                        export_final_game_trace(&fleet, &env, &report, path)?;
                        trace_written = true;
                    }
                }
                Err(e) => {
                    if args.common.strict_feasibility {
                        return Err(CliError::Strict(format!(
                            "{} failed: {e}",
                            policy.label()
                        )));
                    }
                    println!("{:<8} {:<4} failed: {e}", policy.label(), replication);
                    rows.push(ResultRow {
                        scenario_id: format!("run/rep{replication}"),
                        policy: policy.label(),
                        sweep_value: spec.device_count as f64,
                        system_cost: f64::NAN,
                        mean_aoi_s: f64::NAN,
                        mean_energy_w: f64::NAN,
                        sense_time_share: f64::NAN,
                        process_time_share: f64::NAN,
                        inner_iterations: 0,
                        outer_iterations: 0,
                        seed,
                        status: format!("error: {e}"),
                    });
                }
            }
        }
    }
    if let Some(out) = &args.out {
        write_results(&rows, out)?;
        println!("wrote {} rows to {}", rows.len(), out.display());
    }
    if args.common.strict_feasibility && any_nonconverged {
        return Err(CliError::Strict("a run did not converge".to_string()));
    }
    Ok(ExitCode::SUCCESS)
}

/// Re-run the final offload dynamics of a finished report (deterministic)
/// and write its trace table.
fn export_final_game_trace(
    fleet: &[misco_core::model::DeviceProfile],
    env: &misco_core::model::Environment,
    report: &misco_core::orchestrator::RunReport,
    path: &Path,
) -> Result<(), CliError> {
    let game = run_best_response_dynamics(
        fleet,
        &report.decisions.attempts,
        &report.decisions.intervals_s,
        env,
        default_slot_cap(fleet.len()),
    )
    .map_err(|e| CliError::Other(format!("game trace: {e}")))?;
    write_game_trace(&game, path)?;
    println!("wrote offload dynamics trace to {}", path.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, CliError> {
    let file = load_file_config(&args.common.config)?;
    let axis = file
        .sweep_axis
        .ok_or_else(|| ConfigError::new("sweep requires 'sweep.axis' in the config file"))?;
    let values = file
        .sweep_values
        .clone()
        .ok_or_else(|| ConfigError::new("sweep requires 'sweep.values' in the config file"))?;
    let spec = build_spec(&file, args.common.seed);
    let policies = parse_policies(&args.policies, &file, true)?;
    let replications = args.replications.or(file.replications).unwrap_or(1);
    let opt = build_opt(&file, args.common.strict_feasibility);

    let rows = run_sweep(&spec, axis, &values, &policies, replications, &opt)?;
    write_results(&rows, &args.out)?;

    println!(
        "swept {} over {} values x {} policies x {} replications -> {} rows",
        axis.label(),
        values.len(),
        policies.len(),
        replications,
        rows.len()
    );
    for &value in &values {
        for &policy in &policies {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.sweep_value == value && r.policy == policy.label())
                .collect();
            if group.is_empty() {
                continue;
            }
            let ok = group.iter().filter(|r| r.status == "ok").count();
            let mean = group.iter().map(|r| r.system_cost).sum::<f64>() / group.len() as f64;
            println!(
                "  {}={:<10} {:<6} mean cost {:>12.6e}  ({}/{} ok)",
                axis.label(),
                value,
                policy.label(),
                mean,
                ok,
                group.len()
            );
        }
    }
    println!("wrote {}", args.out.display());

    if args.common.strict_feasibility && rows.iter().any(|r| r.status != "ok") {
        return Err(CliError::Strict(
            "a sweep run did not converge or failed".to_string(),
        ));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, CliError> {
    let outcomes = run_suites(&args.suite, args.seed, args.quick).map_err(ConfigError::new)?;
    let mut all_ok = true;
    for o in &outcomes {
        let verdict = if o.passed() { "PASS" } else { "FAIL" };
        let detail = if o.detail.is_empty() {
            String::new()
        } else {
            format!("; {}", o.detail)
        };
        println!("{}: {verdict} ({} cases{detail})", o.name, o.cases);
        for failure in o.failures.iter().take(5) {
            println!("    {failure}");
        }
        all_ok &= o.passed();
    }
    if let Some(path) = &args.renewal_trace_out {
        write_renewal_trace(&sample_renewal_trace(args.seed), path)?;
        println!("wrote renewal trace to {}", path.display());
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

//! Flat key-value configuration files.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! skipped. Keys use dotted section names; unknown or duplicate keys are
//! rejected with the offending name and line. The full schema:
//!
//! ```text
//! scenario.device_count          integer >= 1            (default 20)
//! scenario.area_side_m           meters                  (default 50)
//! scenario.event_distance_max_m  meters                  (default area/2)
//! scenario.seed                  unsigned integer        (default 0)
//! device.unit_sense_time_s       seconds                 (default 0.2)
//! device.data_size_bits          bits                    (default 4e6)
//! device.cpu_cycles              cycles                  (default 1e9)
//! device.sense_energy_per_bit_j  joules/bit              (default 1e-9)
//! device.tx_power_w              watts                   (default 0.1)
//! device.local_cpu_hz_min        hertz                   (default 0.8e9)
//! device.local_cpu_hz_max        hertz                   (default 1.0e9)
//! env.bandwidth_hz               hertz                   (default 1e8)
//! env.noise_power_w              watts                   (default 1e-13)
//! env.sensing_decay_per_m        1/meter                 (default 0.08)
//! env.edge_cpu_hz                hertz                   (default 2e10)
//! env.cpu_energy_model           freq-squared-ghz | per-cycle
//! env.cpu_energy_coeff           joules/cycle coefficient (default 1e-11)
//! env.edge_data_threshold_bits   bits                    (default 2e7)
//! env.p_min                      probability             (default 0.7)
//! env.tau_min_s                  seconds                 (default 0.5)
//! env.tau_max_s                  seconds                 (default 3600)
//! env.weight_aoi                 weight                  (default 0.5)
//! env.weight_energy              weight                  (default 0.5)
//! env.path_loss_exponent         exponent                (default 4)
//! sweep.axis                     device_count | cpu_cycles | p_min | tau_min | data_size
//! sweep.values                   comma-separated numbers
//! run.policies                   comma-separated of misco,gsa,isa,brco,aeco
//! run.replications               integer >= 1            (default 1)
//! opt.epsilon                    convergence threshold   (default 1e-4)
//! opt.max_outer_iterations       integer >= 1            (default 100)
//! opt.brco_damping               (0, 1]                  (default 0.5)
//! opt.brco_tolerance             positive                (default 1e-4)
//! opt.brco_max_rounds            integer >= 1            (default 500)
//! ```

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use misco_core::orchestrator::Policy;

use crate::scenario::Overrides;

/// A configuration problem; the CLI maps it to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        ConfigError(msg.into())
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Experiment sweep axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    DeviceCount,
    CpuCycles,
    PMin,
    TauMin,
    DataSize,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::DeviceCount => "device_count",
            SweepAxis::CpuCycles => "cpu_cycles",
            SweepAxis::PMin => "p_min",
            SweepAxis::TauMin => "tau_min",
            SweepAxis::DataSize => "data_size",
        }
    }

    pub fn from_label(label: &str) -> Option<SweepAxis> {
        match label {
            "device_count" => Some(SweepAxis::DeviceCount),
            "cpu_cycles" => Some(SweepAxis::CpuCycles),
            "p_min" => Some(SweepAxis::PMin),
            "tau_min" => Some(SweepAxis::TauMin),
            "data_size" => Some(SweepAxis::DataSize),
            _ => None,
        }
    }
}

/// Everything a config file can carry; all optional.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub device_count: Option<usize>,
    pub area_side_m: Option<f64>,
    pub event_distance_max_m: Option<f64>,
    pub seed: Option<u64>,
    pub overrides: Overrides,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Option<Vec<f64>>,
    pub policies: Option<Vec<Policy>>,
    pub replications: Option<u32>,
    pub epsilon: Option<f64>,
    pub max_outer_iterations: Option<u32>,
    pub brco_damping: Option<f64>,
    pub brco_tolerance: Option<f64>,
    pub brco_max_rounds: Option<u32>,
}

pub fn load_config(path: &Path) -> Result<FileConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<FileConfig, ConfigError> {
    let mut cfg = FileConfig::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::new(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::new(format!(
                "duplicate key '{key}' (line {})",
                lineno + 1
            )));
        }
        apply_key(&mut cfg, key, value)
            .map_err(|msg| ConfigError::new(format!("{msg} (line {})", lineno + 1)))?;
    }
    Ok(cfg)
}

fn parse_f64(key: &str, value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("key '{key}': '{value}' is not a number"))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, String> {
    value
        .parse::<u64>()
        .map_err(|_| format!("key '{key}': '{value}' is not an unsigned integer"))
}

fn parse_u32(key: &str, value: &str) -> Result<u32, String> {
    value
        .parse::<u32>()
        .map_err(|_| format!("key '{key}': '{value}' is not an unsigned integer"))
}

fn apply_key(cfg: &mut FileConfig, key: &str, value: &str) -> Result<(), String> {
    let o = &mut cfg.overrides;
    match key {
        "scenario.device_count" => {
            let v = parse_u64(key, value)? as usize;
            if v < 1 {
                return Err(format!("key '{key}': must be at least 1"));
            }
            cfg.device_count = Some(v);
        }
        "scenario.area_side_m" => cfg.area_side_m = Some(parse_f64(key, value)?),
        "scenario.event_distance_max_m" => {
            cfg.event_distance_max_m = Some(parse_f64(key, value)?)
        }
        "scenario.seed" => cfg.seed = Some(parse_u64(key, value)?),
        "device.unit_sense_time_s" => o.unit_sense_time_s = Some(parse_f64(key, value)?),
        "device.data_size_bits" => o.data_size_bits = Some(parse_f64(key, value)?),
        "device.cpu_cycles" => o.cpu_cycles = Some(parse_f64(key, value)?),
        "device.sense_energy_per_bit_j" => {
            o.sense_energy_per_bit_j = Some(parse_f64(key, value)?)
        }
        "device.tx_power_w" => o.tx_power_w = Some(parse_f64(key, value)?),
        "device.local_cpu_hz_min" => o.local_cpu_hz_min = Some(parse_f64(key, value)?),
        "device.local_cpu_hz_max" => o.local_cpu_hz_max = Some(parse_f64(key, value)?),
        "env.bandwidth_hz" => o.bandwidth_hz = Some(parse_f64(key, value)?),
        "env.noise_power_w" => o.noise_power_w = Some(parse_f64(key, value)?),
        "env.sensing_decay_per_m" => o.sensing_decay_per_m = Some(parse_f64(key, value)?),
        "env.edge_cpu_hz" => o.edge_cpu_hz = Some(parse_f64(key, value)?),
        "env.cpu_energy_model" => {
            o.cpu_energy_flat = Some(match value {
                "per-cycle" => true,
                "freq-squared-ghz" => false,
                other => {
                    return Err(format!(
                        "key '{key}': unknown model '{other}' (expected freq-squared-ghz or per-cycle)"
                    ))
                }
            })
        }
        "env.cpu_energy_coeff" => o.cpu_energy_coeff = Some(parse_f64(key, value)?),
        "env.edge_data_threshold_bits" => {
            o.edge_data_threshold_bits = Some(parse_f64(key, value)?)
        }
        "env.p_min" => o.p_min = Some(parse_f64(key, value)?),
        "env.tau_min_s" => o.tau_min_s = Some(parse_f64(key, value)?),
        "env.tau_max_s" => o.tau_max_s = Some(parse_f64(key, value)?),
        "env.weight_aoi" => o.weight_aoi = Some(parse_f64(key, value)?),
        "env.weight_energy" => o.weight_energy = Some(parse_f64(key, value)?),
        "env.path_loss_exponent" => o.path_loss_exponent = Some(parse_f64(key, value)?),
        "sweep.axis" => {
            cfg.sweep_axis = Some(
                SweepAxis::from_label(value)
                    .ok_or_else(|| format!("key '{key}': unknown axis '{value}'"))?,
            )
        }
        "sweep.values" => {
            let mut values = Vec::new();
            for part in value.split(',') {
                values.push(parse_f64(key, part.trim())?);
            }
            if values.is_empty() {
                return Err(format!("key '{key}': needs at least one value"));
            }
            cfg.sweep_values = Some(values);
        }
        "run.policies" => {
            let mut policies = Vec::new();
            for part in value.split(',') {
                let label = part.trim();
                policies.push(
                    Policy::from_label(label)
                        .ok_or_else(|| format!("key '{key}': unknown policy '{label}'"))?,
                );
            }
            cfg.policies = Some(policies);
        }
        "run.replications" => {
            let v = parse_u32(key, value)?;
            if v < 1 {
                return Err(format!("key '{key}': must be at least 1"));
            }
            cfg.replications = Some(v);
        }
        "opt.epsilon" => cfg.epsilon = Some(parse_f64(key, value)?),
        "opt.max_outer_iterations" => cfg.max_outer_iterations = Some(parse_u32(key, value)?),
        "opt.brco_damping" => cfg.brco_damping = Some(parse_f64(key, value)?),
        "opt.brco_tolerance" => cfg.brco_tolerance = Some(parse_f64(key, value)?),
        "opt.brco_max_rounds" => cfg.brco_max_rounds = Some(parse_u32(key, value)?),
        unknown => return Err(format!("unknown key '{unknown}'")),
    }
    Ok(())
}

/// Validate a sweep value for its axis.
pub fn validate_sweep_value(axis: SweepAxis, value: f64) -> Result<(), ConfigError> {
    let ok = match axis {
        SweepAxis::DeviceCount => value >= 1.0 && value.fract() == 0.0 && value <= 100_000.0,
        SweepAxis::CpuCycles | SweepAxis::DataSize | SweepAxis::TauMin => {
            value > 0.0 && value.is_finite()
        }
        SweepAxis::PMin => value > 0.0 && value < 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(ConfigError::new(format!(
            "sweep.values: {value} is outside the valid range for axis {}",
            axis.label()
        )))
    }
}

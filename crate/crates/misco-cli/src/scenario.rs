//! Scenario generation: build a device fleet and environment from a compact
//! spec, with every parameter individually overridable.
//!
//! Defaults model a 50 m x 50 m service area with the edge server at the
//! center: 0.2 s sensing attempts over 500 KB updates (1 KB = 1000 bytes,
//! so 4e6 bits), 1000 megacycles of processing, a 100 MHz uplink at 100 mW
//! against a -100 dBm noise floor, path-loss exponent 4, local CPUs drawn
//! from [0.8, 1.0] GHz against a 20 GHz edge CPU, and per-cycle CPU energy
//! of 1e-11 * (f in GHz)^2 joules. Event distances are drawn uniformly from
//! (0, area/2] so sensing quality spans the interesting range.

use misco_core::model::{CpuEnergyModel, DeviceProfile, Environment};
use misco_core::rng::SimRng;

use crate::config::ConfigError;

const PLACEMENT_SALT: u64 = 0x5343_454E_4152_494F;

/// Optional parameter overrides; `None` keeps the default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub unit_sense_time_s: Option<f64>,
    pub data_size_bits: Option<f64>,
    pub cpu_cycles: Option<f64>,
    pub sense_energy_per_bit_j: Option<f64>,
    pub tx_power_w: Option<f64>,
    pub local_cpu_hz_min: Option<f64>,
    pub local_cpu_hz_max: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub noise_power_w: Option<f64>,
    pub sensing_decay_per_m: Option<f64>,
    pub edge_cpu_hz: Option<f64>,
    pub cpu_energy_flat: Option<bool>,
    pub cpu_energy_coeff: Option<f64>,
    pub edge_data_threshold_bits: Option<f64>,
    pub p_min: Option<f64>,
    pub tau_min_s: Option<f64>,
    pub tau_max_s: Option<f64>,
    pub weight_aoi: Option<f64>,
    pub weight_energy: Option<f64>,
    pub path_loss_exponent: Option<f64>,
}

/// A reproducible scenario: fleet size, geometry, seed, overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub device_count: usize,
    pub area_side_m: f64,
    /// Upper end of the event-distance draw; defaults to half the side.
    pub event_distance_max_m: Option<f64>,
    pub seed: u64,
    pub overrides: Overrides,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            device_count: 20,
            area_side_m: 50.0,
            event_distance_max_m: None,
            seed: 0,
            overrides: Overrides::default(),
        }
    }
}

fn require_positive(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::new(format!("{field}: must be positive")))
    }
}

fn require_nonnegative(field: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value >= 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::new(format!("{field}: must be nonnegative")))
    }
}

/// Materialize the fleet and environment. Identical specs produce identical
/// fleets, bit for bit.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(Vec<DeviceProfile>, Environment), ConfigError> {
    if spec.device_count < 1 {
        return Err(ConfigError::new("scenario.device_count: must be at least 1"));
    }
    let side = require_positive("scenario.area_side_m", spec.area_side_m)?;
    let event_max = match spec.event_distance_max_m {
        Some(v) => require_positive("scenario.event_distance_max_m", v)?,
        None => side / 2.0,
    };
    let o = &spec.overrides;

    let env = Environment {
        bandwidth_hz: require_positive("env.bandwidth_hz", o.bandwidth_hz.unwrap_or(1.0e8))?,
        noise_power_w: require_positive("env.noise_power_w", o.noise_power_w.unwrap_or(1.0e-13))?,
        sensing_decay_per_m: require_positive(
            "env.sensing_decay_per_m",
            o.sensing_decay_per_m.unwrap_or(0.08),
        )?,
        edge_cpu_hz: require_positive("env.edge_cpu_hz", o.edge_cpu_hz.unwrap_or(2.0e10))?,
        cpu_energy: {
            let coeff =
                require_positive("env.cpu_energy_coeff", o.cpu_energy_coeff.unwrap_or(1.0e-11))?;
            if o.cpu_energy_flat.unwrap_or(false) {
                CpuEnergyModel::PerCycle { joules: coeff }
            } else {
                CpuEnergyModel::FrequencySquaredGhz { coeff }
            }
        },
        edge_data_threshold_bits: require_nonnegative(
            "env.edge_data_threshold_bits",
            o.edge_data_threshold_bits.unwrap_or(2.0e7),
        )?,
        p_min: {
            let v = o.p_min.unwrap_or(0.7);
            if v > 0.0 && v < 1.0 {
                v
            } else {
                return Err(ConfigError::new("env.p_min: must lie strictly between 0 and 1"));
            }
        },
        tau_min_s: require_positive("env.tau_min_s", o.tau_min_s.unwrap_or(0.5))?,
        tau_max_s: require_positive("env.tau_max_s", o.tau_max_s.unwrap_or(3600.0))?,
        weight_aoi: require_nonnegative("env.weight_aoi", o.weight_aoi.unwrap_or(0.5))?,
        weight_energy: require_nonnegative("env.weight_energy", o.weight_energy.unwrap_or(0.5))?,
        path_loss_exponent: require_positive(
            "env.path_loss_exponent",
            o.path_loss_exponent.unwrap_or(4.0),
        )?,
    };
    env.validate()
        .map_err(|e| ConfigError::new(format!("environment: {e}")))?;

    let unit_sense_time_s =
        require_positive("device.unit_sense_time_s", o.unit_sense_time_s.unwrap_or(0.2))?;
    let data_size_bits =
        require_positive("device.data_size_bits", o.data_size_bits.unwrap_or(4.0e6))?;
    let cpu_cycles = require_positive("device.cpu_cycles", o.cpu_cycles.unwrap_or(1.0e9))?;
    let sense_energy_per_bit_j = require_positive(
        "device.sense_energy_per_bit_j",
        o.sense_energy_per_bit_j.unwrap_or(1.0e-9),
    )?;
    let tx_power_w = require_positive("device.tx_power_w", o.tx_power_w.unwrap_or(0.1))?;
    let f_min = require_positive("device.local_cpu_hz_min", o.local_cpu_hz_min.unwrap_or(0.8e9))?;
    let f_max = require_positive("device.local_cpu_hz_max", o.local_cpu_hz_max.unwrap_or(1.0e9))?;
    if f_max < f_min {
        return Err(ConfigError::new(
            "device.local_cpu_hz_max: must not be below device.local_cpu_hz_min",
        ));
    }

    let mut rng = SimRng::stream(spec.seed, PLACEMENT_SALT);
    let center = side / 2.0;
    let mut fleet = Vec::with_capacity(spec.device_count);
    for id in 0..spec.device_count {
        // uniform placement; re-draw the vanishing chance of sitting on the server
        let server_distance_m = loop {
            let x = rng.range_f64(0.0, side);
            let y = rng.range_f64(0.0, side);
            let v = ((x - center) * (x - center) + (y - center) * (y - center)).sqrt();
            if v >= 1.0e-3 {
                break v;
            }
        };
        let event_distance_m = event_max * (1.0 - rng.next_f64()); // (0, event_max]
        let local_cpu_hz = if f_max > f_min {
            rng.range_f64(f_min, f_max)
        } else {
            f_min
        };
        fleet.push(DeviceProfile {
            id,
            event_distance_m,
            unit_sense_time_s,
            data_size_bits,
            cpu_cycles,
            sense_energy_per_bit_j,
            tx_power_w,
            local_cpu_hz,
            server_distance_m,
        });
    }
    Ok((fleet, env))
}

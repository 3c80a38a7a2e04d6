//! Flat TOML experiment files. Keys follow the simulation parameter table;
//! units are the table's (dBm, GHz, MHz, dB) and are converted once here.

use std::path::Path;

use serde::Deserialize;
use tbe_core::{AnNormalization, PathLossConvention, SystemConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    transmit_power_dbm: Option<f64>,
    central_frequency_ghz: Option<f64>,
    bandwidth_mhz: Option<f64>,
    thermal_noise_dbm_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    num_antennas: Option<usize>,
    ue_height_m: Option<f64>,
    eve_height_m: Option<f64>,
    num_users: Option<usize>,
    ue_horizontal_range_m: Option<[f64; 2]>,
    time_slots: Option<usize>,
    key_bits: Option<usize>,
    kappa_db: Option<f64>,
    false_alarm_probability: Option<f64>,
    angle_offset_deg: Option<f64>,
    antenna_spacing_m: Option<f64>,
    path_loss: Option<String>,
    an_normalization: Option<String>,
    min_zf_efficiency: Option<f64>,
    deployment_seed: Option<u64>,
    ensemble_draws: Option<usize>,
    ensemble_seed: Option<u64>,
    pw_min: Option<f64>,
    pd_min: Option<f64>,
}

/// A validated system configuration plus the experiment-level settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub cfg: SystemConfig,
    pub deployment_seed: u64,
    pub ensemble_draws: usize,
    pub ensemble_seed: u64,
    pub pw_min: f64,
    pub pd_min: f64,
}

impl Default for Experiment {
    fn default() -> Self {
        Self {
            cfg: SystemConfig::default(),
            deployment_seed: 1,
            ensemble_draws: 4000,
            ensemble_seed: 7,
            pw_min: 0.01,
            pd_min: 0.999,
        }
    }
}

fn path_loss(s: &str) -> Result<PathLossConvention> {
    match s {
        "decibel" => Ok(PathLossConvention::Decibel),
        "reciprocal-literal" => Ok(PathLossConvention::ReciprocalLiteral),
        other => Err(CliError::Config(format!(
            "path_loss: unknown value {other:?} (expected \"decibel\" or \"reciprocal-literal\")"
        ))),
    }
}

fn an_norm(s: &str) -> Result<AnNormalization> {
    match s {
        "unit-power" => Ok(AnNormalization::UnitPower),
        "literal" => Ok(AnNormalization::Literal),
        other => Err(CliError::Config(format!(
            "an_normalization: unknown value {other:?} (expected \"unit-power\" or \"literal\")"
        ))),
    }
}

/// Parse and validate config text. Missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<Experiment> {
    let f: ConfigFile = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let mut exp = Experiment::default();
    let c = &mut exp.cfg;
    macro_rules! set {
        ($src:ident => $dst:expr) => {
            if let Some(v) = f.$src {
                $dst = v;
            }
        };
    }
    set!(transmit_power_dbm => c.tx_power_dbm);
    set!(central_frequency_ghz => c.carrier_ghz);
    if let Some(v) = f.bandwidth_mhz {
        c.bandwidth_hz = v * 1e6;
    }
    set!(thermal_noise_dbm_hz => c.thermal_noise_dbm_hz);
    set!(noise_figure_db => c.noise_figure_db);
    set!(num_antennas => c.num_antennas);
    set!(ue_height_m => c.ue_height_m);
    set!(eve_height_m => c.eve_height_m);
    set!(num_users => c.num_users);
    if let Some([lo, hi]) = f.ue_horizontal_range_m {
        c.ue_horiz_range_m = (lo, hi);
    }
    set!(time_slots => c.block_len);
    set!(key_bits => c.key_bits);
    set!(kappa_db => c.rician_kappa_db);
    set!(false_alarm_probability => c.pf_target);
    set!(angle_offset_deg => c.angle_offset_deg);
    if f.antenna_spacing_m.is_some() {
        c.antenna_spacing_m = f.antenna_spacing_m;
    }
    if let Some(s) = &f.path_loss {
        c.path_loss = path_loss(s)?;
    }
    if let Some(s) = &f.an_normalization {
        c.an_normalization = an_norm(s)?;
    }
    set!(min_zf_efficiency => c.min_zf_efficiency);
    set!(deployment_seed => exp.deployment_seed);
    set!(ensemble_draws => exp.ensemble_draws);
    set!(ensemble_seed => exp.ensemble_seed);
    set!(pw_min => exp.pw_min);
    set!(pd_min => exp.pd_min);
    exp.cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    if exp.ensemble_draws == 0 {
        return Err(CliError::Config("ensemble_draws must be at least 1".into()));
    }
    for (name, v) in [("pw_min", exp.pw_min), ("pd_min", exp.pd_min)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(CliError::Config(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    Ok(exp)
}

pub fn load_config(path: &Path) -> Result<Experiment> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

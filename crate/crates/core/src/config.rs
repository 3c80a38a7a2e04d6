//! System parameters. Units follow the usual link-budget conventions at the
//! boundary (dBm, GHz, dB); everything derived here is linear.

use crate::error::{Error, Result};

/// How the urban-micro path-loss expression is turned into a linear gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathLossConvention {
    /// `β = 10^(−PL/10)`.
    #[default]
    Decibel,
    /// `β = 1/PL`, the dB value used directly as a divisor.
    ReciprocalLiteral,
}

/// Scaling of the orthonormal null-space basis vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AnNormalization {
    /// `‖v_i‖ = 1/√N_AN`: total AN power 1.
    #[default]
    UnitPower,
    /// `‖v_i‖ = 1/N_AN`: total AN power 1/N_AN.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub num_antennas: usize,
    pub num_users: usize,
    pub block_len: usize,
    pub tx_power_dbm: f64,
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub thermal_noise_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub ue_height_m: f64,
    pub eve_height_m: f64,
    pub ue_horiz_range_m: (f64, f64),
    pub rician_kappa_db: f64,
    pub angle_offset_deg: f64,
    pub key_bits: usize,
    pub pf_target: f64,
    /// `None` means half a wavelength.
    pub antenna_spacing_m: Option<f64>,
    pub path_loss: PathLossConvention,
    pub an_normalization: AnNormalization,
    /// Deployments whose worst line-of-sight ZF efficiency falls below this
    /// are redrawn.
    pub min_zf_efficiency: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_antennas: 64,
            num_users: 4,
            block_len: 160,
            tx_power_dbm: 5.0,
            carrier_ghz: 2.4,
            bandwidth_hz: 300e6,
            thermal_noise_dbm_hz: -174.0,
            noise_figure_db: 9.0,
            ue_height_m: 100.0,
            eve_height_m: 80.0,
            ue_horiz_range_m: (10.0, 100.0),
            rician_kappa_db: 30.0,
            angle_offset_deg: 1.0,
            key_bits: 64,
            pf_target: 1e-3,
            antenna_spacing_m: None,
            path_loss: PathLossConvention::Decibel,
            an_normalization: AnNormalization::UnitPower,
            min_zf_efficiency: 0.9,
        }
    }
}

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.num_antennas == 0 || self.num_users == 0 || self.block_len == 0 {
            return bad("num_antennas, num_users and block_len must be positive".into());
        }
        if self.num_users >= self.num_antennas {
            return bad(format!(
                "num_users ({}) must be below num_antennas ({})",
                self.num_users, self.num_antennas
            ));
        }
        let (lo, hi) = self.ue_horiz_range_m;
        if !(lo > 0.0 && lo < hi) {
            return bad(format!("ue horizontal range [{lo}, {hi}] must satisfy 0 < min < max"));
        }
        if !(self.pf_target > 0.0 && self.pf_target < 1.0) {
            return bad(format!("pf_target {} outside (0, 1)", self.pf_target));
        }
        if !(self.carrier_ghz > 0.5 && self.carrier_ghz < 100.0) {
            return bad(format!("carrier {} GHz outside (0.5, 100)", self.carrier_ghz));
        }
        if self.key_bits == 0 {
            return bad("key_bits must be positive".into());
        }
        if !(self.ue_height_m > 0.0 && self.eve_height_m > 0.0) {
            return bad("heights must be positive".into());
        }
        if !(self.bandwidth_hz > 0.0) {
            return bad("bandwidth must be positive".into());
        }
        if let Some(d) = self.antenna_spacing_m {
            if !(d > 0.0) {
                return bad("antenna spacing must be positive".into());
            }
        }
        if !(0.0..=1.0).contains(&self.min_zf_efficiency) {
            return bad("min_zf_efficiency must lie in [0, 1]".into());
        }
        let finite = [
            self.tx_power_dbm,
            self.thermal_noise_dbm_hz,
            self.noise_figure_db,
            self.rician_kappa_db,
            self.angle_offset_deg,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite scalar parameter".into());
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / (self.carrier_ghz * 1e9)
    }

    pub fn antenna_spacing(&self) -> f64 {
        self.antenna_spacing_m.unwrap_or(0.5 * self.wavelength_m())
    }

    pub fn tx_power_mw(&self) -> f64 {
        10f64.powf(self.tx_power_dbm / 10.0)
    }

    pub fn noise_power_dbm(&self) -> f64 {
        self.thermal_noise_dbm_hz + 10.0 * self.bandwidth_hz.log10() + self.noise_figure_db
    }

    /// σ_n² in mW.
    pub fn noise_power_mw(&self) -> f64 {
        10f64.powf(self.noise_power_dbm() / 10.0)
    }

    pub fn kappa(&self) -> f64 {
        10f64.powf(self.rician_kappa_db / 10.0)
    }

    pub fn angle_offset_rad(&self) -> f64 {
        self.angle_offset_deg.to_radians()
    }

    pub fn n_an(&self) -> usize {
        self.num_antennas - self.num_users
    }
}

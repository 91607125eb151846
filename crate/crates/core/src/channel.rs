//! Link budgets: optical ISL capacity, Ka-band GSL capacity, propagation and
//! fiber delays.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Cosmic background temperature seen through a lossless atmosphere, K.
const COSMIC_BACKGROUND_K: f64 = 2.7;

/// Elevation-keyed atmospheric attenuation, linearly interpolated.
///
/// Entries are kept sorted by descending elevation; attenuation must grow as
/// elevation falls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct AttenuationTable {
    entries: Vec<(f64, f64)>,
}

impl AttenuationTable {
    /// `entries` are `(elevation_deg, attenuation_db)` pairs in any order.
    pub fn new(mut entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("attenuation table is empty"));
        }
        if entries.iter().any(|(e, a)| !e.is_finite() || !a.is_finite() || *e <= 0.0 || *e > 90.0 || *a < 0.0) {
            return Err(Error::invalid("attenuation entries need elevation in (0, 90] and finite dB >= 0"));
        }
        entries.sort_by(|a, b| b.0.total_cmp(&a.0));
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::invalid(format!("duplicate attenuation entry at {}°", pair[0].0)));
            }
            if pair[1].1 < pair[0].1 {
                return Err(Error::invalid("attenuation must not decrease as elevation falls"));
            }
        }
        Ok(Self { entries })
    }

    /// Attenuation in dB; clamps to the end entries outside the table range.
    pub fn attenuation_db(&self, elevation_deg: f64) -> Result<f64> {
        if !(elevation_deg > 0.0) || elevation_deg > 90.0 {
            return Err(Error::BelowHorizon(elevation_deg));
        }
        let first = self.entries[0];
        let last = self.entries[self.entries.len() - 1];
        if elevation_deg >= first.0 {
            return Ok(first.1);
        }
        if elevation_deg <= last.0 {
            return Ok(last.1);
        }
        let hi = self.entries.iter().position(|(e, _)| *e <= elevation_deg).unwrap_or(self.entries.len() - 1);
        let (e_hi, a_hi) = self.entries[hi - 1];
        let (e_lo, a_lo) = self.entries[hi];
        let w = (elevation_deg - e_lo) / (e_hi - e_lo);
        Ok(a_lo + w * (a_hi - a_lo))
    }
}

impl Default for AttenuationTable {
    fn default() -> Self {
        Self::new(vec![(90.0, 0.5), (60.0, 0.6), (40.0, 0.8), (25.0, 1.2), (10.0, 3.0)]).expect("valid default table")
    }
}

impl TryFrom<Vec<(f64, f64)>> for AttenuationTable {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AttenuationTable> for Vec<(f64, f64)> {
    fn from(t: AttenuationTable) -> Self {
        t.entries
    }
}

/// Physical link parameters. Defaults follow the reference parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub isl_bandwidth_hz: f64,
    pub isl_tx_power_w: f64,
    pub pointing_loss: f64,
    pub aperture_diameter_m: f64,
    pub beam_divergence_rad: f64,
    pub isl_noise_temp_k: f64,
    /// Share of ISL capacity available to user uplink traffic.
    pub upload_scale: f64,
    pub gsl_bandwidth_hz: f64,
    pub eirp_dbw: f64,
    pub rx_gain_db: f64,
    pub carrier_freq_hz: f64,
    pub mean_radiating_temp_k: f64,
    pub boltzmann: f64,
    pub speed_of_light_mps: f64,
    pub fiber_capacity_bps: f64,
    pub fiber_delay_range_s: (f64, f64),
    pub fiber_delay_noise_std_s: f64,
    pub atmos_table: AttenuationTable,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            isl_bandwidth_hz: 5e9,
            isl_tx_power_w: 0.1,
            pointing_loss: 0.9,
            aperture_diameter_m: 0.10,
            beam_divergence_rad: 1.744e-5,
            isl_noise_temp_k: 290.0,
            upload_scale: 0.08,
            gsl_bandwidth_hz: 250e6,
            eirp_dbw: 34.6,
            rx_gain_db: 10.8,
            carrier_freq_hz: 19e9,
            mean_radiating_temp_k: 275.0,
            boltzmann: BOLTZMANN,
            speed_of_light_mps: SPEED_OF_LIGHT,
            fiber_capacity_bps: 50e9,
            fiber_delay_range_s: (1e-3, 5e-3),
            fiber_delay_noise_std_s: 0.2e-3,
            atmos_table: AttenuationTable::default(),
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("isl_bandwidth_hz", self.isl_bandwidth_hz),
            ("isl_tx_power_w", self.isl_tx_power_w),
            ("aperture_diameter_m", self.aperture_diameter_m),
            ("beam_divergence_rad", self.beam_divergence_rad),
            ("isl_noise_temp_k", self.isl_noise_temp_k),
            ("gsl_bandwidth_hz", self.gsl_bandwidth_hz),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("mean_radiating_temp_k", self.mean_radiating_temp_k),
            ("boltzmann", self.boltzmann),
            ("speed_of_light_mps", self.speed_of_light_mps),
            ("fiber_capacity_bps", self.fiber_capacity_bps),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!("channel.{name} must be positive")));
            }
        }
        if !(self.pointing_loss > 0.0 && self.pointing_loss <= 1.0) {
            return Err(Error::invalid("channel.pointing_loss must be in (0, 1]"));
        }
        if !(self.upload_scale >= 0.0 && self.upload_scale <= 1.0) {
            return Err(Error::invalid("channel.upload_scale must be in [0, 1]"));
        }
        let (lo, hi) = self.fiber_delay_range_s;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::invalid("channel.fiber_delay_range_s needs 0 <= lo <= hi"));
        }
        if !(self.fiber_delay_noise_std_s >= 0.0) {
            return Err(Error::invalid("channel.fiber_delay_noise_std_s must be >= 0"));
        }
        Ok(())
    }

    /// Received optical power at distance `d_m`, W.
    pub fn isl_received_power(&self, d_m: f64) -> f64 {
        let aperture_radius = 0.5 * self.aperture_diameter_m;
        let spot = d_m * self.beam_divergence_rad;
        self.isl_tx_power_w * self.pointing_loss * (aperture_radius * aperture_radius) / (spot * spot)
    }

    pub fn isl_noise_power(&self) -> f64 {
        self.boltzmann * self.isl_noise_temp_k * self.isl_bandwidth_hz
    }
}

/// ISL capacity at distance `d_m`, bit/s.
pub fn isl_capacity(d_m: f64, p: &ChannelParams) -> Result<f64> {
    if !(d_m > 0.0) || !d_m.is_finite() {
        return Err(Error::NonPositiveDistance(d_m));
    }
    let snr = p.isl_received_power(d_m) / p.isl_noise_power();
    Ok(p.upload_scale * p.isl_bandwidth_hz * (1.0 + snr).log2())
}

pub fn atmospheric_attenuation(elevation_deg: f64, p: &ChannelParams) -> Result<f64> {
    p.atmos_table.attenuation_db(elevation_deg)
}

/// Free-space path loss, dB.
pub fn free_space_path_loss_db(d_m: f64, p: &ChannelParams) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * d_m * p.carrier_freq_hz / p.speed_of_light_mps).log10()
}

/// Sky noise temperature behind `atten_db` of atmospheric loss, K.
pub fn sky_noise_temperature(atten_db: f64, p: &ChannelParams) -> f64 {
    let transmittance = 10f64.powf(-atten_db / 10.0);
    p.mean_radiating_temp_k * (1.0 - transmittance) + COSMIC_BACKGROUND_K * transmittance
}

/// GSL capacity for a known attenuation, bit/s. No upload scaling is applied.
pub fn gsl_capacity_with_attenuation(d_m: f64, atten_db: f64, p: &ChannelParams) -> Result<f64> {
    if !(d_m > 0.0) || !d_m.is_finite() {
        return Err(Error::NonPositiveDistance(d_m));
    }
    let rx_dbw = p.eirp_dbw - free_space_path_loss_db(d_m, p) + p.rx_gain_db - atten_db;
    let rx_w = 10f64.powf(rx_dbw / 10.0);
    let noise_w = p.boltzmann * sky_noise_temperature(atten_db, p) * p.gsl_bandwidth_hz;
    Ok(p.gsl_bandwidth_hz * (1.0 + rx_w / noise_w).log2())
}

/// GSL capacity at distance `d_m` and elevation `elevation_deg`, bit/s.
pub fn gsl_capacity(d_m: f64, elevation_deg: f64, p: &ChannelParams) -> Result<f64> {
    let atten = atmospheric_attenuation(elevation_deg, p)?;
    gsl_capacity_with_attenuation(d_m, atten, p)
}

pub fn propagation_delay(d_m: f64, p: &ChannelParams) -> f64 {
    d_m.max(0.0) / p.speed_of_light_mps
}

/// Per-station fiber delay: a uniform base draw per run plus Gaussian jitter
/// per slot, clamped at zero.
#[derive(Debug, Clone)]
pub struct FiberDelayModel {
    base_s: Vec<f64>,
    noise: Option<Normal<f64>>,
}

impl FiberDelayModel {
    pub fn new<R: Rng + ?Sized>(num_stations: usize, p: &ChannelParams, rng: &mut R) -> Self {
        let (lo, hi) = p.fiber_delay_range_s;
        let base_s = (0..num_stations)
            .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
            .collect();
        let std = p.fiber_delay_noise_std_s;
        let noise = (std > 0.0).then(|| Normal::new(0.0, std).expect("finite std"));
        Self { base_s, noise }
    }

    pub fn base_delays(&self) -> &[f64] {
        &self.base_s
    }

    /// Draws this slot's delay for every station.
    pub fn sample_slot<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.base_s
            .iter()
            .map(|&base| match &self.noise {
                Some(n) => (base + n.sample(rng)).max(0.0),
                None => base,
            })
            .collect()
    }
}

/// One slot's delay for a station with base delay `base_s`.
pub fn fiber_delay<R: Rng + ?Sized>(base_s: f64, p: &ChannelParams, rng: &mut R) -> f64 {
    let std = p.fiber_delay_noise_std_s;
    if std > 0.0 {
        let n = Normal::new(0.0, std).expect("finite std");
        (base_s + n.sample(rng)).max(0.0)
    } else {
        base_s
    }
}

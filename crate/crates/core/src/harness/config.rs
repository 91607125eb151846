//! Scenario configuration (TOML) and the bundled presets.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::ephemeris::{GeodeticCoord, WalkerConfig};
use crate::error::{Error, Result};
use crate::flow::TtlConfig;
use crate::routers::RouterKind;
use crate::skylink::{SkyLinkParams, TileCodingConfig};
use crate::topology::{GroundStation, TopologyParams};
use crate::traffic::{BufferSpec, Hotspot, TrafficParams};

/// Where the population raster comes from: a CSV file or a hotspot list.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopulationSource {
    pub file: Option<PathBuf>,
    pub hotspots: Vec<Hotspot>,
}

/// Router choice plus the knobs of every router family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouterConfig {
    pub kind: RouterKind,
    /// Link utilisation cap σ applied by the flow engine.
    pub sigma: f64,
    /// Path count for k-shortest.
    pub k: usize,
    pub skylink: SkyLinkParams,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self { kind: RouterKind::SkyLink, sigma: 0.9, k: 4, skylink: SkyLinkParams::default() }
    }
}

/// GSL outage on a fixed random subset of satellites for `[start_slot, end_slot)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureSchedule {
    pub fraction: f64,
    pub start_slot: usize,
    pub end_slot: usize,
    #[serde(default)]
    pub selection_seed: u64,
}

impl FailureSchedule {
    pub fn validate(&self, slots: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fraction) {
            return Err(Error::invalid(format!("failure fraction {} outside [0, 1]", self.fraction)));
        }
        if self.start_slot > self.end_slot || self.end_slot > slots {
            return Err(Error::invalid(format!(
                "failure window [{}, {}) must satisfy start <= end <= {slots}",
                self.start_slot, self.end_slot
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub slots: usize,
    pub slot_duration_s: f64,
    #[serde(default)]
    pub start_utc_s: f64,
    pub seeds: Vec<u64>,
    /// Orbital-plane layout. Also drives positions unless `ephemeris` is set.
    pub constellation: WalkerConfig,
    /// Optional `slot,node_id,x_m,y_m,z_m` file overriding Walker positions.
    #[serde(default)]
    pub ephemeris: Option<PathBuf>,
    /// Optional `name,lat_deg,lon_deg,num_antennas,fiber_capacity_bps` file,
    /// appended to `ground_stations`.
    #[serde(default)]
    pub ground_catalog: Option<PathBuf>,
    #[serde(default)]
    pub ground_stations: Vec<GroundStation>,
    #[serde(default)]
    pub topology: TopologyParams,
    #[serde(default)]
    pub channel: ChannelParams,
    #[serde(default)]
    pub traffic: TrafficParams,
    #[serde(default)]
    pub population: PopulationSource,
    #[serde(default)]
    pub buffers: BufferSpec,
    #[serde(default)]
    pub ttl: TtlConfig,
    #[serde(default)]
    pub router: RouterConfig,
    #[serde(default)]
    pub failure: Option<FailureSchedule>,
    /// Directory relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.slots == 0 {
            return Err(Error::invalid("slots must be at least 1"));
        }
        if !(self.slot_duration_s > 0.0) || !self.slot_duration_s.is_finite() {
            return Err(Error::invalid("slot_duration_s must be positive"));
        }
        if !self.start_utc_s.is_finite() {
            return Err(Error::invalid("start_utc_s must be finite"));
        }
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        self.constellation.validate()?;
        if self.ground_stations.is_empty() && self.ground_catalog.is_none() {
            return Err(Error::invalid("no ground stations configured"));
        }
        for gs in &self.ground_stations {
            gs.validate()?;
            GeodeticCoord::new(gs.location.latitude_deg, gs.location.longitude_deg, gs.location.altitude_m)?;
        }
        self.channel.validate()?;
        self.traffic.validate()?;
        self.buffers.validate()?;
        self.ttl.validate()?;
        self.router.skylink.validate()?;
        if !(self.router.sigma > 0.0 && self.router.sigma <= 1.0) {
            return Err(Error::invalid(format!("sigma {} outside (0, 1]", self.router.sigma)));
        }
        if self.router.k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if self.population.file.is_some() && !self.population.hotspots.is_empty() {
            return Err(Error::invalid("population: give either a file or hotspots, not both"));
        }
        for h in &self.population.hotspots {
            if !(h.population >= 0.0) || !(h.spread_deg > 0.0) {
                return Err(Error::invalid("hotspots need non-negative population and positive spread"));
            }
        }
        if let Some(f) = &self.failure {
            f.validate(self.slots)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    PaperShape,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Desk => "desk",
            Preset::PaperShape => "paper-shape",
        }
    }

    pub fn config(self) -> SimConfig {
        match self {
            Preset::Desk => desk(),
            Preset::PaperShape => paper_shape(),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "desk" => Ok(Preset::Desk),
            "paper-shape" => Ok(Preset::PaperShape),
            other => Err(Error::invalid(format!("unknown preset {other:?}"))),
        }
    }
}

fn station(name: &str, lat: f64, lon: f64, num_antennas: usize, fiber_capacity_bps: f64) -> GroundStation {
    GroundStation {
        name: name.to_string(),
        location: GeodeticCoord { latitude_deg: lat, longitude_deg: lon, altitude_m: 0.0 },
        num_antennas,
        fiber_capacity_bps,
    }
}

fn hotspot(lat_deg: f64, lon_deg: f64, population: f64, spread_deg: f64) -> Hotspot {
    Hotspot { lat_deg, lon_deg, population, spread_deg }
}

/// Walker Star shell used by both presets: near-polar, 1,200 km.
fn star(num_planes: usize, sats_per_plane: usize) -> WalkerConfig {
    WalkerConfig {
        raan_spread_deg: 180.0,
        ..WalkerConfig::new(num_planes, sats_per_plane, 87.9, 1_200e3)
    }
}

/// 8×8 shell over two metro regions. Each region has a nearby station with
/// a thin 5 Mbit/s fiber uplink and a farther one with ample fiber.
pub fn desk() -> SimConfig {
    SimConfig {
        slots: 2_000,
        slot_duration_s: 15.0,
        start_utc_s: 0.0,
        seeds: (1..=10).collect(),
        constellation: star(8, 8),
        ephemeris: None,
        ground_catalog: None,
        ground_stations: vec![
            station("paris", 48.9, 2.4, 4, 5e6),
            station("madrid", 40.4, -3.7, 4, 1e9),
            station("tokyo", 35.7, 139.7, 4, 5e6),
            station("sapporo", 43.1, 141.3, 4, 1e9),
        ],
        topology: TopologyParams { min_elevation_deg: 10.0, ..TopologyParams::default() },
        channel: ChannelParams::default(),
        traffic: TrafficParams::default(),
        population: PopulationSource {
            file: None,
            hotspots: vec![
                hotspot(48.9, 2.4, 75e3, 3.0),
                hotspot(51.5, -0.1, 75e3, 3.0),
                hotspot(45.5, 9.2, 50e3, 3.0),
                hotspot(35.7, 139.7, 75e3, 3.0),
                hotspot(34.7, 135.5, 50e3, 3.0),
                hotspot(37.6, 127.0, 50e3, 3.0),
            ],
        },
        buffers: BufferSpec { satellite_buffer_bits: 4e6, ground_buffer_bits: 2e7 },
        ttl: TtlConfig::default(),
        router: RouterConfig::default(),
        failure: None,
        base_dir: PathBuf::new(),
    }
}

/// A 648-satellite near-polar shell with a global station set and metro
/// hotspots, run for four weeks of 15 s slots.
pub fn paper_shape() -> SimConfig {
    let stations = [
        ("fairbanks", 64.8, -147.7),
        ("seattle", 47.6, -122.3),
        ("los-angeles", 34.1, -118.2),
        ("denver", 39.7, -105.0),
        ("chicago", 41.9, -87.6),
        ("new-york", 40.7, -74.0),
        ("miami", 25.8, -80.2),
        ("mexico-city", 19.4, -99.1),
        ("bogota", 4.7, -74.1),
        ("lima", -12.0, -77.0),
        ("sao-paulo", -23.5, -46.6),
        ("buenos-aires", -34.6, -58.4),
        ("santiago", -33.4, -70.7),
        ("reykjavik", 64.1, -21.9),
        ("london", 51.5, -0.1),
        ("madrid", 40.4, -3.7),
        ("frankfurt", 50.1, 8.7),
        ("svalbard", 78.2, 15.6),
        ("moscow", 55.8, 37.6),
        ("istanbul", 41.0, 29.0),
        ("cairo", 30.0, 31.2),
        ("lagos", 6.5, 3.4),
        ("nairobi", -1.3, 36.8),
        ("johannesburg", -26.2, 28.0),
        ("dubai", 25.2, 55.3),
        ("mumbai", 19.1, 72.9),
        ("delhi", 28.6, 77.2),
        ("singapore", 1.35, 103.8),
        ("hong-kong", 22.3, 114.2),
        ("beijing", 39.9, 116.4),
        ("tokyo", 35.7, 139.7),
        ("perth", -31.95, 115.9),
        ("sydney", -33.9, 151.2),
        ("auckland", -36.8, 174.8),
    ];
    let metros = [
        (35.7, 139.7, 3.7e6),
        (28.6, 77.2, 3.2e6),
        (31.2, 121.5, 2.8e6),
        (-23.5, -46.6, 2.2e6),
        (19.4, -99.1, 2.2e6),
        (30.0, 31.2, 2.1e6),
        (19.1, 72.9, 2.0e6),
        (39.9, 116.4, 2.0e6),
        (23.8, 90.4, 2.2e6),
        (40.7, -74.0, 1.9e6),
        (24.9, 67.0, 1.6e6),
        (-34.6, -58.4, 1.5e6),
        (41.0, 29.0, 1.5e6),
        (6.5, 3.4, 1.5e6),
        (14.6, 121.0, 1.4e6),
        (55.8, 37.6, 1.3e6),
        (34.1, -118.2, 1.2e6),
        (51.5, -0.1, 0.9e6),
        (48.9, 2.4, 1.1e6),
        (-6.2, 106.8, 1.1e6),
    ];
    SimConfig {
        slots: 40_320,
        slot_duration_s: 15.0,
        start_utc_s: 0.0,
        seeds: (1..=10).collect(),
        constellation: star(18, 36),
        ephemeris: None,
        ground_catalog: None,
        ground_stations: stations.iter().map(|&(n, lat, lon)| station(n, lat, lon, 2, 50e9)).collect(),
        topology: TopologyParams::default(),
        channel: ChannelParams::default(),
        traffic: TrafficParams::default(),
        population: PopulationSource {
            file: None,
            hotspots: metros.iter().map(|&(lat, lon, pop)| hotspot(lat, lon, pop, 1.5)).collect(),
        },
        buffers: BufferSpec::default(),
        ttl: TtlConfig::default(),
        router: RouterConfig {
            skylink: SkyLinkParams { tiles: TileCodingConfig::default(), ..SkyLinkParams::default() },
            ..RouterConfig::default()
        },
        failure: Some(FailureSchedule {
            fraction: 0.03,
            start_slot: 3 * 5_760,
            end_slot: 4 * 5_760,
            selection_seed: 0,
        }),
        base_dir: PathBuf::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_round_trip() {
        for p in [Preset::Desk, Preset::PaperShape] {
            let cfg = p.config();
            cfg.validate().unwrap();
            let text = cfg.to_toml_string().unwrap();
            assert_eq!(SimConfig::from_toml_str(&text).unwrap(), cfg, "{p}");
            assert_eq!(p.as_str().parse::<Preset>().unwrap(), p);
        }
        let desk = desk();
        assert_eq!(desk.constellation.num_satellites(), 64);
        assert_eq!(desk.ground_stations.len(), 4);
        assert_eq!(desk.population.hotspots.len(), 6);
        assert_eq!(desk.slots, 2_000);
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let text = r#"
            slots = 3
            slot_duration_s = 15.0
            seeds = [1]

            [constellation]
            num_planes = 2
            sats_per_plane = 3
            inclination_deg = 53.0
            altitude_m = 550e3
            phasing_offset_deg = 0.0

            [[ground_stations]]
            name = "gs"
            location = { latitude_deg = 10.0, longitude_deg = 20.0, altitude_m = 0.0 }
            num_antennas = 2
            fiber_capacity_bps = 1e9
        "#;
        let cfg = SimConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.router.kind, RouterKind::SkyLink);
        assert_eq!(cfg.ttl.t_max_s, 0.2);
        assert_eq!(cfg.router.skylink.tiles.tile_width_m, 500e3);
        assert!(cfg.failure.is_none());
    }

    #[test]
    fn config_errors_are_reported() {
        let mut cfg = desk();
        cfg.slots = 0;
        assert!(cfg.validate().unwrap_err().is_config_error());
        let mut cfg = desk();
        cfg.seeds.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = desk();
        cfg.failure = Some(FailureSchedule { fraction: 0.2, start_slot: 10, end_slot: 5, selection_seed: 0 });
        assert!(cfg.validate().is_err());
        assert!(SimConfig::from_toml_str("slots = \"many\"").unwrap_err().is_config_error());
        assert!(SimConfig::from_toml_str("bogus = 1").is_err());
    }
}

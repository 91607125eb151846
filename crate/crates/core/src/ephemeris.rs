//! Node positions per time slot.
//!
//! Satellites either come from a synthetic circular-orbit Walker constellation
//! or from a precomputed ephemeris CSV. The Earth is a sphere of configurable
//! radius; all positions are Earth-centered Earth-fixed (ECEF).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Standard gravitational parameter of the Earth, m³/s².
pub const GM_EARTH: f64 = 3.986_004_418e14;
/// Sidereal rotation rate of the Earth, rad/s.
pub const EARTH_ROTATION_RATE: f64 = 7.292_115_9e-5;

const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodeticCoord {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
}

impl GeodeticCoord {
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self> {
        if !(-90.0..=90.0).contains(&latitude_deg) || !latitude_deg.is_finite() {
            return Err(Error::invalid(format!("latitude {latitude_deg} outside [-90, 90]")));
        }
        if !longitude_deg.is_finite() {
            return Err(Error::invalid("longitude must be finite"));
        }
        if !(altitude_m >= 0.0) || !altitude_m.is_finite() {
            return Err(Error::invalid(format!("altitude {altitude_m} must be >= 0")));
        }
        Ok(Self {
            latitude_deg,
            longitude_deg: normalize_longitude(longitude_deg),
            altitude_m,
        })
    }
}

/// Wraps a longitude into [-180, 180).
pub fn normalize_longitude(lon_deg: f64) -> f64 {
    let wrapped = (lon_deg + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can return exactly 360.0 for tiny negative inputs.
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EcefPosition {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
}

impl EcefPosition {
    pub const fn new(x_m: f64, y_m: f64, z_m: f64) -> Self {
        Self { x_m, y_m, z_m }
    }

    pub fn norm(&self) -> f64 {
        (self.x_m * self.x_m + self.y_m * self.y_m + self.z_m * self.z_m).sqrt()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x_m * other.x_m + self.y_m * other.y_m + self.z_m * other.z_m
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x_m - other.x_m, self.y_m - other.y_m, self.z_m - other.z_m)
    }

    pub fn is_finite(&self) -> bool {
        self.x_m.is_finite() && self.y_m.is_finite() && self.z_m.is_finite()
    }

    /// Longitude of the point's radial projection, in [-180, 180).
    pub fn longitude_deg(&self) -> f64 {
        normalize_longitude(self.y_m.atan2(self.x_m).to_degrees())
    }

    pub fn latitude_deg(&self) -> f64 {
        let horizontal = self.x_m.hypot(self.y_m);
        self.z_m.atan2(horizontal).to_degrees()
    }

    /// Spherical-Earth geodetic coordinates of this point.
    pub fn to_geodetic(&self, earth_radius_m: f64) -> GeodeticCoord {
        GeodeticCoord {
            latitude_deg: self.latitude_deg(),
            longitude_deg: self.longitude_deg(),
            altitude_m: (self.norm() - earth_radius_m).max(0.0),
        }
    }
}

/// Spherical-Earth conversion.
pub fn geodetic_to_ecef(g: &GeodeticCoord, earth_radius_m: f64) -> EcefPosition {
    let lat = g.latitude_deg.to_radians();
    let lon = g.longitude_deg.to_radians();
    let r = earth_radius_m + g.altitude_m;
    EcefPosition::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin())
}

pub fn distance(a: &EcefPosition, b: &EcefPosition) -> f64 {
    a.sub(b).norm()
}

/// Elevation of `sat` above the local horizon at `ground`, in degrees.
///
/// The horizon plane is perpendicular to the ground point's outward radial.
pub fn elevation_angle(ground: &EcefPosition, sat: &EcefPosition) -> f64 {
    let los = sat.sub(ground);
    let los_norm = los.norm();
    let up_norm = ground.norm();
    if los_norm == 0.0 || up_norm == 0.0 {
        return 90.0;
    }
    // atan2 keeps precision near the zenith where asin is ill-conditioned.
    let along = los.dot(ground);
    let cross = [
        los.y_m * ground.z_m - los.z_m * ground.y_m,
        los.z_m * ground.x_m - los.x_m * ground.z_m,
        los.x_m * ground.y_m - los.y_m * ground.x_m,
    ];
    let across = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    along.atan2(across).to_degrees()
}

/// Local solar hour (0..=23) at a longitude for a UTC timestamp.
pub fn local_solar_hour(longitude_deg: f64, utc_s: f64) -> u8 {
    let utc_hour = utc_s.rem_euclid(SECONDS_PER_DAY) / 3600.0;
    let local = (utc_hour + longitude_deg / 15.0).rem_euclid(24.0);
    (local.floor() as u8).min(23)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkerConfig {
    pub num_planes: usize,
    pub sats_per_plane: usize,
    pub inclination_deg: f64,
    pub altitude_m: f64,
    pub phasing_offset_deg: f64,
    #[serde(default)]
    pub epoch_utc_s: f64,
    /// Angular span the ascending nodes are spread over. 360° gives
    /// RAAN = p·360°/P; 180° gives the classic Walker Star layout.
    #[serde(default = "default_raan_spread")]
    pub raan_spread_deg: f64,
    #[serde(default = "default_earth_radius")]
    pub earth_radius_m: f64,
}

fn default_raan_spread() -> f64 {
    360.0
}

fn default_earth_radius() -> f64 {
    DEFAULT_EARTH_RADIUS_M
}

impl WalkerConfig {
    pub fn new(num_planes: usize, sats_per_plane: usize, inclination_deg: f64, altitude_m: f64) -> Self {
        Self {
            num_planes,
            sats_per_plane,
            inclination_deg,
            altitude_m,
            phasing_offset_deg: 0.0,
            epoch_utc_s: 0.0,
            raan_spread_deg: default_raan_spread(),
            earth_radius_m: DEFAULT_EARTH_RADIUS_M,
        }
    }

    pub fn num_satellites(&self) -> usize {
        self.num_planes * self.sats_per_plane
    }

    pub fn orbit_radius_m(&self) -> f64 {
        self.earth_radius_m + self.altitude_m
    }

    /// Mean motion of the circular orbit, rad/s.
    pub fn mean_motion(&self) -> f64 {
        (GM_EARTH / self.orbit_radius_m().powi(3)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_planes == 0 || self.sats_per_plane == 0 {
            return Err(Error::invalid("walker constellation needs at least one plane and one satellite per plane"));
        }
        if !(self.altitude_m > 0.0) || !self.altitude_m.is_finite() {
            return Err(Error::invalid("walker altitude must be positive"));
        }
        if !(self.earth_radius_m > 0.0) {
            return Err(Error::invalid("earth radius must be positive"));
        }
        if !self.inclination_deg.is_finite() || !self.phasing_offset_deg.is_finite() || !self.raan_spread_deg.is_finite() {
            return Err(Error::invalid("walker angles must be finite"));
        }
        Ok(())
    }

    /// Plane and in-plane index of satellite `sat` (plane-major numbering).
    pub fn layout(&self) -> Vec<PlaneSlot> {
        (0..self.num_satellites())
            .map(|i| PlaneSlot { plane: i / self.sats_per_plane, index: i % self.sats_per_plane })
            .collect()
    }
}

/// Where a satellite sits in the orbital-plane grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlaneSlot {
    pub plane: usize,
    pub index: usize,
}

/// Circular-orbit Walker constellation generator.
#[derive(Debug, Clone)]
pub struct WalkerConstellation {
    cfg: WalkerConfig,
}

impl WalkerConstellation {
    pub fn new(cfg: WalkerConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }

    pub fn config(&self) -> &WalkerConfig {
        &self.cfg
    }

    /// ECEF positions of all satellites `elapsed_s` seconds after the epoch.
    /// The ECI and ECEF frames coincide at the epoch.
    pub fn positions_at(&self, elapsed_s: f64) -> Vec<EcefPosition> {
        let cfg = &self.cfg;
        let r = cfg.orbit_radius_m();
        let inc = cfg.inclination_deg.to_radians();
        let advance = cfg.mean_motion() * elapsed_s;
        let earth_angle = EARTH_ROTATION_RATE * elapsed_s;
        let (sin_e, cos_e) = earth_angle.sin_cos();
        let mut out = Vec::with_capacity(cfg.num_satellites());
        for p in 0..cfg.num_planes {
            let raan = (p as f64 * cfg.raan_spread_deg / cfg.num_planes as f64).to_radians();
            let (sin_o, cos_o) = raan.sin_cos();
            for s in 0..cfg.sats_per_plane {
                let anomaly = (s as f64 * 360.0 / cfg.sats_per_plane as f64 + p as f64 * cfg.phasing_offset_deg)
                    .to_radians()
                    + advance;
                let (sin_u, cos_u) = anomaly.sin_cos();
                // Perifocal -> ECI for a circular orbit with argument of latitude u.
                let x = r * (cos_o * cos_u - sin_o * sin_u * inc.cos());
                let y = r * (sin_o * cos_u + cos_o * sin_u * inc.cos());
                let z = r * sin_u * inc.sin();
                // ECI -> ECEF: rotate by -earth_angle about z.
                out.push(EcefPosition::new(cos_e * x + sin_e * y, -sin_e * x + cos_e * y, z));
            }
        }
        out
    }

    pub fn positions_at_slot(&self, slot: usize, slot_duration_s: f64) -> Vec<EcefPosition> {
        self.positions_at(slot as f64 * slot_duration_s)
    }
}

/// Positions for one slot of a Walker constellation; rejects invalid configs.
pub fn generate_walker_star(cfg: &WalkerConfig, slot: usize, slot_duration_s: f64) -> Result<Vec<EcefPosition>> {
    Ok(WalkerConstellation::new(cfg.clone())?.positions_at_slot(slot, slot_duration_s))
}

/// Precomputed satellite positions, indexed `[slot][satellite]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EphemerisTable {
    slot_duration_s: f64,
    positions: Vec<Vec<EcefPosition>>,
}

impl EphemerisTable {
    pub fn new(slot_duration_s: f64, positions: Vec<Vec<EcefPosition>>) -> Result<Self> {
        let n = positions.first().map_or(0, Vec::len);
        for (slot, row) in positions.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!("slot {slot} has {} nodes, expected {n}", row.len())));
            }
            if let Some(node) = row.iter().position(|p| !p.is_finite()) {
                return Err(Error::invalid(format!("non-finite position for node {node} at slot {slot}")));
            }
        }
        Ok(Self { slot_duration_s, positions })
    }

    /// Samples a constellation for `num_slots` slots.
    pub fn from_walker(walker: &WalkerConstellation, num_slots: usize, slot_duration_s: f64) -> Self {
        let positions = (0..num_slots).map(|t| walker.positions_at_slot(t, slot_duration_s)).collect();
        Self { slot_duration_s, positions }
    }

    pub fn num_slots(&self) -> usize {
        self.positions.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    pub fn slot_duration_s(&self) -> f64 {
        self.slot_duration_s
    }

    pub fn slot(&self, slot: usize) -> &[EcefPosition] {
        &self.positions[slot]
    }

    /// CSV text with header `slot,node_id,x_m,y_m,z_m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slot,node_id,x_m,y_m,z_m\n");
        for (slot, row) in self.positions.iter().enumerate() {
            for (node, p) in row.iter().enumerate() {
                // `{}` on f64 prints the shortest string that parses back to the same value.
                let _ = writeln!(out, "{slot},{node},{},{},{}", p.x_m, p.y_m, p.z_m);
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str, slot_duration_s: f64) -> Result<Self> {
        let mut rows: Vec<(usize, usize, EcefPosition)> = Vec::new();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "slot,node_id,x_m,y_m,z_m" => {}
            Some((_, header)) => {
                return Err(Error::parse(1, format!("unexpected header {header:?}")));
            }
            None => return Err(Error::parse(1, "empty ephemeris file")),
        }
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::parse(line_no, format!("expected 5 fields, found {}", fields.len())));
            }
            let slot: usize = fields[0].parse().map_err(|_| Error::parse(line_no, "bad slot index"))?;
            let node: usize = fields[1].parse().map_err(|_| Error::parse(line_no, "bad node_id"))?;
            let mut coord = [0.0f64; 3];
            for (c, f) in coord.iter_mut().zip(&fields[2..]) {
                *c = f.parse().map_err(|_| Error::parse(line_no, format!("bad coordinate {f:?}")))?;
                if !c.is_finite() {
                    return Err(Error::parse(line_no, "non-finite coordinate"));
                }
            }
            rows.push((slot, node, EcefPosition::new(coord[0], coord[1], coord[2])));
        }
        let num_slots = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let num_nodes = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        let mut grid: Vec<Vec<Option<EcefPosition>>> = vec![vec![None; num_nodes]; num_slots];
        for (slot, node, p) in rows {
            grid[slot][node] = Some(p);
        }
        let mut positions = Vec::with_capacity(num_slots);
        for (slot, row) in grid.into_iter().enumerate() {
            let mut full = Vec::with_capacity(num_nodes);
            for (node, p) in row.into_iter().enumerate() {
                full.push(p.ok_or(Error::IncompleteEphemeris { node, slot })?);
            }
            positions.push(full);
        }
        Ok(Self { slot_duration_s, positions })
    }
}

pub fn load_ephemeris(path: &Path, slot_duration_s: f64) -> Result<EphemerisTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EphemerisTable::parse(&text, slot_duration_s)
}

//! User uplink demand per satellite: population under the footprint times
//! device density, per-device rate and a local-time-of-day factor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ephemeris::{geodetic_to_ecef, EcefPosition, GeodeticCoord};
use crate::error::{Error, Result};

pub const GRID_ROWS: usize = 180;
pub const GRID_COLS: usize = 360;

/// Hour-of-day demand multipliers; mean 1.0, trough 0.5 at 04h, peak 1.4 at 20h.
pub const DEFAULT_DIURNAL: [f64; 24] = [
    0.90, 0.76, 0.62, 0.53, 0.50, 0.54, 0.64, 0.78, 0.92, 1.02, 1.08, 1.09, //
    1.10, 1.10, 1.12, 1.14, 1.22, 1.27, 1.33, 1.38, 1.40, 1.34, 1.20, 1.02,
];

/// One-degree population raster.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGrid {
    counts: Vec<f64>,
    /// Non-empty cells as (unit vector of the cell centre, population).
    occupied: Vec<([f64; 3], f64)>,
}

impl PopulationGrid {
    pub fn from_counts(counts: Vec<f64>) -> Result<Self> {
        if counts.len() != GRID_ROWS * GRID_COLS {
            return Err(Error::invalid(format!("population grid needs {} cells", GRID_ROWS * GRID_COLS)));
        }
        if counts.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::invalid("population counts must be finite and non-negative"));
        }
        let occupied = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0.0)
            .map(|(idx, c)| {
                let center = Self::cell_center(idx / GRID_COLS, idx % GRID_COLS);
                (unit(&geodetic_to_ecef(&center, 1.0)), *c)
            })
            .collect();
        Ok(Self { counts, occupied })
    }

    pub fn empty() -> Self {
        Self { counts: vec![0.0; GRID_ROWS * GRID_COLS], occupied: Vec::new() }
    }

    /// Centre of the cell in row `row` (south to north) and column `col` (west to east).
    pub fn cell_center(row: usize, col: usize) -> GeodeticCoord {
        GeodeticCoord {
            latitude_deg: -89.5 + row as f64,
            longitude_deg: -179.5 + col as f64,
            altitude_m: 0.0,
        }
    }

    /// Cell containing a coordinate.
    pub fn cell_of(lat_deg: f64, lon_deg: f64) -> (usize, usize) {
        let row = ((lat_deg + 90.0).floor().max(0.0) as usize).min(GRID_ROWS - 1);
        let lon = crate::ephemeris::normalize_longitude(lon_deg);
        let col = ((lon + 180.0).floor().max(0.0) as usize).min(GRID_COLS - 1);
        (row, col)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.counts[row * GRID_COLS + col]
    }

    pub fn total(&self) -> f64 {
        self.occupied.iter().map(|(_, c)| c).sum()
    }

    pub fn occupied_cells(&self) -> usize {
        self.occupied.len()
    }

    /// Parses a `lat_deg,lon_deg,population` CSV; absent cells are zero and
    /// repeated cells accumulate.
    pub fn parse_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            lat_deg: f64,
            lon_deg: f64,
            population: f64,
        }
        let mut counts = vec![0.0; GRID_ROWS * GRID_COLS];
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row?;
            if !(-90.0..=90.0).contains(&row.lat_deg) || !row.lon_deg.is_finite() {
                return Err(Error::parse(i + 2, "coordinate out of range"));
            }
            if !(row.population >= 0.0) || !row.population.is_finite() {
                return Err(Error::parse(i + 2, "population must be finite and non-negative"));
            }
            let (r, c) = Self::cell_of(row.lat_deg, row.lon_deg);
            counts[r * GRID_COLS + c] += row.population;
        }
        Self::from_counts(counts)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(file)
    }

    /// Synthetic raster built from Gaussian population blobs.
    pub fn synthetic(spec: &SyntheticPopulation) -> Result<Self> {
        let mut counts = vec![0.0; GRID_ROWS * GRID_COLS];
        for h in &spec.hotspots {
            if !(h.spread_deg > 0.0) || !(h.population >= 0.0) {
                return Err(Error::invalid("hotspot needs positive spread and non-negative population"));
            }
            let center = unit(&geodetic_to_ecef(&GeodeticCoord::new(h.lat_deg, h.lon_deg, 0.0)?, 1.0));
            let reach = (3.0 * h.spread_deg).to_radians().cos();
            let mut weights = Vec::new();
            for row in 0..GRID_ROWS {
                for col in 0..GRID_COLS {
                    let c = unit(&geodetic_to_ecef(&Self::cell_center(row, col), 1.0));
                    let cos_angle = dot(&c, &center).clamp(-1.0, 1.0);
                    if cos_angle < reach {
                        continue;
                    }
                    let angle = cos_angle.acos().to_degrees() / h.spread_deg;
                    // Cell area shrinks with cos(latitude).
                    let area = Self::cell_center(row, col).latitude_deg.to_radians().cos();
                    weights.push((row * GRID_COLS + col, (-0.5 * angle * angle).exp() * area));
                }
            }
            let total: f64 = weights.iter().map(|w| w.1).sum();
            if total > 0.0 {
                for (idx, w) in weights {
                    counts[idx] += h.population * w / total;
                }
            }
        }
        Self::from_counts(counts)
    }
}

fn unit(p: &EcefPosition) -> [f64; 3] {
    let n = p.norm();
    [p.x_m / n, p.y_m / n, p.z_m / n]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hotspot {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub population: f64,
    pub spread_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticPopulation {
    pub hotspots: Vec<Hotspot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficParams {
    pub devices_per_person: f64,
    pub rate_per_device_bps: f64,
    pub diurnal: Vec<f64>,
}

impl Default for TrafficParams {
    fn default() -> Self {
        Self { devices_per_person: 0.003175, rate_per_device_bps: 22.98e3, diurnal: DEFAULT_DIURNAL.to_vec() }
    }
}

impl TrafficParams {
    pub fn validate(&self) -> Result<()> {
        if self.diurnal.len() != 24 {
            return Err(Error::invalid(format!("diurnal profile needs 24 entries, got {}", self.diurnal.len())));
        }
        if self.diurnal.iter().any(|f| !(*f >= 0.0) || !f.is_finite()) {
            return Err(Error::invalid("diurnal factors must be finite and non-negative"));
        }
        if !(self.devices_per_person >= 0.0) || !(self.rate_per_device_bps >= 0.0) {
            return Err(Error::invalid("traffic rates must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BufferSpec {
    pub satellite_buffer_bits: f64,
    pub ground_buffer_bits: f64,
}

impl Default for BufferSpec {
    fn default() -> Self {
        // 50 MB per satellite, 1 GB per ground station.
        Self { satellite_buffer_bits: 50e6 * 8.0, ground_buffer_bits: 1e9 * 8.0 }
    }
}

impl BufferSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.satellite_buffer_bits > 0.0 && self.ground_buffer_bits > 0.0) {
            return Err(Error::invalid("buffer sizes must be positive"));
        }
        Ok(())
    }
}

/// Population served by each satellite: every occupied cell goes to the
/// satellite whose sub-satellite point is closest along the great circle.
/// Exact ties go to the lower satellite index.
pub fn assign_cells(positions: &[EcefPosition], grid: &PopulationGrid) -> Vec<f64> {
    let mut pop = vec![0.0; positions.len()];
    if positions.is_empty() {
        return pop;
    }
    let units: Vec<[f64; 3]> = positions.iter().map(unit).collect();
    for (cell, count) in &grid.occupied {
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        // Largest cosine means smallest central angle.
        for (i, u) in units.iter().enumerate() {
            let d = dot(cell, u);
            if d > best_dot {
                best_dot = d;
                best = i;
            }
        }
        pop[best] += count;
    }
    pop
}

/// Uplink demand of one satellite, bit/s.
pub fn generation_rate(population: f64, params: &TrafficParams, local_hour: u8) -> f64 {
    population * params.devices_per_person * params.rate_per_device_bps * params.diurnal[local_hour as usize % 24]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ephemeris::{WalkerConfig, WalkerConstellation, DEFAULT_EARTH_RADIUS_M};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid_with(cells: &[((f64, f64), f64)]) -> PopulationGrid {
        let mut counts = vec![0.0; GRID_ROWS * GRID_COLS];
        for ((lat, lon), c) in cells {
            let (r, col) = PopulationGrid::cell_of(*lat, *lon);
            counts[r * GRID_COLS + col] += c;
        }
        PopulationGrid::from_counts(counts).unwrap()
    }

    fn sat_over(lat: f64, lon: f64) -> EcefPosition {
        geodetic_to_ecef(&GeodeticCoord::new(lat, lon, 1.2e6).unwrap(), DEFAULT_EARTH_RADIUS_M)
    }

    #[test]
    fn default_diurnal_shape() {
        let mean: f64 = DEFAULT_DIURNAL.iter().sum::<f64>() / 24.0;
        assert_relative_eq!(mean, 1.0, max_relative = 1e-12);
        assert_eq!(DEFAULT_DIURNAL[20], 1.4);
        assert_eq!(DEFAULT_DIURNAL[4], 0.5);
        assert!(DEFAULT_DIURNAL.iter().all(|v| (0.5..=1.4).contains(v)));
    }

    #[test]
    fn single_satellite_takes_everything() {
        let g = grid_with(&[((10.5, 20.5), 100.0), ((-40.5, -70.5), 50.0)]);
        assert_eq!(assign_cells(&[sat_over(0.0, 0.0)], &g), vec![150.0]);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let g = grid_with(&[((10.5, 20.5), 10.0)]);
        let s = sat_over(0.0, 0.0);
        assert_eq!(assign_cells(&[s, s], &g), vec![10.0, 0.0]);
        let far = sat_over(-60.0, -150.0);
        assert_eq!(assign_cells(&[far, s, s], &g), vec![0.0, 10.0, 0.0]);
    }

    #[test]
    fn toy_grid_matches_exhaustive_search() {
        let cells = [((10.5, 10.5), 1.0), ((-20.5, 80.5), 2.0), ((60.5, -120.5), 4.0), ((-5.5, 170.5), 8.0)];
        let g = grid_with(&cells);
        let sats = [sat_over(0.0, 0.0), sat_over(0.0, 90.0), sat_over(45.0, -100.0), sat_over(-10.0, 179.0)];
        // Oracle: haversine central angle on each cell/sub-point pair.
        let mut expected = [0.0; 4];
        for ((lat, lon), pop) in cells {
            let (r, c) = PopulationGrid::cell_of(lat, lon);
            let cc = PopulationGrid::cell_center(r, c);
            let angle = |s: &EcefPosition| {
                let (la1, lo1) = (cc.latitude_deg.to_radians(), cc.longitude_deg.to_radians());
                let (la2, lo2) = (s.latitude_deg().to_radians(), s.longitude_deg().to_radians());
                let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((lo2 - lo1) / 2.0).sin().powi(2);
                2.0 * h.sqrt().asin()
            };
            let best = (0..4).min_by(|&a, &b| angle(&sats[a]).total_cmp(&angle(&sats[b]))).unwrap();
            expected[best] += pop;
        }
        assert_eq!(assign_cells(&sats, &g), expected.to_vec());
        assert_eq!(expected, [1.0, 2.0, 4.0, 8.0]);
    }

    #[test]
    fn generation_rate_examples() {
        let p = TrafficParams { diurnal: vec![1.0; 24], ..Default::default() };
        assert_eq!(generation_rate(0.0, &p, 5), 0.0);
        assert_relative_eq!(generation_rate(1e6, &p, 5), 72.9615e6, max_relative = 1e-12);
        let doubled = TrafficParams { devices_per_person: 2.0 * p.devices_per_person, ..p.clone() };
        assert_relative_eq!(generation_rate(1e6, &doubled, 5), 2.0 * generation_rate(1e6, &p, 5));
    }

    #[test]
    fn csv_population_parses_and_accumulates() {
        let text = "lat_deg,lon_deg,population\n10.5,20.5,100\n10.2,20.9,50\n-89.5,179.5,1\n";
        let g = PopulationGrid::parse_csv(text.as_bytes()).unwrap();
        let (r, c) = PopulationGrid::cell_of(10.5, 20.5);
        assert_eq!(g.get(r, c), 150.0);
        assert_eq!(g.total(), 151.0);
        assert!(PopulationGrid::parse_csv("lat_deg,lon_deg,population\n0,0,-4\n".as_bytes()).is_err());
    }

    #[test]
    fn synthetic_hotspots_conserve_population() {
        let spec = SyntheticPopulation {
            hotspots: vec![
                Hotspot { lat_deg: 50.0, lon_deg: 10.0, population: 1e7, spread_deg: 3.0 },
                Hotspot { lat_deg: -20.0, lon_deg: 120.0, population: 5e6, spread_deg: 8.0 },
            ],
        };
        let g = PopulationGrid::synthetic(&spec).unwrap();
        assert_relative_eq!(g.total(), 1.5e7, max_relative = 1e-9);
        let (r, c) = PopulationGrid::cell_of(50.0, 10.0);
        assert!(g.get(r, c) > 0.0);
    }

    proptest! {
        #[test]
        fn population_is_conserved(t in 0.0f64..20_000.0, lat in -60.0f64..60.0, lon in -180.0f64..180.0) {
            let g = PopulationGrid::synthetic(&SyntheticPopulation {
                hotspots: vec![Hotspot { lat_deg: lat, lon_deg: lon, population: 2e6, spread_deg: 5.0 }],
            }).unwrap();
            let w = WalkerConstellation::new(WalkerConfig::new(4, 6, 80.0, 1.2e6)).unwrap();
            let pop = assign_cells(&w.positions_at(t), &g);
            prop_assert!((pop.iter().sum::<f64>() - g.total()).abs() <= 1e-9 * g.total());
        }

        #[test]
        fn rate_is_linear(pop in 0.0f64..1e8, d in 0.0f64..0.1, nu in 0.0f64..1e5, k in 0.0f64..10.0, h in 0u8..24) {
            let p = TrafficParams { devices_per_person: d, rate_per_device_bps: nu, ..Default::default() };
            let scaled_d = TrafficParams { devices_per_person: d * k, ..p.clone() };
            let scaled_nu = TrafficParams { rate_per_device_bps: nu * k, ..p.clone() };
            let base = generation_rate(pop, &p, h);
            prop_assert!((generation_rate(pop, &scaled_d, h) - k * base).abs() <= 1e-9 * (k * base).max(1.0));
            prop_assert!((generation_rate(pop, &scaled_nu, h) - k * base).abs() <= 1e-9 * (k * base).max(1.0));
        }
    }
}

//! Constellation geometry: circular-orbit satellite positions, gateway
//! positions on a rotating spherical Earth, and slant ranges between nodes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
/// Earth gravitational parameter in km^3/s^2.
pub const MU_EARTH: f64 = 398600.4418;
/// Sidereal day in seconds; gateways rotate at 360 deg per sidereal day.
pub const SIDEREAL_DAY_S: f64 = 86164.0;
/// Speed of light in km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299792.458;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("satellite id (plane {plane}, slot {slot}) out of range for {num_planes}x{sats_per_plane} shell")]
    SatelliteOutOfRange {
        plane: usize,
        slot: usize,
        num_planes: usize,
        sats_per_plane: usize,
    },
    #[error("invalid shell parameters: {0}")]
    InvalidShell(String),
    #[error("invalid geodetic position: {0}")]
    InvalidGeoPosition(String),
}

/// Constellation shell: `num_planes` orbital planes of `sats_per_plane`
/// satellites each, on circular orbits at a common altitude and inclination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitalShell {
    pub num_planes: usize,
    pub sats_per_plane: usize,
    /// Altitude above the Earth surface, km.
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// Inter-plane phase shift in degrees of true anomaly per plane.
    #[serde(default)]
    pub phasing_offset_deg: f64,
    /// Total right-ascension span covered by the planes, degrees.
    #[serde(default = "default_raan_spread")]
    pub raan_spread_deg: f64,
}

fn default_raan_spread() -> f64 {
    360.0
}

impl OrbitalShell {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.num_planes < 1 {
            return Err(GeometryError::InvalidShell(
                "num_planes must be >= 1".into(),
            ));
        }
        if self.sats_per_plane < 1 {
            return Err(GeometryError::InvalidShell(
                "sats_per_plane must be >= 1".into(),
            ));
        }
        if !(self.altitude_km > 0.0) {
            return Err(GeometryError::InvalidShell(
                "altitude_km must be > 0".into(),
            ));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(GeometryError::InvalidShell(
                "inclination_deg must be in [0, 180]".into(),
            ));
        }
        Ok(())
    }

    pub fn num_satellites(&self) -> usize {
        self.num_planes * self.sats_per_plane
    }

    /// Orbit radius measured from the Earth center, km.
    pub fn orbital_radius_km(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    /// Orbital period T = 2*pi*sqrt(r^3 / mu), seconds.
    pub fn orbital_period_s(&self) -> f64 {
        let r = self.orbital_radius_km();
        2.0 * std::f64::consts::PI * (r.powi(3) / MU_EARTH).sqrt()
    }

    pub fn contains(&self, id: SatelliteId) -> bool {
        id.plane < self.num_planes && id.slot < self.sats_per_plane
    }

    /// Dense index of a satellite, plane-major.
    pub fn sat_index(&self, id: SatelliteId) -> usize {
        id.plane * self.sats_per_plane + id.slot
    }

    pub fn sat_id(&self, index: usize) -> SatelliteId {
        SatelliteId {
            plane: index / self.sats_per_plane,
            slot: index % self.sats_per_plane,
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = SatelliteId> + '_ {
        (0..self.num_satellites()).map(|i| self.sat_id(i))
    }
}

/// (plane, slot) identity of a satellite within a shell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SatelliteId {
    pub plane: usize,
    pub slot: usize,
}

impl std::fmt::Display for SatelliteId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "p{}s{}", self.plane, self.slot)
    }
}

/// Cartesian position in km, Earth-centered frame fixed at the epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcefVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EcefVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Unit vector in the same direction; the zero vector maps to itself.
    pub fn unit(&self) -> EcefVector {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            EcefVector::new(self.x / n, self.y / n, self.z / n)
        }
    }
}

/// Geodetic position on the spherical Earth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPosition {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default)]
    pub altitude_km: f64,
}

impl GeoPosition {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(GeometryError::InvalidGeoPosition(format!(
                "latitude {} out of [-90, 90]",
                self.latitude_deg
            )));
        }
        if !(-180.0..180.0).contains(&self.longitude_deg) {
            return Err(GeometryError::InvalidGeoPosition(format!(
                "longitude {} out of [-180, 180)",
                self.longitude_deg
            )));
        }
        if self.altitude_km < 0.0 {
            return Err(GeometryError::InvalidGeoPosition(format!(
                "altitude {} below surface",
                self.altitude_km
            )));
        }
        Ok(())
    }
}

/// Position of a satellite at time `t` on its circular orbit.
///
/// Satellites in a plane are uniformly spaced in true anomaly; planes are
/// uniformly spaced in right ascension across `raan_spread_deg`, with the
/// in-plane phase shifted by `phasing_offset_deg` per plane.
pub fn satellite_position(
    shell: &OrbitalShell,
    id: SatelliteId,
    t: f64,
) -> Result<EcefVector, GeometryError> {
    if !shell.contains(id) {
        return Err(GeometryError::SatelliteOutOfRange {
            plane: id.plane,
            slot: id.slot,
            num_planes: shell.num_planes,
            sats_per_plane: shell.sats_per_plane,
        });
    }
    let r = shell.orbital_radius_km();
    let mean_motion = (MU_EARTH / r.powi(3)).sqrt(); // rad/s
    let slot_spacing = 2.0 * std::f64::consts::PI / shell.sats_per_plane as f64;
    let phase = shell.phasing_offset_deg.to_radians() * id.plane as f64;
    let u = id.slot as f64 * slot_spacing + phase + mean_motion * t;
    let raan = (shell.raan_spread_deg.to_radians() / shell.num_planes as f64) * id.plane as f64;
    let inc = shell.inclination_deg.to_radians();

    // In-plane position rotated by inclination about x, then by RAAN about z.
    let (su, cu) = u.sin_cos();
    let (si, ci) = inc.sin_cos();
    let (so, co) = raan.sin_cos();
    let xp = r * cu;
    let yp = r * su * ci;
    let zp = r * su * si;
    Ok(EcefVector::new(co * xp - so * yp, so * xp + co * yp, zp))
}

/// Spherical-Earth geodetic to Cartesian conversion at the epoch.
pub fn geodetic_to_ecef(g: &GeoPosition) -> EcefVector {
    let r = EARTH_RADIUS_KM + g.altitude_km;
    let (slat, clat) = g.latitude_deg.to_radians().sin_cos();
    let (slon, clon) = g.longitude_deg.to_radians().sin_cos();
    EcefVector::new(r * clat * clon, r * clat * slon, r * slat)
}

/// Gateway position at time `t`: the epoch position rotated with the Earth.
pub fn gateway_position(g: &GeoPosition, t: f64) -> EcefVector {
    let epoch = geodetic_to_ecef(g);
    let theta = 2.0 * std::f64::consts::PI * t / SIDEREAL_DAY_S;
    let (s, c) = theta.sin_cos();
    EcefVector::new(
        c * epoch.x - s * epoch.y,
        s * epoch.x + c * epoch.y,
        epoch.z,
    )
}

/// Straight-line distance between two nodes, km.
pub fn slant_range(a: EcefVector, b: EcefVector) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

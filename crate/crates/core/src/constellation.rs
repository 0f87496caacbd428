//! Satellite constellation model: circular-orbit almanac entries, satellite
//! state propagation and the built-in dual-constellation almanac.
//!
//! The simulator substitutes broadcast ephemerides with circular Keplerian
//! orbits evaluated directly in ECEF axes. Velocity is the analytic time
//! derivative of position, which keeps range-rate oracles exact.

use std::fmt;
use std::path::Path;

use nalgebra::Vector3;

use crate::constants::{
    EARTH_MU, GAL_CODE_LEN_CHIPS, GAL_ORBIT_RADIUS_M, GPS_CODE_LEN_CHIPS, GPS_ORBIT_RADIUS_M,
    WGS84_A,
};
use crate::error::{Error, Result};
use crate::geometry::{enu_vector_to_ecef, geodetic_to_ecef, EcefState, GeodeticPosition};

/// Orbit radii producing circular speeds inside the MEO sanity band
/// [3000, 4500] m/s.
const MIN_ORBIT_RADIUS_M: f64 = 1.97e7;
const MAX_ORBIT_RADIUS_M: f64 = 4.43e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constellation {
    Gps,
    Gal,
}

impl Constellation {
    /// Primary spreading-code length in chips.
    pub fn code_length_chips(self) -> f64 {
        match self {
            Constellation::Gps => GPS_CODE_LEN_CHIPS,
            Constellation::Gal => GAL_CODE_LEN_CHIPS,
        }
    }
}

impl fmt::Display for Constellation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constellation::Gps => write!(f, "GPS"),
            Constellation::Gal => write!(f, "GAL"),
        }
    }
}

/// One satellite of the simulated constellation: a circular orbit plus a
/// linear clock model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlmanacEntry {
    pub prn: u16,
    pub constellation: Constellation,
    /// Orbit radius from the Earth center (m).
    pub radius_m: f64,
    /// Inclination (rad).
    pub inclination_rad: f64,
    /// Right ascension of the ascending node (rad).
    pub raan_rad: f64,
    /// Argument of latitude at t = 0 (rad).
    pub arg_lat0_rad: f64,
    /// Satellite clock bias at t = 0 (m).
    pub clock_bias_m: f64,
    /// Satellite clock drift (m/s).
    pub clock_drift_mps: f64,
}

impl AlmanacEntry {
    pub fn validate(&self) -> Result<()> {
        if self.radius_m <= WGS84_A {
            return Err(Error::config(format!(
                "prn {}: orbit radius {:.0} m must exceed the Earth radius",
                self.prn, self.radius_m
            )));
        }
        if !(MIN_ORBIT_RADIUS_M..=MAX_ORBIT_RADIUS_M).contains(&self.radius_m) {
            return Err(Error::config(format!(
                "prn {}: orbit radius {:.0} m puts circular speed outside [3000, 4500] m/s",
                self.prn, self.radius_m
            )));
        }
        Ok(())
    }

    /// Mean motion (rad/s) of the circular orbit.
    pub fn mean_motion(&self) -> f64 {
        (EARTH_MU / self.radius_m.powi(3)).sqrt()
    }
}

/// Position/velocity plus clock state of one satellite at an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteEpochState {
    pub prn: u16,
    pub constellation: Constellation,
    pub ecef: EcefState,
    pub clock_bias_m: f64,
    pub clock_drift_mps: f64,
}

/// Evaluates the circular orbit of `entry` at time `t` (s since scenario
/// start). Total on validated entries.
pub fn propagate_satellite(entry: &AlmanacEntry, t: f64) -> SatelliteEpochState {
    let n = entry.mean_motion();
    let u = entry.arg_lat0_rad + n * t;
    let (sin_u, cos_u) = u.sin_cos();
    let (sin_raan, cos_raan) = entry.raan_rad.sin_cos();
    let (sin_i, cos_i) = entry.inclination_rad.sin_cos();
    let r = entry.radius_m;

    let position = Vector3::new(
        r * (cos_u * cos_raan - sin_u * cos_i * sin_raan),
        r * (cos_u * sin_raan + sin_u * cos_i * cos_raan),
        r * sin_u * sin_i,
    );
    let rn = r * n;
    let velocity = Vector3::new(
        rn * (-sin_u * cos_raan - cos_u * cos_i * sin_raan),
        rn * (-sin_u * sin_raan + cos_u * cos_i * cos_raan),
        rn * cos_u * sin_i,
    );

    SatelliteEpochState {
        prn: entry.prn,
        constellation: entry.constellation,
        ecef: EcefState::new(position, velocity),
        clock_bias_m: entry.clock_bias_m + entry.clock_drift_mps * t,
        clock_drift_mps: entry.clock_drift_mps,
    }
}

/// Builds an almanac entry whose orbit passes through the given
/// azimuth/elevation slot (as seen from `site` at t = 0), moving along the
/// given velocity azimuth.
///
/// Used to bake a deterministic sky with known geometry at the reference
/// site; afterwards the satellite follows its circular orbit naturally.
fn entry_from_sky_slot(
    prn: u16,
    constellation: Constellation,
    site: &GeodeticPosition,
    az_deg: f64,
    el_deg: f64,
    vel_az_deg: f64,
) -> AlmanacEntry {
    let radius_m = match constellation {
        Constellation::Gps => GPS_ORBIT_RADIUS_M,
        Constellation::Gal => GAL_ORBIT_RADIUS_M,
    };
    let user = geodetic_to_ecef(site);
    let az = az_deg.to_radians();
    let el = el_deg.to_radians();
    let los_enu = Vector3::new(az.sin() * el.cos(), az.cos() * el.cos(), el.sin());
    let los = enu_vector_to_ecef(site, &los_enu);

    // range to the orbit sphere along the LOS
    let b = user.dot(&los);
    let c = user.norm_squared() - radius_m * radius_m;
    let range = -b + (b * b - c).sqrt();
    let sat_pos = user + range * los;
    let radial = sat_pos / sat_pos.norm();

    // velocity direction: the chosen azimuth projected into the plane
    // orthogonal to the radial direction
    let vaz = vel_az_deg.to_radians();
    let vel_enu = Vector3::new(vaz.sin(), vaz.cos(), 0.0);
    let vel_hint = enu_vector_to_ecef(site, &vel_enu);
    let mut tangent = vel_hint - radial * vel_hint.dot(&radial);
    tangent /= tangent.norm();

    // orbit elements from the (position, velocity direction) pair
    let normal = radial.cross(&tangent);
    let inclination = normal.z.clamp(-1.0, 1.0).acos();
    let node = Vector3::new(-normal.y, normal.x, 0.0);
    let (raan, arg_lat) = if node.norm() < 1e-12 {
        // equatorial orbit: the node is undefined, measure from +X
        (0.0, radial.y.atan2(radial.x))
    } else {
        let node_u = node / node.norm();
        let raan = node_u.y.atan2(node_u.x);
        let cos_u = node_u.dot(&radial).clamp(-1.0, 1.0);
        let sin_u = normal.cross(&node_u).dot(&radial) / normal.norm();
        (raan, sin_u.atan2(cos_u))
    };

    AlmanacEntry {
        prn,
        constellation,
        radius_m,
        inclination_rad: inclination,
        raan_rad: raan,
        arg_lat0_rad: arg_lat,
        clock_bias_m: 0.0,
        clock_drift_mps: 0.0,
    }
}

/// Reference site used to bake the default almanac (Toulouse, France).
pub fn default_site() -> GeodeticPosition {
    GeodeticPosition::from_degrees(
        43.0 + 33.0 / 60.0 + 56.688 / 3600.0,
        -(1.0 + 28.0 / 60.0 + 49.796 / 3600.0),
        200.0,
    )
}

/// The built-in 13-channel dual-constellation almanac.
///
/// Seven GPS and six Galileo satellites, all above 15 degrees elevation at
/// the reference site at t = 0 so the whole set stays above a 10 degree mask
/// for several minutes. GPS PRN 3 & 4 and Galileo PRN 51 & 52 are the
/// channels targeted by the default outage schedule.
pub fn default_almanac() -> Vec<AlmanacEntry> {
    let site = default_site();
    let slots: [(u16, Constellation, f64, f64, f64); 13] = [
        (1, Constellation::Gps, 30.0, 70.0, 120.0),
        (3, Constellation::Gps, 120.0, 62.0, 35.0),
        (4, Constellation::Gps, 200.0, 35.0, 290.0),
        (8, Constellation::Gps, 280.0, 55.0, 10.0),
        (11, Constellation::Gps, 340.0, 25.0, 75.0),
        (17, Constellation::Gps, 85.0, 20.0, 170.0),
        (28, Constellation::Gps, 160.0, 60.0, 245.0),
        (51, Constellation::Gal, 60.0, 72.0, 330.0),
        (52, Constellation::Gal, 250.0, 65.0, 145.0),
        (53, Constellation::Gal, 310.0, 40.0, 55.0),
        (54, Constellation::Gal, 10.0, 50.0, 265.0),
        (55, Constellation::Gal, 140.0, 28.0, 200.0),
        (56, Constellation::Gal, 220.0, 18.0, 100.0),
    ];
    slots
        .iter()
        .map(|&(prn, constellation, az, el, vaz)| {
            entry_from_sky_slot(prn, constellation, &site, az, el, vaz)
        })
        .collect()
}

/// PRNs kept clean in the reduced stress scenario (three healthy channels).
pub const REDUCED_CLEAN_PRNS: [u16; 3] = [1, 17, 54];

/// PRNs carrying the outage schedule in the reduced stress scenario.
pub const REDUCED_OUTAGE_PRNS: [u16; 3] = [3, 4, 51];

/// The six-channel subset used by the reduced ("three healthy satellites")
/// stress scenario: three clean channels plus three sharing the outage
/// schedule.
pub fn reduced_almanac() -> Vec<AlmanacEntry> {
    default_almanac()
        .into_iter()
        .filter(|e| REDUCED_CLEAN_PRNS.contains(&e.prn) || REDUCED_OUTAGE_PRNS.contains(&e.prn))
        .collect()
}

/// Parses an almanac table: one satellite per line,
/// `prn constellation radius_m incl_rad raan_rad arglat0_rad clkbias_m clkdrift_mps`,
/// whitespace separated, `#` comments allowed.
pub fn parse_almanac(text: &str, path: &Path) -> Result<Vec<AlmanacEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(parse(format!("expected 8 fields, found {}", fields.len())));
        }
        let prn: u16 = fields[0]
            .parse()
            .map_err(|e| parse(format!("bad prn: {e}")))?;
        let constellation = match fields[1].to_ascii_uppercase().as_str() {
            "GPS" => Constellation::Gps,
            "GAL" => Constellation::Gal,
            other => return Err(parse(format!("unknown constellation {other:?}"))),
        };
        let num = |i: usize, name: &str| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|e| parse(format!("bad {name}: {e}")))
        };
        let entry = AlmanacEntry {
            prn,
            constellation,
            radius_m: num(2, "radius_m")?,
            inclination_rad: num(3, "incl_rad")?,
            raan_rad: num(4, "raan_rad")?,
            arg_lat0_rad: num(5, "arglat0_rad")?,
            clock_bias_m: num(6, "clkbias_m")?,
            clock_drift_mps: num(7, "clkdrift_mps")?,
        };
        entry.validate()?;
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::config(format!(
            "almanac {} contains no satellites",
            path.display()
        )));
    }
    Ok(entries)
}

/// Loads an almanac table from a file.
pub fn load_almanac(path: &Path) -> Result<Vec<AlmanacEntry>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_almanac(&text, path)
}

/// Formats an almanac in the table format accepted by [`parse_almanac`].
pub fn format_almanac(entries: &[AlmanacEntry]) -> String {
    let mut out = String::from(
        "# prn constellation radius_m incl_rad raan_rad arglat0_rad clkbias_m clkdrift_mps\n",
    );
    for e in entries {
        out.push_str(&format!(
            "{} {} {:.3} {:.12} {:.12} {:.12} {:.6} {:.9}\n",
            e.prn,
            e.constellation,
            e.radius_m,
            e.inclination_rad,
            e.raan_rad,
            e.arg_lat0_rad,
            e.clock_bias_m,
            e.clock_drift_mps
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::elevation_angle;
    use proptest::prelude::*;

    fn equatorial_entry() -> AlmanacEntry {
        AlmanacEntry {
            prn: 1,
            constellation: Constellation::Gps,
            radius_m: GPS_ORBIT_RADIUS_M,
            inclination_rad: 0.0,
            raan_rad: 0.0,
            arg_lat0_rad: 0.0,
            clock_bias_m: 0.0,
            clock_drift_mps: 0.0,
        }
    }

    #[test]
    fn equatorial_phase_zero() {
        let s = propagate_satellite(&equatorial_entry(), 0.0);
        let r = GPS_ORBIT_RADIUS_M;
        assert!((s.ecef.position - Vector3::new(r, 0.0, 0.0)).norm() < 1e-6);
        let v_expected = (EARTH_MU / r).sqrt();
        assert!((s.ecef.velocity - Vector3::new(0.0, v_expected, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn radius_conserved_over_200s() {
        for entry in default_almanac() {
            for k in 0..=20 {
                let t = k as f64 * 10.0;
                let r = propagate_satellite(&entry, t).ecef.position.norm();
                assert!(
                    (r - entry.radius_m).abs() / entry.radius_m < 1e-6,
                    "prn {} drifted at t={t}",
                    entry.prn
                );
            }
        }
    }

    #[test]
    fn velocity_matches_central_difference() {
        let h = 1e-3;
        for entry in default_almanac() {
            for &t in &[0.0, 37.5, 142.0] {
                let plus = propagate_satellite(&entry, t + h).ecef.position;
                let minus = propagate_satellite(&entry, t - h).ecef.position;
                let fd = (plus - minus) / (2.0 * h);
                let v = propagate_satellite(&entry, t).ecef.velocity;
                assert!(
                    (fd - v).norm() < 1e-3,
                    "prn {} velocity fd mismatch {:.2e}",
                    entry.prn,
                    (fd - v).norm()
                );
            }
        }
    }

    #[test]
    fn clock_drift_applied() {
        let entry = AlmanacEntry {
            clock_bias_m: 3.0,
            clock_drift_mps: 0.5,
            ..equatorial_entry()
        };
        let s = propagate_satellite(&entry, 10.0);
        assert!((s.clock_bias_m - 8.0).abs() < 1e-12);
        assert_eq!(s.clock_drift_mps, 0.5);
    }

    #[test]
    fn default_almanac_all_visible() {
        let site = default_site();
        let user = geodetic_to_ecef(&site);
        let almanac = default_almanac();
        assert_eq!(almanac.len(), 13);
        let gps = almanac
            .iter()
            .filter(|e| e.constellation == Constellation::Gps)
            .count();
        assert_eq!(gps, 7);
        // every satellite above the 10 degree mask for the whole 200 s
        for entry in &almanac {
            entry.validate().unwrap();
            for k in 0..=10 {
                let t = k as f64 * 20.0;
                let sat = propagate_satellite(entry, t);
                let el = elevation_angle(&sat.ecef.position, &user).unwrap();
                assert!(
                    el.to_degrees() > 10.0,
                    "prn {} at t={t}: {:.1} deg",
                    entry.prn,
                    el.to_degrees()
                );
            }
        }
    }

    #[test]
    fn sky_slot_reproduces_azimuth_elevation() {
        let site = default_site();
        let user = geodetic_to_ecef(&site);
        for &(az, el) in &[(30.0, 70.0), (220.0, 18.0), (120.0, 45.0)] {
            let e = entry_from_sky_slot(9, Constellation::Gps, &site, az, el, az + 90.0);
            let sat = propagate_satellite(&e, 0.0);
            let got_el = elevation_angle(&sat.ecef.position, &user).unwrap().to_degrees();
            assert!((got_el - el).abs() < 0.01, "el {got_el} vs {el}");
        }
    }

    #[test]
    fn reduced_set_is_six_channels() {
        let reduced = reduced_almanac();
        assert_eq!(reduced.len(), 6);
    }

    #[test]
    fn almanac_roundtrip_through_table() {
        let path = Path::new("mem");
        let text = format_almanac(&default_almanac());
        let parsed = parse_almanac(&text, path).unwrap();
        assert_eq!(parsed.len(), 13);
        for (a, b) in parsed.iter().zip(default_almanac()) {
            assert_eq!(a.prn, b.prn);
            assert!((a.inclination_rad - b.inclination_rad).abs() < 1e-9);
        }
    }

    #[test]
    fn almanac_rejects_bad_radius() {
        let path = Path::new("mem");
        let text = "1 GPS 5000000.0 0.9 0.1 0.2 0.0 0.0\n";
        assert!(parse_almanac(text, path).is_err());
    }

    proptest! {
        #[test]
        fn propagated_speed_in_meo_band(
            incl in 0.0f64..std::f64::consts::PI,
            raan in -3.0f64..3.0,
            arg in -3.0f64..3.0,
            t in 0.0f64..4000.0,
        ) {
            let entry = AlmanacEntry {
                inclination_rad: incl,
                raan_rad: raan,
                arg_lat0_rad: arg,
                ..equatorial_entry()
            };
            let s = propagate_satellite(&entry, t);
            let speed = s.ecef.velocity.norm();
            prop_assert!((3000.0..4500.0).contains(&speed));
        }
    }
}

//! Receiver-satellite geometry: frame conversions, line-of-sight vectors,
//! ranges and range rates.
//!
//! All positions are WGS-84 ECEF unless stated otherwise. Over the short
//! scenario durations simulated here the ECEF frame is treated as inertial
//! for orbit propagation (no Sagnac correction; see crate docs).

use nalgebra::Vector3;

use crate::constants::{WGS84_A, WGS84_B, WGS84_E2};
use crate::constellation::SatelliteEpochState;
use crate::error::{Error, Result};

/// Position and velocity in the ECEF frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcefState {
    /// Position (m).
    pub position: Vector3<f64>,
    /// Velocity (m/s).
    pub velocity: Vector3<f64>,
}

impl EcefState {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>) -> Self {
        Self { position, velocity }
    }

    pub fn stationary(position: Vector3<f64>) -> Self {
        Self {
            position,
            velocity: Vector3::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite()) && self.velocity.iter().all(|v| v.is_finite())
    }
}

/// Geodetic position on the WGS-84 ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodeticPosition {
    /// Latitude (rad), |lat| <= pi/2.
    pub latitude_rad: f64,
    /// Longitude (rad), |lon| <= pi.
    pub longitude_rad: f64,
    /// Height above the ellipsoid (m).
    pub height_m: f64,
}

impl GeodeticPosition {
    pub fn from_degrees(lat_deg: f64, lon_deg: f64, height_m: f64) -> Self {
        Self {
            latitude_rad: lat_deg.to_radians(),
            longitude_rad: lon_deg.to_radians(),
            height_m,
        }
    }
}

/// Geodetic to ECEF conversion.
pub fn geodetic_to_ecef(g: &GeodeticPosition) -> Vector3<f64> {
    let (sin_lat, cos_lat) = g.latitude_rad.sin_cos();
    let (sin_lon, cos_lon) = g.longitude_rad.sin_cos();
    let n = WGS84_A / (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
    Vector3::new(
        (n + g.height_m) * cos_lat * cos_lon,
        (n + g.height_m) * cos_lat * sin_lon,
        (n * (1.0 - WGS84_E2) + g.height_m) * sin_lat,
    )
}

/// ECEF to geodetic conversion (Bowring's method plus Newton refinement).
pub fn ecef_to_geodetic(p: &Vector3<f64>) -> GeodeticPosition {
    let x = p.x;
    let y = p.y;
    let z = p.z;
    let lon = y.atan2(x);
    let rho = (x * x + y * y).sqrt();

    if rho < 1e-9 {
        // polar axis
        return GeodeticPosition {
            latitude_rad: std::f64::consts::FRAC_PI_2.copysign(z),
            longitude_rad: 0.0,
            height_m: z.abs() - WGS84_B,
        };
    }

    // Bowring initial guess
    let e2b = (WGS84_A * WGS84_A - WGS84_B * WGS84_B) / (WGS84_B * WGS84_B);
    let theta = (z * WGS84_A).atan2(rho * WGS84_B);
    let (st, ct) = theta.sin_cos();
    let mut lat = (z + e2b * WGS84_B * st * st * st).atan2(rho - WGS84_E2 * WGS84_A * ct * ct * ct);

    // a few fixed-point refinements close the roundtrip well below 1e-4 m
    let mut n = WGS84_A;
    for _ in 0..4 {
        let sin_lat = lat.sin();
        n = WGS84_A / (1.0 - WGS84_E2 * sin_lat * sin_lat).sqrt();
        lat = (z + WGS84_E2 * n * sin_lat).atan2(rho);
    }
    let sin_lat = lat.sin();
    let cos_lat = lat.cos();
    let height = if cos_lat.abs() > 0.1 {
        rho / cos_lat - n
    } else {
        z / sin_lat - n * (1.0 - WGS84_E2)
    };

    GeodeticPosition {
        latitude_rad: lat,
        longitude_rad: lon,
        height_m: height,
    }
}

/// Expresses an ECEF point in the east-north-up frame anchored at `reference`.
pub fn ecef_to_enu(reference: &GeodeticPosition, p: &Vector3<f64>) -> Vector3<f64> {
    let origin = geodetic_to_ecef(reference);
    let d = p - origin;
    let (sin_lat, cos_lat) = reference.latitude_rad.sin_cos();
    let (sin_lon, cos_lon) = reference.longitude_rad.sin_cos();
    Vector3::new(
        -sin_lon * d.x + cos_lon * d.y,
        -sin_lat * cos_lon * d.x - sin_lat * sin_lon * d.y + cos_lat * d.z,
        cos_lat * cos_lon * d.x + cos_lat * sin_lon * d.y + sin_lat * d.z,
    )
}

/// Converts an ENU offset at `reference` back to an ECEF point.
pub fn enu_to_ecef(reference: &GeodeticPosition, enu: &Vector3<f64>) -> Vector3<f64> {
    let origin = geodetic_to_ecef(reference);
    origin + enu_vector_to_ecef(reference, enu)
}

/// Rotates an ENU vector (no translation) into ECEF axes.
pub fn enu_vector_to_ecef(reference: &GeodeticPosition, enu: &Vector3<f64>) -> Vector3<f64> {
    let (sin_lat, cos_lat) = reference.latitude_rad.sin_cos();
    let (sin_lon, cos_lon) = reference.longitude_rad.sin_cos();
    Vector3::new(
        -sin_lon * enu.x - sin_lat * cos_lon * enu.y + cos_lat * cos_lon * enu.z,
        cos_lon * enu.x - sin_lat * sin_lon * enu.y + cos_lat * sin_lon * enu.z,
        cos_lat * enu.y + sin_lat * enu.z,
    )
}

/// Euclidean satellite-user range (m).
///
/// Fails when the points are closer than 1 m (degenerate geometry).
pub fn predicted_range(sat_pos: &Vector3<f64>, user_pos: &Vector3<f64>) -> Result<f64> {
    let range = (sat_pos - user_pos).norm();
    if range < 1.0 {
        return Err(Error::DegenerateGeometry { range_m: range });
    }
    Ok(range)
}

/// Unit line-of-sight vector from the user to the satellite.
pub fn los_unit_vector(sat_pos: &Vector3<f64>, user_pos: &Vector3<f64>) -> Result<Vector3<f64>> {
    let range = predicted_range(sat_pos, user_pos)?;
    Ok((sat_pos - user_pos) / range)
}

/// Relative satellite-receiver velocity projected on the line of sight
/// (m/s, positive receding). Clock drift is not included.
pub fn velocity_projection(
    sat: &SatelliteEpochState,
    user: &EcefState,
    los: &Vector3<f64>,
) -> f64 {
    (sat.ecef.velocity - user.velocity).dot(los)
}

/// Satellite elevation angle (rad) seen from a user position.
pub fn elevation_angle(sat_pos: &Vector3<f64>, user_pos: &Vector3<f64>) -> Result<f64> {
    let geo = ecef_to_geodetic(user_pos);
    let los = los_unit_vector(sat_pos, user_pos)?;
    // up component of the LOS in the local ENU frame
    let (sin_lat, cos_lat) = geo.latitude_rad.sin_cos();
    let (sin_lon, cos_lon) = geo.longitude_rad.sin_cos();
    let up = cos_lat * cos_lon * los.x + cos_lat * sin_lon * los.y + sin_lat * los.z;
    Ok(up.clamp(-1.0, 1.0).asin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equator_and_pole() {
        let eq = geodetic_to_ecef(&GeodeticPosition::from_degrees(0.0, 0.0, 0.0));
        assert!((eq - Vector3::new(WGS84_A, 0.0, 0.0)).norm() < 1e-9);

        let pole = geodetic_to_ecef(&GeodeticPosition::from_degrees(90.0, 12.0, 0.0));
        assert!(pole.x.abs() < 1e-6);
        assert!(pole.y.abs() < 1e-6);
        assert!((pole.z - 6_356_752.314_2).abs() < 1e-3);
    }

    #[test]
    fn toulouse_roundtrip() {
        // 43 deg 33' 56.688" N, 1 deg 28' 49.796" W, 200 m
        let lat = 43.0 + 33.0 / 60.0 + 56.688 / 3600.0;
        let lon = -(1.0 + 28.0 / 60.0 + 49.796 / 3600.0);
        let g = GeodeticPosition::from_degrees(lat, lon, 200.0);
        let ecef = geodetic_to_ecef(&g);
        let back = ecef_to_geodetic(&ecef);
        let again = geodetic_to_ecef(&back);
        assert!((ecef - again).norm() < 1e-4, "roundtrip {} m", (ecef - again).norm());
    }

    #[test]
    fn los_axis_aligned() {
        let u = Vector3::zeros();
        let s = Vector3::new(2e7, 0.0, 0.0);
        let los = los_unit_vector(&s, &u).unwrap();
        assert!((los - Vector3::new(1.0, 0.0, 0.0)).norm() < 1e-14);

        let u = Vector3::new(1e6, 1e6, 0.0);
        let s = Vector3::new(1e6, 1e6, 2e7);
        let los = los_unit_vector(&s, &u).unwrap();
        assert!((los - Vector3::new(0.0, 0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn range_3_4_5() {
        let u = Vector3::zeros();
        let s = Vector3::new(3e6, 4e6, 0.0);
        assert_eq!(predicted_range(&s, &u).unwrap(), 5e6);
        assert_eq!(
            predicted_range(&s, &u).unwrap(),
            predicted_range(&u, &s).unwrap()
        );
    }

    #[test]
    fn coincident_points_are_degenerate() {
        let u = Vector3::new(1.0, 2.0, 3.0);
        assert!(matches!(
            predicted_range(&u, &u),
            Err(Error::DegenerateGeometry { .. })
        ));
    }

    #[test]
    fn velocity_projection_axis() {
        use crate::constellation::{Constellation, SatelliteEpochState};
        let sat = SatelliteEpochState {
            prn: 1,
            constellation: Constellation::Gps,
            ecef: EcefState::new(Vector3::new(2e7, 0.0, 0.0), Vector3::new(100.0, 0.0, 0.0)),
            clock_bias_m: 0.0,
            clock_drift_mps: 0.0,
        };
        let user = EcefState::stationary(Vector3::zeros());
        let los = Vector3::new(1.0, 0.0, 0.0);
        assert_eq!(velocity_projection(&sat, &user, &los), 100.0);

        let stationary_sat = SatelliteEpochState {
            ecef: EcefState::stationary(Vector3::new(2e7, 0.0, 0.0)),
            ..sat
        };
        assert_eq!(velocity_projection(&stationary_sat, &user, &los), 0.0);
    }

    #[test]
    fn enu_roundtrip_and_up_axis() {
        let g = GeodeticPosition::from_degrees(43.5, -1.5, 200.0);
        let p = enu_to_ecef(&g, &Vector3::new(120.0, -40.0, 7.0));
        let enu = ecef_to_enu(&g, &p);
        assert!((enu - Vector3::new(120.0, -40.0, 7.0)).norm() < 1e-6);

        // straight up from the reference raises elevation to +90 deg
        let above = enu_to_ecef(&g, &Vector3::new(0.0, 0.0, 1000.0));
        let el = elevation_angle(&above, &geodetic_to_ecef(&g)).unwrap();
        assert!((el - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn los_is_unit_norm(
            ux in -1e6f64..1e6, uy in -1e6f64..1e6, uz in -1e6f64..1e6,
            sx in 1e7f64..3e7, sy in -3e7f64..3e7, sz in -3e7f64..3e7,
        ) {
            let user = Vector3::new(ux, uy, uz);
            let sat = Vector3::new(sx, sy, sz);
            let los = los_unit_vector(&sat, &user).unwrap();
            prop_assert!((los.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn geodetic_roundtrip_closes(
            lat in -89.5f64..89.5, lon in -179.9f64..179.9, h in -100.0f64..9000.0,
        ) {
            let g = GeodeticPosition::from_degrees(lat, lon, h);
            let ecef = geodetic_to_ecef(&g);
            let back = geodetic_to_ecef(&ecef_to_geodetic(&ecef));
            prop_assert!((ecef - back).norm() < 1e-4);
        }
    }
}

//! Physical and signal constants shared across the simulator.

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// L1/E1 code chipping rate (chips/s). Both GPS L1 C/A and Galileo E1 chip
/// at 1.023 Mcps.
pub const F_CODE: f64 = 1.023e6;

/// L1/E1 carrier frequency (Hz), common to GPS L1 and Galileo E1.
pub const F_CARRIER: f64 = 1.57542e9;

/// Meters per code chip.
pub const METERS_PER_CHIP: f64 = SPEED_OF_LIGHT / F_CODE;

/// Meters per second per Hz of carrier Doppler.
pub const METERS_PER_SEC_PER_HZ: f64 = SPEED_OF_LIGHT / F_CARRIER;

/// Earth gravitational parameter (m^3/s^2).
pub const EARTH_MU: f64 = 3.986004418e14;

/// WGS-84 semi-major axis (m).
pub const WGS84_A: f64 = 6_378_137.0;

/// WGS-84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// WGS-84 semi-minor axis (m).
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);

/// WGS-84 first eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// GPS L1 C/A code length (chips).
pub const GPS_CODE_LEN_CHIPS: f64 = 1023.0;

/// Galileo E1 primary code length (chips).
pub const GAL_CODE_LEN_CHIPS: f64 = 4092.0;

/// Default orbit radius for GPS satellites (m).
pub const GPS_ORBIT_RADIUS_M: f64 = 26_560e3;

/// Default orbit radius for Galileo satellites (m).
pub const GAL_ORBIT_RADIUS_M: f64 = 29_600e3;

/// TCXO white frequency noise Allan parameter h0.
pub const TCXO_H0: f64 = 1e-21;

/// TCXO integrated frequency noise Allan parameter h-2.
pub const TCXO_H_MINUS_2: f64 = 2e-20;

/// Normalized sinc: sin(pi x) / (pi x).
pub fn sinc(x: f64) -> f64 {
    let px = std::f64::consts::PI * x;
    if px.abs() < 1e-9 {
        1.0 - px * px / 6.0
    } else {
        px.sin() / px
    }
}

/// Converts a carrier-to-noise density ratio from dB-Hz to linear Hz.
pub fn cn0_db_to_linear(cn0_dbhz: f64) -> f64 {
    10f64.powf(cn0_dbhz / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_zero_and_null() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(1.0).abs() < 1e-15);
        assert!(sinc(2.0).abs() < 1e-15);
        assert!((sinc(0.5) - 2.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn chip_and_doppler_conversions() {
        // one hundredth of a chip is roughly 2.93 m on L1
        assert!((0.01 * METERS_PER_CHIP - 2.93).abs() < 0.01);
        // 1 Hz of L1 Doppler is roughly 0.19 m/s
        assert!((METERS_PER_SEC_PER_HZ - 0.1903).abs() < 0.001);
    }
}

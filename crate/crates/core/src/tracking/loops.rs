//! Scalar loop filters: first-order DLL and third-order PLL.

use crate::error::{Error, Result};

/// First-order delay lock loop configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DllConfig {
    /// Loop noise bandwidth (Hz).
    pub noise_bandwidth_hz: f64,
    /// Update period (s).
    pub period_s: f64,
    /// Early-late spacing (chips), carried for variance bookkeeping.
    pub chip_spacing: f64,
    /// Autocorrelation sharpness, carried for variance bookkeeping.
    pub sharpness: f64,
}

impl DllConfig {
    pub fn l1ca_default(chip_spacing: f64, sharpness: f64) -> Self {
        Self {
            noise_bandwidth_hz: 1.0,
            period_s: 0.02,
            chip_spacing,
            sharpness,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_bandwidth_hz * self.period_s >= 0.25 {
            return Err(Error::config(format!(
                "DLL B*T {} violates the stability bound 0.25",
                self.noise_bandwidth_hz * self.period_s
            )));
        }
        Ok(())
    }
}

/// Third-order phase lock loop configuration (Costas discriminator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PllConfig {
    /// Loop noise bandwidth (Hz).
    pub noise_bandwidth_hz: f64,
    /// Update period (s).
    pub period_s: f64,
}

impl Default for PllConfig {
    fn default() -> Self {
        Self {
            noise_bandwidth_hz: 10.0,
            period_s: 0.02,
        }
    }
}

impl PllConfig {
    pub fn validate(&self) -> Result<()> {
        if self.noise_bandwidth_hz * self.period_s >= 0.4 {
            return Err(Error::config(format!(
                "PLL B*T {} violates the stability bound 0.4",
                self.noise_bandwidth_hz * self.period_s
            )));
        }
        Ok(())
    }
}

/// Frequency discriminator timing used by the vectorized architecture: the
/// DDCP pair spans two sub-intervals inside one EKF update interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FllConfig {
    /// One half of the discriminator period (s).
    pub sub_interval_s: f64,
}

impl Default for FllConfig {
    fn default() -> Self {
        Self {
            sub_interval_s: 0.01,
        }
    }
}

impl FllConfig {
    /// Full discriminator period: always two sub-intervals.
    pub fn period_s(&self) -> f64 {
        2.0 * self.sub_interval_s
    }
}

/// Integrator registers of a loop filter. The first-order DLL uses none;
/// the third-order PLL uses two (jerk and rate accumulators).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoopFilterState {
    /// Innermost accumulator (rad/s^2 for the PLL).
    pub acc1: f64,
    /// Rate accumulator (rad/s for the PLL).
    pub acc2: f64,
    /// Most recent command issued by the filter.
    pub last_command: f64,
}

impl LoopFilterState {
    /// Seeds the PLL rate accumulator with an initial Doppler estimate so
    /// the loop starts from a commanded frequency rather than zero.
    pub fn prime_rate_hz(&mut self, doppler_hz: f64) {
        self.acc2 = 2.0 * std::f64::consts::PI * doppler_hz;
    }
}

/// First-order DLL update: a pure gain of `4 * B` on the discriminator.
/// Returns the code-rate correction in chips/s.
pub fn dll_filter_update(state: &mut LoopFilterState, disc_chips: f64, cfg: &DllConfig) -> f64 {
    let command = 4.0 * cfg.noise_bandwidth_hz * disc_chips;
    state.last_command = command;
    command
}

/// Third-order PLL update with boxcar integrators. Returns the Doppler
/// command in Hz.
///
/// Controlled-root style coefficients (1.1, 2.4) with `w0 = B / 0.7845`;
/// at B*T = 0.2 the noiseless phase-step response overshoots just under 25%
/// and settles (10% band) in well under 5/B seconds.
pub fn pll_filter_update(state: &mut LoopFilterState, disc_rad: f64, cfg: &PllConfig) -> f64 {
    let w0 = cfg.noise_bandwidth_hz / 0.7845;
    let t = cfg.period_s;
    state.acc1 += w0 * w0 * w0 * disc_rad * t;
    state.acc2 += (state.acc1 + 1.1 * w0 * w0 * disc_rad) * t;
    let command_rad_s = state.acc2 + 2.4 * w0 * disc_rad;
    let command_hz = command_rad_s / (2.0 * std::f64::consts::PI);
    state.last_command = command_hz;
    command_hz
}

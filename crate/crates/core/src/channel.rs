//! Shared per-channel simulation plumbing.
//!
//! Both architectures drive their channels through the same interval
//! machinery: the replica is book-kept in the pseudorange domain (meters),
//! converted to code chips only at the correlator, and the carrier is
//! book-kept as the accumulated truth-minus-replica phase error. One call
//! per 20 ms interval produces the two half-interval correlator triplets
//! (the cross/dot frequency discriminator needs the halves; everything else
//! uses their combination) and always draws the same number of random
//! variates, so channel noise streams stay aligned across architectures and
//! lock states.

use crate::constants::{F_CODE, METERS_PER_SEC_PER_HZ, SPEED_OF_LIGHT};
use crate::constellation::Constellation;
use crate::correlator::{
    generate_correlators, wrap_chips, ChannelNcoState, CorrelationModel, CorrelatorTriplet,
    TruthChannelState,
};
use crate::rng::Stream;

/// Static identity and signal constants of one tracking channel.
#[derive(Debug, Clone, Copy)]
pub struct ChannelMeta {
    pub prn: u16,
    pub constellation: Constellation,
    pub model: CorrelationModel,
}

impl ChannelMeta {
    pub fn new(prn: u16, constellation: Constellation) -> Self {
        Self {
            prn,
            constellation,
            model: CorrelationModel::for_constellation(constellation),
        }
    }

    pub fn code_len_chips(&self) -> f64 {
        self.constellation.code_length_chips()
    }
}

/// Truth signal parameters over one integration interval, expressed in the
/// pseudorange domain at the interval boundaries.
#[derive(Debug, Clone, Copy)]
pub struct IntervalTruth {
    pub rho_start_m: f64,
    pub rho_end_m: f64,
    /// True C/N0 for the interval (keyed at the interval end epoch).
    pub cn0_dbhz: f64,
}

impl IntervalTruth {
    /// True received carrier Doppler (Hz) over the interval: approaching
    /// satellites (decreasing pseudorange) give positive Doppler.
    pub fn doppler_hz(&self, dt: f64) -> f64 {
        -(self.rho_end_m - self.rho_start_m) / dt / METERS_PER_SEC_PER_HZ
    }

    fn rho_mid(&self) -> f64 {
        0.5 * (self.rho_start_m + self.rho_end_m)
    }
}

/// Replica/NCO state of one channel, shared bookkeeping for both
/// architectures.
#[derive(Debug, Clone, Copy)]
pub struct ReplicaState {
    /// Replica pseudorange at the upcoming interval start (m).
    pub rho_m: f64,
    /// Commanded replica pseudorange rate for the interval (m/s).
    pub rate_mps: f64,
    /// Commanded carrier Doppler for the interval (Hz, received-Doppler
    /// convention).
    pub doppler_hz: f64,
    /// Accumulated truth-minus-replica carrier phase error (rad) at the
    /// interval start.
    pub phase_error_rad: f64,
}

impl ReplicaState {
    /// New replica at the given pseudorange, code rate slaved to the
    /// Doppler command.
    pub fn new(rho_m: f64, doppler_hz: f64) -> Self {
        Self {
            rho_m,
            rate_mps: doppler_to_rate_mps(doppler_hz),
            doppler_hz,
            phase_error_rad: 0.0,
        }
    }

    /// Replica code phase in chips (wrapped) at the interval start.
    pub fn code_phase_chips(&self, code_len: f64) -> f64 {
        let phase = wrap_chips(self.rho_m * F_CODE / SPEED_OF_LIGHT, code_len);
        if phase < 0.0 {
            phase + code_len
        } else {
            phase
        }
    }

    /// The NCO state snapshot used in per-epoch records.
    pub fn nco_state(&self, code_len: f64) -> ChannelNcoState {
        ChannelNcoState {
            code_phase_chips: self.code_phase_chips(code_len),
            code_rate_hz: self.rate_mps * F_CODE / SPEED_OF_LIGHT,
            carrier_doppler_hz: self.doppler_hz,
            carrier_phase_rad: 0.0,
        }
    }
}

/// Everything one interval of correlation produces.
#[derive(Debug, Clone, Copy)]
pub struct IntervalOutput {
    /// The two half-interval triplets (inputs of the frequency
    /// discriminator).
    pub halves: [CorrelatorTriplet; 2],
    /// The unit-noise full-interval triplet.
    pub full: CorrelatorTriplet,
    /// Truth-minus-replica code error at the interval midpoint (chips).
    pub code_error_chips: f64,
    /// Truth-minus-replica Doppler error over the interval (Hz).
    pub doppler_error_hz: f64,
}

/// Runs one integration interval of length `dt`: generates both
/// half-interval correlator triplets against the current replica state and
/// advances the replica (pseudorange by the commanded rate, phase error by
/// the frequency error). With noise enabled, always draws exactly twelve
/// normal variates from `rng`.
pub fn simulate_interval(
    meta: &ChannelMeta,
    replica: &mut ReplicaState,
    truth: &IntervalTruth,
    dt: f64,
    mut rng: Option<&mut Stream>,
) -> IntervalOutput {
    let code_len = meta.code_len_chips();
    let half = dt / 2.0;

    let truth_doppler = truth.doppler_hz(dt);
    let eps_f = truth_doppler - replica.doppler_hz;

    let rho_rep_mid = replica.rho_m + replica.rate_mps * dt / 2.0;
    let code_truth = wrap_chips(truth.rho_mid() * F_CODE / SPEED_OF_LIGHT, code_len);
    let code_rep = wrap_chips(rho_rep_mid * F_CODE / SPEED_OF_LIGHT, code_len);
    let code_error = wrap_chips(code_truth - code_rep, code_len);

    // both halves see the midpoint code error; the carrier phase error
    // advances by the frequency error between the halves
    let nco = ChannelNcoState {
        code_phase_chips: 0.0,
        code_rate_hz: replica.rate_mps * F_CODE / SPEED_OF_LIGHT,
        carrier_doppler_hz: replica.doppler_hz,
        carrier_phase_rad: 0.0,
    };
    let truth_h1 = TruthChannelState {
        code_delay_chips: code_error,
        doppler_hz: truth_doppler,
        carrier_phase_rad: replica.phase_error_rad,
        cn0_dbhz: truth.cn0_dbhz,
    };
    let truth_h2 = TruthChannelState {
        carrier_phase_rad: replica.phase_error_rad + 2.0 * std::f64::consts::PI * eps_f * half,
        ..truth_h1
    };

    let h1 = generate_correlators(&truth_h1, &nco, &meta.model, code_len, half, rng.as_deref_mut());
    let h2 = generate_correlators(&truth_h2, &nco, &meta.model, code_len, half, rng);
    let full = h1.combine_halves(&h2);

    // advance replica state across the interval
    replica.rho_m += replica.rate_mps * dt;
    replica.phase_error_rad += 2.0 * std::f64::consts::PI * eps_f * dt;

    IntervalOutput {
        halves: [h1, h2],
        full,
        code_error_chips: code_error,
        doppler_error_hz: eps_f,
    }
}

/// Converts a received carrier Doppler (Hz) to the pseudorange rate it
/// implies (m/s): approaching satellites have positive Doppler and negative
/// range rate.
pub fn doppler_to_rate_mps(doppler_hz: f64) -> f64 {
    -doppler_hz * METERS_PER_SEC_PER_HZ
}

/// Converts a pseudorange rate (m/s) to received carrier Doppler (Hz).
pub fn rate_to_doppler_hz(rate_mps: f64) -> f64 {
    -rate_mps / METERS_PER_SEC_PER_HZ
}

//! Semi-analytic correlator model.
//!
//! Correlator outputs for one integration interval are generated directly
//! from the gap between the true signal parameters and the channel NCO
//! state: no IF samples are produced. The deterministic part follows the
//! code autocorrelation, a sinc frequency-mismatch loss and the mid-interval
//! phase error; the stochastic part is unit-variance Gaussian noise with the
//! correct early/prompt/late cross-correlation.
//!
//! Data bits are not simulated (pilot assumption); discriminators remain
//! bit-insensitive anyway.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::{cn0_db_to_linear, sinc};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Code autocorrelation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulationKind {
    /// GPS L1 C/A: triangular autocorrelation.
    Bpsk1,
    /// Galileo E1 BOC(1,1): multi-peaked piecewise-linear autocorrelation.
    Boc11,
}

/// Correlation shape plus the early-late spacing used by a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel {
    pub kind: ModulationKind,
    /// Early-late chip spacing Cs (chips), 0 < Cs < 1.
    pub chip_spacing: f64,
    /// Autocorrelation peak sharpness: 1 for BPSK(1), 3 for BOC(1,1).
    pub sharpness: f64,
}

impl CorrelationModel {
    pub fn bpsk1() -> Self {
        Self {
            kind: ModulationKind::Bpsk1,
            chip_spacing: 0.5,
            sharpness: 1.0,
        }
    }

    pub fn boc11() -> Self {
        Self {
            kind: ModulationKind::Boc11,
            chip_spacing: 0.2,
            sharpness: 3.0,
        }
    }

    pub fn for_constellation(c: Constellation) -> Self {
        match c {
            Constellation::Gps => Self::bpsk1(),
            Constellation::Gal => Self::boc11(),
        }
    }

    /// Ideal code autocorrelation at `offset` chips. Even; unit peak; zero
    /// beyond one chip.
    pub fn autocorrelation(&self, offset: f64) -> f64 {
        let x = offset.abs();
        match self.kind {
            ModulationKind::Bpsk1 => {
                if x <= 1.0 {
                    1.0 - x
                } else {
                    0.0
                }
            }
            ModulationKind::Boc11 => {
                if x <= 0.5 {
                    1.0 - 3.0 * x
                } else if x <= 1.0 {
                    x - 1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Lower-triangular Cholesky factor of the early/prompt/late noise
    /// correlation matrix. Adjacent correlators are a half spacing apart, so
    /// their noise correlates as R(Cs/2); early-late as R(Cs).
    fn noise_cholesky(&self) -> [[f64; 3]; 3] {
        let r1 = self.autocorrelation(self.chip_spacing / 2.0);
        let r2 = self.autocorrelation(self.chip_spacing);
        let l11 = 1.0;
        let l21 = r1;
        let l22 = (1.0 - r1 * r1).sqrt();
        let l31 = r2;
        let l32 = (r1 - r2 * r1) / l22;
        let l33 = (1.0 - l31 * l31 - l32 * l32).max(0.0).sqrt();
        [[l11, 0.0, 0.0], [l21, l22, 0.0], [l31, l32, l33]]
    }
}

/// Ground-truth signal parameters of one channel over one integration
/// interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthChannelState {
    /// True code delay (chips, wrapped to the code length).
    pub code_delay_chips: f64,
    /// True carrier Doppler (Hz, positive for approaching satellites).
    pub doppler_hz: f64,
    /// True accumulated carrier phase (rad) at the interval start.
    pub carrier_phase_rad: f64,
    /// True carrier-to-noise density ratio (dB-Hz).
    pub cn0_dbhz: f64,
}

/// NCO replica state of one tracking channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelNcoState {
    /// Replica code phase (chips, wrapped to the code length).
    pub code_phase_chips: f64,
    /// Commanded chipping-rate offset from nominal (chips/s).
    pub code_rate_hz: f64,
    /// Commanded carrier Doppler (Hz).
    pub carrier_doppler_hz: f64,
    /// Replica accumulated carrier phase (rad) at the interval start.
    pub carrier_phase_rad: f64,
}

/// Noisy early/prompt/late correlator sums for one integration interval.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CorrelatorTriplet {
    pub ie: f64,
    pub qe: f64,
    pub ip: f64,
    pub qp: f64,
    pub il: f64,
    pub ql: f64,
}

impl CorrelatorTriplet {
    /// Combines the outputs of two adjacent half intervals into the
    /// full-interval triplet. The raw sum would carry twice the unit noise
    /// variance, so it is rescaled by 1/sqrt(2); the result then matches the
    /// full-interval model exactly (amplitude, sinc loss, unit noise).
    pub fn combine_halves(&self, other: &CorrelatorTriplet) -> CorrelatorTriplet {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CorrelatorTriplet {
            ie: s * (self.ie + other.ie),
            qe: s * (self.qe + other.qe),
            ip: s * (self.ip + other.ip),
            qp: s * (self.qp + other.qp),
            il: s * (self.il + other.il),
            ql: s * (self.ql + other.ql),
        }
    }

    pub fn prompt_power(&self) -> f64 {
        self.ip * self.ip + self.qp * self.qp
    }
}

/// Wraps a chip difference to (-len/2, len/2].
pub fn wrap_chips(x: f64, code_len: f64) -> f64 {
    let mut r = x % code_len;
    if r > code_len / 2.0 {
        r -= code_len;
    } else if r <= -code_len / 2.0 {
        r += code_len;
    }
    r
}

/// Generates the correlator triplet for one integration interval of length
/// `t_s` given the truth/NCO gap. `code_len_chips` is the spreading-code
/// period used to wrap the code error. Pass `None` for `noise` to obtain the
/// noise-free outputs.
///
/// Sign conventions: the code error is `truth delay - replica delay`
/// (positive when the incoming signal lags the replica), the early arm
/// samples the autocorrelation at `-Cs/2` and the late arm at `+Cs/2`, so an
/// early-minus-late discriminator has positive slope in the code error. The
/// phase error is evaluated at the interval midpoint.
pub fn generate_correlators(
    truth: &TruthChannelState,
    nco: &ChannelNcoState,
    model: &CorrelationModel,
    code_len_chips: f64,
    t_s: f64,
    noise: Option<&mut Stream>,
) -> CorrelatorTriplet {
    let eps_tau = wrap_chips(truth.code_delay_chips - nco.code_phase_chips, code_len_chips);
    let eps_f = truth.doppler_hz - nco.carrier_doppler_hz;
    let phase_mid = (truth.carrier_phase_rad - nco.carrier_phase_rad)
        + std::f64::consts::PI * eps_f * t_s;

    let amplitude = (2.0 * cn0_db_to_linear(truth.cn0_dbhz) * t_s).sqrt();
    let att = amplitude * sinc(eps_f * t_s);
    let (sin_phi, cos_phi) = phase_mid.sin_cos();
    let d = model.chip_spacing / 2.0;
    let re = model.autocorrelation(eps_tau - d);
    let rp = model.autocorrelation(eps_tau);
    let rl = model.autocorrelation(eps_tau + d);

    let mut out = CorrelatorTriplet {
        ie: att * re * cos_phi,
        qe: att * re * sin_phi,
        ip: att * rp * cos_phi,
        qp: att * rp * sin_phi,
        il: att * rl * cos_phi,
        ql: att * rl * sin_phi,
    };

    if let Some(rng) = noise {
        let l = model.noise_cholesky();
        let draw3 = |rng: &mut Stream| -> [f64; 3] {
            let g1: f64 = rng.sample(StandardNormal);
            let g2: f64 = rng.sample(StandardNormal);
            let g3: f64 = rng.sample(StandardNormal);
            [
                l[0][0] * g1,
                l[1][0] * g1 + l[1][1] * g2,
                l[2][0] * g1 + l[2][1] * g2 + l[2][2] * g3,
            ]
        };
        let ni = draw3(rng);
        let nq = draw3(rng);
        out.ie += ni[0];
        out.ip += ni[1];
        out.il += ni[2];
        out.qe += nq[0];
        out.qp += nq[1];
        out.ql += nq[2];
    }
    out
}

/// One scripted C/N0 drop on a channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageInterval {
    pub start_s: f64,
    pub end_s: f64,
    pub level_dbhz: f64,
}

/// Per-channel C/N0 as a function of time: a nominal level plus scripted
/// outage intervals (half-open, `[start, end)`).
#[derive(Debug, Clone, Default)]
pub struct Cn0Schedule {
    nominal: BTreeMap<u16, f64>,
    outages: BTreeMap<u16, Vec<OutageInterval>>,
}

impl Cn0Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_nominal(&mut self, prn: u16, level_dbhz: f64) {
        self.nominal.insert(prn, level_dbhz.clamp(10.0, 55.0));
    }

    pub fn add_outage(&mut self, prn: u16, outage: OutageInterval) -> Result<()> {
        if outage.start_s >= outage.end_s {
            return Err(Error::config(format!(
                "outage on prn {prn}: start {} must precede end {}",
                outage.start_s, outage.end_s
            )));
        }
        let list = self.outages.entry(prn).or_default();
        for existing in list.iter() {
            if outage.start_s < existing.end_s && existing.start_s < outage.end_s {
                return Err(Error::config(format!(
                    "outage on prn {prn}: [{}, {}) overlaps [{}, {})",
                    outage.start_s, outage.end_s, existing.start_s, existing.end_s
                )));
            }
        }
        let mut clamped = outage;
        clamped.level_dbhz = outage.level_dbhz.clamp(10.0, 55.0);
        list.push(clamped);
        list.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        Ok(())
    }

    /// C/N0 of `prn` at time `t`. Errors on channels absent from the
    /// schedule.
    pub fn cn0_at(&self, prn: u16, t: f64) -> Result<f64> {
        let nominal = *self
            .nominal
            .get(&prn)
            .ok_or(Error::UnknownChannel { prn })?;
        if let Some(list) = self.outages.get(&prn) {
            for o in list {
                if t >= o.start_s && t < o.end_s {
                    return Ok(o.level_dbhz);
                }
            }
        }
        Ok(nominal)
    }

    /// True when `t` falls inside any channel's outage interval.
    pub fn any_outage_at(&self, t: f64) -> bool {
        self.outages
            .values()
            .flatten()
            .any(|o| t >= o.start_s && t < o.end_s)
    }

    /// PRNs that carry at least one outage interval.
    pub fn affected_prns(&self) -> Vec<u16> {
        self.outages
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(prn, _)| *prn)
            .collect()
    }

    /// All outage intervals of one channel.
    pub fn outages_of(&self, prn: u16) -> &[OutageInterval] {
        self.outages.get(&prn).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn channels(&self) -> impl Iterator<Item = u16> + '_ {
        self.nominal.keys().copied()
    }
}

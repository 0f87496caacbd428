//! Code and carrier discriminators.
//!
//! All outputs are calibrated to unit small-error slope: the EMLP output is
//! the code delay error in chips, the DDCP output the carrier frequency
//! error in Hz, the Costas output the carrier phase error in rad (mod pi).

use crate::correlator::{CorrelationModel, CorrelatorTriplet};

/// Correlator power below which a discriminator output is meaningless for
/// the epoch and the channel is marked invalid.
pub const POWER_FLOOR: f64 = 1e-12;

/// Normalized noncoherent early-minus-late power code discriminator.
///
/// Output in chips; positive when the incoming signal's code delay exceeds
/// the replica's. The envelope-sum normalization makes the response exactly
/// linear on the main autocorrelation slope, and the gain
/// `(2 - alpha*Cs) / (2*alpha)` sets unit slope for both BPSK(1) and
/// BOC(1,1) shapes.
///
/// Returns `None` when the total correlator power is below the floor.
pub fn emlp_discriminator(c: &CorrelatorTriplet, model: &CorrelationModel) -> Option<f64> {
    let pe = c.ie * c.ie + c.qe * c.qe;
    let pl = c.il * c.il + c.ql * c.ql;
    let envelope_sum = pe.sqrt() + pl.sqrt();
    if envelope_sum * envelope_sum <= POWER_FLOOR {
        return None;
    }
    let kappa = (2.0 - model.sharpness * model.chip_spacing) / (2.0 * model.sharpness);
    Some(kappa * (pe - pl) / (envelope_sum * envelope_sum))
}

/// Cross/dot-product carrier frequency discriminator over two consecutive
/// half-interval prompt pairs.
///
/// The phase rotation between the halves is recovered with a four-quadrant
/// arctangent (data-free pilot assumption), giving an exact response up to
/// the `1/(2*sub_interval)` ambiguity where the output wraps.
///
/// Returns `None` when either prompt pair is below the power floor.
pub fn ddcp_fll_discriminator(
    first: (f64, f64),
    second: (f64, f64),
    sub_interval_s: f64,
) -> Option<f64> {
    let (ip1, qp1) = first;
    let (ip2, qp2) = second;
    if ip1 * ip1 + qp1 * qp1 <= POWER_FLOOR || ip2 * ip2 + qp2 * qp2 <= POWER_FLOOR {
        return None;
    }
    let cross = ip1 * qp2 - ip2 * qp1;
    let dot = ip1 * ip2 + qp1 * qp2;
    Some(cross.atan2(dot) / (2.0 * std::f64::consts::PI * sub_interval_s))
}

/// Costas carrier phase discriminator, insensitive to data-bit sign flips.
/// Range `(-pi/2, pi/2]`. Returns `None` on a vanishing prompt.
pub fn costas_discriminator(ip: f64, qp: f64) -> Option<f64> {
    if ip * ip + qp * qp <= POWER_FLOOR {
        return None;
    }
    Some((qp / ip).atan())
}

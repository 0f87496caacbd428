//! The 9-state navigation extended Kalman filter shared by the vectorized
//! and scalar architectures.
//!
//! State ordering: `[x, vx, y, vy, z, vz, c*t_gps, c*t_gal, c*t_dot]` with
//! positions/velocities in ECEF meters and m/s, the two receiver clock
//! biases (one per constellation time scale) in meters and the common clock
//! drift in m/s.

use nalgebra::{DMatrix, DVector, SMatrix, SVector, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::{METERS_PER_CHIP, METERS_PER_SEC_PER_HZ, SPEED_OF_LIGHT};
use crate::constellation::{Constellation, SatelliteEpochState};
use crate::correlator::CorrelationModel;
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::tracking::variance::{
    closed_loop_variance, open_loop_code_variance, open_loop_freq_variance,
};

pub const STATE_DIM: usize = 9;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateCovariance = SMatrix<f64, STATE_DIM, STATE_DIM>;

/// State vector component indices.
pub mod idx {
    pub const X: usize = 0;
    pub const VX: usize = 1;
    pub const Y: usize = 2;
    pub const VY: usize = 3;
    pub const Z: usize = 4;
    pub const VZ: usize = 5;
    pub const CLK_GPS: usize = 6;
    pub const CLK_GAL: usize = 7;
    pub const CLK_DRIFT: usize = 8;
}

/// Extracts the ECEF position from a state vector.
pub fn position_of(state: &StateVector) -> Vector3<f64> {
    Vector3::new(state[idx::X], state[idx::Y], state[idx::Z])
}

/// Extracts the ECEF velocity from a state vector.
pub fn velocity_of(state: &StateVector) -> Vector3<f64> {
    Vector3::new(state[idx::VX], state[idx::VY], state[idx::VZ])
}

/// Builds a state vector from position, velocity and clock terms.
pub fn state_from_parts(
    pos: &Vector3<f64>,
    vel: &Vector3<f64>,
    clk_gps_m: f64,
    clk_gal_m: f64,
    drift_mps: f64,
) -> StateVector {
    let mut s = StateVector::zeros();
    s[idx::X] = pos.x;
    s[idx::VX] = vel.x;
    s[idx::Y] = pos.y;
    s[idx::VY] = vel.y;
    s[idx::Z] = pos.z;
    s[idx::VZ] = vel.z;
    s[idx::CLK_GPS] = clk_gps_m;
    s[idx::CLK_GAL] = clk_gal_m;
    s[idx::CLK_DRIFT] = drift_mps;
    s
}

/// State transition over `dt`: three constant-velocity position blocks plus
/// the clock block coupling both biases to the common drift.
pub fn build_transition(dt: f64) -> StateCovariance {
    let mut phi = StateCovariance::identity();
    for axis in 0..3 {
        phi[(2 * axis, 2 * axis + 1)] = dt;
    }
    phi[(idx::CLK_GPS, idx::CLK_DRIFT)] = dt;
    phi[(idx::CLK_GAL, idx::CLK_DRIFT)] = dt;
    phi
}

/// Process noise power spectral densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessNoiseConfig {
    /// Velocity white-noise PSD per ECEF axis, (m/s)^2/Hz.
    pub vel_psd: [f64; 3],
    /// Receiver clock bias PSD (m^2/s), one per constellation time scale.
    pub clock_bias_psd: f64,
    /// Receiver clock drift PSD (m^2/s^3).
    pub clock_drift_psd: f64,
}

impl ProcessNoiseConfig {
    /// Builds the config from a common velocity PSD and oscillator Allan
    /// parameters.
    pub fn from_allan(vel_psd: f64, h0: f64, h_minus_2: f64) -> Self {
        let (b, d) = clock_psd_from_allan(h0, h_minus_2);
        Self {
            vel_psd: [vel_psd; 3],
            clock_bias_psd: b,
            clock_drift_psd: d,
        }
    }
}

/// Converts oscillator Allan parameters to range-domain clock PSDs.
///
/// The oscillator phase/frequency noise PSDs are `S_phi = w_c^2 h0 / 2` and
/// `S_f = 2 pi^2 w_c^2 h_minus_2` at carrier `w_c`; dividing by `w_c^2` and
/// scaling by c^2 yields the bias and drift PSDs driving the clock states:
/// `(c^2 h0 / 2, 2 pi^2 c^2 h_minus_2)` in m^2/s and m^2/s^3.
pub fn clock_psd_from_allan(h0: f64, h_minus_2: f64) -> (f64, f64) {
    let c2 = SPEED_OF_LIGHT * SPEED_OF_LIGHT;
    (
        c2 * h0 / 2.0,
        2.0 * std::f64::consts::PI * std::f64::consts::PI * c2 * h_minus_2,
    )
}

/// Discrete process noise over `dt`.
///
/// Velocity blocks integrate to `psd * [[dt^3/3, dt^2/2], [dt^2/2, dt]]`.
/// The clock block is the exact discretization of one oscillator driving
/// both constellation biases through the shared drift: bias diagonals
/// `sigma_b^2 dt + sigma_d^2 dt^3/3`, bias-drift coupling
/// `sigma_d^2 dt^2/2`, drift variance `sigma_d^2 dt`, and the shared-drift
/// bias-bias cross term `sigma_d^2 dt^3/3`. Dropping that cross term (a
/// formulation sometimes seen with per-constellation drift noise) makes the
/// block indefinite at one-second update intervals for TCXO-grade
/// oscillators, so the exact form is used.
pub fn build_process_noise(dt: f64, cfg: &ProcessNoiseConfig) -> StateCovariance {
    let mut q = StateCovariance::zeros();
    for axis in 0..3 {
        let s = cfg.vel_psd[axis];
        let i = 2 * axis;
        q[(i, i)] = s * dt.powi(3) / 3.0;
        q[(i, i + 1)] = s * dt * dt / 2.0;
        q[(i + 1, i)] = s * dt * dt / 2.0;
        q[(i + 1, i + 1)] = s * dt;
    }
    let a = cfg.clock_bias_psd * dt + cfg.clock_drift_psd * dt.powi(3) / 3.0;
    let cross = cfg.clock_drift_psd * dt.powi(3) / 3.0;
    let b = cfg.clock_drift_psd * dt * dt / 2.0;
    let c = cfg.clock_drift_psd * dt;
    q[(idx::CLK_GPS, idx::CLK_GPS)] = a;
    q[(idx::CLK_GAL, idx::CLK_GAL)] = a;
    q[(idx::CLK_GPS, idx::CLK_GAL)] = cross;
    q[(idx::CLK_GAL, idx::CLK_GPS)] = cross;
    q[(idx::CLK_GPS, idx::CLK_DRIFT)] = b;
    q[(idx::CLK_DRIFT, idx::CLK_GPS)] = b;
    q[(idx::CLK_GAL, idx::CLK_DRIFT)] = b;
    q[(idx::CLK_DRIFT, idx::CLK_GAL)] = b;
    q[(idx::CLK_DRIFT, idx::CLK_DRIFT)] = c;
    q
}

/// Time update: propagates the state and covariance.
pub fn predict(
    state: &StateVector,
    p: &StateCovariance,
    phi: &StateCovariance,
    q: &StateCovariance,
) -> (StateVector, StateCovariance) {
    let state_pred = phi * state;
    let mut p_pred = phi * p * phi.transpose() + q;
    symmetrize(&mut p_pred);
    (state_pred, p_pred)
}

fn symmetrize(p: &mut StateCovariance) {
    let pt = p.transpose();
    *p = (*p + pt) * 0.5;
}

/// Geometry of one tracked channel evaluated at the predicted state.
#[derive(Debug, Clone, Copy)]
pub struct ChannelObservation {
    pub prn: u16,
    pub constellation: Constellation,
    pub los: Vector3<f64>,
    pub range_m: f64,
    /// Predicted pseudorange (m), including the receiver and satellite
    /// clock terms.
    pub rho_pred_m: f64,
    /// Predicted pseudorange rate (m/s), including receiver drift and
    /// satellite clock drift.
    pub rho_dot_pred_mps: f64,
    /// LOS-projected relative velocity without clock terms.
    pub los_velocity_mps: f64,
    sat_vel: Vector3<f64>,
    sat_pos: Vector3<f64>,
}

/// The per-epoch measurement model: predicted measurements plus the
/// observation matrix for the channels whose geometry is non-degenerate.
#[derive(Debug, Clone)]
pub struct MeasurementModel {
    pub channels: Vec<ChannelObservation>,
    /// PRNs dropped for degenerate geometry this epoch.
    pub excluded: Vec<u16>,
}

impl MeasurementModel {
    /// Builds predicted pseudoranges/rates and LOS geometry for every
    /// satellite. Degenerate channels are flagged and excluded.
    pub fn build(state: &StateVector, sats: &[SatelliteEpochState]) -> Result<Self> {
        let user_pos = position_of(state);
        let user_vel = velocity_of(state);
        let mut channels = Vec::with_capacity(sats.len());
        let mut excluded = Vec::new();
        for sat in sats {
            let delta = sat.ecef.position - user_pos;
            let range = delta.norm();
            if range < 1.0 {
                excluded.push(sat.prn);
                continue;
            }
            let los = delta / range;
            let clk = match sat.constellation {
                Constellation::Gps => state[idx::CLK_GPS],
                Constellation::Gal => state[idx::CLK_GAL],
            };
            let los_velocity = (sat.ecef.velocity - user_vel).dot(&los);
            channels.push(ChannelObservation {
                prn: sat.prn,
                constellation: sat.constellation,
                los,
                range_m: range,
                rho_pred_m: range + clk - sat.clock_bias_m,
                rho_dot_pred_mps: los_velocity + state[idx::CLK_DRIFT] - sat.clock_drift_mps,
                los_velocity_mps: los_velocity,
                sat_vel: sat.ecef.velocity,
                sat_pos: sat.ecef.position,
            });
        }
        if channels.is_empty() {
            return Err(Error::config("no usable channels in measurement model"));
        }
        Ok(Self { channels, excluded })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    /// Predicted measurement vector: all pseudoranges, then all rates.
    pub fn predicted_vector(&self) -> DVector<f64> {
        let m = self.len();
        let mut z = DVector::zeros(2 * m);
        for (j, ch) in self.channels.iter().enumerate() {
            z[j] = ch.rho_pred_m;
            z[m + j] = ch.rho_dot_pred_mps;
        }
        z
    }

    /// The 2M x 9 observation matrix at the predicted state.
    pub fn observation_matrix(&self, state: &StateVector) -> DMatrix<f64> {
        let m = self.len();
        let user_pos = position_of(state);
        let user_vel = velocity_of(state);
        let mut h = DMatrix::zeros(2 * m, STATE_DIM);
        for (j, ch) in self.channels.iter().enumerate() {
            // pseudorange row: -LOS in position columns, 1 in the matching
            // clock column
            h[(j, idx::X)] = -ch.los.x;
            h[(j, idx::Y)] = -ch.los.y;
            h[(j, idx::Z)] = -ch.los.z;
            match ch.constellation {
                Constellation::Gps => h[(j, idx::CLK_GPS)] = 1.0,
                Constellation::Gal => h[(j, idx::CLK_GAL)] = 1.0,
            }

            // rate row: position sensitivity of the LOS projection,
            // -LOS in velocity columns, 1 in the drift column
            let r = ch.range_m;
            let v = ch.los_velocity_mps;
            let dp = ch.sat_pos - user_pos;
            let dv = ch.sat_vel - user_vel;
            let row = m + j;
            h[(row, idx::X)] = dp.x * v / (r * r) - dv.x / r;
            h[(row, idx::Y)] = dp.y * v / (r * r) - dv.y / r;
            h[(row, idx::Z)] = dp.z * v / (r * r) - dv.z / r;
            h[(row, idx::VX)] = -ch.los.x;
            h[(row, idx::VY)] = -ch.los.y;
            h[(row, idx::VZ)] = -ch.los.z;
            h[(row, idx::CLK_DRIFT)] = 1.0;
        }
        h
    }
}

/// Measurement noise mode: the vectorized filter consumes raw per-interval
/// discriminator errors (open loop); the scalar positioning filter consumes
/// loop-filtered measurements (closed loop).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    OpenLoop,
    /// Closed-loop scaling `2 B T` applied per measurement type.
    ClosedLoop {
        code_bandwidth_hz: f64,
        code_period_s: f64,
        rate_bandwidth_hz: f64,
        rate_period_s: f64,
    },
}

/// Per-channel inputs to the measurement covariance.
#[derive(Debug, Clone, Copy)]
pub struct NoiseChannel {
    /// Estimated C/N0 (dB-Hz); `None` falls back to the floor.
    pub cn0_dbhz: Option<f64>,
    pub model: CorrelationModel,
}

/// C/N0 assumed for channels without a usable estimate.
pub const CN0_FALLBACK_FLOOR_DBHZ: f64 = 15.0;

/// Builds the diagonal 2M x 2M measurement covariance: code variances then
/// rate variances, each from the channel's own C/N0 and modulation
/// constants. Low C/N0 automatically inflates the variance, which is the
/// de-weighting mechanism for corrupted channels.
pub fn build_measurement_noise(
    channels: &[NoiseChannel],
    t_code_s: f64,
    t_rate_s: f64,
    mode: NoiseMode,
) -> DMatrix<f64> {
    let m = channels.len();
    let mut r = DMatrix::zeros(2 * m, 2 * m);
    for (j, ch) in channels.iter().enumerate() {
        let cn0 = ch.cn0_dbhz.unwrap_or(CN0_FALLBACK_FLOOR_DBHZ);
        let (mut code_var, _) = open_loop_code_variance(
            cn0,
            t_code_s,
            ch.model.chip_spacing,
            ch.model.sharpness,
            crate::constants::F_CODE,
        );
        let (mut rate_var, _) =
            open_loop_freq_variance(cn0, t_rate_s, crate::constants::F_CARRIER);
        if let NoiseMode::ClosedLoop {
            code_bandwidth_hz,
            code_period_s,
            rate_bandwidth_hz,
            rate_period_s,
        } = mode
        {
            code_var = closed_loop_variance(code_var, code_bandwidth_hz, code_period_s);
            rate_var = closed_loop_variance(rate_var, rate_bandwidth_hz, rate_period_s);
        }
        r[(j, j)] = code_var;
        r[(m + j, m + j)] = rate_var;
    }
    r
}

/// Converts per-channel discriminator outputs into the innovation vector:
/// code errors scale by meters-per-chip; frequency errors scale by
/// meters-per-second-per-Hz with the sign flipped because a positive
/// received-Doppler error corresponds to a decreasing pseudorange rate.
pub fn innovation_from_discriminators(dll_chips: &[f64], fll_hz: &[f64]) -> DVector<f64> {
    assert_eq!(dll_chips.len(), fll_hz.len());
    let m = dll_chips.len();
    let mut dz = DVector::zeros(2 * m);
    for j in 0..m {
        dz[j] = METERS_PER_CHIP * dll_chips[j];
        dz[m + j] = -METERS_PER_SEC_PER_HZ * fll_hz[j];
    }
    dz
}

/// Innovation covariance condition number beyond which the update is
/// skipped for the epoch.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Why a measurement update was skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateSkip {
    /// Estimated condition number of the innovation covariance.
    pub condition: f64,
}

/// Result of a successful measurement update.
#[derive(Debug, Clone)]
pub struct Updated {
    pub state: StateVector,
    pub covariance: StateCovariance,
    /// Normalized innovation squared of this update.
    pub nis: f64,
}

/// Measurement update in Joseph form.
///
/// `h` is 2M x 9, `r` diagonal 2M x 2M, `dz` the innovation vector. On an
/// ill-conditioned innovation covariance the update is skipped and the
/// caller carries the prediction forward.
pub fn update(
    state: &StateVector,
    p: &StateCovariance,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
    dz: &DVector<f64>,
) -> std::result::Result<Updated, UpdateSkip> {
    let n = h.nrows();
    assert_eq!(dz.len(), n);
    let p_dyn = DMatrix::from_column_slice(STATE_DIM, STATE_DIM, p.as_slice());

    let s = h * &p_dyn * h.transpose() + r;
    let s_sym = (&s + s.transpose()) * 0.5;
    let chol = match s_sym.clone().cholesky() {
        Some(c) => c,
        None => {
            return Err(UpdateSkip {
                condition: f64::INFINITY,
            })
        }
    };
    // diagonal-based condition estimate of S through its Cholesky factor
    let ldiag = chol.l_dirty();
    let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = ldiag[(i, i)];
        dmin = dmin.min(d);
        dmax = dmax.max(d);
    }
    let condition = (dmax / dmin).powi(2);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(UpdateSkip { condition });
    }

    // K = P H^T S^-1 via the Cholesky solve
    let hp = h * &p_dyn; // 2M x 9
    let k = chol.solve(&hp).transpose(); // 9 x 2M

    let state_new = state + StateVector::from_column_slice((&k * dz).as_slice());
    let a = DMatrix::identity(STATE_DIM, STATE_DIM) - &k * h;
    let p_new = &a * &p_dyn * a.transpose() + &k * r * k.transpose();
    let mut p_out = StateCovariance::from_column_slice(p_new.as_slice());
    symmetrize(&mut p_out);

    let nis = dz.dot(&chol.solve(dz));
    Ok(Updated {
        state: state_new,
        covariance: p_out,
        nis,
    })
}

/// Two-sided 95% chi-square acceptance band for `dof` degrees of freedom
/// (Wilson-Hilferty approximation).
pub fn chi2_band_95(dof: usize) -> (f64, f64) {
    let k = dof as f64;
    let q = |z: f64| k * (1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt()).powi(3);
    (q(-1.959964), q(1.959964))
}

/// Covariance health metrics: relative asymmetry and the smallest
/// eigenvalue normalized by the trace.
pub fn covariance_health(p: &StateCovariance) -> (f64, f64) {
    let pt = p.transpose();
    let asym = (p - pt).abs().max();
    let scale = p.abs().max().max(1e-300);
    let eigs = p.symmetric_eigenvalues();
    let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    (asym / scale, min_eig / p.trace().max(1e-300))
}

/// Gaussian spreads used to initialize the filter from first-epoch truth.
#[derive(Debug, Clone, Copy)]
pub struct InitSpread {
    pub pos_m: f64,
    pub vel_mps: f64,
    pub clk_m: f64,
    pub drift_mps: f64,
}

impl Default for InitSpread {
    fn default() -> Self {
        Self {
            pos_m: 10.0,
            vel_mps: 1.0,
            clk_m: 30.0,
            drift_mps: 0.5,
        }
    }
}

impl InitSpread {
    fn sigmas(&self) -> [f64; STATE_DIM] {
        [
            self.pos_m,
            self.vel_mps,
            self.pos_m,
            self.vel_mps,
            self.pos_m,
            self.vel_mps,
            self.clk_m,
            self.clk_m,
            self.drift_mps,
        ]
    }
}

/// Draws the perturbed initial state and matching diagonal covariance.
pub fn initialize_filter(
    truth: &StateVector,
    spread: &InitSpread,
    rng: &mut Stream,
) -> (StateVector, StateCovariance) {
    let sigmas = spread.sigmas();
    let mut state = *truth;
    let mut p = StateCovariance::zeros();
    for i in 0..STATE_DIM {
        let n: f64 = rng.sample(StandardNormal);
        state[i] += sigmas[i] * n;
        p[(i, i)] = sigmas[i] * sigmas[i];
    }
    (state, p)
}

//! The vectorized receiver: one navigation EKF closes the code and carrier
//! NCOs of every channel.
//!
//! Per 20 ms epoch: correlate against the EKF-driven replicas, form code
//! (EMLP) and frequency (cross/dot) discriminators, feed them to the filter
//! as the innovation vector, update, then derive next-interval NCO commands
//! from the one-step state prediction. No lock test is performed; weak
//! channels stay in the solution and are de-weighted through the
//! measurement covariance.

use nalgebra::DMatrix;

use crate::channel::{
    rate_to_doppler_hz, simulate_interval, ChannelMeta, IntervalTruth, ReplicaState,
};
use crate::constellation::SatelliteEpochState;
use crate::ekf::{
    self, build_measurement_noise, innovation_from_discriminators, MeasurementModel, NoiseChannel,
    NoiseMode, ProcessNoiseConfig, StateCovariance, StateVector,
};
use crate::error::Result;
use crate::metrics::{ChannelEpochRecord, EpochRecord};
use crate::rng::Stream;
use crate::tracking::{ddcp_fll_discriminator, emlp_discriminator, Cn0Estimator, FllConfig};

#[derive(Debug, Clone, Copy)]
pub struct VdfllConfig {
    /// Filter update interval, locked to the correlator integration time.
    pub t_ekf_s: f64,
    pub fll: FllConfig,
    pub process_noise: ProcessNoiseConfig,
    /// Correlator noise switch (disabled only by deterministic tests).
    pub noise_enabled: bool,
}

impl VdfllConfig {
    pub fn new(process_noise: ProcessNoiseConfig) -> Self {
        Self {
            t_ekf_s: 0.02,
            fll: FllConfig::default(),
            process_noise,
            noise_enabled: true,
        }
    }
}

/// Carrier NCO command from the predicted pseudorange rates at the two
/// boundaries of the upcoming interval: their trapezoid mean converted to
/// received Doppler (approaching satellites, with decreasing pseudorange,
/// command positive Doppler).
pub fn carrier_nco_command_hz(rho_dot_now_mps: f64, rho_dot_next_mps: f64) -> f64 {
    rate_to_doppler_hz(0.5 * (rho_dot_now_mps + rho_dot_next_mps))
}

/// Code NCO chipping-rate offset (Hz, i.e. chips/s) that slews the replica
/// from this epoch's pseudorange prediction to the next one over the filter
/// interval.
pub fn code_nco_command_hz(rho_next_m: f64, rho_now_m: f64, t_ekf_s: f64) -> f64 {
    crate::constants::F_CODE * (rho_next_m - rho_now_m)
        / (crate::constants::SPEED_OF_LIGHT * t_ekf_s)
}

struct VdfllChannel {
    meta: ChannelMeta,
    replica: ReplicaState,
    cn0: Cn0Estimator,
    last_cn0: Option<f64>,
    /// Fast-drop estimate used to size R.
    weight_cn0: Option<f64>,
    /// Pseudorange prediction for the current epoch boundary, kept for the
    /// code NCO command (difference of two consecutive predictions).
    rho_pred_m: f64,
}

/// One VDFLL receiver instance over a fixed channel set.
pub struct VdfllReceiver {
    cfg: VdfllConfig,
    channels: Vec<VdfllChannel>,
    state: StateVector,
    covariance: StateCovariance,
    phi: StateCovariance,
    q: StateCovariance,
    epoch: usize,
}

impl VdfllReceiver {
    /// Builds the receiver: filter state from `initial_state` (typically
    /// truth perturbed by the init draw), NCOs slaved to the filter's own
    /// predictions, C/N0 estimators warm-started at the acquisition-handoff
    /// levels.
    pub fn new(
        cfg: VdfllConfig,
        metas: &[ChannelMeta],
        initial_state: StateVector,
        initial_covariance: StateCovariance,
        sats_now: &[SatelliteEpochState],
        sats_next: &[SatelliteEpochState],
        cn0_warm_dbhz: &[f64],
    ) -> Result<Self> {
        let phi = ekf::build_transition(cfg.t_ekf_s);
        let q = ekf::build_process_noise(cfg.t_ekf_s, &cfg.process_noise);

        let model_now = MeasurementModel::build(&initial_state, sats_now)?;
        let state_next = phi * initial_state;
        let model_next = MeasurementModel::build(&state_next, sats_next)?;

        let mut channels = Vec::with_capacity(metas.len());
        for (j, meta) in metas.iter().enumerate() {
            let rho_now = model_now.channels[j].rho_pred_m;
            let rho_next = model_next.channels[j].rho_pred_m;
            let doppler = carrier_nco_command_hz(
                model_now.channels[j].rho_dot_pred_mps,
                model_next.channels[j].rho_dot_pred_mps,
            );
            let mut replica = ReplicaState::new(rho_now, doppler);
            replica.rate_mps = (rho_next - rho_now) / cfg.t_ekf_s;
            channels.push(VdfllChannel {
                meta: *meta,
                replica,
                cn0: Cn0Estimator::new(cfg.t_ekf_s),
                last_cn0: Some(cn0_warm_dbhz[j]),
                weight_cn0: Some(cn0_warm_dbhz[j]),
                rho_pred_m: rho_next,
            });
        }
        Ok(Self {
            cfg,
            channels,
            state: initial_state,
            covariance: initial_covariance,
            phi,
            q,
            epoch: 0,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn covariance(&self) -> &StateCovariance {
        &self.covariance
    }

    /// Replica pseudorange of channel `j` at the upcoming epoch boundary.
    pub fn replica_rho_m(&self, j: usize) -> f64 {
        self.channels[j].replica.rho_m
    }

    /// Runs one epoch: the interval `[t_k-1, t_k]` correlations feed the
    /// update at `t_k`; NCO commands for `[t_k, t_k+1]` come from the
    /// post-update one-step prediction.
    ///
    /// `truths[j]` spans the elapsed interval; `sats_now`/`sats_next` are
    /// the satellite states at `t_k` and `t_k+1`; `rngs[j]` is channel j's
    /// noise stream.
    pub fn epoch(
        &mut self,
        truths: &[IntervalTruth],
        sats_now: &[SatelliteEpochState],
        sats_next: &[SatelliteEpochState],
        rngs: &mut [Stream],
    ) -> Result<EpochRecord> {
        self.epoch += 1;
        let dt = self.cfg.t_ekf_s;
        let m = self.channels.len();
        assert_eq!(truths.len(), m);

        // (1)-(2) correlate and form discriminators per channel
        let mut dll = Vec::with_capacity(m);
        let mut fll = Vec::with_capacity(m);
        let mut chan_records = Vec::with_capacity(m);
        for (j, ch) in self.channels.iter_mut().enumerate() {
            let noise = if self.cfg.noise_enabled {
                Some(&mut rngs[j])
            } else {
                None
            };
            let out = simulate_interval(&ch.meta, &mut ch.replica, &truths[j], dt, noise);
            let d = emlp_discriminator(&out.full, &ch.meta.model);
            let f = ddcp_fll_discriminator(
                (out.halves[0].ip, out.halves[0].qp),
                (out.halves[1].ip, out.halves[1].qp),
                self.cfg.fll.sub_interval_s,
            );
            ch.cn0.push_prompt(out.full.ip, out.full.qp);
            if let Some(est) = ch.cn0.estimate_dbhz() {
                ch.last_cn0 = Some(est);
            }
            if let Some(est) = ch.cn0.deweight_estimate_dbhz() {
                ch.weight_cn0 = Some(est);
            }
            dll.push(d);
            fll.push(f);
            chan_records.push(ChannelEpochRecord {
                prn: ch.meta.prn,
                locked: true,
                in_solution: d.is_some() && f.is_some(),
                dll_chips: d,
                fll_hz: f,
                code_error_m: -out.code_error_chips * crate::constants::METERS_PER_CHIP,
                doppler_error_hz: -out.doppler_error_hz,
                cn0_est_dbhz: ch.last_cn0,
            });
        }

        // (3)-(4) predict, assemble the innovation over valid channels,
        // update
        let (state_pred, p_pred) = ekf::predict(&self.state, &self.covariance, &self.phi, &self.q);
        let model = MeasurementModel::build(&state_pred, sats_now)?;

        let valid: Vec<usize> = (0..m)
            .filter(|&j| dll[j].is_some() && fll[j].is_some())
            .collect();
        let mut update_skipped = false;
        let mut nis = None;
        if valid.is_empty() {
            self.state = state_pred;
            self.covariance = p_pred;
        } else {
            let dll_v: Vec<f64> = valid.iter().map(|&j| dll[j].unwrap()).collect();
            let fll_v: Vec<f64> = valid.iter().map(|&j| fll[j].unwrap()).collect();
            let dz = innovation_from_discriminators(&dll_v, &fll_v);

            let h_full = model.observation_matrix(&state_pred);
            let h = select_rows(&h_full, &valid, m);
            let noise_channels: Vec<NoiseChannel> = valid
                .iter()
                .map(|&j| NoiseChannel {
                    cn0_dbhz: self.channels[j].weight_cn0,
                    model: self.channels[j].meta.model,
                })
                .collect();
            let r = build_measurement_noise(
                &noise_channels,
                dt,
                self.cfg.fll.period_s(),
                NoiseMode::OpenLoop,
            );

            match ekf::update(&state_pred, &p_pred, &h, &r, &dz) {
                Ok(up) => {
                    nis = Some((up.nis, 2 * valid.len()));
                    self.state = up.state;
                    self.covariance = up.covariance;
                }
                Err(_skip) => {
                    update_skipped = true;
                    self.state = state_pred;
                    self.covariance = p_pred;
                }
            }
        }

        // (5) one-step prediction closes every NCO, outage channels
        // included
        let state_next = self.phi * self.state;
        let model_next = MeasurementModel::build(&state_next, sats_next)?;
        for (j, ch) in self.channels.iter_mut().enumerate() {
            let rho_next = model_next.channels[j].rho_pred_m;
            let rho_now = model.channels[j].rho_pred_m;
            // code NCO: slew rate from the difference of consecutive
            // predictions
            ch.replica.rate_mps =
                code_nco_command_hz(rho_next, rho_now, dt) * crate::constants::METERS_PER_CHIP;
            // carrier NCO: interval-mean predicted pseudorange rate as
            // received Doppler
            ch.replica.doppler_hz = carrier_nco_command_hz(
                model.channels[j].rho_dot_pred_mps,
                model_next.channels[j].rho_dot_pred_mps,
            );
            // keep the replica chained to the freshest prediction
            ch.replica.rho_m = rho_now;
            ch.rho_pred_m = rho_next;
        }

        let (asym, eig) = ekf::covariance_health(&self.covariance);
        Ok(EpochRecord {
            epoch: self.epoch,
            t_s: self.epoch as f64 * dt,
            state: self.state,
            p_diag: std::array::from_fn(|i| self.covariance[(i, i)]),
            kf_updated: !update_skipped && !valid.is_empty(),
            update_skipped,
            nis,
            cov_asymmetry: asym,
            cov_min_eig_ratio: eig,
            channels: chan_records,
        })
    }
}

/// Extracts the pseudorange and rate rows of the listed channels from a
/// full 2M x 9 observation matrix.
fn select_rows(h_full: &DMatrix<f64>, valid: &[usize], m: usize) -> DMatrix<f64> {
    let mv = valid.len();
    let mut h = DMatrix::zeros(2 * mv, ekf::STATE_DIM);
    for (row, &j) in valid.iter().enumerate() {
        for c in 0..ekf::STATE_DIM {
            h[(row, c)] = h_full[(j, c)];
            h[(mv + row, c)] = h_full[(m + j, c)];
        }
    }
    h
}

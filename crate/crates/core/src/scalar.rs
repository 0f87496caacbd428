//! The baseline receiver: independent per-channel DLL/PLL closed loops with
//! lock detection and one-second hot reacquisition, feeding a Kalman
//! positioning module at 1 Hz or 50 Hz that consumes locked channels only.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{
    doppler_to_rate_mps, simulate_interval, ChannelMeta, IntervalTruth,
    ReplicaState,
};
use crate::constants::METERS_PER_CHIP;
use crate::constellation::SatelliteEpochState;
use crate::correlator::CorrelationModel;
use crate::ekf::{
    self, build_measurement_noise, MeasurementModel, NoiseChannel, NoiseMode, ProcessNoiseConfig,
    StateCovariance, StateVector,
};
use crate::error::Result;
use crate::metrics::{ChannelEpochRecord, EpochRecord, Event, EventKind};
use crate::rng::Stream;
use crate::tracking::{
    costas_discriminator, dll_filter_update, emlp_discriminator, pll_filter_update, Cn0Estimator,
    DllConfig, LockConfig, LockDetector, LockStatus, LoopFilterState, PllConfig,
};

/// Gaussian spreads for scalar channel initialization (acquisition
/// handoff). Code spread scales with the chip spacing.
#[derive(Debug, Clone, Copy)]
pub struct ChannelInitSpread {
    /// Code error sigma as a fraction of the chip spacing (0.5 gives the
    /// Cs/2 tracking-scale spread).
    pub code_chip_spacing_factor: f64,
    pub doppler_hz: f64,
    pub phase_rad: f64,
}

impl Default for ChannelInitSpread {
    fn default() -> Self {
        Self {
            code_chip_spacing_factor: 0.5,
            doppler_hz: 2.0,
            phase_rad: 0.2,
        }
    }
}

/// Hot reacquisition parameters: one second to a rough code/carrier
/// estimate with tracking-scale spreads: half a chip spacing in code, and
/// a solution-aided Doppler handoff spread that keeps the restart inside
/// the Costas pull-in basin (about 5 Hz for the 10 Hz third-order loop
/// once the one-interval transport delay is accounted for).
#[derive(Debug, Clone, Copy)]
pub struct ReacquisitionConfig {
    pub duration_s: f64,
    pub code_chip_spacing_factor: f64,
    pub doppler_sigma_hz: f64,
    pub phase_sigma_rad: f64,
}

impl Default for ReacquisitionConfig {
    fn default() -> Self {
        Self {
            duration_s: 1.0,
            code_chip_spacing_factor: 0.5,
            doppler_sigma_hz: 2.0,
            phase_sigma_rad: std::f64::consts::FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalarConfig {
    /// Tracking epoch (s).
    pub t_epoch_s: f64,
    /// Positioning filter rate (Hz): 1 or 50.
    pub kf_rate_hz: f64,
    pub process_noise: ProcessNoiseConfig,
    pub pll: PllConfig,
    pub dll_bandwidth_hz: f64,
    pub lock: LockConfig,
    pub init: ChannelInitSpread,
    pub reacq: ReacquisitionConfig,
    pub noise_enabled: bool,
}

impl ScalarConfig {
    pub fn new(kf_rate_hz: f64, process_noise: ProcessNoiseConfig) -> Self {
        Self {
            t_epoch_s: 0.02,
            kf_rate_hz,
            process_noise,
            pll: PllConfig::default(),
            dll_bandwidth_hz: 1.0,
            lock: LockConfig::default(),
            init: ChannelInitSpread::default(),
            reacq: ReacquisitionConfig::default(),
            noise_enabled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Tracking,
    Lost,
    Reacquiring { elapsed_s: f64 },
}

/// A locked channel's output for the positioning filter.
#[derive(Debug, Clone, Copy)]
pub struct ScalarMeasurement {
    pub prn: u16,
    pub model: CorrelationModel,
    pub rho_m: f64,
    pub rate_mps: f64,
    pub cn0_dbhz: Option<f64>,
}

/// One scalar tracking channel: DLL + PLL self-feedback on its own NCO.
pub struct ScalarChannel {
    pub meta: ChannelMeta,
    replica: ReplicaState,
    dll_cfg: DllConfig,
    dll_state: LoopFilterState,
    pll_state: LoopFilterState,
    detector: LockDetector,
    cn0: Cn0Estimator,
    last_cn0: Option<f64>,
    mode: Mode,
}

impl ScalarChannel {
    /// Initializes the channel from first-epoch truth plus acquisition
    /// spreads (three draws from `init_rng`).
    pub fn new(
        meta: ChannelMeta,
        cfg: &ScalarConfig,
        truth_rho_m: f64,
        truth_doppler_hz: f64,
        cn0_warm_dbhz: f64,
        init_rng: &mut Stream,
    ) -> Self {
        let n_code: f64 = init_rng.sample(StandardNormal);
        let n_dopp: f64 = init_rng.sample(StandardNormal);
        let n_phase: f64 = init_rng.sample(StandardNormal);
        let code_sigma_m = cfg.init.code_chip_spacing_factor * meta.model.chip_spacing * METERS_PER_CHIP;
        let doppler0 = truth_doppler_hz + cfg.init.doppler_hz * n_dopp;
        let mut replica = ReplicaState::new(truth_rho_m + code_sigma_m * n_code, doppler0);
        replica.phase_error_rad = cfg.init.phase_rad * n_phase;
        let mut pll_state = LoopFilterState::default();
        pll_state.prime_rate_hz(doppler0);
        Self {
            meta,
            replica,
            dll_cfg: DllConfig {
                noise_bandwidth_hz: cfg.dll_bandwidth_hz,
                period_s: cfg.t_epoch_s,
                chip_spacing: meta.model.chip_spacing,
                sharpness: meta.model.sharpness,
            },
            dll_state: LoopFilterState::default(),
            pll_state,
            detector: LockDetector::new(cfg.lock, cfg.t_epoch_s),
            cn0: Cn0Estimator::new(cfg.t_epoch_s),
            last_cn0: Some(cn0_warm_dbhz),
            mode: Mode::Tracking,
        }
    }

    pub fn is_locked(&self) -> bool {
        self.detector.status() == LockStatus::Locked && matches!(self.mode, Mode::Tracking)
    }

    pub fn replica_rho_m(&self) -> f64 {
        self.replica.rho_m
    }

    /// One 20 ms tracking epoch ending at `t_s`. Returns the epoch record
    /// and, while locked, the (pseudorange, rate) measurement.
    #[allow(clippy::too_many_arguments)]
    pub fn epoch(
        &mut self,
        cfg: &ScalarConfig,
        truth: &IntervalTruth,
        t_s: f64,
        rng: &mut Stream,
        reacq_rng: &mut Stream,
        events: &mut Vec<Event>,
    ) -> (ChannelEpochRecord, Option<ScalarMeasurement>) {
        let dt = cfg.t_epoch_s;
        let noise = if cfg.noise_enabled { Some(&mut *rng) } else { None };
        let out = simulate_interval(&self.meta, &mut self.replica, truth, dt, noise);

        let mut measurement = None;
        let mut dll_disc = None;
        let mut fll_equiv = None;
        let mut just_reinitialized = false;

        match self.mode {
            Mode::Tracking => {
                let costas = costas_discriminator(out.full.ip, out.full.qp);
                let dll = emlp_discriminator(&out.full, &self.meta.model);
                dll_disc = dll;
                self.cn0.push_prompt(out.full.ip, out.full.qp);
                if let Some(est) = self.cn0.estimate_dbhz() {
                    self.last_cn0 = Some(est);
                }
                let status = self.detector.update(
                    self.cn0.estimate_dbhz(),
                    self.cn0.coherence(),
                    costas,
                );
                if status == LockStatus::Lost {
                    // coast at the last commands until reacquisition
                    self.mode = Mode::Lost;
                    events.push(Event {
                        t_s,
                        prn: Some(self.meta.prn),
                        kind: EventKind::LockLost,
                    });
                } else {
                    if let (Some(c), Some(d)) = (costas, dll) {
                        let pll_cmd_hz = pll_filter_update(&mut self.pll_state, c, &cfg.pll);
                        let dll_corr = dll_filter_update(&mut self.dll_state, d, &self.dll_cfg);
                        self.replica.doppler_hz = pll_cmd_hz;
                        // carrier-aided code: Doppler projected into the
                        // code domain plus the DLL correction
                        self.replica.rate_mps =
                            doppler_to_rate_mps(pll_cmd_hz) + dll_corr * METERS_PER_CHIP;
                    }
                    if status == LockStatus::Locked {
                        let rate_acc_hz =
                            self.pll_state.acc2 / (2.0 * std::f64::consts::PI);
                        fll_equiv = Some(rate_acc_hz);
                        measurement = Some(ScalarMeasurement {
                            prn: self.meta.prn,
                            model: self.meta.model,
                            rho_m: self.replica.rho_m,
                            rate_mps: doppler_to_rate_mps(rate_acc_hz),
                            cn0_dbhz: self.cn0.deweight_estimate_dbhz().or(self.last_cn0),
                        });
                    }
                }
            }
            Mode::Lost => {
                if truth.cn0_dbhz >= cfg.lock.relock_cn0_dbhz() {
                    self.mode = Mode::Reacquiring { elapsed_s: 0.0 };
                    events.push(Event {
                        t_s,
                        prn: Some(self.meta.prn),
                        kind: EventKind::ReacquisitionStart,
                    });
                }
            }
            Mode::Reacquiring { elapsed_s } => {
                if truth.cn0_dbhz < cfg.lock.relock_cn0_dbhz() {
                    // signal dropped again: restart once it returns
                    self.mode = Mode::Lost;
                } else {
                    let elapsed = elapsed_s + dt;
                    if elapsed + 1e-9 >= cfg.reacq.duration_s {
                        self.reinitialize(cfg, truth, reacq_rng);
                        just_reinitialized = true;
                        events.push(Event {
                            t_s,
                            prn: Some(self.meta.prn),
                            kind: EventKind::ReacquisitionDone,
                        });
                    } else {
                        self.mode = Mode::Reacquiring { elapsed_s: elapsed };
                    }
                }
            }
        }

        let record = ChannelEpochRecord {
            prn: self.meta.prn,
            // the reinit epoch still correlated against the coasted
            // replica; lock applies from the next interval on
            locked: self.is_locked() && !just_reinitialized,
            in_solution: measurement.is_some(),
            dll_chips: dll_disc,
            fll_hz: fll_equiv,
            code_error_m: -out.code_error_chips * METERS_PER_CHIP,
            doppler_error_hz: -out.doppler_error_hz,
            cn0_est_dbhz: self.last_cn0,
        };
        (record, measurement)
    }

    /// Hot-start NCO reinitialization at the end of the reacquisition:
    /// truth plus tracking-scale draws, loops reset, lock asserted.
    fn reinitialize(&mut self, cfg: &ScalarConfig, truth: &IntervalTruth, reacq_rng: &mut Stream) {
        let n_code: f64 = reacq_rng.sample(StandardNormal);
        let n_dopp: f64 = reacq_rng.sample(StandardNormal);
        let n_phase: f64 = reacq_rng.sample(StandardNormal);
        let code_sigma_m =
            cfg.reacq.code_chip_spacing_factor * self.meta.model.chip_spacing * METERS_PER_CHIP;
        let doppler = truth.doppler_hz(cfg.t_epoch_s) + cfg.reacq.doppler_sigma_hz * n_dopp;
        self.replica = ReplicaState::new(truth.rho_end_m + code_sigma_m * n_code, doppler);
        self.replica.phase_error_rad = cfg.reacq.phase_sigma_rad * n_phase;
        self.dll_state = LoopFilterState::default();
        self.pll_state = LoopFilterState::default();
        self.pll_state.prime_rate_hz(doppler);
        self.cn0.reset();
        self.last_cn0 = None;
        self.detector.assert_locked();
        self.mode = Mode::Tracking;
    }
}

/// The positioning Kalman filter consuming locked-channel measurements at
/// its own rate (identical machinery for 1 Hz and 50 Hz; only the update
/// interval differs).
pub struct KfPositioning {
    state: StateVector,
    covariance: StateCovariance,
    phi: StateCovariance,
    q: StateCovariance,
    epochs_per_update: usize,
    t_code_s: f64,
    noise_mode: NoiseMode,
}

/// Outcome of one positioning epoch.
pub struct KfOutcome {
    pub nis: Option<(f64, usize)>,
    pub update_skipped: bool,
}

impl KfPositioning {
    pub fn new(
        cfg: &ScalarConfig,
        initial_state: StateVector,
        initial_covariance: StateCovariance,
    ) -> Self {
        let dt = 1.0 / cfg.kf_rate_hz;
        let epochs_per_update = (dt / cfg.t_epoch_s).round() as usize;
        Self {
            state: initial_state,
            covariance: initial_covariance,
            phi: ekf::build_transition(dt),
            q: ekf::build_process_noise(dt, &cfg.process_noise),
            epochs_per_update,
            t_code_s: cfg.t_epoch_s,
            noise_mode: NoiseMode::ClosedLoop {
                code_bandwidth_hz: cfg.dll_bandwidth_hz,
                code_period_s: cfg.t_epoch_s,
                rate_bandwidth_hz: cfg.pll.noise_bandwidth_hz,
                rate_period_s: cfg.pll.period_s,
            },
        }
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    pub fn covariance(&self) -> &StateCovariance {
        &self.covariance
    }

    /// True when tracking epoch `epoch` (1-based) is a filter epoch.
    pub fn is_filter_epoch(&self, epoch: usize) -> bool {
        epoch.is_multiple_of(self.epochs_per_update)
    }

    /// Runs one filter epoch: predict, then update with whatever locked
    /// measurements exist (none gives a pure prediction; fewer than four is
    /// allowed and simply degrades the estimate).
    pub fn filter_epoch(
        &mut self,
        measurements: &[ScalarMeasurement],
        sats: &[SatelliteEpochState],
    ) -> Result<KfOutcome> {
        let (state_pred, p_pred) = ekf::predict(&self.state, &self.covariance, &self.phi, &self.q);

        if measurements.is_empty() {
            self.state = state_pred;
            self.covariance = p_pred;
            return Ok(KfOutcome {
                nis: None,
                update_skipped: false,
            });
        }

        // satellite states for the measured channels, in measurement order
        let sats_used: Vec<SatelliteEpochState> = measurements
            .iter()
            .map(|m| {
                *sats
                    .iter()
                    .find(|s| s.prn == m.prn)
                    .expect("measurement from unknown prn")
            })
            .collect();
        let model = MeasurementModel::build(&state_pred, &sats_used)?;
        let h = model.observation_matrix(&state_pred);
        let predicted = model.predicted_vector();

        let mv = measurements.len();
        let mut dz = nalgebra::DVector::zeros(2 * mv);
        for (j, m) in measurements.iter().enumerate() {
            dz[j] = m.rho_m - predicted[j];
            dz[mv + j] = m.rate_mps - predicted[mv + j];
        }
        let noise_channels: Vec<NoiseChannel> = measurements
            .iter()
            .map(|m| NoiseChannel {
                cn0_dbhz: m.cn0_dbhz,
                model: m.model,
            })
            .collect();
        let r = build_measurement_noise(&noise_channels, self.t_code_s, self.t_code_s, self.noise_mode);

        match ekf::update(&state_pred, &p_pred, &h, &r, &dz) {
            Ok(up) => {
                self.state = up.state;
                self.covariance = up.covariance;
                Ok(KfOutcome {
                    nis: Some((up.nis, 2 * mv)),
                    update_skipped: false,
                })
            }
            Err(_skip) => {
                self.state = state_pred;
                self.covariance = p_pred;
                Ok(KfOutcome {
                    nis: None,
                    update_skipped: true,
                })
            }
        }
    }
}

/// The full scalar receiver: channels plus positioning filter.
pub struct ScalarReceiver {
    pub cfg: ScalarConfig,
    channels: Vec<ScalarChannel>,
    kf: KfPositioning,
    epoch: usize,
    /// Tracking epochs elapsed since the last filter epoch.
    since_update: usize,
    /// One-epoch transition used to propagate the readout between filter
    /// epochs.
    phi_epoch: StateCovariance,
    /// Navigation solution propagated to the current epoch.
    readout: StateVector,
}

impl ScalarReceiver {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cfg: ScalarConfig,
        metas: &[ChannelMeta],
        initial_state: StateVector,
        initial_covariance: StateCovariance,
        truth_rho_m: &[f64],
        truth_doppler_hz: &[f64],
        cn0_warm_dbhz: &[f64],
        channel_init_rngs: &mut [Stream],
    ) -> Self {
        let channels = metas
            .iter()
            .enumerate()
            .map(|(j, meta)| {
                ScalarChannel::new(
                    *meta,
                    &cfg,
                    truth_rho_m[j],
                    truth_doppler_hz[j],
                    cn0_warm_dbhz[j],
                    &mut channel_init_rngs[j],
                )
            })
            .collect();
        let kf = KfPositioning::new(&cfg, initial_state, initial_covariance);
        let phi_epoch = ekf::build_transition(cfg.t_epoch_s);
        Self {
            cfg,
            channels,
            kf,
            epoch: 0,
            since_update: 0,
            phi_epoch,
            readout: initial_state,
        }
    }

    /// The navigation solution at the latest tracking epoch: the filter
    /// posterior on filter epochs, its constant-velocity propagation in
    /// between (the solution a sub-rate positioning module provides).
    pub fn state(&self) -> &StateVector {
        &self.readout
    }

    pub fn channel(&self, j: usize) -> &ScalarChannel {
        &self.channels[j]
    }

    /// One tracking epoch for every channel, plus a positioning epoch when
    /// due.
    pub fn epoch(
        &mut self,
        truths: &[IntervalTruth],
        sats_now: &[SatelliteEpochState],
        rngs: &mut [Stream],
        reacq_rngs: &mut [Stream],
        events: &mut Vec<Event>,
    ) -> Result<EpochRecord> {
        self.epoch += 1;
        let t_s = self.epoch as f64 * self.cfg.t_epoch_s;
        let cfg = self.cfg;

        let mut chan_records = Vec::with_capacity(self.channels.len());
        let mut measurements = Vec::new();
        for (j, ch) in self.channels.iter_mut().enumerate() {
            let (rec, meas) = ch.epoch(
                &cfg,
                &truths[j],
                t_s,
                &mut rngs[j],
                &mut reacq_rngs[j],
                events,
            );
            chan_records.push(rec);
            measurements.extend(meas);
        }

        let mut kf_updated = false;
        let mut update_skipped = false;
        let mut nis = None;
        if self.kf.is_filter_epoch(self.epoch) {
            let outcome = self.kf.filter_epoch(&measurements, sats_now)?;
            kf_updated = true;
            update_skipped = outcome.update_skipped;
            nis = outcome.nis;
            self.since_update = 0;
            self.readout = self.kf.state;
            if update_skipped {
                events.push(Event {
                    t_s,
                    prn: None,
                    kind: EventKind::UpdateSkipped,
                });
            }
        } else {
            self.since_update += 1;
            self.readout = self.phi_epoch * self.readout;
        }

        let (asym, eig) = ekf::covariance_health(&self.kf.covariance);
        Ok(EpochRecord {
            epoch: self.epoch,
            t_s,
            state: self.readout,
            p_diag: std::array::from_fn(|i| self.kf.covariance[(i, i)]),
            kf_updated,
            update_skipped,
            nis,
            cov_asymmetry: asym,
            cov_min_eig_ratio: eig,
            channels: chan_records,
        })
    }
}

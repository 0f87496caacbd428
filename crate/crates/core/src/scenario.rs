//! Scenario definition and run orchestration.
//!
//! A scenario pins the trajectory, constellation, C/N0 schedule, process
//! noise and seed; [`run_scenario`] executes one architecture against it
//! and [`run_compare`] executes all three against identical truth and
//! identical per-channel noise streams (common random numbers), isolating
//! architectural differences.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{rate_to_doppler_hz, ChannelMeta, IntervalTruth};
use crate::constellation::{
    default_almanac, default_site, load_almanac, propagate_satellite, reduced_almanac,
    AlmanacEntry, SatelliteEpochState, REDUCED_OUTAGE_PRNS,
};
use crate::correlator::{Cn0Schedule, OutageInterval};
use crate::ekf::{self, InitSpread, ProcessNoiseConfig};
use crate::error::{Error, Result};
use crate::geometry::{predicted_range, GeodeticPosition};
use crate::metrics::{compute_metrics, EpochRecord, Event, MetricsReport, TruthEpoch};
use crate::rng::{stream, Stream, StreamKind};
use crate::scalar::{ScalarConfig, ScalarReceiver};
use crate::trajectory::{
    car_trajectory, csv_trajectory, default_car_waypoints, static_trajectory, TrajectorySample,
    DEFAULT_CAR_SPEED_MPS,
};
use crate::vdfll::{VdfllConfig, VdfllReceiver};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Architecture {
    Scalar1Hz,
    Scalar50Hz,
    Vdfll,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [
        Architecture::Scalar1Hz,
        Architecture::Scalar50Hz,
        Architecture::Vdfll,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Scalar1Hz => "scalar1hz",
            Architecture::Scalar50Hz => "scalar50hz",
            Architecture::Vdfll => "vdfll",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "scalar1hz" => Some(Architecture::Scalar1Hz),
            "scalar50hz" => Some(Architecture::Scalar50Hz),
            "vdfll" => Some(Architecture::Vdfll),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrajectorySpec {
    Static,
    Car {
        waypoints_enu: Vec<(f64, f64)>,
        speed_mps: f64,
    },
    Csv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSet {
    /// The full baked-in 13-channel sky.
    Full13,
    /// Six channels of which three stay clean under the default schedule.
    Reduced3,
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    /// Tracking epoch rate (Hz); the correlator interval is its inverse.
    pub epoch_hz: f64,
    pub seed: u64,
    pub site: GeodeticPosition,
    pub trajectory: TrajectorySpec,
    pub channel_set: ChannelSet,
    pub almanac_path: Option<PathBuf>,
    pub cn0_nominal_dbhz: f64,
    /// Per-channel nominal C/N0 overrides (prn, dB-Hz).
    pub cn0_overrides: Vec<(u16, f64)>,
    /// Explicit outage list; when empty and `default_outages` is set, the
    /// standard schedule for the channel set applies.
    pub outages: Vec<(u16, OutageInterval)>,
    pub default_outages: bool,
    /// Velocity white-noise PSD ((m/s)^2/Hz); `None` selects 0.01 for
    /// static and 0.6 for dynamic trajectories.
    pub vel_psd: Option<f64>,
    pub h0: f64,
    pub h_minus2: f64,
    /// Seconds excluded from statistics while filters and loops settle.
    pub settle_s: f64,
    pub init_spread: InitSpread,
    pub noise_enabled: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration_s: 200.0,
            epoch_hz: 50.0,
            seed: 42,
            site: default_site(),
            trajectory: TrajectorySpec::Static,
            channel_set: ChannelSet::Full13,
            almanac_path: None,
            cn0_nominal_dbhz: 45.0,
            cn0_overrides: Vec::new(),
            outages: Vec::new(),
            default_outages: true,
            vel_psd: None,
            h0: crate::constants::TCXO_H0,
            h_minus2: crate::constants::TCXO_H_MINUS_2,
            settle_s: 2.0,
            init_spread: InitSpread::default(),
            noise_enabled: true,
        }
    }
}

/// Channels carrying the standard outage schedule in the full sky.
pub const FULL_OUTAGE_PRNS: [u16; 4] = [3, 4, 51, 52];

/// The standard outage windows (s): half-open intervals at 20 dB-Hz.
pub const STANDARD_OUTAGES: [(f64, f64); 3] = [(2.0, 12.0), (60.0, 80.0), (140.0, 160.0)];

/// Outage C/N0 level (dB-Hz).
pub const OUTAGE_LEVEL_DBHZ: f64 = 20.0;

impl ScenarioConfig {
    /// The static scenario: user at the reference site, full sky, standard
    /// outage schedule.
    pub fn static_scenario() -> Self {
        Self::default()
    }

    /// The dynamic scenario: the default car path, full sky, standard
    /// outage schedule.
    pub fn car_scenario() -> Self {
        Self {
            trajectory: TrajectorySpec::Car {
                waypoints_enu: default_car_waypoints(),
                speed_mps: DEFAULT_CAR_SPEED_MPS,
            },
            ..Self::default()
        }
    }

    /// The stress scenario: the car path with only six tracked channels,
    /// three of which share the outage schedule.
    pub fn reduced_car_scenario() -> Self {
        Self {
            channel_set: ChannelSet::Reduced3,
            ..Self::car_scenario()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.duration_s <= 0.0 {
            return Err(Error::config("duration must be positive"));
        }
        if (self.epoch_hz - 50.0).abs() > 1e-9 {
            return Err(Error::config("epoch rate is fixed at 50 Hz"));
        }
        if !(10.0..=55.0).contains(&self.cn0_nominal_dbhz) {
            return Err(Error::config("nominal C/N0 must lie in [10, 55] dB-Hz"));
        }
        if self.settle_s < 0.0 || self.settle_s >= self.duration_s {
            return Err(Error::config("settle window must lie inside the run"));
        }
        self.almanac()?;
        self.schedule()?;
        Ok(())
    }

    /// Resolves the almanac for the channel set.
    pub fn almanac(&self) -> Result<Vec<AlmanacEntry>> {
        let entries = match (&self.almanac_path, self.channel_set) {
            (Some(path), _) => load_almanac(path)?,
            (None, ChannelSet::Full13) => default_almanac(),
            (None, ChannelSet::Reduced3) => reduced_almanac(),
        };
        if entries.is_empty() {
            return Err(Error::config("empty almanac"));
        }
        Ok(entries)
    }

    /// Resolves the C/N0 schedule.
    pub fn schedule(&self) -> Result<Cn0Schedule> {
        let almanac = self.almanac()?;
        let mut schedule = Cn0Schedule::new();
        for e in &almanac {
            schedule.set_nominal(e.prn, self.cn0_nominal_dbhz);
        }
        for &(prn, level) in &self.cn0_overrides {
            if !almanac.iter().any(|e| e.prn == prn) {
                return Err(Error::UnknownChannel { prn });
            }
            schedule.set_nominal(prn, level);
        }
        let mut outages = self.outages.clone();
        if outages.is_empty() && self.default_outages {
            let prns: &[u16] = match self.channel_set {
                ChannelSet::Full13 => &FULL_OUTAGE_PRNS,
                ChannelSet::Reduced3 => &REDUCED_OUTAGE_PRNS,
            };
            for &prn in prns {
                for &(start, end) in &STANDARD_OUTAGES {
                    outages.push((
                        prn,
                        OutageInterval {
                            start_s: start,
                            end_s: end,
                            level_dbhz: OUTAGE_LEVEL_DBHZ,
                        },
                    ));
                }
            }
        }
        for (prn, interval) in outages {
            if !almanac.iter().any(|e| e.prn == prn) {
                return Err(Error::UnknownChannel { prn });
            }
            schedule.add_outage(prn, interval)?;
        }
        Ok(schedule)
    }

    pub fn process_noise(&self) -> ProcessNoiseConfig {
        let vel = self.vel_psd.unwrap_or(match self.trajectory {
            TrajectorySpec::Static => 0.01,
            _ => 0.6,
        });
        ProcessNoiseConfig::from_allan(vel, self.h0, self.h_minus2)
    }

    fn epoch_dt(&self) -> f64 {
        1.0 / self.epoch_hz
    }

    fn num_epochs(&self) -> usize {
        (self.duration_s * self.epoch_hz).round() as usize
    }

    fn trajectory_samples(&self) -> Result<Vec<TrajectorySample>> {
        // one extra epoch of truth for the end-of-run NCO command
        let extended = self.duration_s + 2.0 * self.epoch_dt();
        match &self.trajectory {
            TrajectorySpec::Static => Ok(static_trajectory(&self.site, extended, self.epoch_hz)),
            TrajectorySpec::Car {
                waypoints_enu,
                speed_mps,
            } => car_trajectory(
                &self.site,
                waypoints_enu,
                &[*speed_mps],
                extended,
                self.epoch_hz,
            ),
            TrajectorySpec::Csv(path) => csv_trajectory(path, extended, self.epoch_hz),
        }
    }
}

// ---------------------------------------------------------------------------
// truth world
// ---------------------------------------------------------------------------

/// Everything the simulated receivers measure against, shared across the
/// architectures of one comparison.
pub struct TruthWorld {
    pub metas: Vec<ChannelMeta>,
    pub schedule: Cn0Schedule,
    samples: Vec<TrajectorySample>,
    /// Satellite states per epoch boundary, `[epoch][channel]`.
    sats: Vec<Vec<SatelliteEpochState>>,
    clock_bias_m: Vec<f64>,
    clock_drift_mps: Vec<f64>,
    dt: f64,
}

impl TruthWorld {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        let almanac = cfg.almanac()?;
        let schedule = cfg.schedule()?;
        let samples = cfg.trajectory_samples()?;
        let n = cfg.num_epochs();
        if samples.len() < n + 2 {
            return Err(Error::config(format!(
                "trajectory supplies {} epochs, scenario needs {}",
                samples.len(),
                n + 2
            )));
        }
        let metas: Vec<ChannelMeta> = almanac
            .iter()
            .map(|e| ChannelMeta::new(e.prn, e.constellation))
            .collect();
        let dt = cfg.epoch_dt();

        let sats: Vec<Vec<SatelliteEpochState>> = (0..samples.len())
            .map(|k| {
                almanac
                    .iter()
                    .map(|e| propagate_satellite(e, k as f64 * dt))
                    .collect()
            })
            .collect();

        // receiver clock truth: one oscillator driving both time scales,
        // sampled exactly from the two-state model
        let (sb, sd) = ekf::clock_psd_from_allan(cfg.h0, cfg.h_minus2);
        let q11 = sb * dt + sd * dt.powi(3) / 3.0;
        let q12 = sd * dt * dt / 2.0;
        let q22 = sd * dt;
        let l11 = q11.sqrt();
        let l21 = q12 / l11;
        let l22 = (q22 - l21 * l21).max(0.0).sqrt();
        let mut clk = stream(cfg.seed, StreamKind::TruthClock);
        let mut bias = Vec::with_capacity(samples.len());
        let mut drift = Vec::with_capacity(samples.len());
        let (mut b, mut d) = (0.0f64, 0.0f64);
        for _ in 0..samples.len() {
            bias.push(b);
            drift.push(d);
            let n1: f64 = clk.sample(StandardNormal);
            let n2: f64 = clk.sample(StandardNormal);
            b += d * dt + l11 * n1;
            d += l21 * n1 + l22 * n2;
        }

        Ok(Self {
            metas,
            schedule,
            samples,
            sats,
            clock_bias_m: bias,
            clock_drift_mps: drift,
            dt,
        })
    }

    pub fn num_channels(&self) -> usize {
        self.metas.len()
    }

    pub fn sats_at(&self, epoch: usize) -> &[SatelliteEpochState] {
        &self.sats[epoch]
    }

    /// True pseudorange of channel `j` at epoch `k`.
    pub fn rho(&self, epoch: usize, j: usize) -> f64 {
        let sat = &self.sats[epoch][j];
        let range = predicted_range(&sat.ecef.position, &self.samples[epoch].ecef.position)
            .expect("truth geometry degenerate");
        range + self.clock_bias_m[epoch] - sat.clock_bias_m
    }

    /// Truth parameters for the interval ending at epoch `k` (C/N0 keyed at
    /// the interval end).
    pub fn interval_truth(&self, end_epoch: usize, j: usize) -> IntervalTruth {
        let t_end = end_epoch as f64 * self.dt;
        IntervalTruth {
            rho_start_m: self.rho(end_epoch - 1, j),
            rho_end_m: self.rho(end_epoch, j),
            cn0_dbhz: self
                .schedule
                .cn0_at(self.metas[j].prn, t_end)
                .expect("schedule covers all channels"),
        }
    }

    pub fn truth_epoch(&self, epoch: usize) -> TruthEpoch {
        TruthEpoch {
            position: self.samples[epoch].ecef.position,
            velocity: self.samples[epoch].ecef.velocity,
            clock_bias_m: self.clock_bias_m[epoch],
            clock_drift_mps: self.clock_drift_mps[epoch],
        }
    }
}

// ---------------------------------------------------------------------------
// running
// ---------------------------------------------------------------------------

/// The full product of one architecture run.
pub struct RunOutput {
    pub architecture: Architecture,
    /// Reference site of the scenario (anchors the ENU error frame).
    pub site: GeodeticPosition,
    pub records: Vec<EpochRecord>,
    pub truth: Vec<TruthEpoch>,
    pub events: Vec<Event>,
    pub metrics: MetricsReport,
}

/// Runs one architecture against the scenario.
pub fn run_scenario(cfg: &ScenarioConfig, arch: Architecture) -> Result<RunOutput> {
    cfg.validate()?;
    let world = TruthWorld::build(cfg)?;
    run_against_world(cfg, arch, &world)
}

/// Runs all three architectures against one shared truth world.
pub fn run_compare(cfg: &ScenarioConfig) -> Result<Vec<RunOutput>> {
    cfg.validate()?;
    let world = TruthWorld::build(cfg)?;
    Architecture::ALL
        .iter()
        .map(|&arch| run_against_world(cfg, arch, &world))
        .collect()
}

fn run_against_world(
    cfg: &ScenarioConfig,
    arch: Architecture,
    world: &TruthWorld,
) -> Result<RunOutput> {
    let n = cfg.num_epochs();
    let dt = cfg.epoch_dt();
    let m = world.num_channels();

    // all architectures share the initialization draw
    let mut init_rng = stream(cfg.seed, StreamKind::FilterInit);
    let truth0 = world.truth_epoch(0);
    let (x0, p0) = ekf::initialize_filter(&truth0.state_vector(), &cfg.init_spread, &mut init_rng);

    let mut rngs: Vec<Stream> = world
        .metas
        .iter()
        .map(|meta| stream(cfg.seed, StreamKind::ChannelNoise(meta.prn)))
        .collect();
    let warm_cn0: Vec<f64> = world
        .metas
        .iter()
        .map(|meta| world.schedule.cn0_at(meta.prn, 0.0).unwrap())
        .collect();

    let mut events: Vec<Event> = Vec::new();
    let mut records: Vec<EpochRecord> = Vec::with_capacity(n + 1);
    records.push(EpochRecord {
        epoch: 0,
        t_s: 0.0,
        state: x0,
        p_diag: std::array::from_fn(|i| p0[(i, i)]),
        kf_updated: false,
        update_skipped: false,
        nis: None,
        cov_asymmetry: 0.0,
        cov_min_eig_ratio: 0.0,
        channels: Vec::new(),
    });

    match arch {
        Architecture::Vdfll => {
            let mut vcfg = VdfllConfig::new(cfg.process_noise());
            vcfg.noise_enabled = cfg.noise_enabled;
            let mut rx = VdfllReceiver::new(
                vcfg,
                &world.metas,
                x0,
                p0,
                world.sats_at(0),
                world.sats_at(1),
                &warm_cn0,
            )?;
            for k in 1..=n {
                let truths: Vec<IntervalTruth> =
                    (0..m).map(|j| world.interval_truth(k, j)).collect();
                let rec = rx.epoch(&truths, world.sats_at(k), world.sats_at(k + 1), &mut rngs)?;
                if rec.update_skipped {
                    events.push(Event {
                        t_s: rec.t_s,
                        prn: None,
                        kind: crate::metrics::EventKind::UpdateSkipped,
                    });
                }
                records.push(rec);
            }
        }
        Architecture::Scalar1Hz | Architecture::Scalar50Hz => {
            let rate = if arch == Architecture::Scalar1Hz {
                1.0
            } else {
                50.0
            };
            let mut scfg = ScalarConfig::new(rate, cfg.process_noise());
            scfg.noise_enabled = cfg.noise_enabled;
            let mut chan_inits: Vec<Stream> = world
                .metas
                .iter()
                .map(|meta| stream(cfg.seed, StreamKind::ScalarChannelInit(meta.prn)))
                .collect();
            let rho0: Vec<f64> = (0..m).map(|j| world.rho(0, j)).collect();
            let dopp0: Vec<f64> = (0..m)
                .map(|j| {
                    let t = world.interval_truth(1, j);
                    rate_to_doppler_hz((t.rho_end_m - t.rho_start_m) / dt)
                })
                .collect();
            let mut reacq_rngs: Vec<Stream> = world
                .metas
                .iter()
                .map(|meta| stream(cfg.seed, StreamKind::Reacquisition(meta.prn)))
                .collect();
            let mut rx = ScalarReceiver::new(
                scfg,
                &world.metas,
                x0,
                p0,
                &rho0,
                &dopp0,
                &warm_cn0,
                &mut chan_inits,
            );
            for k in 1..=n {
                let truths: Vec<IntervalTruth> =
                    (0..m).map(|j| world.interval_truth(k, j)).collect();
                let rec = rx.epoch(
                    &truths,
                    world.sats_at(k),
                    &mut rngs,
                    &mut reacq_rngs,
                    &mut events,
                )?;
                records.push(rec);
            }
        }
    }

    let truth: Vec<TruthEpoch> = (0..=n).map(|k| world.truth_epoch(k)).collect();
    let metrics = compute_metrics(
        arch.name(),
        &records,
        &truth,
        &world.schedule,
        cfg.settle_s,
    );
    Ok(RunOutput {
        architecture: arch,
        site: cfg.site,
        records,
        truth,
        events,
        metrics,
    })
}

// ---------------------------------------------------------------------------
// plain-text config files
// ---------------------------------------------------------------------------

/// Parses the key-value scenario file format. Unknown keys are rejected.
///
/// ```text
/// duration_s = 200
/// seed = 42
/// trajectory = static            # static | car | csv <path>
/// site = 43.565747 -1.480499 200
/// channel_set = full13           # full13 | reduced3
/// cn0_nominal_dbhz = 45
/// cn0 = 17 38                    # per-channel nominal override (repeatable)
/// default_outages = true
/// outage = 3 60 80 20            # prn start_s end_s level_dbhz
/// car_waypoint = 0 0             # east_m north_m (repeatable)
/// car_speed_mps = 14
/// almanac = path/to/almanac.txt
/// vel_psd = auto                 # or a number, (m/s)^2/Hz
/// h0 = 1e-21
/// h_minus2 = 2e-20
/// settle_s = 2
/// ```
pub fn parse_config(text: &str, path: &Path) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig {
        // files opt into the standard schedule explicitly
        default_outages: false,
        ..ScenarioConfig::default()
    };
    let mut outages = Vec::new();
    let mut waypoints: Vec<(f64, f64)> = Vec::new();
    let mut speed = DEFAULT_CAR_SPEED_MPS;
    let mut trajectory_kind: Option<String> = None;
    let mut csv_path: Option<PathBuf> = None;
    let mut site: Option<(f64, f64, f64)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        let value = value.trim();
        let fields: Vec<&str> = value.split_whitespace().collect();
        let num = |s: &str, name: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| err(format!("bad {name} {s:?}: {e}")))
        };
        match key {
            "duration_s" => cfg.duration_s = num(value, "duration")?,
            "seed" => {
                cfg.seed = value
                    .parse()
                    .map_err(|e| err(format!("bad seed {value:?}: {e}")))?
            }
            "trajectory" => {
                trajectory_kind = Some(fields.first().map(|s| s.to_string()).unwrap_or_default());
                if fields.first() == Some(&"csv") {
                    let p = fields
                        .get(1)
                        .ok_or_else(|| err("csv trajectory needs a path".into()))?;
                    csv_path = Some(PathBuf::from(p));
                }
            }
            "site" => {
                if fields.len() != 3 {
                    return Err(err("site needs `lat_deg lon_deg height_m`".into()));
                }
                site = Some((
                    num(fields[0], "latitude")?,
                    num(fields[1], "longitude")?,
                    num(fields[2], "height")?,
                ));
            }
            "channel_set" => {
                cfg.channel_set = match value {
                    "full13" => ChannelSet::Full13,
                    "reduced3" => ChannelSet::Reduced3,
                    other => return Err(err(format!("unknown channel_set {other:?}"))),
                }
            }
            "cn0_nominal_dbhz" => cfg.cn0_nominal_dbhz = num(value, "cn0")?,
            "cn0" => {
                if fields.len() != 2 {
                    return Err(err("cn0 needs `prn level_dbhz`".into()));
                }
                let prn: u16 = fields[0]
                    .parse()
                    .map_err(|e| err(format!("bad prn: {e}")))?;
                cfg.cn0_overrides.push((prn, num(fields[1], "level")?));
            }
            "default_outages" => {
                cfg.default_outages = match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(format!("bad bool {other:?}"))),
                }
            }
            "outage" => {
                if fields.len() != 4 {
                    return Err(err("outage needs `prn start_s end_s level_dbhz`".into()));
                }
                let prn: u16 = fields[0]
                    .parse()
                    .map_err(|e| err(format!("bad prn: {e}")))?;
                outages.push((
                    prn,
                    OutageInterval {
                        start_s: num(fields[1], "start")?,
                        end_s: num(fields[2], "end")?,
                        level_dbhz: num(fields[3], "level")?,
                    },
                ));
            }
            "car_waypoint" => {
                if fields.len() != 2 {
                    return Err(err("car_waypoint needs `east_m north_m`".into()));
                }
                waypoints.push((num(fields[0], "east")?, num(fields[1], "north")?));
            }
            "car_speed_mps" => speed = num(value, "speed")?,
            "almanac" => cfg.almanac_path = Some(PathBuf::from(value)),
            "vel_psd" => {
                cfg.vel_psd = if value == "auto" {
                    None
                } else {
                    Some(num(value, "vel_psd")?)
                }
            }
            "h0" => cfg.h0 = num(value, "h0")?,
            "h_minus2" => cfg.h_minus2 = num(value, "h_minus2")?,
            "settle_s" => cfg.settle_s = num(value, "settle")?,
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }

    if let Some((lat, lon, h)) = site {
        cfg.site = GeodeticPosition::from_degrees(lat, lon, h);
    }
    cfg.outages = outages;
    cfg.trajectory = match trajectory_kind.as_deref() {
        None | Some("static") => TrajectorySpec::Static,
        Some("car") => TrajectorySpec::Car {
            waypoints_enu: if waypoints.is_empty() {
                default_car_waypoints()
            } else {
                waypoints
            },
            speed_mps: speed,
        },
        Some("csv") => TrajectorySpec::Csv(csv_path.unwrap()),
        Some(other) => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                msg: format!("unknown trajectory kind {other:?}"),
            })
        }
    };
    Ok(cfg)
}

/// Loads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = parse_config(&text, path)?;
    cfg.validate()?;
    Ok(cfg)
}

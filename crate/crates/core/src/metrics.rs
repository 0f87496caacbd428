//! Per-epoch run records and error statistics segmented by the outage
//! schedule.

use nalgebra::Vector3;

use crate::correlator::Cn0Schedule;
use crate::ekf::{self, StateVector};

/// Per-channel quantities logged every tracking epoch.
#[derive(Debug, Clone, Copy)]
pub struct ChannelEpochRecord {
    pub prn: u16,
    /// Channel considered locked/usable by its architecture this epoch.
    pub locked: bool,
    /// Channel contributed a measurement/innovation to the filter.
    pub in_solution: bool,
    /// Code discriminator output (chips), when valid.
    pub dll_chips: Option<f64>,
    /// Frequency discriminator output (Hz), when valid.
    pub fll_hz: Option<f64>,
    /// Code delay estimation error, estimate minus truth (m).
    pub code_error_m: f64,
    /// Doppler estimation error, estimate minus truth (Hz).
    pub doppler_error_hz: f64,
    pub cn0_est_dbhz: Option<f64>,
}

/// One tracking epoch of any architecture.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub t_s: f64,
    /// Latest navigation solution (zero-order hold between filter updates
    /// for sub-rate positioning filters).
    pub state: StateVector,
    pub p_diag: [f64; ekf::STATE_DIM],
    /// The navigation filter ran a measurement update at this epoch.
    pub kf_updated: bool,
    /// Measurement update skipped for conditioning this epoch.
    pub update_skipped: bool,
    /// Normalized innovation squared and its degrees of freedom.
    pub nis: Option<(f64, usize)>,
    /// Covariance health after the epoch: relative asymmetry and min
    /// eigenvalue over trace.
    pub cov_asymmetry: f64,
    pub cov_min_eig_ratio: f64,
    pub channels: Vec<ChannelEpochRecord>,
}

/// Truth state at an epoch, for error formation.
#[derive(Debug, Clone, Copy)]
pub struct TruthEpoch {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub clock_bias_m: f64,
    pub clock_drift_mps: f64,
}

impl TruthEpoch {
    pub fn state_vector(&self) -> StateVector {
        ekf::state_from_parts(
            &self.position,
            &self.velocity,
            self.clock_bias_m,
            self.clock_bias_m,
            self.clock_drift_mps,
        )
    }
}

/// Discrete receiver events worth reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    LockLost,
    ReacquisitionStart,
    ReacquisitionDone,
    UpdateSkipped,
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub t_s: f64,
    pub prn: Option<u16>,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Segment {
    NoOutage,
    Outage,
}

impl Segment {
    pub fn name(self) -> &'static str {
        match self {
            Segment::NoOutage => "no_outage",
            Segment::Outage => "outage",
        }
    }
}

/// Classifies an epoch time against the outage schedule (any channel in
/// outage puts the epoch in the outage segment; intervals are half-open).
pub fn segment_of(schedule: &Cn0Schedule, t_s: f64) -> Segment {
    if schedule.any_outage_at(t_s) {
        Segment::Outage
    } else {
        Segment::NoOutage
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

fn mean_std(values: &[f64]) -> Option<MeanStd> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(MeanStd {
        mean,
        std: var.sqrt(),
        count: values.len(),
    })
}

/// Error statistics of one segment.
#[derive(Debug, Clone, Default)]
pub struct SegmentStats {
    pub x_error_m: Option<MeanStd>,
    pub y_error_m: Option<MeanStd>,
    pub z_error_m: Option<MeanStd>,
    pub clock_bias_error_m: Option<MeanStd>,
    /// Code-delay estimation error over the schedule-affected channels.
    pub code_error_m: Option<MeanStd>,
    /// Doppler estimation error over the schedule-affected channels.
    pub doppler_error_hz: Option<MeanStd>,
    /// Largest 3D position error in the segment.
    pub max_position_error_m: f64,
}

impl SegmentStats {
    pub fn fields(&self) -> [(&'static str, Option<MeanStd>); 6] {
        [
            ("x_error_m", self.x_error_m),
            ("y_error_m", self.y_error_m),
            ("z_error_m", self.z_error_m),
            ("clock_bias_error_m", self.clock_bias_error_m),
            ("code_error_m", self.code_error_m),
            ("doppler_error_hz", self.doppler_error_hz),
        ]
    }
}

/// The error report of one architecture run.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub architecture: &'static str,
    pub no_outage: SegmentStats,
    pub outage: SegmentStats,
    /// Epochs excluded from statistics at the start of the run (filter and
    /// tracking settling).
    pub settle_s: f64,
}

impl MetricsReport {
    pub fn segment(&self, s: Segment) -> &SegmentStats {
        match s {
            Segment::NoOutage => &self.no_outage,
            Segment::Outage => &self.outage,
        }
    }
}

/// Computes segmented statistics from an epoch-record stream and matching
/// truth.
///
/// Position/clock statistics use the navigation solution of every tracking
/// epoch (sub-rate filters expose their propagated posterior in between
/// updates, which is the output such a receiver actually serves).
/// Channel-level statistics pool the schedule-affected channels, counting
/// only epochs with a valid estimate (locked), which leaves the scalar
/// outage cells empty.
pub fn compute_metrics(
    architecture: &'static str,
    records: &[EpochRecord],
    truth: &[TruthEpoch],
    schedule: &Cn0Schedule,
    settle_s: f64,
) -> MetricsReport {
    assert_eq!(records.len(), truth.len());
    let mut affected = schedule.affected_prns();
    if affected.is_empty() {
        affected = schedule.channels().collect();
    }

    let mut acc: std::collections::HashMap<Segment, Vec<Vec<f64>>> = Default::default();
    for seg in [Segment::NoOutage, Segment::Outage] {
        acc.insert(seg, vec![Vec::new(); 6]);
    }
    let mut max_pos: std::collections::HashMap<Segment, f64> = Default::default();

    for (rec, tru) in records.iter().zip(truth) {
        if rec.t_s < settle_s {
            continue;
        }
        let seg = segment_of(schedule, rec.t_s);
        let slot = acc.get_mut(&seg).unwrap();
        if rec.epoch > 0 {
            let dx = rec.state[ekf::idx::X] - tru.position.x;
            let dy = rec.state[ekf::idx::Y] - tru.position.y;
            let dz = rec.state[ekf::idx::Z] - tru.position.z;
            let db = rec.state[ekf::idx::CLK_GPS] - tru.clock_bias_m;
            slot[0].push(dx);
            slot[1].push(dy);
            slot[2].push(dz);
            slot[3].push(db);
            let p3 = (dx * dx + dy * dy + dz * dz).sqrt();
            let m = max_pos.entry(seg).or_insert(0.0);
            *m = m.max(p3);
        }
        for ch in &rec.channels {
            if affected.contains(&ch.prn) && ch.locked {
                slot[4].push(ch.code_error_m);
                slot[5].push(ch.doppler_error_hz);
            }
        }
    }

    let build = |seg: Segment, acc: &std::collections::HashMap<Segment, Vec<Vec<f64>>>| {
        let v = &acc[&seg];
        SegmentStats {
            x_error_m: mean_std(&v[0]),
            y_error_m: mean_std(&v[1]),
            z_error_m: mean_std(&v[2]),
            clock_bias_error_m: mean_std(&v[3]),
            code_error_m: mean_std(&v[4]),
            doppler_error_hz: mean_std(&v[5]),
            max_position_error_m: max_pos.get(&seg).copied().unwrap_or(0.0),
        }
    };

    MetricsReport {
        architecture,
        no_outage: build(Segment::NoOutage, &acc),
        outage: build(Segment::Outage, &acc),
        settle_s,
    }
}

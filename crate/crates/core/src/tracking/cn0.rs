//! C/N0 estimation and lock detection over sliding one-second windows.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy)]
struct GroupStat {
    /// Mean prompt power |z|^2 over the group.
    mean_power: f64,
    /// Narrowband/wideband power ratio of this group, normalized to [0, 1].
    coherence: f64,
    /// Sample dispersion of |z|^2 within the group.
    dispersion: f64,
}

/// Prompt-power C/N0 estimator with a narrowband/wideband coherence
/// measure.
///
/// Prompt I/Q samples are grouped in [`Self::GROUP_LEN`]-sample blocks; a
/// sliding window of [`Self::WINDOW_GROUPS`] groups (one second at 50 Hz)
/// is averaged. The C/N0 value comes from the mean prompt power against
/// the calibrated unit noise floor of the front end, which stays
/// well-conditioned at high C/N0 where pure power-ratio inversion
/// degenerates. The per-group narrowband/wideband ratio is retained as a
/// carrier-coherence figure: frequency misalignment rotates the coherent
/// sum and pulls it toward zero, which the lock logic uses to catch false
/// carrier locks that leave raw power intact.
#[derive(Debug, Clone)]
pub struct Cn0Estimator {
    period_s: f64,
    acc_i: f64,
    acc_q: f64,
    acc_p: f64,
    acc_p2: f64,
    in_group: usize,
    last_power: f64,
    groups: VecDeque<GroupStat>,
}

impl Cn0Estimator {
    pub const GROUP_LEN: usize = 10;
    pub const WINDOW_GROUPS: usize = 5;
    /// Saturation ceiling of the estimate (dB-Hz).
    pub const CEILING_DBHZ: f64 = 55.0;
    /// Floor of the estimate (dB-Hz).
    pub const FLOOR_DBHZ: f64 = 10.0;
    /// Noise power of one prompt sample (unit variance per component).
    const NOISE_POWER: f64 = 2.0;

    pub fn new(period_s: f64) -> Self {
        Self {
            period_s,
            acc_i: 0.0,
            acc_q: 0.0,
            acc_p: 0.0,
            acc_p2: 0.0,
            in_group: 0,
            last_power: 0.0,
            groups: VecDeque::with_capacity(Self::WINDOW_GROUPS),
        }
    }

    pub fn reset(&mut self) {
        self.acc_i = 0.0;
        self.acc_q = 0.0;
        self.acc_p = 0.0;
        self.acc_p2 = 0.0;
        self.in_group = 0;
        self.last_power = 0.0;
        self.groups.clear();
    }

    /// Feeds one prompt sample.
    pub fn push_prompt(&mut self, ip: f64, qp: f64) {
        let p = ip * ip + qp * qp;
        self.last_power = p;
        self.acc_i += ip;
        self.acc_q += qp;
        self.acc_p += p;
        self.acc_p2 += p * p;
        self.in_group += 1;
        if self.in_group == Self::GROUP_LEN {
            let n = Self::GROUP_LEN as f64;
            let narrow = self.acc_i * self.acc_i + self.acc_q * self.acc_q;
            let mean_power = self.acc_p / n;
            let coherence = if self.acc_p > 0.0 {
                (narrow / self.acc_p / n).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let dispersion = (self.acc_p2 / n - mean_power * mean_power).max(0.0);
            if self.groups.len() == Self::WINDOW_GROUPS {
                self.groups.pop_front();
            }
            self.groups.push_back(GroupStat {
                mean_power,
                coherence,
                dispersion,
            });
            self.acc_i = 0.0;
            self.acc_q = 0.0;
            self.acc_p = 0.0;
            self.acc_p2 = 0.0;
            self.in_group = 0;
        }
    }

    fn ready(&self) -> bool {
        self.groups.len() >= 2
    }

    fn power_to_dbhz(&self, mean_power: f64, dispersion: f64) -> f64 {
        // dispersion-free prompts mean no measurable noise floor
        if dispersion < 1e-9 * mean_power * mean_power {
            return Self::CEILING_DBHZ;
        }
        let signal_power = (mean_power - Self::NOISE_POWER).max(0.0);
        let cn0 = 10.0 * (signal_power / (2.0 * self.period_s)).max(1e-12).log10();
        cn0.clamp(Self::FLOOR_DBHZ, Self::CEILING_DBHZ)
    }

    /// Current estimate (dB-Hz), or `None` until at least two groups (20
    /// prompt samples) are available.
    pub fn estimate_dbhz(&self) -> Option<f64> {
        if !self.ready() {
            return None;
        }
        let n = self.groups.len() as f64;
        let mean_power = self.groups.iter().map(|g| g.mean_power).sum::<f64>() / n;
        let dispersion = self.groups.iter().map(|g| g.dispersion).sum::<f64>() / n;
        Some(self.power_to_dbhz(mean_power, dispersion))
    }

    /// De-weighting estimate used to size measurement covariances: the
    /// smallest of the window-mean estimate, the newest-group estimate, the
    /// accumulating partial group and even a single sample when they
    /// collapse to well below the window power. Sudden drops then reflect
    /// within an epoch or two while recoveries ride the window. The smooth
    /// window estimate drives lock logic.
    pub fn deweight_estimate_dbhz(&self) -> Option<f64> {
        let window = self.estimate_dbhz()?;
        let mut est = window;
        if let Some(g) = self.groups.back() {
            est = est.min(self.power_to_dbhz(g.mean_power, g.dispersion));
        }
        let n = self.groups.len() as f64;
        let window_power = self.groups.iter().map(|g| g.mean_power).sum::<f64>() / n;
        if self.in_group >= 1 {
            let partial = self.acc_p / self.in_group as f64;
            if partial < 0.2 * window_power {
                let disp = (self.acc_p2 / self.in_group as f64 - partial * partial).max(0.0);
                est = est.min(self.power_to_dbhz(partial, disp));
            }
        }
        // a single sample far below the window power is already decisive
        // for large drops
        if self.last_power < 0.2 * window_power {
            let disp = self.last_power * self.last_power + 1.0;
            est = est.min(self.power_to_dbhz(self.last_power, disp));
        }
        Some(est)
    }

    /// Window-mean carrier coherence in [0, 1], or `None` until ready.
    /// Near 1 under clean tracking; collapses under carrier frequency
    /// misalignment of the order of the group rate and beyond.
    pub fn coherence(&self) -> Option<f64> {
        if !self.ready() {
            return None;
        }
        let n = self.groups.len() as f64;
        Some(self.groups.iter().map(|g| g.coherence).sum::<f64>() / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LockStatus {
    /// Not enough history to declare lock (cold start verification).
    Unknown,
    Locked,
    Lost,
}

/// Lock detector thresholds.
#[derive(Debug, Clone, Copy)]
pub struct LockConfig {
    /// Declare loss when the estimated C/N0 stays below this level...
    pub lost_cn0_dbhz: f64,
    /// ...for this long, continuously.
    pub lost_duration_s: f64,
    /// Or when the Costas discriminator sample std over the window exceeds
    /// this.
    pub costas_std_rad: f64,
    /// Or when the carrier coherence stays below this...
    pub coherence_floor: f64,
    /// ...for this long, continuously.
    pub coherence_duration_s: f64,
    /// Evaluation window length.
    pub window_s: f64,
    /// Re-lock hysteresis added to `lost_cn0_dbhz`.
    pub relock_hysteresis_db: f64,
}

impl Default for LockConfig {
    fn default() -> Self {
        Self {
            lost_cn0_dbhz: 25.0,
            lost_duration_s: 0.5,
            costas_std_rad: 0.6,
            coherence_floor: 0.25,
            coherence_duration_s: 0.3,
            window_s: 1.0,
            relock_hysteresis_db: 2.0,
        }
    }
}

impl LockConfig {
    /// C/N0 required before a lost channel may start reacquisition.
    pub fn relock_cn0_dbhz(&self) -> f64 {
        self.lost_cn0_dbhz + self.relock_hysteresis_db
    }
}

/// Per-channel lock state machine fed once per tracking epoch.
#[derive(Debug, Clone)]
pub struct LockDetector {
    cfg: LockConfig,
    window_epochs: usize,
    lost_epochs: usize,
    incoherent_epochs: usize,
    costas: VecDeque<f64>,
    below_count: usize,
    incoherent_count: usize,
    history: usize,
    /// Epochs of evidence still ignored while the loops pull in after a
    /// hot start.
    blanking: usize,
    status: LockStatus,
}

impl LockDetector {
    pub fn new(cfg: LockConfig, period_s: f64) -> Self {
        let window_epochs = (cfg.window_s / period_s).round() as usize;
        let lost_epochs = (cfg.lost_duration_s / period_s).round() as usize;
        let incoherent_epochs = (cfg.coherence_duration_s / period_s).round() as usize;
        Self {
            cfg,
            window_epochs,
            lost_epochs,
            incoherent_epochs,
            costas: VecDeque::with_capacity(window_epochs),
            below_count: 0,
            incoherent_count: 0,
            history: 0,
            blanking: 0,
            status: LockStatus::Unknown,
        }
    }

    pub fn config(&self) -> &LockConfig {
        &self.cfg
    }

    pub fn status(&self) -> LockStatus {
        self.status
    }

    /// Hot-start assertion after reacquisition: lock is assumed, the
    /// evidence windows restart empty, and evidence is blanked while the
    /// loops pull the handoff errors in.
    pub fn assert_locked(&mut self) {
        self.status = LockStatus::Locked;
        self.costas.clear();
        self.below_count = 0;
        self.incoherent_count = 0;
        self.history = 0;
        self.blanking = self.window_epochs;
    }

    /// Full reset to the cold-start state.
    pub fn reset(&mut self) {
        self.assert_locked();
        self.blanking = 0;
        self.status = LockStatus::Unknown;
    }

    fn costas_std(&self) -> Option<f64> {
        if self.costas.len() < self.window_epochs {
            return None;
        }
        let n = self.costas.len() as f64;
        let mean = self.costas.iter().sum::<f64>() / n;
        let var = self.costas.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        Some(var.sqrt())
    }

    /// Feeds one epoch of evidence and returns the updated status.
    pub fn update(
        &mut self,
        cn0_est_dbhz: Option<f64>,
        coherence: Option<f64>,
        costas_rad: Option<f64>,
    ) -> LockStatus {
        if self.blanking > 0 {
            self.blanking -= 1;
            return self.status;
        }
        self.history += 1;
        if let Some(c) = costas_rad {
            if self.costas.len() == self.window_epochs {
                self.costas.pop_front();
            }
            self.costas.push_back(c);
        }
        match cn0_est_dbhz {
            Some(est) if est < self.cfg.lost_cn0_dbhz => self.below_count += 1,
            Some(_) => self.below_count = 0,
            None => {}
        }
        match coherence {
            Some(c) if c < self.cfg.coherence_floor => self.incoherent_count += 1,
            Some(_) => self.incoherent_count = 0,
            None => {}
        }

        let cn0_bad = self.below_count >= self.lost_epochs;
        let incoherent = self.incoherent_count >= self.incoherent_epochs;
        let costas_bad = self
            .costas_std()
            .map(|s| s > self.cfg.costas_std_rad)
            .unwrap_or(false);

        self.status = match self.status {
            LockStatus::Locked | LockStatus::Unknown
                if (cn0_bad || costas_bad || incoherent) && self.history >= self.window_epochs =>
            {
                LockStatus::Lost
            }
            LockStatus::Unknown => {
                if self.history >= self.window_epochs
                    && self.below_count == 0
                    && self.incoherent_count == 0
                    && !costas_bad
                    && self.costas.len() >= self.window_epochs
                {
                    LockStatus::Locked
                } else {
                    LockStatus::Unknown
                }
            }
            other => other,
        };
        self.status
    }
}

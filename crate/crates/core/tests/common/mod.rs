#![allow(dead_code)] // each test target compiles its own copy

//! Shared oracle machinery for integration and acceptance tests.
//!
//! Every oracle here is independent of the implementation path it checks:
//! finite differences against the measurement prediction, quadrature
//! against the closed-form process noise, and Monte-Carlo statistics of the
//! correlator/discriminator chain against the variance models.

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::StandardNormal;

use vtsim_core::channel::{ChannelMeta, IntervalTruth, ReplicaState};
use vtsim_core::constants::{F_CARRIER, F_CODE};
use vtsim_core::constellation::{Constellation, SatelliteEpochState};
use vtsim_core::correlator::CorrelationModel;
use vtsim_core::ekf::{
    self, MeasurementModel, ProcessNoiseConfig, StateVector, STATE_DIM,
};
use vtsim_core::geometry::EcefState;
use vtsim_core::rng::{stream, Stream, StreamKind};
use vtsim_core::scenario::RunOutput;
use vtsim_core::tracking::{
    ddcp_fll_discriminator, emlp_discriminator, open_loop_code_variance, open_loop_freq_variance,
};

/// Random user/satellite geometry generator for the Jacobian oracle: user
/// anywhere on Earth, 4-13 satellites in MEO shells, user and satellites
/// moving.
pub fn random_geometry(rng: &mut Stream) -> (StateVector, Vec<SatelliteEpochState>) {
    let lat = (rng.random::<f64>() - 0.5) * std::f64::consts::PI * 0.98;
    let lon = (rng.random::<f64>() - 0.5) * 2.0 * std::f64::consts::PI;
    let user_pos = vtsim_core::geometry::geodetic_to_ecef(&vtsim_core::geometry::GeodeticPosition {
        latitude_rad: lat,
        longitude_rad: lon,
        height_m: rng.random::<f64>() * 2000.0,
    });
    let user_vel = Vector3::new(
        (rng.random::<f64>() - 0.5) * 60.0,
        (rng.random::<f64>() - 0.5) * 60.0,
        (rng.random::<f64>() - 0.5) * 10.0,
    );
    let state = ekf::state_from_parts(
        &user_pos,
        &user_vel,
        (rng.random::<f64>() - 0.5) * 1000.0,
        (rng.random::<f64>() - 0.5) * 1000.0,
        (rng.random::<f64>() - 0.5) * 10.0,
    );

    let n_sats = 4 + (rng.random::<u32>() % 10) as usize;
    let sats = (0..n_sats)
        .map(|j| {
            // a satellite somewhere above the user within a MEO shell
            let up = user_pos / user_pos.norm();
            let tangent = {
                let t = up.cross(&Vector3::new(0.0, 0.0, 1.0));
                if t.norm() < 1e-6 {
                    Vector3::new(1.0, 0.0, 0.0)
                } else {
                    t / t.norm()
                }
            };
            let bitangent = up.cross(&tangent);
            let az = rng.random::<f64>() * 2.0 * std::f64::consts::PI;
            let el = 0.15 + rng.random::<f64>() * 1.3;
            let dir = up * el.sin() + (tangent * az.cos() + bitangent * az.sin()) * el.cos();
            let range = 1.9e7 + rng.random::<f64>() * 6e6;
            let vel = Vector3::new(
                (rng.random::<f64>() - 0.5) * 7000.0,
                (rng.random::<f64>() - 0.5) * 7000.0,
                (rng.random::<f64>() - 0.5) * 7000.0,
            );
            SatelliteEpochState {
                prn: j as u16 + 1,
                constellation: if j % 2 == 0 {
                    Constellation::Gps
                } else {
                    Constellation::Gal
                },
                ecef: EcefState::new(user_pos + dir * range, vel),
                clock_bias_m: 0.0,
                clock_drift_mps: 0.0,
            }
        })
        .collect();
    (state, sats)
}

/// Max |analytic - finite difference| over the observation matrix, scaled
/// by the matrix max (LOS entries are order one).
pub fn jacobian_fd_error(state: &StateVector, sats: &[SatelliteEpochState]) -> f64 {
    let model = MeasurementModel::build(state, sats).unwrap();
    let h = model.observation_matrix(state);
    let mut worst: f64 = 0.0;
    for col in 0..STATE_DIM {
        // meters for position/clock states, m/s for rates
        let h_step = if col % 2 == 0 && col < 6 { 1e-2 } else { 1e-3 };
        let h_step = if col >= 6 { 1e-2 } else { h_step };
        let mut plus = *state;
        let mut minus = *state;
        plus[col] += h_step;
        minus[col] -= h_step;
        let zp = MeasurementModel::build(&plus, sats).unwrap().predicted_vector();
        let zm = MeasurementModel::build(&minus, sats)
            .unwrap()
            .predicted_vector();
        for row in 0..zp.len() {
            let fd = (zp[row] - zm[row]) / (2.0 * h_step);
            worst = worst.max((h[(row, col)] - fd).abs());
        }
    }
    worst
}

/// Trapezoid-rule integration of the process-noise integrand with step
/// `h_s`, matching the closed form's shared-drift clock model.
pub fn q_numerical(dt: f64, cfg: &ProcessNoiseConfig, h_s: f64) -> nalgebra::SMatrix<f64, 9, 9> {
    let n = (dt / h_s).round() as usize;
    let mut q = nalgebra::SMatrix::<f64, 9, 9>::zeros();
    let integrand = |tau: f64| -> nalgebra::SMatrix<f64, 9, 9> {
        let mut m = nalgebra::SMatrix::<f64, 9, 9>::zeros();
        for axis in 0..3 {
            let s = cfg.vel_psd[axis];
            let i = 2 * axis;
            m[(i, i)] = s * tau * tau;
            m[(i, i + 1)] = s * tau;
            m[(i + 1, i)] = s * tau;
            m[(i + 1, i + 1)] = s;
        }
        let (b, d) = (cfg.clock_bias_psd, cfg.clock_drift_psd);
        m[(6, 6)] = b + d * tau * tau;
        m[(7, 7)] = b + d * tau * tau;
        m[(6, 7)] = d * tau * tau;
        m[(7, 6)] = d * tau * tau;
        m[(6, 8)] = d * tau;
        m[(8, 6)] = d * tau;
        m[(7, 8)] = d * tau;
        m[(8, 7)] = d * tau;
        m[(8, 8)] = d;
        m
    };
    for k in 0..n {
        let t0 = k as f64 * h_s;
        let t1 = (k + 1) as f64 * h_s;
        q += (integrand(t0) + integrand(t1)) * (h_s / 2.0);
    }
    q
}

/// Monte-Carlo variance of the code discriminator through the full
/// correlator chain (channel interval machinery included), in chips^2.
pub fn emlp_mc_variance(model: CorrelationModel, cn0_dbhz: f64, draws: usize, seed: u64) -> f64 {
    let constellation = match model.kind {
        vtsim_core::correlator::ModulationKind::Bpsk1 => Constellation::Gps,
        vtsim_core::correlator::ModulationKind::Boc11 => Constellation::Gal,
    };
    let meta = ChannelMeta::new(1, constellation);
    let mut rng = stream(seed, StreamKind::ChannelNoise(1));
    let truth = IntervalTruth {
        rho_start_m: 2.0e7,
        rho_end_m: 2.0e7,
        cn0_dbhz,
    };
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut n = 0usize;
    for _ in 0..draws {
        let mut replica = ReplicaState::new(2.0e7, 0.0);
        let out =
            vtsim_core::channel::simulate_interval(&meta, &mut replica, &truth, 0.02, Some(&mut rng));
        if let Some(d) = emlp_discriminator(&out.full, &meta.model) {
            sum += d;
            sum2 += d * d;
            n += 1;
        }
    }
    sum2 / n as f64 - (sum / n as f64).powi(2)
}

/// Thermal-noise code variance model in chips^2.
pub fn emlp_model_variance(model: CorrelationModel, cn0_dbhz: f64) -> f64 {
    let (m2, _) = open_loop_code_variance(
        cn0_dbhz,
        0.02,
        model.chip_spacing,
        model.sharpness,
        F_CODE,
    );
    m2 / (vtsim_core::constants::METERS_PER_CHIP * vtsim_core::constants::METERS_PER_CHIP)
}

/// Monte-Carlo variance of the frequency discriminator through the
/// correlator chain, in Hz^2.
pub fn ddcp_mc_variance(cn0_dbhz: f64, draws: usize, seed: u64) -> f64 {
    let meta = ChannelMeta::new(1, Constellation::Gps);
    let mut rng = stream(seed, StreamKind::ChannelNoise(2));
    let truth = IntervalTruth {
        rho_start_m: 2.0e7,
        rho_end_m: 2.0e7,
        cn0_dbhz,
    };
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    let mut n = 0usize;
    for _ in 0..draws {
        let mut replica = ReplicaState::new(2.0e7, 0.0);
        let out =
            vtsim_core::channel::simulate_interval(&meta, &mut replica, &truth, 0.02, Some(&mut rng));
        if let Some(f) = ddcp_fll_discriminator(
            (out.halves[0].ip, out.halves[0].qp),
            (out.halves[1].ip, out.halves[1].qp),
            0.01,
        ) {
            sum += f;
            sum2 += f * f;
            n += 1;
        }
    }
    sum2 / n as f64 - (sum / n as f64).powi(2)
}

/// Calibrated frequency variance model in Hz^2.
pub fn ddcp_model_variance(cn0_dbhz: f64) -> f64 {
    let (v, _) = open_loop_freq_variance(cn0_dbhz, 0.02, F_CARRIER);
    v / (vtsim_core::constants::METERS_PER_SEC_PER_HZ * vtsim_core::constants::METERS_PER_SEC_PER_HZ)
}

/// Simulates the two-state oscillator and fits Allan parameters back from
/// the overlapping Allan variance at two cluster times.
pub fn clock_allan_fit(h0: f64, h_minus2: f64, seed: u64) -> (f64, f64) {
    let dt = 0.02;
    let n = 150_000usize;
    let (sb, sd) = ekf::clock_psd_from_allan(h0, h_minus2);
    // exact discrete sampling of the two-state model, in seconds
    let c = vtsim_core::constants::SPEED_OF_LIGHT;
    let q11 = (sb * dt + sd * dt.powi(3) / 3.0) / (c * c);
    let q12 = (sd * dt * dt / 2.0) / (c * c);
    let q22 = (sd * dt) / (c * c);
    let l11 = q11.sqrt();
    let l21 = q12 / l11;
    let l22 = (q22 - l21 * l21).max(0.0).sqrt();
    let mut rng = stream(seed, StreamKind::TruthClock);
    let mut x = vec![0.0f64; n];
    let (mut b, mut d) = (0.0f64, 0.0f64);
    for xi in x.iter_mut() {
        *xi = b;
        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        b += d * dt + l11 * n1;
        d += l21 * n1 + l22 * n2;
    }
    // overlapping Allan variance at cluster time m*dt
    let avar = |m: usize| -> f64 {
        let mut acc = 0.0;
        let mut cnt = 0usize;
        for i in 0..n - 2 * m {
            let y = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
            acc += y * y;
            cnt += 1;
        }
        let tau = m as f64 * dt;
        acc / (2.0 * tau * tau * cnt as f64)
    };
    // h0 dominates at tau = dt; h-2 at long tau
    let tau_short = dt;
    let tau_long = 10.0;
    let a_short = avar(1);
    let a_long = avar((tau_long / dt) as usize);
    let pi2_3 = 2.0 * std::f64::consts::PI * std::f64::consts::PI / 3.0;
    // solve the 2x2 system a(tau) = h0/(2 tau) + pi2_3 h2 tau
    let m = nalgebra::Matrix2::new(
        1.0 / (2.0 * tau_short),
        pi2_3 * tau_short,
        1.0 / (2.0 * tau_long),
        pi2_3 * tau_long,
    );
    let rhs = nalgebra::Vector2::new(a_short, a_long);
    let sol = m.lu().solve(&rhs).unwrap();
    (sol[0], sol[1])
}

// ---------------------------------------------------------------------------
// run reductions
// ---------------------------------------------------------------------------

/// 3D position error series of a run.
pub fn pos_error_3d(run: &RunOutput) -> Vec<(f64, f64)> {
    run.records
        .iter()
        .zip(&run.truth)
        .filter(|(r, _)| r.epoch > 0)
        .map(|(r, tru)| {
            let dx = r.state[ekf::idx::X] - tru.position.x;
            let dy = r.state[ekf::idx::Y] - tru.position.y;
            let dz = r.state[ekf::idx::Z] - tru.position.z;
            (r.t_s, (dx * dx + dy * dy + dz * dz).sqrt())
        })
        .collect()
}

/// Max of a time series over a window.
pub fn max_in_window(series: &[(f64, f64)], a: f64, b: f64) -> f64 {
    series
        .iter()
        .filter(|(t, _)| *t >= a && *t < b)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max)
}

/// Per-channel code error (m) series while the channel reports lock.
pub fn code_error_series(run: &RunOutput, prn: u16) -> Vec<(f64, f64)> {
    run.records
        .iter()
        .filter_map(|r| {
            r.channels
                .iter()
                .find(|c| c.prn == prn && c.locked)
                .map(|c| (r.t_s, c.code_error_m))
        })
        .collect()
}

/// Std of the values of a series inside a window.
pub fn std_in_window(series: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let vals: Vec<f64> = series
        .iter()
        .filter(|(t, _)| *t >= a && *t < b)
        .map(|(_, v)| *v)
        .collect();
    let n = vals.len() as f64;
    if vals.is_empty() {
        return 0.0;
    }
    let mean = vals.iter().sum::<f64>() / n;
    (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

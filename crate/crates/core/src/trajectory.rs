//! User trajectories: static, synthetic car path, or external CSV, all
//! materialized as a 50 Hz ECEF position/velocity stream.
//!
//! The car generator lays out straight legs between ENU waypoints with
//! fillet arcs at the corners and an acceleration-limited speed profile,
//! samples a 1 Hz reference, then interpolates to 50 Hz with cubic Hermite
//! segments whose analytic derivative is stored as the truth velocity (the
//! same scheme one would apply to a recorded 1 Hz reference trajectory).

use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{enu_to_ecef, enu_vector_to_ecef, EcefState, GeodeticPosition};

/// One epoch of the truth trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t_s: f64,
    pub ecef: EcefState,
}

/// Maximum speed accepted for the car generator (m/s).
pub const MAX_CAR_SPEED_MPS: f64 = 30.0;

/// Longitudinal acceleration limit of the speed profile (m/s^2).
const ACCEL_LIMIT_MPS2: f64 = 2.5;

/// Lateral acceleration limit used for corner speeds (m/s^2).
const LATERAL_LIMIT_MPS2: f64 = 2.56;

/// Corner fillet radius (m).
const TURN_RADIUS_M: f64 = 25.0;

/// Arclength discretization of the speed profile (m).
const PROFILE_STEP_M: f64 = 0.5;

/// A static user at a geodetic position.
pub fn static_trajectory(
    position: &GeodeticPosition,
    duration_s: f64,
    rate_hz: f64,
) -> Vec<TrajectorySample> {
    let ecef = crate::geometry::geodetic_to_ecef(position);
    let n = (duration_s * rate_hz).round() as usize;
    (0..=n)
        .map(|k| TrajectorySample {
            t_s: k as f64 / rate_hz,
            ecef: EcefState::stationary(ecef),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// car path geometry
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Segment {
    Straight {
        start: Vector3<f64>,
        dir: Vector3<f64>,
        len: f64,
    },
    Arc {
        center: Vector3<f64>,
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    fn len(&self) -> f64 {
        match self {
            Segment::Straight { len, .. } => *len,
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point and unit tangent at arclength `s` into the segment.
    fn eval(&self, s: f64) -> (Vector3<f64>, Vector3<f64>) {
        match self {
            Segment::Straight { start, dir, .. } => (start + dir * s, *dir),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let ang = start_angle + sweep.signum() * s / radius;
                let point = center + Vector3::new(ang.cos(), ang.sin(), 0.0) * *radius;
                let tangent =
                    Vector3::new(-ang.sin(), ang.cos(), 0.0) * sweep.signum();
                (point, tangent)
            }
        }
    }

    fn is_arc(&self) -> bool {
        matches!(self, Segment::Arc { .. })
    }
}

/// Builds the fillet path through the waypoints: straight legs joined by
/// circular arcs of `TURN_RADIUS_M` at each interior waypoint.
fn build_path(waypoints: &[Vector3<f64>]) -> Result<Vec<Segment>> {
    for pair in waypoints.windows(2) {
        if (pair[1] - pair[0]).norm() < 1e-6 {
            return Err(Error::config("duplicate consecutive waypoints"));
        }
    }
    let mut segments = Vec::new();
    let mut cursor = waypoints[0];
    for j in 1..waypoints.len() {
        let is_last = j == waypoints.len() - 1;
        let leg_dir = (waypoints[j] - cursor).normalize();
        if is_last {
            let len = (waypoints[j] - cursor).norm();
            segments.push(Segment::Straight {
                start: cursor,
                dir: leg_dir,
                len,
            });
            break;
        }
        let out_dir = (waypoints[j + 1] - waypoints[j]).normalize();
        let turn_angle = leg_dir.dot(&out_dir).clamp(-1.0, 1.0).acos();
        if turn_angle < 1e-6 {
            // collinear: extend the straight
            let len = (waypoints[j] - cursor).norm();
            segments.push(Segment::Straight {
                start: cursor,
                dir: leg_dir,
                len,
            });
            cursor = waypoints[j];
            continue;
        }
        let tangent_len = TURN_RADIUS_M * (turn_angle / 2.0).tan();
        let leg_len = (waypoints[j] - cursor).norm() - tangent_len;
        if leg_len < 0.0 {
            return Err(Error::config(format!(
                "waypoint {j}: legs too short for a {TURN_RADIUS_M} m fillet"
            )));
        }
        segments.push(Segment::Straight {
            start: cursor,
            dir: leg_dir,
            len: leg_len,
        });
        // arc joining leg_dir to out_dir
        let corner_entry = cursor + leg_dir * leg_len;
        let turn_sign = (leg_dir.x * out_dir.y - leg_dir.y * out_dir.x).signum();
        let normal = Vector3::new(-leg_dir.y, leg_dir.x, 0.0) * turn_sign;
        let center = corner_entry + normal * TURN_RADIUS_M;
        let start_angle = {
            let v = corner_entry - center;
            v.y.atan2(v.x)
        };
        segments.push(Segment::Arc {
            center,
            radius: TURN_RADIUS_M,
            start_angle,
            sweep: turn_sign * turn_angle,
        });
        cursor = waypoints[j] + out_dir * tangent_len;
    }
    Ok(segments)
}

/// Acceleration-limited speed-vs-arclength profile: leg target speeds,
/// corner speeds inside arcs, forward/backward passes for the ramps,
/// braking to rest at the path end.
fn speed_profile(segments: &[Segment], leg_speeds: &[f64]) -> (Vec<f64>, f64) {
    let total_len: f64 = segments.iter().map(|s| s.len()).sum();
    let n = (total_len / PROFILE_STEP_M).ceil() as usize + 1;
    let ds = total_len / (n - 1) as f64;
    let corner_speed = (LATERAL_LIMIT_MPS2 * TURN_RADIUS_M).sqrt();

    let mut limit = vec![0.0f64; n];
    for (i, lim) in limit.iter_mut().enumerate() {
        let s = i as f64 * ds;
        // locate segment and the index of the leg it belongs to
        let mut acc = 0.0;
        let mut seg = None;
        let mut count_straights = 0usize;
        for sg in segments {
            if s <= acc + sg.len() + 1e-9 {
                seg = Some(sg);
                break;
            }
            acc += sg.len();
            if !sg.is_arc() {
                count_straights += 1;
            }
        }
        let leg_speed = leg_speeds[count_straights.min(leg_speeds.len() - 1)];
        *lim = match seg {
            Some(sg) if sg.is_arc() => corner_speed.min(leg_speed),
            _ => leg_speed,
        };
    }
    // stop at the end of the path
    let last = limit.len() - 1;
    limit[last] = 0.0;
    // forward pass (acceleration limit)
    for i in 1..n {
        let vmax = (limit[i - 1] * limit[i - 1] + 2.0 * ACCEL_LIMIT_MPS2 * ds).sqrt();
        limit[i] = limit[i].min(vmax);
    }
    // backward pass (braking limit)
    for i in (0..n - 1).rev() {
        let vmax = (limit[i + 1] * limit[i + 1] + 2.0 * ACCEL_LIMIT_MPS2 * ds).sqrt();
        limit[i] = limit[i].min(vmax);
    }
    (limit, ds)
}

fn eval_path(segments: &[Segment], s: f64) -> (Vector3<f64>, Vector3<f64>) {
    let mut acc = 0.0;
    for sg in segments {
        if s <= acc + sg.len() {
            return sg.eval(s - acc);
        }
        acc += sg.len();
    }
    let last = segments.last().unwrap();
    last.eval(last.len())
}

/// Generates the car trajectory: 1 Hz ENU reference knots from the filleted
/// waypoint path, cubic-Hermite interpolation to `rate_hz` with analytic
/// velocity. After the path ends the car rests at its final point.
pub fn car_trajectory(
    reference: &GeodeticPosition,
    waypoints_enu: &[(f64, f64)],
    leg_speeds_mps: &[f64],
    duration_s: f64,
    rate_hz: f64,
) -> Result<Vec<TrajectorySample>> {
    if waypoints_enu.len() < 2 {
        return Err(Error::config("car trajectory needs at least two waypoints"));
    }
    if leg_speeds_mps.is_empty() {
        return Err(Error::config("car trajectory needs at least one leg speed"));
    }
    if leg_speeds_mps
        .iter()
        .any(|v| *v <= 0.0 || *v > MAX_CAR_SPEED_MPS)
    {
        return Err(Error::config(format!(
            "car speeds must lie in (0, {MAX_CAR_SPEED_MPS}] m/s"
        )));
    }
    let wp: Vec<Vector3<f64>> = waypoints_enu
        .iter()
        .map(|&(e, n)| Vector3::new(e, n, 0.0))
        .collect();
    let segments = build_path(&wp)?;
    let (profile, ds) = speed_profile(&segments, leg_speeds_mps);
    let total_len = ds * (profile.len() - 1) as f64;

    // integrate arclength versus time and collect 1 Hz knots
    let mut knots_pos = Vec::new();
    let mut knots_vel = Vec::new();
    let mut s = 0.0f64;
    let sim_dt = 1e-3;
    let mut next_knot_t = 0.0f64;
    let mut t = 0.0f64;
    let speed_at = |s: f64| -> f64 {
        let i = ((s / ds) as usize).min(profile.len() - 1);
        let frac = (s / ds - i as f64).clamp(0.0, 1.0);
        if i + 1 < profile.len() {
            profile[i] * (1.0 - frac) + profile[i + 1] * frac
        } else {
            profile[i]
        }
    };
    while t <= duration_s + 0.5 {
        if t >= next_knot_t - sim_dt / 2.0 {
            let (p, tan) = eval_path(&segments, s.min(total_len));
            let v = if s >= total_len { 0.0 } else { speed_at(s) };
            knots_pos.push(p);
            knots_vel.push(tan * v);
            next_knot_t += 1.0;
        }
        let v = speed_at(s);
        s = (s + v * sim_dt).min(total_len);
        t += sim_dt;
    }

    // cubic Hermite resampling to rate_hz, analytic derivative as velocity
    let n = (duration_s * rate_hz).round() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let tk = k as f64 / rate_hz;
        let seg = (tk.floor() as usize).min(knots_pos.len() - 2);
        let tau = tk - seg as f64;
        let (p0, p1) = (knots_pos[seg], knots_pos[seg + 1]);
        let (v0, v1) = (knots_vel[seg], knots_vel[seg + 1]);
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + tau;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let pos = p0 * h00 + v0 * h10 + p1 * h01 + v1 * h11;
        let d00 = 6.0 * t2 - 6.0 * tau;
        let d10 = 3.0 * t2 - 4.0 * tau + 1.0;
        let d01 = -6.0 * t2 + 6.0 * tau;
        let d11 = 3.0 * t2 - 2.0 * tau;
        let vel = p0 * d00 + v0 * d10 + p1 * d01 + v1 * d11;
        samples.push(TrajectorySample {
            t_s: tk,
            ecef: EcefState::new(
                enu_to_ecef(reference, &pos),
                enu_vector_to_ecef(reference, &vel),
            ),
        });
    }
    Ok(samples)
}

/// Default car scenario waypoints (ENU meters at the reference site): three
/// 90 degree turns at roughly 30, 100 and 185 s at the default speed, the
/// last one shortly before the end of the 200 s run.
pub fn default_car_waypoints() -> Vec<(f64, f64)> {
    vec![
        (0.0, 0.0),
        (420.0, 0.0),
        (420.0, 980.0),
        (1610.0, 980.0),
        (1610.0, 1195.0),
    ]
}

/// Default leg speed for the car scenario (m/s).
pub const DEFAULT_CAR_SPEED_MPS: f64 = 14.0;

/// Loads a trajectory from CSV rows `t_s,x,y,z[,vx,vy,vz]` (ECEF meters and
/// m/s, strictly increasing `t_s`, `#` comments allowed) and resamples it
/// to `rate_hz` with the same Hermite scheme. Missing velocities are
/// estimated from central differences of the knots.
pub fn csv_trajectory(
    path: &Path,
    duration_s: f64,
    rate_hz: f64,
) -> Result<Vec<TrajectorySample>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut knots_t = Vec::new();
    let mut knots_pos: Vec<Vector3<f64>> = Vec::new();
    let mut knots_vel: Vec<Option<Vector3<f64>>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            msg,
        };
        if fields.len() != 4 && fields.len() != 7 {
            return Err(parse(format!(
                "expected 4 or 7 comma-separated fields, found {}",
                fields.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|e| parse(format!("bad number in field {}: {e}", i + 1)))
        };
        let t = num(0)?;
        if let Some(last) = knots_t.last() {
            if t <= *last {
                return Err(parse(format!("time {t} not strictly increasing")));
            }
        }
        knots_t.push(t);
        knots_pos.push(Vector3::new(num(1)?, num(2)?, num(3)?));
        knots_vel.push(if fields.len() == 7 {
            Some(Vector3::new(num(4)?, num(5)?, num(6)?))
        } else {
            None
        });
    }
    if knots_t.len() < 2 {
        return Err(Error::config(format!(
            "trajectory {} needs at least two samples",
            path.display()
        )));
    }

    // fill missing velocities from knot differences
    let m = knots_t.len();
    let vel: Vec<Vector3<f64>> = (0..m)
        .map(|i| {
            knots_vel[i].unwrap_or_else(|| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == m - 1 {
                    (m - 2, m - 1)
                } else {
                    (i - 1, i + 1)
                };
                (knots_pos[b] - knots_pos[a]) / (knots_t[b] - knots_t[a])
            })
        })
        .collect();

    let n = (duration_s * rate_hz).round() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    let t0 = knots_t[0];
    for k in 0..=n {
        let tk = t0 + k as f64 / rate_hz;
        // locate the knot interval (clamped at the ends)
        let seg = match knots_t.iter().position(|&t| t > tk) {
            Some(0) => 0,
            Some(j) => j - 1,
            None => m - 2,
        }
        .min(m - 2);
        let h = knots_t[seg + 1] - knots_t[seg];
        let tau = ((tk - knots_t[seg]) / h).clamp(0.0, 1.0);
        let (p0, p1) = (knots_pos[seg], knots_pos[seg + 1]);
        let (v0, v1) = (vel[seg] * h, vel[seg + 1] * h);
        let t2 = tau * tau;
        let t3 = t2 * tau;
        let pos = p0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + v0 * (t3 - 2.0 * t2 + tau)
            + p1 * (-2.0 * t3 + 3.0 * t2)
            + v1 * (t3 - t2);
        let dvel = (p0 * (6.0 * t2 - 6.0 * tau)
            + v0 * (3.0 * t2 - 4.0 * tau + 1.0)
            + p1 * (-6.0 * t2 + 6.0 * tau)
            + v1 * (3.0 * t2 - 2.0 * tau))
            / h;
        samples.push(TrajectorySample {
            t_s: k as f64 / rate_hz,
            ecef: EcefState::new(pos, dvel),
        });
    }
    Ok(samples)
}

//! CSV and SVG emission for scenario runs.
//!
//! Formats are deliberately plain and stable: `metrics.csv` carries one row
//! per architecture, segment and field; `timeseries_<arch>.csv` carries one
//! row per tracking epoch with truth, estimate, error and per-channel
//! columns; `events_<arch>.csv` lists lock-loss/reacquisition/conditioning
//! events. SVG plots are optional line charts of the same series.

use std::fmt::Write as _;
use std::path::Path;

use crate::ekf::idx;
use crate::error::{Error, Result};
use crate::geometry::ecef_to_enu;
use crate::metrics::{EpochRecord, Event, EventKind, MetricsReport, TruthEpoch};
use crate::scenario::RunOutput;

fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Writes the joint metrics table: `architecture,segment,field,mean,std`.
/// Fields without samples leave mean/std empty.
pub fn write_metrics_csv(path: &Path, reports: &[&MetricsReport]) -> Result<()> {
    let mut out = String::from("architecture,segment,field,mean,std\n");
    for report in reports {
        for (segment, stats) in [("no_outage", &report.no_outage), ("outage", &report.outage)] {
            for (field, ms) in stats.fields() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    report.architecture,
                    segment,
                    field,
                    fmt_opt(ms.map(|m| m.mean)),
                    fmt_opt(ms.map(|m| m.std)),
                );
            }
        }
    }
    write_file(path, &out)
}

/// Writes the per-epoch time series of one run.
pub fn write_timeseries_csv(path: &Path, run: &RunOutput) -> Result<()> {
    // channel column order from the first tracking epoch
    let prns: Vec<u16> = run
        .records
        .get(1)
        .map(|r| r.channels.iter().map(|c| c.prn).collect())
        .unwrap_or_default();

    let mut out = String::from(
        "epoch,t_s,truth_x_m,truth_y_m,truth_z_m,truth_clk_m,est_x_m,est_y_m,est_z_m,\
         est_clk_gps_m,err_x_m,err_y_m,err_z_m,err_vx_mps,err_vy_mps,err_vz_mps,\
         err_e_m,err_n_m,err_u_m,err_clk_m,kf_updated,nis",
    );
    for prn in &prns {
        let _ = write!(
            out,
            ",ch{prn}_code_err_m,ch{prn}_dopp_err_hz,ch{prn}_cn0_dbhz,ch{prn}_locked"
        );
    }
    out.push('\n');

    for (rec, tru) in run.records.iter().zip(&run.truth) {
        let ex = rec.state[idx::X] - tru.position.x;
        let ey = rec.state[idx::Y] - tru.position.y;
        let ez = rec.state[idx::Z] - tru.position.z;
        let evx = rec.state[idx::VX] - tru.velocity.x;
        let evy = rec.state[idx::VY] - tru.velocity.y;
        let evz = rec.state[idx::VZ] - tru.velocity.z;
        let ec = rec.state[idx::CLK_GPS] - tru.clock_bias_m;
        // the same error expressed in the local east-north-up frame
        let est_enu = ecef_to_enu(&run.site, &crate::ekf::position_of(&rec.state));
        let tru_enu = ecef_to_enu(&run.site, &tru.position);
        let (ee, en, eu) = (
            est_enu.x - tru_enu.x,
            est_enu.y - tru_enu.y,
            est_enu.z - tru_enu.z,
        );
        let _ = write!(
            out,
            "{},{:.2},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}",
            rec.epoch,
            rec.t_s,
            tru.position.x,
            tru.position.y,
            tru.position.z,
            tru.clock_bias_m,
            rec.state[idx::X],
            rec.state[idx::Y],
            rec.state[idx::Z],
            rec.state[idx::CLK_GPS],
            ex,
            ey,
            ez,
            evx,
            evy,
            evz,
            ee,
            en,
            eu,
            ec,
            rec.kf_updated as u8,
            fmt_opt(rec.nis.map(|(v, _)| v)),
        );
        for prn in &prns {
            match rec.channels.iter().find(|c| c.prn == *prn) {
                Some(ch) => {
                    let _ = write!(
                        out,
                        ",{:.6},{:.6},{},{}",
                        ch.code_error_m,
                        ch.doppler_error_hz,
                        fmt_opt(ch.cn0_est_dbhz),
                        ch.locked as u8
                    );
                }
                None => out.push_str(",,,,"),
            }
        }
        out.push('\n');
    }
    write_file(path, &out)
}

/// Writes the event log of one run.
pub fn write_events_csv(path: &Path, events: &[Event]) -> Result<()> {
    let mut out = String::from("t_s,prn,event\n");
    for e in events {
        let kind = match e.kind {
            EventKind::LockLost => "lock_lost",
            EventKind::ReacquisitionStart => "reacquisition_start",
            EventKind::ReacquisitionDone => "reacquisition_done",
            EventKind::UpdateSkipped => "update_skipped",
        };
        let _ = writeln!(
            out,
            "{:.2},{},{}",
            e.t_s,
            e.prn.map(|p| p.to_string()).unwrap_or_default(),
            kind
        );
    }
    write_file(path, &out)
}

// ---------------------------------------------------------------------------
// SVG line plots
// ---------------------------------------------------------------------------

const PLOT_W: f64 = 900.0;
const PLOT_H: f64 = 360.0;
const MARGIN: f64 = 55.0;
const COLORS: [&str; 6] = ["#c0392b", "#2471a3", "#1e8449", "#b7950b", "#7d3c98", "#566573"];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

fn render_plot(title: &str, ylabel: &str, series: &[Series]) -> String {
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    if (ymax - ymin).abs() < 1e-12 {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    let sx = (PLOT_W - 2.0 * MARGIN) / (xmax - xmin).max(1e-12);
    let sy = (PLOT_H - 2.0 * MARGIN) / (ymax - ymin);
    let map = |x: f64, y: f64| -> (f64, f64) {
        (
            MARGIN + (x - xmin) * sx,
            PLOT_H - MARGIN - (y - ymin) * sy,
        )
    };

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        PLOT_W / 2.0
    );
    // axes
    let (x0, y0) = map(xmin, ymin);
    let (x1, y1) = map(xmax, ymax);
    let _ = write!(
        svg,
        "<line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x1:.1}\" y2=\"{y0:.1}\" stroke=\"black\"/>\n\
         <line x1=\"{x0:.1}\" y1=\"{y0:.1}\" x2=\"{x0:.1}\" y2=\"{y1:.1}\" stroke=\"black\"/>\n\
         <text x=\"{x0:.1}\" y=\"{:.1}\" font-size=\"11\">{xmin:.0}</text>\n\
         <text x=\"{x1:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{xmax:.0} s</text>\n\
         <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{ymax:.3}</text>\n\
         <text x=\"{:.1}\" y=\"{y0:.1}\" font-size=\"11\" text-anchor=\"end\">{ymin:.3}</text>\n\
         <text x=\"14\" y=\"{:.1}\" font-size=\"12\" transform=\"rotate(-90 14 {:.1})\" \
         text-anchor=\"middle\">{ylabel}</text>\n",
        y0 + 16.0,
        y0 + 16.0,
        x0 - 4.0,
        y1 + 4.0,
        x0 - 4.0,
        PLOT_H / 2.0,
        PLOT_H / 2.0,
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        // decimate long series deterministically
        let stride = (s.points.len() / 2000).max(1);
        let mut d = String::new();
        for &(x, y) in s.points.iter().step_by(stride) {
            let (px, py) = map(x, y);
            let _ = write!(d, "{px:.1},{py:.1} ");
        }
        let _ = write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            d.trim_end(),
            MARGIN + 8.0 + 130.0 * (i as f64),
            34.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the optional plot set of one run: position errors per axis, code
/// and Doppler errors of the schedule-affected channels, and the C/N0
/// schedule as estimated per channel.
pub fn write_svg_plots(dir: &Path, run: &RunOutput, affected_prns: &[u16]) -> Result<()> {
    let arch = run.architecture.name();
    let t = |rec: &EpochRecord| rec.t_s;

    let pos_series: Vec<Series> = [("x", idx::X), ("y", idx::Y), ("z", idx::Z)]
        .iter()
        .map(|&(label, i)| Series {
            label: format!("{label} error"),
            points: run
                .records
                .iter()
                .zip(&run.truth)
                .filter(|(r, _)| r.kf_updated)
                .map(|(r, tru)| {
                    let truth_i = match i {
                        idx::X => tru.position.x,
                        idx::Y => tru.position.y,
                        _ => tru.position.z,
                    };
                    (t(r), r.state[i] - truth_i)
                })
                .collect(),
        })
        .collect();
    write_file(
        &dir.join(format!("position_error_{arch}.svg")),
        &render_plot(
            &format!("{arch}: position error (ECEF)"),
            "error [m]",
            &pos_series,
        ),
    )?;

    let mut code_series = Vec::new();
    let mut dopp_series = Vec::new();
    let mut cn0_series = Vec::new();
    for &prn in affected_prns {
        let pick = |f: fn(&crate::metrics::ChannelEpochRecord) -> Option<f64>| -> Vec<(f64, f64)> {
            run.records
                .iter()
                .filter_map(|r| {
                    r.channels
                        .iter()
                        .find(|c| c.prn == prn)
                        .and_then(|c| f(c).map(|v| (r.t_s, v)))
                })
                .collect()
        };
        code_series.push(Series {
            label: format!("prn {prn}"),
            points: pick(|c| c.locked.then_some(c.code_error_m)),
        });
        dopp_series.push(Series {
            label: format!("prn {prn}"),
            points: pick(|c| c.locked.then_some(c.doppler_error_hz)),
        });
        cn0_series.push(Series {
            label: format!("prn {prn}"),
            points: pick(|c| c.cn0_est_dbhz),
        });
    }
    write_file(
        &dir.join(format!("code_error_{arch}.svg")),
        &render_plot(
            &format!("{arch}: code delay estimation error"),
            "error [m]",
            &code_series,
        ),
    )?;
    write_file(
        &dir.join(format!("doppler_error_{arch}.svg")),
        &render_plot(
            &format!("{arch}: Doppler estimation error"),
            "error [Hz]",
            &dopp_series,
        ),
    )?;
    write_file(
        &dir.join(format!("cn0_{arch}.svg")),
        &render_plot(
            &format!("{arch}: estimated C/N0"),
            "C/N0 [dB-Hz]",
            &cn0_series,
        ),
    )?;
    Ok(())
}

/// Writes the full output set of one run under `dir`.
pub fn write_run_outputs(dir: &Path, run: &RunOutput, plots: bool, affected: &[u16]) -> Result<()> {
    let arch = run.architecture.name();
    write_timeseries_csv(&dir.join(format!("timeseries_{arch}.csv")), run)?;
    write_events_csv(&dir.join(format!("events_{arch}.csv")), &run.events)?;
    if plots {
        write_svg_plots(dir, run, affected)?;
    }
    Ok(())
}

/// Renders a compact comparison table to a string (also printed by the
/// CLI).
pub fn summary_table(reports: &[&MetricsReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<11} {:<10} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "arch", "segment", "x_std", "y_std", "z_std", "clk_std", "code_std", "dopp_std"
    );
    for r in reports {
        for (name, seg) in [("no_outage", &r.no_outage), ("outage", &r.outage)] {
            let f = |m: Option<crate::metrics::MeanStd>| {
                m.map(|v| format!("{:.3}", v.std)).unwrap_or_else(|| "-".into())
            };
            let _ = writeln!(
                out,
                "{:<11} {:<10} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
                r.architecture,
                name,
                f(seg.x_error_m),
                f(seg.y_error_m),
                f(seg.z_error_m),
                f(seg.clock_bias_error_m),
                f(seg.code_error_m),
                f(seg.doppler_error_hz),
            );
        }
    }
    out
}

/// Truth epochs are carried alongside records; expose the pair for
/// downstream consumers that need custom reductions.
pub fn position_errors(records: &[EpochRecord], truth: &[TruthEpoch]) -> Vec<(f64, [f64; 3])> {
    records
        .iter()
        .zip(truth)
        .map(|(r, tru)| {
            (
                r.t_s,
                [
                    r.state[idx::X] - tru.position.x,
                    r.state[idx::Y] - tru.position.y,
                    r.state[idx::Z] - tru.position.z,
                ],
            )
        })
        .collect()
}

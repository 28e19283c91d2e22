//! CSV and SVG renderings of trajectories.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;
use thiserror::Error;

use crate::config::{Layout, PlotSpec};
use crate::covariance::{ConvergenceReport, FrameComparison};
use crate::integrator::{StepRecord, Trajectory};
use crate::wavefield::{ConfigPoint, Particle};

pub const TRAJECTORY_HEADER: &str = "sigma,z1,t1,z2,t2,v1,v2,lambda1,lambda2";
pub const CONVERGENCE_HEADER: &str = "epsilon,max_deviation";
pub const COMPARISON_HEADER: &str = "step,sigma,deviation1,deviation2";

/// Fixed 17-significant-digit scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn comment_block(out: &mut String, comments: &[String]) {
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
}

pub fn trajectory_csv(traj: &Trajectory, comments: &[String]) -> String {
    let mut out = String::new();
    comment_block(&mut out, comments);
    let _ = writeln!(out, "# epsilon = {}", traj.epsilon);
    let _ = writeln!(out, "# scheme = {}", traj.scheme);
    let _ = writeln!(out, "# termination = {}", traj.termination);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for r in &traj.records {
        let row = [r.sigma, r.q.z1, r.q.t1, r.q.z2, r.q.t2, r.v1, r.v2, r.lambda1, r.lambda2];
        let cells: Vec<String> = row.iter().map(|x| fmt_real(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("unexpected header `{0}`")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Parses a trajectory CSV (comment lines ignored) back into records.
pub fn read_trajectory_csv(text: &str) -> Result<Vec<StepRecord>, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != TRAJECTORY_HEADER {
        return Err(CsvError::Header(header));
    }
    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let rec = result?;
        if rec.len() != 9 {
            return Err(CsvError::Row {
                row: row + 1,
                message: format!("expected 9 fields, found {}", rec.len()),
            });
        }
        let mut v = [0.0; 9];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field.trim().parse::<f64>().map_err(|_| CsvError::Row {
                row: row + 1,
                message: format!("`{field}` is not a number"),
            })?;
        }
        records.push(StepRecord {
            sigma: v[0],
            q: ConfigPoint::new(v[1], v[2], v[3], v[4]),
            v1: v[5],
            v2: v[6],
            lambda1: v[7],
            lambda2: v[8],
        });
    }
    Ok(records)
}

pub fn comparison_csv(cmp: &FrameComparison, comments: &[String]) -> String {
    let mut out = String::new();
    comment_block(&mut out, comments);
    let _ = writeln!(out, "# rapidity = {}", cmp.alpha.0);
    let _ = writeln!(out, "# max_deviation = {}", fmt_real(cmp.max_deviation));
    let _ = writeln!(out, "# rest_termination = {}", cmp.rest.termination);
    let _ = writeln!(out, "# boosted_termination = {}", cmp.moved.termination);
    out.push_str(COMPARISON_HEADER);
    out.push('\n');
    for (j, d) in cmp.per_particle_deviation.iter().enumerate() {
        let sigma = cmp.rest.records[j].sigma;
        let _ = writeln!(out, "{j},{},{},{}", fmt_real(sigma), fmt_real(d[0]), fmt_real(d[1]));
    }
    out
}

pub fn convergence_csv(report: &ConvergenceReport, comments: &[String]) -> String {
    let mut out = String::new();
    comment_block(&mut out, comments);
    out.push_str(CONVERGENCE_HEADER);
    out.push('\n');
    for (e, d) in report.epsilons.iter().zip(&report.deviations) {
        let _ = writeln!(out, "{},{}", fmt_real(*e), fmt_real(*d));
    }
    match report.fitted_order {
        Some(p) => {
            let _ = writeln!(out, "# fitted_order = {p:.6}");
        }
        None => out.push_str("# fitted_order = n/a (all deviations below floor)\n"),
    }
    out
}

const COLOURS: [&str; 2] = ["#1f4e9c", "#b8321a"];
const MARGIN: f64 = 56.0;

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    z_range: (f64, f64),
    t_range: (f64, f64),
}

impl Frame {
    fn map(&self, z: f64, t: f64) -> (f64, f64) {
        let fx = (z - self.z_range.0) / (self.z_range.1 - self.z_range.0);
        let fy = (t - self.t_range.0) / (self.t_range.1 - self.t_range.0);
        (self.x0 + fx * self.w, self.y0 + (1.0 - fy) * self.h)
    }
}

fn padded((lo, hi): (f64, f64)) -> (f64, f64) {
    let span = hi - lo;
    let pad = if span > 1e-9 { 0.08 * span } else { 0.5 };
    (lo - pad, hi + pad)
}

fn range<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn draw_axes(svg: &mut String, f: &Frame, title: &str, z_label: &str, t_label: &str) {
    let _ = writeln!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
        f.x0, f.y0, f.w, f.h
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{title}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{z_label}</text>"#,
        f.x0 + f.w / 2.0,
        f.y0 + f.h + 36.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{t_label}</text>"#,
        f.x0 - 40.0,
        f.y0 + f.h / 2.0,
        f.x0 - 40.0,
        f.y0 + f.h / 2.0
    );
    for k in 0..=4 {
        let frac = k as f64 / 4.0;
        let z = f.z_range.0 + frac * (f.z_range.1 - f.z_range.0);
        let t = f.t_range.0 + frac * (f.t_range.1 - f.t_range.0);
        let (x, _) = f.map(z, f.t_range.0);
        let (_, y) = f.map(f.z_range.0, t);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="10">{z:.3}</text>"#,
            f.y0 + f.h + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{t:.3}</text>"#,
            f.x0 - 6.0,
            y + 3.0
        );
    }
}

fn draw_world_line(svg: &mut String, f: &Frame, traj: &Trajectory, p: Particle, stride: usize) {
    let colour = COLOURS[p.index()];
    let n = p.number();
    let _ = writeln!(svg, r#"<g class="world-line" data-particle="{n}">"#);
    if traj.records.len() > 1 {
        let pts: Vec<String> = traj
            .records
            .iter()
            .map(|r| {
                let e = r.q.event(p);
                let (x, y) = f.map(e.z, e.t);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }
    for (j, r) in traj.records.iter().enumerate().step_by(stride) {
        let e = r.q.event(p);
        let (x, y) = f.map(e.z, e.t);
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{colour}"/><text class="label" data-step="{j}" x="{:.2}" y="{:.2}" font-size="9" fill="{colour}">{j}</text>"#,
            x + 5.0,
            y + 3.0
        );
    }
    svg.push_str("</g>\n");
}

/// World lines `(z horizontal, t vertical)` of both particles with the
/// step index written next to every `stride`-th record. Both panels share
/// one time scale, so equal labels at equal heights mean equal times.
pub fn emit_svg(traj: &Trajectory, spec: &PlotSpec) -> String {
    let stride = spec.stride.max(1);
    let t_range = padded(range(
        traj.records.iter().flat_map(|r| [r.q.t1, r.q.t2]),
    ));
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">"#,
        w = spec.width,
        h = spec.height
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let inner_h = (spec.height - 2.0 * MARGIN).max(10.0);
    match spec.layout {
        Layout::Panels => {
            let panel_w = ((spec.width - 3.0 * MARGIN) / 2.0).max(10.0);
            for p in Particle::BOTH {
                let z_range = padded(range(traj.records.iter().map(|r| r.q.event(p).z)));
                let frame = Frame {
                    x0: MARGIN + p.index() as f64 * (panel_w + MARGIN),
                    y0: MARGIN,
                    w: panel_w,
                    h: inner_h,
                    z_range,
                    t_range,
                };
                let n = p.number();
                draw_axes(&mut svg, &frame, &format!("particle {n}"), &format!("z{n}"), &format!("t{n}"));
                draw_world_line(&mut svg, &frame, traj, p, stride);
            }
        }
        Layout::Shared => {
            let z_range = padded(range(traj.records.iter().flat_map(|r| [r.q.z1, r.q.z2])));
            let frame = Frame {
                x0: MARGIN,
                y0: MARGIN,
                w: (spec.width - 2.0 * MARGIN).max(10.0),
                h: inner_h,
                z_range,
                t_range,
            };
            draw_axes(&mut svg, &frame, "particles 1 and 2", "z", "t");
            for p in Particle::BOTH {
                draw_world_line(&mut svg, &frame, traj, p, stride);
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

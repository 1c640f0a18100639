//! Time-position plots: time on the horizontal axis, position on the
//! vertical one, burrow and shoreline drawn as horizontal rules.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::engine::{EventKind, Trajectory};
use crate::state::GroupId;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub width: u32,
    pub height: u32,
    pub margin: f64,
    pub shoreline: f64,
}

impl Default for PlotStyle {
    fn default() -> Self {
        Self {
            width: 960,
            height: 540,
            margin: 48.0,
            shoreline: 0.0,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// Sample of one group's path.
#[derive(Clone, Copy)]
struct Point {
    t: f64,
    p: f64,
    calm: bool,
}

struct Frame {
    t0: f64,
    t1: f64,
    p0: f64,
    p1: f64,
    style: PlotStyle,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        let w = f64::from(self.style.width) - 2.0 * self.style.margin;
        self.style.margin + (t - self.t0) / (self.t1 - self.t0) * w
    }

    fn y(&self, p: f64) -> f64 {
        let h = f64::from(self.style.height) - 2.0 * self.style.margin;
        self.style.margin + (self.p1 - p) / (self.p1 - self.p0) * h
    }
}

fn group_paths(traj: &Trajectory) -> BTreeMap<GroupId, (u32, Vec<Point>)> {
    let mut paths: BTreeMap<GroupId, (u32, Vec<Point>)> = BTreeMap::new();
    for segment in &traj.segments {
        for (k, &id) in segment.ids.iter().enumerate() {
            let entry = paths.entry(id).or_insert((segment.weights[k], Vec::new()));
            for (row, &t) in segment.times.iter().enumerate() {
                entry.1.push(Point {
                    t,
                    p: segment.positions[row][k],
                    calm: segment.panic[row][k] >= 1.0,
                });
            }
        }
    }
    // parents run into the point where their merged group starts
    for event in &traj.events {
        if let (EventKind::Merge, Some(p)) = (event.kind, event.merged_position) {
            for parent in &event.participants {
                if let Some((_, path)) = paths.get_mut(parent) {
                    let calm = path.last().is_none_or(|q| q.calm);
                    path.push(Point {
                        t: event.time,
                        p,
                        calm,
                    });
                }
            }
        }
    }
    paths
}

fn points_attr(frame: &Frame, run: &[Point]) -> String {
    let mut out = String::new();
    let mut last: Option<(f64, f64)> = None;
    for (k, q) in run.iter().enumerate() {
        let (x, y) = (frame.x(q.t), frame.y(q.p));
        let keep = match last {
            None => true,
            Some((lx, ly)) => (x - lx).abs() >= 0.5 || (y - ly).abs() >= 0.5 || k + 1 == run.len(),
        };
        if keep {
            if !out.is_empty() {
                out.push(' ');
            }
            write!(out, "{x:.2},{y:.2}").unwrap();
            last = Some((x, y));
        }
    }
    out
}

/// Renders `traj` as a standalone SVG document. Panicking stretches of a path
/// are dashed, stroke width grows with group weight, merges are dotted.
pub fn render_svg(traj: &Trajectory, style: &PlotStyle) -> String {
    let paths = group_paths(traj);
    let t0 = traj.start_time();
    let mut t1 = traj.end_time();
    if t1 <= t0 {
        t1 = t0 + 1.0;
    }
    let (mut lo, mut hi) = (
        style.shoreline.min(traj.home),
        style.shoreline.max(traj.home),
    );
    for (_, path) in paths.values() {
        for q in path {
            lo = lo.min(q.p);
            hi = hi.max(q.p);
        }
    }
    let pad = 0.05 * (hi - lo).max(1e-9);
    let frame = Frame {
        t0,
        t1,
        p0: lo - pad,
        p1: hi + pad,
        style: style.clone(),
    };
    let (w, h, m) = (
        f64::from(style.width),
        f64::from(style.height),
        style.margin,
    );

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="11">"#,
        style.width, style.height, style.width, style.height
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();

    // axes and ticks
    writeln!(svg, r#"<g class="axes" stroke="black" stroke-width="1">"#).unwrap();
    writeln!(
        svg,
        r#"<line x1="{m:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        h - m,
        w - m,
        h - m
    )
    .unwrap();
    writeln!(
        svg,
        r#"<line x1="{m:.2}" y1="{m:.2}" x2="{m:.2}" y2="{:.2}"/>"#,
        h - m
    )
    .unwrap();
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, r#"<g class="ticks" fill="black">"#).unwrap();
    for k in 0..=5 {
        let t = t0 + (t1 - t0) * f64::from(k) / 5.0;
        let x = frame.x(t);
        writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t:.1}</text>"#,
            h - m + 16.0
        )
        .unwrap();
        let p = frame.p0 + (frame.p1 - frame.p0) * f64::from(k) / 5.0;
        let y = frame.y(p);
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{p:.1}</text>"#,
            m - 6.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time</text>"#,
        w / 2.0,
        h - 8.0
    )
    .unwrap();
    writeln!(svg, "</g>").unwrap();

    let home_y = frame.y(traj.home);
    writeln!(
        svg,
        r##"<line class="home" x1="{m:.2}" y1="{home_y:.2}" x2="{:.2}" y2="{home_y:.2}" stroke="#444" stroke-width="1.5"/>"##,
        w - m
    )
    .unwrap();
    let sea_y = frame.y(style.shoreline);
    writeln!(
        svg,
        r##"<line class="shoreline" x1="{m:.2}" y1="{sea_y:.2}" x2="{:.2}" y2="{sea_y:.2}" stroke="#3b7dd8" stroke-width="1" stroke-dasharray="6 3"/>"##,
        w - m
    )
    .unwrap();

    writeln!(
        svg,
        r#"<g class="groups" fill="none" stroke-linejoin="round">"#
    )
    .unwrap();
    for (id, (weight, path)) in &paths {
        let colour = PALETTE[*id as usize % PALETTE.len()];
        let stroke = 1.0 + f64::from(*weight).sqrt();
        let mut start = 0;
        while start < path.len() {
            let calm = path[start].calm;
            let mut end = start;
            while end + 1 < path.len() && path[end + 1].calm == calm {
                end += 1;
            }
            // runs share their boundary point so the line stays connected
            let stop = (end + 1).min(path.len() - 1);
            let dash = if calm {
                ""
            } else {
                r#" stroke-dasharray="4 3""#
            };
            writeln!(
                svg,
                r#"<polyline data-group="{id}" stroke="{colour}" stroke-width="{stroke:.2}"{dash} points="{}"/>"#,
                points_attr(&frame, &path[start..=stop.max(start)])
            )
            .unwrap();
            start = end + 1;
        }
    }
    writeln!(svg, "</g>").unwrap();

    writeln!(svg, r#"<g class="merges" fill="black">"#).unwrap();
    for event in &traj.events {
        if let (EventKind::Merge, Some(p)) = (event.kind, event.merged_position) {
            writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
                frame.x(event.time),
                frame.y(p)
            )
            .unwrap();
        }
    }
    writeln!(svg, "</g>").unwrap();
    writeln!(svg, "</svg>").unwrap();
    svg
}

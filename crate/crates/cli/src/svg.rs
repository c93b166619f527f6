//! Minimal SVG plots of generating curves.

use crate::record::{RunRecord, Sample};
use anyhow::{Context, Result};
use capspec_core::ProblemKind;
use std::fmt::Write as _;
use std::path::Path;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotOptions {
    /// Same scale on both axes.
    pub equal_axes: bool,
    /// Point to circle, in data coordinates.
    pub highlight: Option<(f64, f64)>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            equal_axes: true,
            highlight: None,
        }
    }
}

/// Radii of the bounding walls.
pub fn wall_positions(record: &RunRecord) -> Vec<f64> {
    let p = &record.params;
    match record.kind() {
        Ok(ProblemKind::P1) => vec![-p.b, p.b],
        _ => vec![p.a, p.b],
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn fit(xs: (f64, f64), ys: (f64, f64), equal: bool) -> Self {
        let pad = |(lo, hi): (f64, f64)| {
            let span = (hi - lo).max(1e-9);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (mut xs, mut ys) = (pad(xs), pad(ys));
        let (w, h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
        let (mut sx, mut sy) = (w / (xs.1 - xs.0), h / (ys.1 - ys.0));
        if equal {
            let s = sx.min(sy);
            let grow = |(lo, hi): (f64, f64), len: f64| {
                let mid = 0.5 * (lo + hi);
                (mid - 0.5 * len / s, mid + 0.5 * len / s)
            };
            xs = grow(xs, w);
            ys = grow(ys, h);
            sx = s;
            sy = s;
        }
        Frame {
            x0: xs.0,
            y0: ys.0,
            sx,
            sy,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.sx
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) * self.sy
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

pub fn render_svg(record: &RunRecord, opts: &PlotOptions) -> String {
    let walls = wall_positions(record);
    let pts: &[Sample] = &record.samples;
    let xs = bounds(pts.iter().map(|s| s.r).chain(walls.iter().copied()));
    let ys = bounds(pts.iter().map(|s| s.u));
    let f = Frame::fit(xs, ys, opts.equal_axes);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for r in &walls {
        let x = f.px(*r);
        let _ = writeln!(
            out,
            r#"<line class="wall" data-r="{r}" x1="{x:.3}" y1="0" x2="{x:.3}" y2="{HEIGHT}" stroke="gray" stroke-dasharray="4 4"/>"#
        );
    }
    let mut line = String::new();
    for s in pts {
        let _ = write!(line, "{:.3},{:.3} ", f.px(s.r), f.py(s.u));
    }
    let _ = writeln!(
        out,
        r#"<polyline class="curve" fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#,
        line.trim_end()
    );
    for s in &record.nodes {
        let _ = writeln!(
            out,
            r#"<circle class="node" cx="{:.3}" cy="{:.3}" r="3" fill="none" stroke="steelblue"/>"#,
            f.px(s.r),
            f.py(s.u)
        );
    }
    if let Some((x, y)) = opts.highlight {
        let _ = writeln!(
            out,
            r#"<circle class="minimum" cx="{:.3}" cy="{:.3}" r="8" fill="none" stroke="crimson" stroke-width="2"/>"#,
            f.px(x),
            f.py(y)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(record: &RunRecord, opts: &PlotOptions, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(record, opts)).with_context(|| format!("writing {}", path.display()))
}

//! Plot data: a sampled CSV, a knot sidecar, and an optional SVG chart.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::spectral::PeriodicFunction;
use crate::spline::PerfectSpline;

/// One row per point of the closed period `x_i = 2πi/N`, `i = 0..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotRow {
    pub x: f64,
    pub s: f64,
    pub f: f64,
    pub s_r: f64,
}

pub fn sample(spline: &PerfectSpline, f: &PeriodicFunction, n: usize) -> Vec<PlotRow> {
    let r = spline.order();
    (0..=n)
        .map(|i| {
            let x = TAU * i as f64 / n as f64;
            PlotRow {
                x,
                s: spline.eval(x),
                f: f.evaluate(x),
                s_r: spline.derivative(x, r),
            }
        })
        .collect()
}

pub fn csv(rows: &[PlotRow]) -> String {
    let mut out = String::from("x,s,f,s_r\n");
    for row in rows {
        let _ = writeln!(out, "{},{},{},{}", row.x, row.s, row.f, row.s_r);
    }
    out
}

/// Knots with the sign of `s^(r)/ξ` on the interval that follows each.
pub fn knots_csv(spline: &PerfectSpline) -> String {
    let mut out = String::from("index,t,sign_after\n");
    let mut sign = spline.lead_sign();
    for (i, t) in spline.knots().iter().enumerate() {
        let _ = writeln!(out, "{i},{t},{sign}");
        sign = -sign;
    }
    out
}

const WIDTH: f64 = 720.0;
const PANEL: f64 = 220.0;
const PAD: f64 = 36.0;

/// Two stacked panels: `s` against `f`, and `s^(r)` with the knots.
pub fn svg(rows: &[PlotRow], spline: &PerfectSpline) -> String {
    let height = 2.0 * PANEL + 3.0 * PAD;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let top = PAD;
    let bottom = 2.0 * PAD + PANEL;
    panel(&mut out, top, "s and f", &[(rows.iter().map(|r| r.f).collect(), "#999999"), (rows.iter().map(|r| r.s).collect(), "#1f5fbf")], rows);
    let r = spline.order();
    panel(&mut out, bottom, &format!("s^({r})"), &[(rows.iter().map(|r| r.s_r).collect(), "#c0392b")], rows);
    for t in spline.knots() {
        let x = PAD + t / TAU * (WIDTH - 2.0 * PAD);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="#c0392b" stroke-dasharray="3,3" stroke-width="0.8"/>"##,
            bottom + PANEL
        );
    }
    out.push_str("</svg>\n");
    out
}

fn panel(out: &mut String, y0: f64, title: &str, series: &[(Vec<f64>, &str)], rows: &[PlotRow]) {
    let w = WIDTH - 2.0 * PAD;
    let (mut lo, mut hi) = series
        .iter()
        .flat_map(|(v, _)| v.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        lo -= 1.0;
        hi += 1.0;
    }
    let margin = 0.05 * (hi - lo);
    let (lo, hi) = (lo - margin, hi + margin);
    let y_of = |v: f64| y0 + PANEL * (hi - v) / (hi - lo);

    let _ = writeln!(
        out,
        r##"<rect x="{PAD}" y="{y0}" width="{w}" height="{PANEL}" fill="none" stroke="#444444" stroke-width="0.8"/>"##
    );
    let _ = writeln!(out, r#"<text x="{PAD}" y="{:.2}">{title}</text>"#, y0 - 8.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{hi:.3}</text>"#, PAD - 4.0, y0 + 10.0);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{lo:.3}</text>"#, PAD - 4.0, y0 + PANEL);
    if lo < 0.0 && hi > 0.0 {
        let y = y_of(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{PAD}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="0.8"/>"##,
            PAD + w
        );
    }
    for (values, color) in series {
        let mut points = String::new();
        for (row, v) in rows.iter().zip(values) {
            let _ = write!(points, "{:.2},{:.2} ", PAD + row.x / TAU * w, y_of(*v));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.4" points="{}"/>"#,
            points.trim_end()
        );
    }
}

/// Files written by [`write`].
#[derive(Clone, Debug, PartialEq)]
pub struct PlotFiles {
    pub csv: PathBuf,
    pub knots: PathBuf,
    pub svg: Option<PathBuf>,
}

/// Sidecar path `<stem>_knots.csv` next to `out`.
pub fn knots_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    out.with_file_name(format!("{stem}_knots.csv"))
}

pub fn write(spline: &PerfectSpline, f: &PeriodicFunction, n: usize, out: &Path, with_svg: bool) -> Result<PlotFiles> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let rows = sample(spline, f, n);
    fs::write(out, csv(&rows))?;
    let knots = knots_path(out);
    fs::write(&knots, knots_csv(spline))?;
    let svg_path = if with_svg {
        let p = out.with_extension("svg");
        fs::write(&p, svg(&rows, spline))?;
        Some(p)
    } else {
        None
    };
    Ok(PlotFiles {
        csv: out.to_path_buf(),
        knots,
        svg: svg_path,
    })
}

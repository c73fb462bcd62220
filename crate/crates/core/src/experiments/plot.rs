use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlotOptions {
    pub log_log: bool,
    /// Dashed reference line of this slope through the first plotted point
    /// (slope in log-log coordinates when `log_log` is set).
    pub reference_slope: Option<f64>,
    pub title: Option<String>,
}

/// Header and numeric rows of a CSV file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is empty", path.display())))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidArgument(format!("row {}: {e}", k + 1)))?;
        if row.len() != header.len() {
            return Err(Error::InvalidArgument(format!(
                "row {} has {} cells, header has {}",
                k + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} has no data rows",
            path.display()
        )));
    }
    Ok((header, rows))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: [f64; 4] = [60.0, 20.0, 40.0, 50.0]; // left, right, top, bottom
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            let pad = if lo == 0.0 || !lo.is_finite() {
                1.0
            } else {
                0.5 * lo.abs()
            };
            lo = if lo.is_finite() { lo - pad } else { 0.0 };
            hi = lo + 2.0 * pad;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            let step = ((b - a) / 6 + 1).max(1);
            (a..=b)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            (0..=5)
                .map(|k| {
                    let v = self.lo + (self.hi - self.lo) * k as f64 / 5.0;
                    (v, format!("{v:.4}"))
                })
                .collect()
        }
    }
}

/// Line plot of columns `ys` against `x` as a standalone SVG 1.1 file.
pub fn plot_csv(csv: &Path, x: &str, ys: &[&str], out: &Path, opts: &PlotOptions) -> Result<()> {
    let (header, rows) = read_csv(csv)?;
    let column = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "unknown column `{name}`; available: {}",
                header.join(", ")
            ))
        })
    };
    let xi = column(x)?;
    let yi: Vec<usize> = ys.iter().map(|y| column(y)).collect::<Result<_>>()?;
    if yi.is_empty() {
        return Err(Error::InvalidArgument("no y columns".into()));
    }
    let keep = |v: f64| v.is_finite() && (!opts.log_log || v > 0.0);
    let series: Vec<Vec<(f64, f64)>> = yi
        .iter()
        .map(|&j| {
            rows.iter()
                .map(|r| (r[xi], r[j]))
                .filter(|(a, b)| keep(*a) && keep(*b))
                .collect()
        })
        .collect();
    if series.iter().all(|s| s.is_empty()) {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    let ax = Axis::new(series.iter().flatten().map(|p| p.0), opts.log_log);
    let ay = Axis::new(series.iter().flatten().map(|p| p.1), opts.log_log);
    let (l, r, t, bm) = (MARGIN[0], MARGIN[1], MARGIN[2], MARGIN[3]);
    let pw = WIDTH - l - r;
    let ph = HEIGHT - t - bm;
    let px = |v: f64| l + pw * ax.frac(v);
    let py = |v: f64| t + ph * (1.0 - ay.frac(v));

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, label) in ax.ticks() {
        let xp = px(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{xp:.2}" y1="{:.2}" x2="{xp:.2}" y2="{:.2}" stroke="black"/>"#,
            t + ph,
            t + ph + 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{xp:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            t + ph + 16.0
        );
    }
    for (v, label) in ay.ticks() {
        let yp = py(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{yp:.2}" x2="{l}" y2="{yp:.2}" stroke="black"/>"#,
            l - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#,
            l - 6.0,
            yp + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        l + 0.5 * pw,
        HEIGHT - 10.0,
        escape(x)
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            l + 0.5 * pw,
            escape(title)
        );
    }
    for (k, (s, name)) in series.iter().zip(ys).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = s
            .iter()
            .map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            l + 8.0,
            t + 14.0 + 14.0 * k as f64,
            escape(name)
        );
    }
    if let (Some(slope), Some(&(x0, y0))) = (opts.reference_slope, series.iter().flatten().next()) {
        let (xa, xb) = if ax.log {
            (10f64.powf(ax.lo), 10f64.powf(ax.hi))
        } else {
            (ax.lo, ax.hi)
        };
        let line = |xv: f64| {
            if opts.log_log {
                y0 * (xv / x0).powf(slope)
            } else {
                y0 + slope * (xv - x0)
            }
        };
        let n = 40;
        let pts: Vec<String> = (0..=n)
            .map(|k| xa + (xb - xa) * k as f64 / n as f64)
            .map(|xv| {
                if ax.log {
                    10f64.powf(ax.lo + (ax.hi - ax.lo) * ((xv - xa) / (xb - xa)))
                } else {
                    xv
                }
            })
            .filter(|xv| line(*xv).is_finite() && (!opts.log_log || line(*xv) > 0.0))
            .map(|xv| format!("{:.2},{:.2}", px(xv), py(line(xv)).clamp(t, t + ph)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="gray" stroke-dasharray="6,4" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="gray">slope {slope}</text>"#,
            l + pw - 80.0,
            t + 14.0
        );
    }
    svg.push_str("</svg>\n");
    fs::write(out, svg)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

//! Static SVG power curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::run::{pool_seeds, PooledRow, ResultRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    Gamma,
    Beta,
    /// Calibration size, on a log scale.
    M,
}

impl PlotAxis {
    fn title(self) -> &'static str {
        match self {
            PlotAxis::Gamma => "gamma",
            PlotAxis::Beta => "beta",
            PlotAxis::M => "m",
        }
    }
}

impl FromStr for PlotAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(PlotAxis::Gamma),
            "beta" => Ok(PlotAxis::Beta),
            "m" => Ok(PlotAxis::M),
            other => Err(Error::UnknownKind(other.to_string())),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn x_value(axis: PlotAxis, r: &PooledRow) -> f64 {
    match axis {
        PlotAxis::Gamma => r.gamma,
        PlotAxis::Beta => r.beta,
        PlotAxis::M => (r.m as f64).log10(),
    }
}

/// Series key: the method label, plus whichever other grid coordinate
/// varies across the rows.
fn series_key(axis: PlotAxis, r: &PooledRow, vary_gamma: bool, vary_beta: bool) -> String {
    let mut key = match axis {
        PlotAxis::M => r.label.split('(').next().unwrap_or(&r.label).to_string(),
        _ => r.label.clone(),
    };
    if vary_gamma && axis != PlotAxis::Gamma {
        let _ = write!(key, " γ={}", r.gamma);
    }
    if vary_beta && axis != PlotAxis::Beta {
        let _ = write!(key, " β={}", r.beta);
    }
    key
}

/// Renders power against `axis`, one polyline per method, with a dashed
/// reference line at `alpha`. Output depends only on the arguments.
pub fn power_plot_svg(rows: &[ResultRow], axis: PlotAxis, alpha: f64) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| Error::Plot("no rows to plot".into()))?;
    if let Some(other) = rows.iter().find(|r| r.task != first.task) {
        return Err(Error::Plot(format!(
            "rows mix tasks `{}` and `{}`",
            first.task, other.task
        )));
    }
    let pooled = pool_seeds(rows);
    let distinct = |f: fn(&PooledRow) -> f64| {
        let mut v: Vec<f64> = pooled.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.len() > 1
    };
    let vary_gamma = distinct(|r| r.gamma);
    let vary_beta = distinct(|r| r.beta);

    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &pooled {
        series
            .entry(series_key(axis, r, vary_gamma, vary_beta))
            .or_default()
            .push((x_value(axis, r), r.rejection_rate));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }

    let mut xs: Vec<f64> = pooled.iter().map(|r| x_value(axis, r)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let (mut x_lo, mut x_hi) = (xs[0], xs[xs.len() - 1]);
    if x_hi - x_lo < 1e-12 {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (1.0 - y.clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}: power vs {}</text>"#,
        LEFT + plot_w / 2.0,
        escape(&first.task),
        axis.title()
    );
    // axes and grid
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="#dddddd"/><text x="{2:.2}" y="{3:.2}" text-anchor="end">{y:.1}</text>"##,
            sy(y),
            LEFT + plot_w,
            LEFT - 6.0,
            sy(y) + 4.0
        );
    }
    let ticks: Vec<f64> = if xs.len() <= 10 {
        xs.clone()
    } else {
        (0..=5)
            .map(|i| x_lo + (x_hi - x_lo) * i as f64 / 5.0)
            .collect()
    };
    for &x in &ticks {
        let label = match axis {
            PlotAxis::M => format!("{}", 10f64.powf(x).round()),
            _ => format!("{}", (x * 1000.0).round() / 1000.0),
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{label}</text>"#,
            sx(x),
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        axis.title()
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">rejection rate</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(
        svg,
        r#"<line class="alpha-ref" x1="{LEFT}" y1="{0:.2}" x2="{1:.2}" y2="{0:.2}" stroke="black" stroke-dasharray="6 4"/>"#,
        sy(alpha),
        LEFT + plot_w
    );

    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_power_plot(rows: &[ResultRow], axis: PlotAxis, alpha: f64, path: &Path) -> Result<()> {
    let svg = power_plot_svg(rows, axis, alpha)?;
    fs::write(path, svg).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

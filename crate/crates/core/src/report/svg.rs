//! Log-log convergence plots as standalone SVG.

use std::fmt::Write as _;

use crate::driver::{IterationRecord, Quantity};
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// One labelled polyline.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// `n_elements` against `quantity`, skipping levels without a value.
    pub fn from_records(label: impl Into<String>, records: &[IterationRecord], quantity: Quantity) -> Self {
        let points = records
            .iter()
            .filter_map(|r| quantity.of(r).ok().map(|v| (r.n_elements as f64, v)))
            .collect();
        Series { label: label.into(), points }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Slopes of dashed guide lines.
    pub reference_slopes: Vec<f64>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            title: String::new(),
            x_label: "number of elements".into(),
            y_label: "product".into(),
            reference_slopes: vec![-1.0, -2.0],
        }
    }
}

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders the series on log-log axes. Identical input gives identical bytes.
pub fn plot_convergence(series: &[Series], options: &PlotOptions) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidArgument("nothing to plot".into()));
    }
    let positive: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| s.points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()).collect())
        .collect();
    let all: Vec<(f64, f64)> = positive.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::InvalidArgument("no positive data points to plot on log axes".into()));
    }
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min).log10().floor();
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max).log10().ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let ax = Axes { x0, x1, y0, y1 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for e in x0 as i32..=x1 as i32 {
        let x = ax.px(10f64.powi(e));
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{bottom}" stroke="#dddddd"/>"##);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"#, bottom + 16.0);
    }
    for e in y0 as i32..=y1 as i32 {
        let y = ax.py(10f64.powi(e));
        let _ = writeln!(svg, r##"<line x1="{left}" y1="{y:.2}" x2="{right}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 12.0,
        escape(&options.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(&options.y_label)
    );
    if !options.title.is_empty() {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="20" text-anchor="middle">{}</text>"#, (left + right) / 2.0, escape(&options.title));
    }
    let _ = writeln!(svg, r#"<clipPath id="plot"><rect x="{left}" y="{top}" width="{:.2}" height="{:.2}"/></clipPath>"#, right - left, bottom - top);

    // Guides pass through the first point of the first nonempty series.
    let anchor = positive.iter().find_map(|p| p.first().copied()).expect("some series has points");
    let mut legend_row = 0usize;
    let legend_y = |row: usize| top + 14.0 + 18.0 * row as f64;
    for &slope in &options.reference_slopes {
        let xa = 10f64.powf(x0);
        let xb = 10f64.powf(x1);
        let ya = anchor.1 * (xa / anchor.0).powf(slope);
        let yb = anchor.1 * (xb / anchor.0).powf(slope);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6,4" clip-path="url(#plot)"/>"#,
            ax.px(xa),
            ax.py(ya),
            ax.px(xb),
            ax.py(yb)
        );
        let ly = legend_y(legend_row);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="gray" stroke-dasharray="6,4"/>"#,
            right + 10.0,
            right + 34.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">slope {slope}</text>"#, right + 40.0, ly + 4.0);
        legend_row += 1;
    }
    for (k, (s, pts)) in series.iter().zip(&positive).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", ax.px(x), ax.py(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            coords.join(" ")
        );
        for &(x, y) in pts {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#, ax.px(x), ax.py(y));
        }
        let ly = legend_y(legend_row);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            right + 10.0,
            right + 34.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, right + 40.0, ly + 4.0, escape(&s.label));
        legend_row += 1;
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

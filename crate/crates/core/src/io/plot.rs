//! Minimal SVG line charts.

use std::fmt::Write;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 220.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 34.0;
const MARGIN_B: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Horizontal reference lines `(value, label)`.
    pub bounds: Vec<(f64, String)>,
    /// Draw series as hourly steps instead of polylines.
    pub steps: bool,
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    step * mag
}

fn fmt_num(x: f64) -> String {
    let s = format!("{x:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders stacked panels sharing an hourly x axis.
pub fn render(title: &str, panels: &[Panel]) -> String {
    let height = MARGIN_T + panels.len() as f64 * (PANEL_H + MARGIN_B + MARGIN_T);
    let width = MARGIN_L + PANEL_W + MARGIN_R;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" font-size="15" text-anchor="middle">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (p, panel) in panels.iter().enumerate() {
        let top = MARGIN_T + p as f64 * (PANEL_H + MARGIN_B + MARGIN_T) + MARGIN_T;
        draw_panel(&mut svg, panel, top);
    }
    svg.push_str("</svg>\n");
    svg
}

fn draw_panel(svg: &mut String, panel: &Panel, top: f64) {
    let hours = panel
        .series
        .iter()
        .map(|s| s.values.len())
        .max()
        .unwrap_or(0)
        .max(1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for x in panel
        .series
        .iter()
        .flat_map(|s| &s.values)
        .chain(panel.bounds.iter().map(|(v, _)| v))
    {
        if x.is_finite() {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let pad = 0.08 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x_at = |h: f64| MARGIN_L + PANEL_W * h / hours as f64;
    let y_at = |v: f64| top + PANEL_H * (hi - v) / (hi - lo);

    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN_L}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + PANEL_W / 2.0,
        top - 8.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">{}</text>"#,
        top + PANEL_H / 2.0,
        top + PANEL_H / 2.0,
        escape(&panel.y_label)
    );
    let step = nice_step(hi - lo);
    let mut tick = (lo / step).ceil() * step;
    while tick <= hi {
        let y = y_at(tick);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            MARGIN_L + PANEL_W,
            MARGIN_L - 6.0,
            y + 4.0,
            fmt_num(tick)
        );
        tick += step;
    }
    let x_step = if hours > 12 { 2 } else { 1 };
    for h in (0..=hours).step_by(x_step) {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{h}</text>"#,
            x_at(h as f64),
            top + PANEL_H + 16.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">hour</text>"#,
        MARGIN_L + PANEL_W / 2.0,
        top + PANEL_H + 32.0
    );
    for (value, label) in &panel.bounds {
        let y = y_at(*value);
        let _ = writeln!(
            svg,
            r##"<line class="bound" data-value="{}" x1="{MARGIN_L}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#000" stroke-dasharray="6 4"/><text x="{}" y="{:.2}" font-size="10">{}</text>"##,
            fmt_num(*value),
            MARGIN_L + PANEL_W,
            MARGIN_L + 4.0,
            y - 3.0,
            escape(label)
        );
    }
    for (k, series) in panel.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (h, &v) in series.values.iter().enumerate() {
            if panel.steps {
                let _ = write!(
                    points,
                    "{:.2},{:.2} {:.2},{:.2} ",
                    x_at(h as f64),
                    y_at(v),
                    x_at(h as f64 + 1.0),
                    y_at(v)
                );
            } else {
                let _ = write!(points, "{:.2},{:.2} ", x_at(h as f64 + 0.5), y_at(v));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-label="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
            escape(&series.label),
            points.trim_end()
        );
        let ly = top + 14.0 + 16.0 * k as f64;
        let lx = MARGIN_L + PANEL_W + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
}

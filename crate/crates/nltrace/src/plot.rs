//! Minimal SVG emission: ratio-versus-horizon curves on log-log axes, one
//! polyline per row group. No external dependencies; the output is a single
//! self-contained file.

use crate::study::Row;
use std::collections::BTreeMap;
use std::fmt::Write as _;

const W: f64 = 760.0;
const H: f64 = 520.0;
const ML: f64 = 70.0;
const MR: f64 = 180.0;
const MT: f64 = 40.0;
const MB: f64 = 60.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Group rows by everything but the horizon and plot ratio vs delta.
pub fn ratio_vs_delta_svg(rows: &[Row], title: &str) -> String {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        if !(r.delta.is_finite() && r.ratio.is_finite() && r.ratio > 0.0) {
            continue;
        }
        let label = format!("{} d={} p={} b={} {}", r.study, r.d, r.p, r.beta, r.function);
        series.entry(label).or_default().push((r.delta, r.ratio));
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for pts in series.values() {
        for &(x, y) in pts {
            x0 = x0.min(x.ln());
            x1 = x1.max(x.ln());
            y0 = y0.min(y.ln());
            y1 = y1.max(y.ln());
        }
    }
    if !x0.is_finite() {
        return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>");
    }
    if (x1 - x0).abs() < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let pad = 0.15 * (y1 - y0).max(0.2);
    y0 -= pad;
    y1 += pad;
    let sx = |lx: f64| ML + (lx - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |ly: f64| H - MB - (ly - y0) / (y1 - y0) * (H - MT - MB);

    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\" font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" font-size=\"14\">{}</text>\n",
        ML,
        xml_escape(title)
    );
    // axes
    let _ = write!(
        svg,
        "<line x1=\"{ML}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB,
        H - MB
    );
    // x ticks at the sampled horizons
    let mut xticks: Vec<f64> = series
        .values()
        .flat_map(|pts| pts.iter().map(|p| p.0))
        .collect();
    xticks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xticks.dedup();
    for t in xticks {
        let x = sx(t.ln());
        let _ = write!(
            svg,
            "<line x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"#999\"/>\n\
             <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{t}</text>\n",
            H - MB,
            H - MB + 5.0,
            H - MB + 20.0
        );
    }
    // y ticks: 4 log-spaced
    for i in 0..=4 {
        let ly = y0 + (y1 - y0) * i as f64 / 4.0;
        let y = sy(ly);
        let _ = write!(
            svg,
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{ML}\" y2=\"{y}\" stroke=\"#999\"/>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n",
            ML - 5.0,
            ML - 8.0,
            y + 4.0,
            ly.exp()
        );
    }
    let _ = write!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">horizon delta (log)</text>\n",
        ML + (W - ML - MR) / 2.0,
        H - 15.0
    );
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (j, &(x, y)) in pts.iter().enumerate() {
            let _ = write!(
                path,
                "{}{:.2},{:.2} ",
                if j == 0 { "M" } else { "L" },
                sx(x.ln()),
                sy(y.ln())
            );
        }
        let _ = write!(
            svg,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n"
        );
        for &(x, y) in pts {
            let _ = write!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                sx(x.ln()),
                sy(y.ln())
            );
        }
        let ly = MT + 16.0 * i as f64;
        let _ = write!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            W - MR + 10.0,
            ly,
            W - MR + 25.0,
            ly + 9.0,
            xml_escape(&truncate(label, 24))
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn truncate(s: &str, n: usize) -> String {
    if s.len() <= n {
        s.to_string()
    } else {
        format!("{}..", &s[..n])
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

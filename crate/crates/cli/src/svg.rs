//! Self-contained SVG scatter plots. Output is a pure function of the input,
//! so reruns produce identical bytes.

use std::fmt::Write as _;

use fvsm_core::dimred::Projection2D;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 40.0;
const PLOT: f64 = 560.0;
const LEGEND_X: f64 = MARGIN * 2.0 + PLOT;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Fill colour of cluster `c`; distinct for every cluster.
pub fn color(c: usize) -> String {
    if let Some(hex) = PALETTE.get(c) {
        return hex.to_string();
    }
    // golden-angle hues past the palette, two lightness bands
    let hue = (c as f64 * 137.508) % 360.0;
    let light = if c.is_multiple_of(2) { 0.45 } else { 0.62 };
    let (r, g, b) = hsl_to_rgb(hue, 0.65, light);
    format!("#{r:02x}{g:02x}{b:02x}")
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (u8, u8, u8) {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    (byte(r), byte(g), byte(b))
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One circle per document, coloured by `clusters[i]`, with a legend entry
/// per cluster labelled by `legend[c]`.
pub fn scatter(title: &str, proj: &Projection2D, clusters: &[usize], legend: &[String]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &proj.coords {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    // one scale for both axes keeps distances honest
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { PLOT / span } else { 1.0 };
    let offset = [
        MARGIN + (PLOT - (hi[0] - lo[0]) * scale) / 2.0,
        MARGIN + (PLOT - (hi[1] - lo[1]) * scale) / 2.0,
    ];

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r##"<text x="{MARGIN}" y="{:.0}" font-size="15">{}</text>"##,
        MARGIN * 0.6,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<g fill="none" stroke="#999999"><path d="M{MARGIN} {MARGIN}h{PLOT}v{PLOT}h-{PLOT}z"/></g>"##
    );
    let _ = writeln!(out, r##"<g stroke="#333333" stroke-width="0.4">"##);
    for ((id, p), &c) in proj.ids.iter().zip(&proj.coords).zip(clusters) {
        let x = offset[0] + (p[0] - lo[0]) * scale;
        // SVG y grows downwards
        let y = MARGIN + PLOT - (offset[1] - MARGIN) - (p[1] - lo[1]) * scale;
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"><title>{} (cluster {c})</title></circle>"#,
            color(c),
            escape(id)
        );
    }
    out.push_str("</g>\n<g>\n");
    for (c, label) in legend.iter().enumerate() {
        let y = MARGIN + 20.0 * c as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{LEGEND_X}" y="{y}" width="12" height="12" fill="{}"/><text x="{:.0}" y="{:.0}">{c}: {}</text>"#,
            color(c),
            LEGEND_X + 18.0,
            y + 10.0,
            escape(label)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

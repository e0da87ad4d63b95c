//! Minimal static SVG line plots for ROC and FDR curves.

use std::fmt::Write as _;

use crate::roc::RocCurve;

const W: f64 = 480.0;
const H: f64 = 480.0;
const PAD: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let sx = PAD + x / self.x_max * (W - 2.0 * PAD);
        let sy = H - PAD - y / self.y_max * (H - 2.0 * PAD);
        (sx, sy)
    }
}

fn header(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, y0) = frame.px(0.0, 0.0);
    let (x1, y1) = frame.px(frame.x_max, frame.y_max);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{title}</text>"#, W / 2.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{y_label}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (tx, ty) = frame.px(f * frame.x_max, 0.0);
        let _ = writeln!(out, r#"<text x="{tx}" y="{}" text-anchor="middle">{}</text>"#, ty + 16.0, fmt_tick(f * frame.x_max));
        let (lx, ly) = frame.px(0.0, f * frame.y_max);
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, lx - 6.0, ly + 4.0, fmt_tick(f * frame.y_max));
    }
}

fn fmt_tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v}")
    } else {
        format!("{v:.2}")
    }
}

fn polyline(out: &mut String, frame: &Frame, pts: impl Iterator<Item = (f64, f64)>, color: &str, dashed: bool) {
    let coords: Vec<String> = pts
        .map(|(x, y)| {
            let (sx, sy) = frame.px(x, y);
            format!("{sx:.2},{sy:.2}")
        })
        .collect();
    let dash = if dashed { r#" stroke-dasharray="4 4""# } else { "" };
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
        coords.join(" ")
    );
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = PAD + 14.0 + 16.0 * i as f64;
        let x = W - PAD - 110.0;
        let _ = writeln!(out, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 20.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{label}</text>"#, x + 26.0, y + 4.0);
    }
}

/// Overlaid ROC curves on the unit square with a chance diagonal.
pub fn roc_svg(title: &str, curves: &[RocCurve]) -> String {
    let frame = Frame { x_max: 1.0, y_max: 1.0 };
    let mut out = String::new();
    header(&mut out, &frame, title, "false positive rate", "true positive rate");
    polyline(&mut out, &frame, [(0.0, 0.0), (1.0, 1.0)].into_iter(), "#999999", true);
    let mut entries = Vec::new();
    for (c, color) in curves.iter().zip(COLORS.iter().cycle()) {
        polyline(&mut out, &frame, c.points.iter().copied(), color, false);
        entries.push((format!("{} ({:.3})", c.statistic, c.auc), *color));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

/// FDR against the number of genes called, one series per label.
pub fn fdr_svg(title: &str, series: &[(String, Vec<(usize, f64)>)]) -> String {
    let x_max = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let frame = Frame { x_max, y_max: 1.0 };
    let mut out = String::new();
    header(&mut out, &frame, title, "genes called", "FDR");
    let mut entries = Vec::new();
    for ((label, pts), color) in series.iter().zip(COLORS.iter().cycle()) {
        polyline(&mut out, &frame, pts.iter().map(|&(c, f)| (c as f64, f)), color, false);
        entries.push((label.clone(), *color));
    }
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    out
}

//! Minimal SVG line plots and heatmaps.
//!
//! Axis policy: line plots span the data range in x and the data range
//! padded by 5% in y, with five ticks per axis. Heatmaps use a diverging
//! palette symmetric around zero (blue negative, red positive) scaled to
//! the largest |value|, and are subsampled to at most 160 cells per side.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const MAX_CELLS: usize = 160;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub dashed: bool,
    pub points: Vec<(f64, f64)>,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x: (f64, f64), y: (f64, f64), x_label: &str, y_label: &str) {
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            TOP + ph + 16.0,
            x.0 + f * (x.1 - x.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            y.0 + f * (y.1 - y.0)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let x = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (ylo, yhi) = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pad = 0.05 * (yhi - ylo);
    let y = (ylo - pad, yhi + pad);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let map = |px: f64, py: f64| (LEFT + (px - x.0) / (x.1 - x.0) * pw, TOP + ph - (py - y.0) / (y.1 - y.0) * ph);

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, x, y, x_label, y_label);
    if y.0 < 0.0 && y.1 > 0.0 {
        let (_, zy) = map(x.0, 0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{zy:.2}" x2="{:.2}" y2="{zy:.2}" stroke="#999" stroke-width="0.5"/>"##,
            LEFT + pw
        );
    }
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(a, b)| {
                let (u, v) = map(a, b);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
            s.color,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let lx = LEFT + pw - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/>"#,
            lx + 24.0,
            s.color
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(s.label));
    }
    out.push_str("</svg>\n");
    out
}

fn diverging(v: f64, scale: f64) -> String {
    let f = if scale > 0.0 { (v / scale).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |t: f64| (255.0 * (1.0 - t)).round() as u8;
    let (r, g, b) = if f >= 0.0 { (255, fade(f), fade(f)) } else { (fade(-f), fade(-f), 255) };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// `values[j * m + i]` at (axis[i], axis[j]) relative to `center`.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, center: f64, axis: &[f64], values: &[f64]) -> String {
    let m = axis.len();
    let stride = m.div_ceil(MAX_CELLS).max(1);
    let idx: Vec<usize> = (0..m).step_by(stride).collect();
    let x = (center + axis[0], center + axis[m - 1]);
    let y = (axis[0], axis[m - 1]);
    let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let cw = pw / idx.len() as f64;
    let chh = ph / idx.len() as f64;

    let mut out = String::new();
    header(&mut out, title);
    for (b, &j) in idx.iter().enumerate() {
        for (a, &i) in idx.iter().enumerate() {
            let px = LEFT + a as f64 * cw;
            let py = TOP + ph - (b + 1) as f64 * chh;
            let _ = writeln!(
                out,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cw + 0.05,
                chh + 0.05,
                diverging(values[j * m + i], scale)
            );
        }
    }
    axes(&mut out, x, y, x_label, y_label);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="end">min {lo:.4e}  max {hi:.4e}</text>"#,
        WIDTH - RIGHT,
        TOP - 6.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn palette_is_symmetric() {
        assert_eq!(diverging(0.0, 1.0), "#ffffff");
        assert_eq!(diverging(1.0, 1.0), "#ff0000");
        assert_eq!(diverging(-1.0, 1.0), "#0000ff");
    }

    #[test]
    fn plots_are_well_formed() {
        let s = Series { label: "a<b", color: "black", dashed: true, points: vec![(0.0, 1.0), (1.0, -1.0)] };
        let svg = line_plot("t", "x", "y", &[s]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a&lt;b"));
        let axis: Vec<f64> = (-2..=2).map(f64::from).collect();
        let h = heatmap("w", "x", "y", 0.0, &axis, &[0.1; 25]);
        assert_eq!(h.matches("<rect").count(), 25 + 2);
    }
}

//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub label: &'a str,
    pub t: &'a [f64],
    pub v: &'a [f64],
}

const W: f64 = 720.0;
const H: f64 = 360.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 45.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (-1.0, 1.0);
    }
    if (hi - lo).abs() < 1e-300 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the series on shared axes. Non-finite points are skipped.
pub fn line_plot(title: &str, ylabel: &str, series: &[Series<'_>]) -> String {
    let finite = |x: &f64| x.is_finite();
    let t_lo = series.iter().flat_map(|s| s.t.iter()).cloned().filter(finite).fold(f64::INFINITY, f64::min);
    let t_hi = series.iter().flat_map(|s| s.t.iter()).cloned().filter(finite).fold(f64::NEG_INFINITY, f64::max);
    let v_lo = series.iter().flat_map(|s| s.v.iter()).cloned().filter(finite).fold(f64::INFINITY, f64::min);
    let v_hi = series.iter().flat_map(|s| s.v.iter()).cloned().filter(finite).fold(f64::NEG_INFINITY, f64::max);
    let (t_lo, t_hi) = if t_lo < t_hi { (t_lo, t_hi) } else { nice_range(t_lo, t_hi) };
    let (v_lo, v_hi) = nice_range(v_lo, v_hi);
    let px = |t: f64| ML + (t - t_lo) / (t_hi - t_lo) * (W - ML - MR);
    let py = |v: f64| H - MB - (v - v_lo) / (v_hi - v_lo) * (H - MT - MB);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="{ML}" y="{MT}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - ML - MR,
        H - MT - MB
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let t = t_lo + f * (t_hi - t_lo);
        let v = v_lo + f * (v_hi - v_lo);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, px(t), H - MB + 16.0, t);
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3e}</text>"#, ML - 4.0, py(v) + 4.0, v);
        let _ = writeln!(
            out,
            r##"<line x1="{ML}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#ddd"/>"##,
            W - MR,
            py(v),
            py(v)
        );
    }
    if v_lo < 0.0 && v_hi > 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{ML}" x2="{:.1}" y1="{:.1}" y2="{:.1}" stroke="#888" stroke-dasharray="4 3"/>"##,
            W - MR,
            py(0.0),
            py(0.0)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">t [s]</text>"#, (W + ML) / 2.0, H - 8.0);
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        let mut pen_up = true;
        for (t, v) in s.t.iter().zip(s.v) {
            if !(t.is_finite() && v.is_finite()) {
                pen_up = true;
                continue;
            }
            let _ = write!(d, "{}{:.2},{:.2} ", if pen_up { "M" } else { "L" }, px(*t), py(*v));
            pen_up = false;
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, d.trim_end());
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            ML + 8.0,
            MT + 16.0 + 14.0 * i as f64,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_one_path_per_series() {
        let t = [0.0, 1.0, 2.0];
        let a = [1.0, f64::NAN, 3.0];
        let b = [0.0, 0.0, 0.0];
        let svg = line_plot(
            "x < y",
            "e",
            &[Series { label: "a", t: &t, v: &a }, Series { label: "b", t: &t, v: &b }],
        );
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains("x &lt; y"));
        // The NaN lifts the pen.
        let first = svg.lines().find(|l| l.starts_with("<path")).unwrap();
        assert_eq!(first.matches('M').count(), 2);
        assert!(!first.contains('L'));
    }
}

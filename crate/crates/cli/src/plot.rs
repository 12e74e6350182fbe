//! Minimal log-log SVG plots: axes, points and an optional fitted line.

use std::fmt::Write as _;

const W: f64 = 480.0;
const H: f64 = 360.0;
const PAD: f64 = 56.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    /// `(slope, intercept)` of `ln y = intercept + slope ln x`.
    pub fit: Option<(f64, f64)>,
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub fn loglog_svg(title: &str, x_label: &str, series: &[Series]) -> String {
    let logs: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = logs.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), (x, y)| (a.min(*x), b.max(*x), c.min(*y), d.max(*y)),
    );
    if logs.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{p} {b} H{r} M{p} {b} V{p}" stroke="black" fill="none"/>"#,
        p = PAD,
        b = H - PAD,
        r = W - PAD
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">1e{v:.2}</text>"#, sx(v), H - PAD + 16.0);
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{v:.2}</text>"#, PAD - 4.0, sy(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(x_label));
    for (i, ser) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        for (x, y) in &ser.points {
            if *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite() {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, sx(x.log10()), sy(y.log10()));
            }
        }
        if let Some((slope, intercept)) = ser.fit {
            // ln-space fit drawn in log10 coordinates
            let y = |lx: f64| (intercept + slope * lx * std::f64::consts::LN_10) / std::f64::consts::LN_10;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}" stroke-dasharray="4 3"/>"#,
                sx(x0),
                sy(y(x0)),
                sx(x1),
                sy(y(x1))
            );
        }
        let label = match ser.fit {
            Some((slope, _)) => format!("{} (slope {slope:.3})", ser.label),
            None => ser.label.to_string(),
        };
        let _ = writeln!(s, r#"<text x="{}" y="{}" fill="{c}">{}</text>"#, PAD + 8.0, 40.0 + 14.0 * i as f64, escape(&label));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_and_line() {
        let pts = vec![(0.1, 1.0), (0.01, 10.0), (0.001, 100.0)];
        let svg = loglog_svg("t", "eps", &[Series { label: "a<b", points: pts, fit: Some((-1.0, 0.0)) }]);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("<line") && svg.contains("a&lt;b"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn empty_series_is_valid() {
        let svg = loglog_svg("t", "x", &[Series { label: "none", points: vec![(0.0, -1.0)], fit: None }]);
        assert!(svg.starts_with("<svg") && !svg.contains("<circle"));
    }
}

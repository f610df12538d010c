//! Log-log line plots written as plain SVG markup.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Slope of a dashed reference line through the centroid of the points
    /// in log-log coordinates.
    pub reference_slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    /// Axes are `log2` of the data; points with nonpositive coordinates are
    /// dropped.
    pub fn to_svg(&self) -> String {
        let logs: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
                    .map(|(x, y)| (x.log2(), y.log2()))
                    .collect()
            })
            .collect();
        let all: Vec<(f64, f64)> = logs.iter().flatten().copied().collect();
        let (mut x0, mut x1, mut y0, mut y1) = all.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
        );
        if all.is_empty() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 - x0 < 1e-9 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 - y0 < 1e-9 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        let (y0, y1) = (y0 - pad, y1 + pad);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
            let x = sx(k as f64);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{k}</text>"#,
                TOP + ph,
                TOP + ph + 5.0,
                TOP + ph + 18.0
            );
        }
        let ystep = ((y1 - y0) / 8.0).ceil().max(1.0) as i64;
        let mut k = (y0.ceil() as i64).div_euclid(ystep) * ystep;
        while (k as f64) <= y1 {
            if (k as f64) >= y0 {
                let y = sy(k as f64);
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{k}</text>"#,
                    LEFT - 5.0,
                    LEFT - 8.0,
                    y + 4.0
                );
            }
            k += ystep;
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">log2 {}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">log2 {}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, (s, pts)) in self.series.iter().zip(&logs).enumerate() {
            let color = COLORS[i % COLORS.len()];
            if pts.is_empty() {
                continue;
            }
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
            for &(x, y) in pts {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
            }
            if let Some(slope) = s.reference_slope {
                let n = pts.len() as f64;
                let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
                let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
                let (ax, bx) = (pts.first().unwrap().0, pts.last().unwrap().0);
                let line = |x: f64| cy + slope * (x - cx);
                let _ = writeln!(
                    out,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                    sx(ax),
                    sy(line(ax)),
                    sx(bx),
                    sy(line(bx))
                );
            }
            let ly = TOP + 16.0 + 16.0 * i as f64;
            let legend = match s.reference_slope {
                Some(slope) => format!("{} (dashed: slope {slope:.3})", s.label),
                None => s.label.clone(),
            };
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{ly:.2}" fill="{color}">{}</text>"#,
                LEFT + 10.0,
                escape(&legend)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emits_dashed_reference_and_points() {
        let p = Plot {
            title: "t < 1".into(),
            x_label: "R".into(),
            y_label: "v".into(),
            series: vec![Series {
                label: "a".into(),
                points: vec![(64.0, 1.0), (128.0, 0.5), (256.0, 0.25)],
                reference_slope: Some(-0.75),
            }],
        };
        let svg = p.to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("stroke-dasharray"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("t &lt; 1"));
    }

    #[test]
    fn survives_empty_and_constant_data() {
        let mut p = Plot { title: String::new(), x_label: "x".into(), y_label: "y".into(), series: vec![] };
        assert!(p.to_svg().ends_with("</svg>\n"));
        p.series.push(Series { label: "c".into(), points: vec![(2.0, 3.0), (2.0, 3.0)], reference_slope: None });
        assert!(!p.to_svg().contains("NaN"));
    }
}

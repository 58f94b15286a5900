//! Minimal standalone SVG line charts.

use std::fmt::Write;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Chart {
    pub title: String,
    pub width: f64,
    pub height: f64,
    pub log_y: bool,
}

impl Default for Chart {
    fn default() -> Self {
        Chart {
            title: String::new(),
            width: 800.0,
            height: 500.0,
            log_y: false,
        }
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_Y: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl Chart {
    /// Renders one `<polyline>` per series. Non-finite points, and non-positive
    /// ones on a log axis, are dropped.
    pub fn render(&self, series: &[Series]) -> String {
        let tf = |y: f64| if self.log_y { y.log10() } else { y };
        let keep =
            |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!self.log_y || y > 0.0);
        let cleaned: Vec<Vec<(f64, f64)>> = series
            .iter()
            .map(|s| {
                s.points
                    .iter()
                    .filter(|p| keep(p))
                    .map(|&(x, y)| (x, tf(y)))
                    .collect()
            })
            .collect();

        let all = cleaned.iter().flatten();
        let (mut x0, mut x1, mut y0, mut y1) = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            let pad = if y0 == 0.0 { 1.0 } else { 0.5 * y0.abs() };
            y0 -= pad;
            y1 += pad;
        }

        let pw = self.width - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = self.height - 2.0 * MARGIN_Y;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_Y + (y1 - y) / (y1 - y0) * ph;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            self.width, self.height, self.width, self.height
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if !self.title.is_empty() {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="16">{}</text>"#,
                MARGIN_LEFT,
                escape(&self.title)
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT:.1}" y="{MARGIN_Y:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="black"/>"#
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = x0 + f * (x1 - x0);
            let yv = y0 + f * (y1 - y0);
            let ylabel = if self.log_y {
                format!("1e{yv:.2}")
            } else {
                format!("{yv:.4e}")
            };
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{:.4}</text>"#,
                sx(xv),
                self.height - MARGIN_Y + 16.0,
                xv
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
                MARGIN_LEFT - 4.0,
                sy(yv) + 4.0,
                ylabel
            );
        }

        for (k, (s, pts)) in series.iter().zip(&cleaned).enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let coords: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                coords.join(" "),
                escape(&s.name)
            );
            let ly = MARGIN_Y + 14.0 + 18.0 * k as f64;
            let lx = self.width - MARGIN_RIGHT + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{ly:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 26.0,
                escape(&s.name)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

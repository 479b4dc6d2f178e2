//! Minimal log-log scatter plots as SVG 1.1.

use std::fmt::Write;

/// Points are given in natural units and drawn on log axes. `fit` is a line
/// `ln y = intercept + slope * ln x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<(f64, f64)>,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 70.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl Plot {
    pub fn render(&self) -> String {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| (x.ln(), y.ln()))
            .collect();
        let (x0, x1) = range(pts.iter().map(|p| p.0));
        let (y0, y1) = range(pts.iter().map(|p| p.1));
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * MARGIN,
            H - 2.0 * MARGIN
        );
        let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#, W / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{} (log scale)</text>"#,
            W / 2.0,
            H - 20.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 20 {})">{} (log scale)</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.y_label)
        );
        for (v, x, anchor) in [(x0, MARGIN, "start"), (x1, W - MARGIN, "end")] {
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{:.2}" text-anchor="{anchor}" font-size="11">{:.3e}</text>"#,
                H - MARGIN + 16.0,
                v.exp()
            );
        }
        for (v, y) in [(y0, H - MARGIN), (y1, MARGIN + 10.0)] {
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{y:.2}" text-anchor="end" font-size="11">{:.3e}</text>"#,
                MARGIN - 4.0,
                v.exp()
            );
        }
        if let Some((slope, intercept)) = self.fit {
            let (ya, yb) = (intercept + slope * x0, intercept + slope * x1);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
                sx(x0),
                sy(ya),
                sx(x1),
                sy(yb)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12" fill="crimson">slope {slope:.4}</text>"#,
                W - MARGIN - 6.0,
                MARGIN + 18.0
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="steelblue"/>"#, sx(*x), sy(*y));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_points_and_fit() {
        let p = Plot {
            title: "a < b".into(),
            x_label: "n".into(),
            y_label: "y".into(),
            points: vec![(1.0, 1.0), (10.0, 0.1), (100.0, 0.01), (0.0, 1.0)],
            fit: Some((-1.0, 0.0)),
        };
        let svg = p.render();
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("slope -1.0000"));
        assert_eq!(svg, p.render());
    }
}

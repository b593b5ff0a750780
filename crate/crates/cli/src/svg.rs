//! Minimal SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 24.0;

fn open(title: &str) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH + 2.0 * MARGIN,
        h = HEIGHT + 2.0 * MARGIN
    )
    .unwrap();
    writeln!(s, "<title>{}</title>", escape(title)).unwrap();
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bars on `[0, 1)` with the given widths (summing to 1) and heights.
pub fn bars(title: &str, widths: &[f64], heights: &[f64]) -> String {
    let top = heights.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut s = open(title);
    let mut x = 0.0;
    for (w, h) in widths.iter().zip(heights) {
        let bh = HEIGHT * h / top;
        writeln!(
            s,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#4a7ab5" stroke="#ffffff" stroke-width="0.5"/>"##,
            MARGIN + WIDTH * x,
            MARGIN + HEIGHT - bh,
            WIDTH * w,
            bh
        )
        .unwrap();
        x += w;
    }
    axis(&mut s, MARGIN + HEIGHT);
    s.push_str("</svg>\n");
    s
}

/// Polyline through `(x, y)` samples, scaled to the data range.
pub fn line(title: &str, xs: &[f64], ys: &[f64]) -> String {
    let (x0, x1) = range(xs);
    let (y0, y1) = range(&ys.iter().cloned().chain([0.0]).collect::<Vec<_>>());
    let sx = |x: f64| MARGIN + WIDTH * (x - x0) / (x1 - x0).max(f64::MIN_POSITIVE);
    let sy = |y: f64| MARGIN + HEIGHT * (y1 - y) / (y1 - y0).max(f64::MIN_POSITIVE);
    let mut s = open(title);
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| format!("{:.3},{:.3}", sx(x), sy(y)))
        .collect();
    writeln!(
        s,
        r##"<polyline fill="none" stroke="#4a7ab5" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    )
    .unwrap();
    axis(&mut s, sy(0.0));
    s.push_str("</svg>\n");
    s
}

fn range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn axis(s: &mut String, y: f64) {
    writeln!(
        s,
        r##"<line x1="{MARGIN}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}" stroke="#333333" stroke-width="1"/>"##,
        MARGIN + WIDTH
    )
    .unwrap();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_bars_have_equal_heights() {
        let s = bars("haar", &[0.25; 4], &[1.0; 4]);
        assert_eq!(s.matches("<rect").count(), 4);
        assert_eq!(s.matches(&format!(r#"height="{HEIGHT:.3}""#)).count(), 4);
        assert!(s.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn line_has_every_point() {
        let s = line("step", &[0.0, 0.5, 1.0], &[1.0, -1.0, 0.0]);
        let pts = s.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 3);
    }
}

//! Minimal SVG charts for the report stage.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Frame {
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let m = (hi - lo) * 0.05;
                (lo - m, hi + m)
            }
        };
        let (x0, x1) = span(&mut xs.clone());
        let (y0, y1) = span(&mut ys.clone());
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * PAD)
    }
}

fn open(out: &mut String, title: &str, x_label: &str, y_label: &str, f: &Frame) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <line x1=\"{PAD}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{PAD}\" y1=\"{PAD}\" x2=\"{PAD}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        W / 2.0,
        escape(title),
        W / 2.0,
        H - 14.0,
        escape(x_label),
        H / 2.0,
        H / 2.0,
        escape(y_label),
        b = H - PAD,
        r = W - PAD,
    );
    for t in 0..=4 {
        let v = f.y0 + (f.y1 - f.y0) * t as f64 / 4.0;
        let _ = writeln!(out, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text>", PAD - 4.0, f.py(v) + 4.0, v);
        let v = f.x0 + (f.x1 - f.x0) * t as f64 / 4.0;
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{:.3}</text>", f.px(v), H - PAD + 14.0, v);
    }
}

/// One polyline per series over x = 1..n.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[(&str, Vec<f64>)]) -> String {
    let n = series.iter().map(|s| s.1.len()).max().unwrap_or(0);
    let f = Frame::new((1..=n.max(1)).map(|i| i as f64), series.iter().flat_map(|s| s.1.iter().copied()));
    let mut out = String::new();
    open(&mut out, title, x_label, y_label, &f);
    for (k, (name, ys)) in series.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        let pts: Vec<String> = ys.iter().enumerate().map(|(i, y)| format!("{:.1},{:.1}", f.px((i + 1) as f64), f.py(*y))).collect();
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"{c}\" stroke-width=\"1.5\" points=\"{}\"/>", pts.join(" "));
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" fill=\"{c}\">{}</text>",
            W - PAD + 4.0 - 120.0,
            PAD + 14.0 * k as f64,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Labelled points.
pub fn scatter(title: &str, x_label: &str, y_label: &str, points: &[(&str, f64, f64)]) -> String {
    let f = Frame::new(points.iter().map(|p| p.1), points.iter().map(|p| p.2));
    let mut out = String::new();
    open(&mut out, title, x_label, y_label, &f);
    for (k, (name, x, y)) in points.iter().enumerate() {
        let c = COLORS[k % COLORS.len()];
        let (px, py) = (f.px(*x), f.py(*y));
        let _ = writeln!(out, "<circle cx=\"{px:.1}\" cy=\"{py:.1}\" r=\"4\" fill=\"{c}\"/>");
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", px + 6.0, py - 6.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

/// Horizontal bars, first item on top.
pub fn bar_chart(title: &str, value_label: &str, bars: &[(&str, f64)]) -> String {
    let h = PAD * 2.0 + 16.0 * bars.len() as f64;
    let max = bars.iter().map(|b| b.1).fold(0.0, f64::max).max(1e-12);
    let left = 160.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        escape(title),
        W / 2.0,
        h - 14.0,
        escape(value_label)
    );
    for (i, (name, v)) in bars.iter().enumerate() {
        let y = PAD + 16.0 * i as f64;
        let w = v.max(0.0) / max * (W - left - PAD);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", left - 4.0, y + 11.0, escape(name));
        let _ = writeln!(out, "<rect x=\"{left}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"12\" fill=\"{}\"/>", COLORS[0]);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_closed_svg_documents() {
        let l = line_chart("t", "x", "y", &[("a", vec![0.5, 0.7]), ("b<c", vec![0.6, 0.6])]);
        let s = scatter("t", "x", "y", &[("p", 1.0, 2.0)]);
        let b = bar_chart("t", "v", &[("f", 1.0), ("g", 0.0)]);
        for doc in [&l, &s, &b] {
            assert!(doc.starts_with("<svg") && doc.trim_end().ends_with("</svg>"));
            assert!(!doc.contains("NaN"));
        }
        assert!(l.contains("b&lt;c"));
        assert_eq!(l.matches("<polyline").count(), 2);
    }
}

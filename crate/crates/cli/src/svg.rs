//! Minimal static SVG rendering of step curves and stacked layers.

use std::fmt::Write;

use kmdecomp::StepFunction;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;

pub const FAILED_FILL: &str = "#d62728";
pub const CENSORED_FILL: &str = "#1f77b4";

/// A filled band between `lower` and `upper`.
pub struct Band<'a> {
    pub lower: &'a StepFunction,
    pub upper: &'a StepFunction,
    pub fill: &'a str,
    pub label: String,
}

pub struct Line<'a> {
    pub curve: &'a StepFunction,
    pub stroke: &'a str,
    pub label: String,
}

pub struct Plot<'a> {
    pub title: String,
    pub x_max: f64,
    pub bands: Vec<Band<'a>>,
    pub lines: Vec<Line<'a>>,
}

struct Frame {
    x_max: f64,
}

impl Frame {
    fn x(&self, tau: f64) -> f64 {
        MARGIN + tau / self.x_max * (WIDTH - 2.0 * MARGIN)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - v * (HEIGHT - 2.0 * MARGIN)
    }

    /// Step-rendered vertices of `f` over `[0, x_max]`.
    fn vertices(&self, f: &StepFunction) -> Vec<(f64, f64)> {
        let mut pts = vec![(self.x(0.0), self.y(f.base()))];
        let mut current = f.base();
        for (&b, &v) in f.breakpoints().iter().zip(f.values()) {
            if b > self.x_max {
                break;
            }
            pts.push((self.x(b), self.y(current)));
            pts.push((self.x(b), self.y(v)));
            current = v;
        }
        pts.push((self.x(self.x_max), self.y(current)));
        pts
    }
}

fn points_attr(pts: &[(f64, f64)]) -> String {
    pts.iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render(plot: &Plot) -> String {
    let frame = Frame {
        x_max: if plot.x_max > 0.0 { plot.x_max } else { 1.0 },
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        plot.title
    );
    for band in &plot.bands {
        let mut pts = frame.vertices(band.upper);
        let mut lower = frame.vertices(band.lower);
        lower.reverse();
        pts.extend(lower);
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{}" fill-opacity="0.55" stroke="white" stroke-width="0.5"><title>{}</title></polygon>"#,
            points_attr(&pts),
            band.fill,
            band.label
        );
    }
    for line in &plot.lines {
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"><title>{}</title></polyline>"#,
            points_attr(&frame.vertices(line.curve)),
            line.stroke,
            line.label
        );
    }
    // axes with ticks at 0, 0.5, 1 and 0, x_max/2, x_max
    let (x0, y0) = (frame.x(0.0), frame.y(0.0));
    let _ = writeln!(
        s,
        r#"<polyline points="{x0},{} {x0},{y0} {},{y0}" fill="none" stroke="black"/>"#,
        frame.y(1.0),
        frame.x(frame.x_max)
    );
    for v in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{v}</text>"#,
            x0 - 6.0,
            frame.y(v) + 4.0
        );
    }
    for t in [0.0, frame.x_max / 2.0, frame.x_max] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            frame.x(t),
            y0 + 16.0,
            crate::output::fmt_sig((t * 1000.0).round() / 1000.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

//! Minimal static SVG line plots.

use std::fmt::Write;

use crate::table::ResultTable;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#d95f02", "#7570b3", "#1b9e77", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

/// A line plot of table columns against one x column.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
}

impl PlotSpec {
    pub fn new(title: impl Into<String>, x: &str, ys: &[&str]) -> Self {
        PlotSpec {
            title: title.into(),
            x: x.to_string(),
            ys: ys.iter().map(|s| s.to_string()).collect(),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return None;
    }
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        Some((lo - 0.5, hi + 0.5))
    } else {
        Some((lo, hi))
    }
}

/// Renders the columns named in `spec`. Missing cells break the polyline.
pub fn render(table: &ResultTable, spec: &PlotSpec) -> Option<String> {
    let xs = table.column(&spec.x)?;
    let series: Vec<(&str, Vec<Option<f64>>)> = spec
        .ys
        .iter()
        .filter_map(|name| Some((name.as_str(), table.column(name)?)))
        .collect();
    let (x0, x1) = bounds(xs.iter().flatten().copied())?;
    let (y0, y1) = bounds(
        series
            .iter()
            .flat_map(|(_, ys)| ys.iter().flatten().copied()),
    )?;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<polyline points="{l},{t} {l},{b} {r},{b}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#,
            px(xv),
            b + 16.0,
            xv
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            l - 6.0,
            py(yv) + 4.0,
            yv
        );
    }
    let xk = table.column_index(&spec.x)?;
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{} [{}]</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(&spec.x),
        escape(&table.units[xk])
    );
    for (i, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut segment: Vec<String> = Vec::new();
        let flush = |seg: &mut Vec<String>, s: &mut String| {
            if seg.len() > 1 {
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    seg.join(" ")
                );
            }
            seg.clear();
        };
        for (x, y) in xs.iter().zip(ys) {
            match (x, y) {
                (Some(x), Some(y)) => segment.push(format!("{:.2},{:.2}", px(*x), py(*y))),
                _ => flush(&mut segment, &mut s),
            }
        }
        flush(&mut segment, &mut s);
        let ly = t + 14.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            r - 150.0,
            ly,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

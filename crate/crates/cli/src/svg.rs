//! Minimal SVG line plot for density curves.
//!
//! Fixed 800x600 viewBox with linear axes. Curves that exceed the ceiling are
//! cut where they cross it and marked with a small triangle.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// One curve to plot.
pub struct Series<'a> {
    pub label: String,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

/// Renders `series` on `[0, x_max] x [0, ceiling]`.
pub fn line_plot(series: &[Series<'_>], x_max: f64, ceiling: f64, x_label: &str, y_label: &str) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + x / x_max * plot_w;
    let py = |y: f64| TOP + plot_h - y / ceiling * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes and ticks
    let (x0, y0) = (px(0.0), py(0.0));
    let _ = writeln!(
        out,
        r#"<path d="M{x0:.2},{:.2} L{x0:.2},{y0:.2} L{:.2},{y0:.2}" stroke="black" fill="none"/>"#,
        py(ceiling),
        px(x_max)
    );
    for i in 0..=5 {
        let xv = x_max * i as f64 / 5.0;
        let yv = ceiling * i as f64 / 5.0;
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{y0:.2}" x2="{0:.2}" y2="{1:.2}" stroke="black"/><text x="{0:.2}" y="{2:.2}" text-anchor="middle">{3}</text>"#,
            px(xv),
            y0 + 5.0,
            y0 + 20.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end">{5}</text>"#,
            x0 - 5.0,
            py(yv),
            x0,
            x0 - 8.0,
            py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let (points, clip) = clip_curve(s.x, s.y, ceiling);
        let coords: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="curve" data-label="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            escape(&s.label),
            coords.join(" ")
        );
        if let Some(xc) = clip {
            let (cx, cy) = (px(xc), py(ceiling));
            let _ = writeln!(
                out,
                r#"<path class="clip-marker" d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2} Z" fill="{color}"/>"#,
                cx - 5.0,
                cy + 2.0,
                cx + 5.0,
                cy + 2.0,
                cx,
                cy - 7.0
            );
        }
        let ly = TOP + 20.0 + 22.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 25.0,
            lx + 32.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="11">curves clipped at {}</text>"#,
        WIDTH - RIGHT + 15.0,
        HEIGHT - BOTTOM,
        tick(ceiling)
    );
    out.push_str("</svg>\n");
    out
}

/// Points of the curve up to where it first leaves `[0, ceiling]`, with the
/// crossing interpolated, and the crossing abscissa if clipping happened.
fn clip_curve(x: &[f64], y: &[f64], ceiling: f64) -> (Vec<(f64, f64)>, Option<f64>) {
    let mut pts = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        if y[i].is_finite() && y[i] <= ceiling {
            pts.push((x[i], y[i]));
            continue;
        }
        let xc = match pts.last() {
            Some(&(xp, yp)) if y[i].is_finite() => xp + (ceiling - yp) / (y[i] - yp) * (x[i] - xp),
            Some(&(xp, _)) => 0.5 * (xp + x[i]),
            None => x[i],
        };
        pts.push((xc, ceiling));
        return (pts, Some(xc));
    }
    (pts, None)
}

fn tick(v: f64) -> String {
    crate::format::sig(v, 3)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_interpolates_crossing() {
        let (pts, clip) = clip_curve(&[0.0, 1.0, 2.0], &[0.0, 5.0, 20.0], 10.0);
        assert_eq!(clip, Some(1.0 + 5.0 / 15.0));
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[2].1, 10.0);
        let (pts, clip) = clip_curve(&[0.0, 1.0], &[1.0, f64::INFINITY], 10.0);
        assert_eq!(clip, Some(0.5));
        assert_eq!(pts.len(), 2);
        let (_, clip) = clip_curve(&[0.0, 1.0], &[1.0, 2.0], 10.0);
        assert_eq!(clip, None);
    }

    #[test]
    fn plot_has_fixed_viewbox_and_legend() {
        let x = [0.0, 0.5, 1.0];
        let y = [1.0, 1.0, 1.0];
        let svg = line_plot(
            &[Series {
                label: "rho = 0.5".into(),
                x: &x,
                y: &y,
            }],
            1.0,
            10.0,
            "s",
            "density",
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        assert!(svg.contains("rho = 0.5"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(!svg.contains("clip-marker"));
    }
}

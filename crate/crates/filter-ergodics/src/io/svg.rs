//! Minimal single-series SVG line charts, emitted as direct markup.

use std::fmt::Write;

/// Render one series as an SVG line chart.
///
/// The header comment documents the axes and sampling: x is the step index
/// (linear, left to right), y is the value (linear, bottom to top, axis from
/// 0 to the data maximum rounded up), every point of the series is plotted,
/// and the curve is a single 1.5px polyline.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, values: &[f64]) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const MARGIN: f64 = 50.0;
    let plot_w = W - 2.0 * MARGIN;
    let plot_h = H - 2.0 * MARGIN;
    let y_max = values.iter().cloned().fold(0.0_f64, f64::max).max(1e-12);
    let y_axis_max = if y_max <= 1.0 {
        1.0
    } else {
        y_max.ceil()
    };
    let n = values.len().max(2);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<!-- {title}: x = {x_label} (linear, 0..{last}), y = {y_label} (linear, 0..{ymax}); \
         all {count} points plotted; single 1.5px polyline -->",
        last = values.len().saturating_sub(1),
        ymax = y_axis_max,
        count = values.len()
    );
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>"
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>",
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN
    );
    // Tick labels at the axis extremes.
    let _ = writeln!(
        svg,
        "<text x=\"{m}\" y=\"{y}\" font-size=\"12\" text-anchor=\"middle\">0</text>",
        m = MARGIN,
        y = H - MARGIN + 16.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" text-anchor=\"middle\">{last}</text>",
        x = W - MARGIN,
        y = H - MARGIN + 16.0,
        last = values.len().saturating_sub(1)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" text-anchor=\"end\">{ymax}</text>",
        x = MARGIN - 6.0,
        y = MARGIN + 4.0,
        ymax = y_axis_max
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"13\">{title}</text>",
        x = MARGIN,
        y = MARGIN - 14.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>",
        x = W / 2.0,
        y = H - 10.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{y}\" font-size=\"12\" transform=\"rotate(-90 14 {y})\" text-anchor=\"middle\">{y_label}</text>",
        y = H / 2.0
    );
    // The series.
    let mut points = String::new();
    for (i, &v) in values.iter().enumerate() {
        let x = MARGIN + plot_w * i as f64 / (n - 1) as f64;
        let y = H - MARGIN - plot_h * (v / y_axis_max).clamp(0.0, 1.0);
        let _ = write!(points, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(
        svg,
        "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"{}\"/>",
        points.trim_end()
    );
    let _ = writeln!(svg, "</svg>");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chart_contains_all_points_and_header() {
        let values = vec![0.0, 0.5, 1.0, 0.25];
        let svg = line_chart_svg("mean distance", "n", "tv", &values);
        assert!(svg.starts_with("<!--"));
        assert!(svg.contains("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("all 4 points plotted"));
        assert!(svg.ends_with("</svg>\n"));
    }
}

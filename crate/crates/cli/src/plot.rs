//! Self-contained SVG emission: log-log error curves with theoretical
//! guide lines.

use std::fmt::Write as _;

use crate::{CliError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct PlotInput {
    pub label: String,
    /// (N, err) rows with strictly positive values.
    pub rows: Vec<(f64, f64)>,
}

/// Render traces on log-log axes. When schedule exponents are given, two
/// guide lines with the theoretical slopes are anchored at the last point
/// of the first trace.
pub fn render_svg(traces: &[PlotInput], guides: Option<(f64, f64)>) -> Result<String> {
    if traces.is_empty() || traces.iter().any(|t| t.rows.is_empty()) {
        return Err(CliError::Invalid(
            "plot needs at least one nonempty trace".into(),
        ));
    }
    for t in traces {
        if t.rows.iter().any(|&(n, e)| !(n > 0.0) || !(e > 0.0)) {
            return Err(CliError::Invalid(format!(
                "trace `{}` has nonpositive values; log axes need positive data",
                t.label
            )));
        }
    }
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for t in traces {
        for &(n, e) in &t.rows {
            xmin = xmin.min(n.log10());
            xmax = xmax.max(n.log10());
            ymin = ymin.min(e.log10());
            ymax = ymax.max(e.log10());
        }
    }
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(1e-9);
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    };
    pad(&mut xmin, &mut xmax);
    pad(&mut ymin, &mut ymax);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * plot_w;
    let py = |y: f64| TOP + (ymax - y) / (ymax - ymin) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<defs><clipPath id=\"plot\"><rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{plot_w}\" height=\"{plot_h}\"/></clipPath></defs>"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // Axes.
    let _ = writeln!(
        svg,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"black\"/>"
    );
    // Decade ticks.
    let mut k = xmin.ceil() as i64;
    while (k as f64) <= xmax {
        let x = px(k as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#cccccc\"/>",
            TOP,
            TOP + plot_h
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">1e{k}</text>",
            TOP + plot_h + 18.0
        );
        k += 1;
    }
    let mut k = ymin.ceil() as i64;
    while (k as f64) <= ymax {
        let y = py(k as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#cccccc\"/>",
            LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"end\">1e{k}</text>",
            LEFT - 6.0,
            y + 4.0
        );
        k += 1;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">samples N</text>",
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">successive error</text>",
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    // Guide lines with the theoretical slopes, anchored at the last point
    // of the first trace.
    if let Some((a, b)) = guides {
        let new_rate = -a / (2.0 * a + 1.0);
        let old_rate = b / (2.0 * a + 1.0);
        let (n0, e0) = *traces[0].rows.last().unwrap();
        let (x0, y0) = (n0.log10(), e0.log10());
        for (slope, name, dash) in [(new_rate, "theory", "6,3"), (old_rate, "old theory", "2,3")] {
            let y_at = |x: f64| y0 + slope * (x - x0);
            let _ = writeln!(
                svg,
                "<line class=\"guide guide-{}\" clip-path=\"url(#plot)\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#555555\" stroke-dasharray=\"{dash}\"/>",
                name.replace(' ', "-"),
                px(xmin),
                py(y_at(xmin)),
                px(xmax),
                py(y_at(xmax))
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"#555555\">{name} ({slope:.3})</text>",
                px(x0) - 80.0,
                py(y_at(x0)) - 6.0
            );
        }
    }

    for (idx, t) in traces.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut points = String::new();
        for &(n, e) in &t.rows {
            let _ = write!(points, "{:.2},{:.2} ", px(n.log10()), py(e.log10()));
        }
        let _ = writeln!(
            svg,
            "<polyline class=\"trace\" clip-path=\"url(#plot)\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.trim_end()
        );
        let (n_last, e_last) = *t.rows.last().unwrap();
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" fill=\"{color}\">{}</text>",
            px(n_last.log10()) - 40.0,
            py(e_last.log10()) - 8.0,
            t.label
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

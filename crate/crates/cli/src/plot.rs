//! Deterministic SVG phase plots: one polyline per trajectory with a start
//! marker, a star on the target point, and a legend when several
//! trajectories are overlaid. Output bytes depend only on the inputs.

use minmax_core::trajectory::TrajectoryRow;

use crate::config::{config_err, CliError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#e377c2",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub fn series_from_rows(label: String, rows: &[TrajectoryRow<f64>]) -> Result<Series, CliError> {
    if rows.is_empty() {
        return Err(config_err(format!("trajectory '{label}' has no rows")));
    }
    Ok(Series {
        label,
        points: rows.iter().map(|r| (r.x[0], r.y[0])).collect(),
    })
}

fn fmt(v: f64) -> String {
    // two decimals is sub-pixel on this canvas and keeps bytes stable
    format!("{v:.2}")
}

/// Render the overlay. Coordinates are mapped so the bounding box of all
/// points plus the target fills the canvas minus margins; the y axis points
/// up.
pub fn render(series: &[Series], target: (f64, f64)) -> String {
    let (mut lo_x, mut hi_x) = (target.0, target.0);
    let (mut lo_y, mut hi_y) = (target.1, target.1);
    for s in series {
        for &(x, y) in &s.points {
            lo_x = lo_x.min(x);
            hi_x = hi_x.max(x);
            lo_y = lo_y.min(y);
            hi_y = hi_y.max(y);
        }
    }
    // pad the data box; a degenerate axis still gets a visible span
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        let p = if span > 0.0 { 0.08 * span } else { 1.0 };
        *lo -= p;
        *hi += p;
    };
    pad(&mut lo_x, &mut hi_x);
    pad(&mut lo_y, &mut hi_y);

    let sx = (WIDTH - 2.0 * MARGIN) / (hi_x - lo_x);
    let sy = (HEIGHT - 2.0 * MARGIN) / (hi_y - lo_y);
    let map = |x: f64, y: f64| -> (f64, f64) {
        (MARGIN + (x - lo_x) * sx, HEIGHT - MARGIN - (y - lo_y) * sy)
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

    // frame and corner coordinate labels
    out.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"#999999\"/>\n",
        m = fmt(MARGIN),
        w = fmt(WIDTH - 2.0 * MARGIN),
        h = fmt(HEIGHT - 2.0 * MARGIN)
    ));
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">x: {} .. {}</text>\n",
        fmt(MARGIN),
        fmt(HEIGHT - 12.0),
        fmt(lo_x),
        fmt(hi_x)
    ));
    out.push_str(&format!(
        "<text x=\"8\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" transform=\"rotate(-90 8 {})\">y: {} .. {}</text>\n",
        fmt(HEIGHT - MARGIN),
        fmt(HEIGHT - MARGIN),
        fmt(lo_y),
        fmt(hi_y)
    ));

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{},{}", fmt(px), fmt(py))
            })
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        let (sx0, sy0) = map(s.points[0].0, s.points[0].1);
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{color}\"/>\n",
            fmt(sx0),
            fmt(sy0)
        ));
    }

    // five-pointed star on the target
    let (tx, ty) = map(target.0, target.1);
    let star: Vec<String> = (0..10)
        .map(|k| {
            let angle = -std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / 5.0;
            let r = if k % 2 == 0 { 9.0 } else { 3.6 };
            format!(
                "{},{}",
                fmt(tx + r * angle.cos()),
                fmt(ty + r * angle.sin())
            )
        })
        .collect();
    out.push_str(&format!(
        "<polygon points=\"{}\" fill=\"#f5b301\" stroke=\"#333333\"/>\n",
        star.join(" ")
    ));

    if series.len() > 1 {
        for (i, s) in series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = MARGIN + 16.0 + 16.0 * i as f64;
            out.push_str(&format!(
                "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
                x1 = fmt(WIDTH - MARGIN - 150.0),
                x2 = fmt(WIDTH - MARGIN - 126.0),
                y = fmt(y),
            ));
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
                fmt(WIDTH - MARGIN - 120.0),
                fmt(y + 4.0),
                xml_escape(&s.label)
            ));
        }
    }

    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(label: &str, pts: &[(f64, f64)]) -> Series {
        Series {
            label: label.into(),
            points: pts.to_vec(),
        }
    }

    #[test]
    fn identical_inputs_render_identical_bytes() {
        let s = vec![toy("a", &[(0.0, 0.0), (1.0, 2.0), ((0.5), 1.0)])];
        assert_eq!(render(&s, (0.0, 0.0)), render(&s, (0.0, 0.0)));
    }

    #[test]
    fn single_series_has_no_legend_multi_does() {
        let one = render(&[toy("a", &[(0.0, 0.0), (1.0, 1.0)])], (0.0, 0.0));
        assert_eq!(one.matches("<polyline").count(), 1);
        assert!(!one.contains("<line"));
        let three = render(
            &[
                toy("a", &[(0.0, 0.0), (1.0, 1.0)]),
                toy("b", &[(2.0, 0.0), (1.0, 1.0)]),
                toy("c", &[(0.0, 2.0), (1.0, 1.0)]),
            ],
            (0.0, 0.0),
        );
        assert_eq!(three.matches("<polyline").count(), 3);
        assert_eq!(three.matches("<line").count(), 3);
        assert!(three.contains(">a</text>"));
    }

    #[test]
    fn degenerate_single_point_still_renders() {
        let svg = render(&[toy("p", &[(3.0, 3.0)])], (3.0, 3.0));
        assert!(svg.contains("<polygon"));
        assert!(!svg.contains("NaN"));
        assert!(!svg.contains("inf"));
    }
}

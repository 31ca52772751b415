//! Static SVG line charts.

use std::fmt::Write as _;
use std::io::{self, Write};

use jetsim_core::signals::Trajectory;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const MARGIN: f64 = 60.0;
const MAX_POINTS: usize = 2000;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

impl Series {
    /// Channel `channel` of `traj`, thinned to at most a few thousand points.
    pub fn from_trajectory(label: String, traj: &Trajectory, channel: usize, dashed: bool) -> Self {
        let grid = traj.grid();
        let stride = grid.count().div_ceil(MAX_POINTS).max(1);
        let mut points: Vec<(f64, f64)> =
            (0..grid.count()).step_by(stride).map(|k| (grid.time(k), traj.values()[(channel, k)])).collect();
        let last = grid.count() - 1;
        if !last.is_multiple_of(stride) {
            points.push((grid.time(last), traj.values()[(channel, last)]));
        }
        Self { label, points, dashed }
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Draws every series on shared axes, solid or dashed, with a legend. The
/// output depends only on the data.
pub fn line_chart<W: Write>(title: &str, x_label: &str, series: &[Series], mut out: W) -> io::Result<()> {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = bounds(all().map(|p| p.0));
    let (y0, y1) = bounds(all().map(|p| p.1));
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for i in 0..=4 {
        let f = f64::from(i) / 4.0;
        let (x, y) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x:.3}</text>"#,
            sx(x),
            HEIGHT - MARGIN + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.3}</text>"#,
            MARGIN - 6.0,
            sy(y) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[(idx / 2) % PALETTE.len()];
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let mut path = String::new();
        for (x, y) in &s.points {
            let _ = write!(path, "{:.2},{:.2} ", sx(*x), sy(*y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
            path.trim_end()
        );
        let ly = MARGIN + 16.0 + 16.0 * idx as f64;
        let lx = WIDTH - MARGIN - 120.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 24.0
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, s.label);
    }
    svg.push_str("</svg>\n");
    out.write_all(svg.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use jetsim_core::signals::TimeGrid;

    #[test]
    fn chart_contains_one_polyline_per_series() {
        let grid = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let traj = Trajectory::from_fn(grid, 1, |t, out| out[0] = t * t).unwrap();
        let series = [
            Series::from_trajectory("a".into(), &traj, 0, false),
            Series::from_trajectory("b".into(), &traj, 0, true),
        ];
        let mut buf = Vec::new();
        line_chart("demo", "t", &series, &mut buf).unwrap();
        let svg = String::from_utf8(buf).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn long_series_are_thinned_but_keep_endpoints() {
        let grid = TimeGrid::new(0.0, 1e-3, 10_001).unwrap();
        let traj = Trajectory::from_fn(grid, 1, |t, out| out[0] = t).unwrap();
        let s = Series::from_trajectory("x".into(), &traj, 0, false);
        assert!(s.points.len() <= MAX_POINTS + 1);
        assert_eq!(s.points.last().unwrap().0, grid.end());
        assert_eq!(s.points[0].0, 0.0);
    }
}

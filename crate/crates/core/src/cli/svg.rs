//! Energy-versus-iteration plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{HullError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;

/// Single-polyline SVG of `history` against its index, with axes and the
/// value range on the vertical axis.
pub fn render_svg(history: &[f64]) -> Result<String> {
    if history.is_empty() {
        return Err(HullError::Input("cannot plot an empty history".into()));
    }
    if history.iter().any(|v| !v.is_finite()) {
        return Err(HullError::Input("history contains non-finite values".into()));
    }
    let lo = history.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let steps = (history.len() - 1).max(1) as f64;
    let (x0, x1) = (MARGIN, WIDTH - MARGIN / 2.0);
    let (y0, y1) = (HEIGHT - MARGIN, MARGIN / 2.0);
    let px = |k: usize| x0 + (x1 - x0) * k as f64 / steps;
    // a constant history sits in the middle of the plot
    let py = |v: f64| {
        if hi > lo {
            y0 + (y1 - y0) * (v - lo) / span
        } else {
            0.5 * (y0 + y1)
        }
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"#
    );
    let _ = writeln!(
        s,
        r#"<g font-family="sans-serif" font-size="11"><text x="{x0}" y="{}" >0</text><text x="{x1}" y="{}" text-anchor="end">{}</text><text x="4" y="{y0}">{lo:.6}</text><text x="4" y="{}">{hi:.6}</text><text x="{}" y="{}" text-anchor="middle">iteration</text></g>"#,
        y0 + 16.0,
        y0 + 16.0,
        history.len() - 1,
        y1 + 10.0,
        0.5 * (x0 + x1),
        HEIGHT - 8.0,
    );
    let points: Vec<String> = history
        .iter()
        .enumerate()
        .map(|(k, &v)| format!("{:.3},{:.3}", px(k), py(v)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{}"/>"#,
        points.join(" ")
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(history: &[f64], path: &Path) -> Result<()> {
    let s = render_svg(history)?;
    std::fs::write(path, s)?;
    Ok(())
}

/// Vertex coordinates of the single polyline in an SVG from [`render_svg`].
pub fn polyline_points(svg: &str) -> Option<Vec<(f64, f64)>> {
    let start = svg.find("points=\"")? + 8;
    let end = start + svg[start..].find('"')?;
    svg[start..end]
        .split_whitespace()
        .map(|p| {
            let (x, y) = p.split_once(',')?;
            Some((x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}

//! SVG figures of the level-curve geometry: the ℓ level curves through
//! each depicted source point, the centers, and tangency markers at
//! singular points.
//!
//! Output is deterministic, hand-assembled SVG. Every level curve — even
//! an empty one — contributes exactly one element carrying the
//! `level-curve` class, so a figure shows ℓ curve elements per depicted
//! point. A y-flip group keeps element coordinates in world orientation.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::conic::ConicKind;
use crate::foliation::{levels_through_point, FoliationLevel};
use crate::map::{GdsMapping, Point2};

#[derive(Debug, Error)]
pub enum FigureError {
    #[error("nothing to depict: no singular points and no probe point")]
    NothingToDepict,
    #[error("failed to write figure: {0}")]
    Io(#[from] std::io::Error),
}

/// Open-curve branches are sampled at this many points.
const CURVE_SAMPLES: usize = 129;

/// Renders the figure and writes it to `out`.
pub fn render_figure(
    m: &GdsMapping,
    singular_points: &[Point2],
    probe: Option<Point2>,
    out: &Path,
) -> Result<(), FigureError> {
    let svg = figure_svg(m, singular_points, probe)?;
    std::fs::write(out, svg)?;
    Ok(())
}

/// Builds the SVG document. Singular points get their level curves and a
/// tangency marker; when there are none, the level curves through `probe`
/// depict the non-tangent geometry instead.
pub fn figure_svg(
    m: &GdsMapping,
    singular_points: &[Point2],
    probe: Option<Point2>,
) -> Result<String, FigureError> {
    let depicted: Vec<Point2> = if singular_points.is_empty() {
        probe.into_iter().collect()
    } else {
        singular_points.to_vec()
    };
    if depicted.is_empty() {
        return Err(FigureError::NothingToDepict);
    }

    let levels: Vec<Vec<FoliationLevel>> = depicted
        .iter()
        .map(|&q| levels_through_point(m, q))
        .collect();

    let window = fit_window(m, &depicted, &levels);
    let extent = (window.1 .0 - window.0 .0).max(window.1 .1 - window.0 .1);
    let marker_r = 0.012 * extent;
    let stroke_w = 0.004 * extent;

    let mut body = String::new();
    for per_point in &levels {
        for level in per_point {
            body.push_str(&level_element(level, window, stroke_w));
        }
    }
    for p in m.centers().points() {
        let _ = writeln!(
            body,
            r##"    <circle class="center" cx="{}" cy="{}" r="{}" fill="#202020" stroke="none"/>"##,
            num(p.x1),
            num(p.x2),
            num(marker_r)
        );
    }
    if !singular_points.is_empty() {
        for q in &depicted {
            let _ = writeln!(
                body,
                r##"    <circle class="tangency" cx="{}" cy="{}" r="{}" fill="none" stroke="#c22020" stroke-width="{}"/>"##,
                num(q.x1),
                num(q.x2),
                num(1.6 * marker_r),
                num(stroke_w)
            );
        }
    }

    let ((x0, y0), (x1, y1)) = window;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(x0),
        num(-y1),
        num(x1 - x0),
        num(y1 - y0)
    );
    let _ = writeln!(svg, r#"  <g transform="matrix(1 0 0 -1 0 0)">"#);
    svg.push_str(&body);
    svg.push_str("  </g>\n</svg>\n");
    Ok(svg)
}

type Window = ((f64, f64), (f64, f64));

/// World window covering centers, depicted points, and closed-curve
/// extents, inflated by 12%.
fn fit_window(m: &GdsMapping, depicted: &[Point2], levels: &[Vec<FoliationLevel>]) -> Window {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut add = |x: f64, y: f64| {
        if x.is_finite() && y.is_finite() {
            xs.push(x);
            ys.push(y);
        }
    };
    for p in m.centers().points() {
        add(p.x1, p.x2);
    }
    for q in depicted {
        add(q.x1, q.x2);
    }
    for level in levels.iter().flatten() {
        if let Some((rx, ry)) = ellipse_radii(level) {
            add(level.center.x1 - rx, level.center.x2 - ry);
            add(level.center.x1 + rx, level.center.x2 + ry);
        }
    }
    let (mut x0, mut x1) = min_max(&xs);
    let (mut y0, mut y1) = min_max(&ys);
    let span = (x1 - x0).max(y1 - y0).max(1.0);
    let pad = 0.12 * span;
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    ((x0, y0), (x1, y1))
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (-1.0, 1.0)
    } else {
        (lo, hi)
    }
}

/// Semi-axes when the level is a real ellipse or circle around its center.
fn ellipse_radii(level: &FoliationLevel) -> Option<(f64, f64)> {
    let (a1, a2) = (level.conic.c20, level.conic.c02);
    let c = level.value;
    let (rx2, ry2) = (c / a1, c / a2);
    (rx2 > 0.0 && ry2 > 0.0).then(|| (rx2.sqrt(), ry2.sqrt()))
}

/// One SVG element for one level curve, classed by its kind.
fn level_element(level: &FoliationLevel, window: Window, stroke_w: f64) -> String {
    let kind_slug = kind_class(level.kind);
    let stroke = match level.kind {
        ConicKind::Ellipse => "#d62728",
        ConicKind::Circle => "#1f77b4",
        _ => "#2ca02c",
    };
    match level.kind {
        ConicKind::Ellipse | ConicKind::Circle => {
            let (rx, ry) = match ellipse_radii(level) {
                Some(r) => r,
                None => return empty_curve(kind_slug),
            };
            if level.kind == ConicKind::Circle {
                format!(
                    "    <circle class=\"level-curve {kind_slug}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>\n",
                    num(level.center.x1),
                    num(level.center.x2),
                    num(rx),
                    num(stroke_w)
                )
            } else {
                format!(
                    "    <ellipse class=\"level-curve {kind_slug}\" cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>\n",
                    num(level.center.x1),
                    num(level.center.x2),
                    num(rx),
                    num(ry),
                    num(stroke_w)
                )
            }
        }
        ConicKind::SinglePoint => format!(
            "    <circle class=\"level-curve {kind_slug}\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{stroke}\" stroke=\"none\"/>\n",
            num(level.center.x1),
            num(level.center.x2),
            num(0.006 * ((window.1 .0 - window.0 .0).max(window.1 .1 - window.0 .1))),
        ),
        _ => {
            let d = sampled_path(level, window);
            format!(
                "    <path class=\"level-curve {kind_slug}\" d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>\n",
                num(stroke_w)
            )
        }
    }
}

fn empty_curve(kind_slug: &str) -> String {
    format!("    <path class=\"level-curve {kind_slug}\" d=\"\" fill=\"none\" stroke=\"none\"/>\n")
}

fn kind_class(kind: ConicKind) -> &'static str {
    match kind {
        ConicKind::Ellipse => "ellipse",
        ConicKind::Circle => "circle",
        ConicKind::Parabola => "parabola",
        ConicKind::Hyperbola => "hyperbola",
        ConicKind::RectangularHyperbola => "rectangular-hyperbola",
        ConicKind::IntersectingLines => "intersecting-lines",
        ConicKind::ParallelLines => "parallel-lines",
        ConicKind::SingleLine => "single-line",
        ConicKind::SinglePoint => "single-point",
        ConicKind::Empty => "empty",
        ConicKind::WholePlane => "whole-plane",
    }
}

/// Samples an axis-aligned implicit level `a1 u² + a2 v² = c` inside the
/// window; branches become subpaths of a single path element.
fn sampled_path(level: &FoliationLevel, window: Window) -> String {
    let (a1, a2) = (level.conic.c20, level.conic.c02);
    let (p1, p2) = (level.center.x1, level.center.x2);
    let c = level.value;
    let ((x0, y0), (x1, y1)) = window;

    // Solve for the coordinate with the sign opposite to its coefficient's
    // contribution: branches are u = ±sqrt((c − a2 v²)/a1) over sampled v.
    let mut d = String::new();
    let solve_along_y = a1.abs() >= a2.abs();
    for sign in [1.0f64, -1.0] {
        let mut pen_down = false;
        for s in 0..CURVE_SAMPLES {
            let t = s as f64 / (CURVE_SAMPLES - 1) as f64;
            let (x, y) = if solve_along_y {
                let v = y0 + t * (y1 - y0);
                let rad = (c - a2 * (v - p2) * (v - p2)) / a1;
                if rad < 0.0 {
                    pen_down = false;
                    continue;
                }
                (p1 + sign * rad.sqrt(), v)
            } else {
                let u = x0 + t * (x1 - x0);
                let rad = (c - a1 * (u - p1) * (u - p1)) / a2;
                if rad < 0.0 {
                    pen_down = false;
                    continue;
                }
                (u, p2 + sign * rad.sqrt())
            };
            if !(x.is_finite() && y.is_finite()) || x < x0 || x > x1 || y < y0 || y > y1 {
                pen_down = false;
                continue;
            }
            if pen_down {
                let _ = write!(d, " L {} {}", num(x), num(y));
            } else {
                if !d.is_empty() {
                    d.push(' ');
                }
                let _ = write!(d, "M {} {}", num(x), num(y));
                pen_down = true;
            }
        }
    }
    d
}

/// Fixed six-decimal formatting; normalizes negative zero.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

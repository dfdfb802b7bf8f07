//! The foliation view: level curves of the components and the tangency
//! oracle that re-derives singular points geometrically.
//!
//! A point is singular exactly when the ℓ level conics through it share a
//! tangent line. The oracle never touches the Jacobian routine: gradients
//! are recomputed from the level-conic coefficients, a grid scan locates
//! basins of the worst pairwise tangency defect, a derivative-free compass
//! descent narrows each basin, and a Gauss–Newton pass on the raw cross
//! products certifies the minimum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{classify_conic, Conic, ConicKind, DEFAULT_CLASSIFY_TOL};
use crate::map::{evaluate, rank_at, GdsMapping, Point2};

/// Default tolerance on the normalized tangency objective.
pub const DEFAULT_TANGENCY_TOL: f64 = 1e-7;

/// Default grid resolution for the oracle scan.
pub const DEFAULT_ORACLE_GRID: usize = 200;

/// Gradient floor (relative to row scale and |q|) below which a grid node
/// is excluded: the tangency direction is numerically meaningless there.
const GRAD_EXCLUSION_REL: f64 = 1e-4;

/// An axis-aligned search or sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl BoundingBox {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self { x0, y0, x1, y1 }
    }

    pub fn is_valid(&self) -> bool {
        self.x0.is_finite()
            && self.y0.is_finite()
            && self.x1.is_finite()
            && self.y1.is_finite()
            && self.x0 < self.x1
            && self.y0 < self.y1
    }

    pub fn contains(&self, q: Point2) -> bool {
        self.x0 <= q.x1 && q.x1 <= self.x1 && self.y0 <= q.x2 && q.x2 <= self.y1
    }

    /// Distance from `q` to the nearest box edge (negative outside).
    pub fn edge_margin(&self, q: Point2) -> f64 {
        (q.x1 - self.x0)
            .min(self.x1 - q.x1)
            .min(q.x2 - self.y0)
            .min(self.y1 - q.x2)
    }
}

/// Default oracle window: the centers' bounding box inflated by factor 3,
/// with degenerate extents padded to a fifth of the larger one.
pub fn default_search_box(m: &GdsMapping) -> BoundingBox {
    let points = m.centers().points();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x1);
        x1 = x1.max(p.x1);
        y0 = y0.min(p.x2);
        y1 = y1.max(p.x2);
    }
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let hmax = hx.max(hy).max(1e-3);
    let pad = |h: f64| 3.0 * h.max(0.2 * hmax);
    BoundingBox::new(cx - pad(hx), cy - pad(hy), cx + pad(hx), cy + pad(hy))
}

/// One leaf of the image foliation pulled back through a source point.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliationLevel {
    /// Component index (0-based).
    pub index: usize,
    pub center: Point2,
    /// Level value `c_i = F_i(q)`.
    pub value: f64,
    /// Implicit conic `a_i1 (x1 − p_i1)² + a_i2 (x2 − p_i2)² − c_i`.
    pub conic: Conic,
    pub kind: ConicKind,
}

/// The ℓ level conics through `q`, one per component, with classification.
pub fn levels_through_point(m: &GdsMapping, q: Point2) -> Vec<FoliationLevel> {
    let values = evaluate(m, q);
    m.coefficients()
        .rows()
        .iter()
        .zip(m.centers().points())
        .zip(values)
        .enumerate()
        .map(|(index, ((row, &center), value))| {
            let conic = level_conic(*row, center, value);
            let kind = classify_conic(&conic, DEFAULT_CLASSIFY_TOL);
            FoliationLevel {
                index,
                center,
                value,
                conic,
                kind,
            }
        })
        .collect()
}

/// Expands `a1 (x1 − p1)² + a2 (x2 − p2)² − c` into implicit-conic form.
fn level_conic(row: [f64; 2], p: Point2, c: f64) -> Conic {
    Conic {
        c20: row[0],
        c11: 0.0,
        c02: row[1],
        c10: -2.0 * row[0] * p.x1,
        c01: -2.0 * row[1] * p.x2,
        c00: row[0] * p.x1 * p.x1 + row[1] * p.x2 * p.x2 - c,
    }
}

/// Degeneracy flags for a central point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyReport {
    /// `sigma_flags[i]`: whether `p_i` is itself a singular point (the
    /// Jacobian at `p_i`, whose row i vanishes, still has rank < 2).
    pub sigma_flags: Vec<bool>,
    /// Pairs (i, j), i < j, of coincident centers.
    pub coincident_centers: Vec<(usize, usize)>,
    /// Whether the coefficient matrix has rank < 2.
    pub rank_deficient: bool,
}

impl DegeneracyReport {
    pub fn is_clean(&self) -> bool {
        !self.rank_deficient
            && self.coincident_centers.is_empty()
            && self.sigma_flags.iter().all(|f| !f)
    }
}

/// Flags central points violating the genericity assumptions.
pub fn detect_degeneracy(m: &GdsMapping, tol: f64) -> DegeneracyReport {
    let points = m.centers().points();
    let sigma_flags = points
        .iter()
        .map(|&pi| rank_at(m, pi, tol).rank <= 1)
        .collect();
    let mut coincident_centers = Vec::new();
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let scale = 1.0 + points[i].norm().max(points[j].norm());
            if points[i].dist(points[j]) < tol * scale {
                coincident_centers.push((i, j));
            }
        }
    }
    DegeneracyReport {
        sigma_flags,
        coincident_centers,
        rank_deficient: m.coefficients().rank(tol) < 2,
    }
}

/// Tangency-oracle output: exact field names for CLI interchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    /// Accepted common-tangency points, sorted lexicographically.
    pub tangency_points: Vec<[f64; 2]>,
    /// Connected grid regions where some level degenerates to a point
    /// (vanishing gradient) and the objective is undefined.
    pub excluded_regions: usize,
    /// Objective value at each accepted point, same order.
    pub objective_at_points: Vec<f64>,
}

/// Geometric search for points where all ℓ level curves share a tangent.
///
/// The objective is the largest normalized cross product over gradient
/// pairs; grid local minima seed a compass descent and a polished minimum
/// is accepted when the objective drops below `tol`. Gradients come from
/// the level-conic coefficients only.
pub fn tangency_search(m: &GdsMapping, window: BoundingBox, grid: usize, tol: f64) -> OracleReport {
    assert!(grid >= 2, "tangency_search needs at least a 2x2 grid");
    assert!(
        window.is_valid(),
        "tangency_search window must be a proper box"
    );

    // Gradient tables from the level conics: the constant term plays no
    // role in the gradient, so one table serves every level through q.
    let tables: Vec<[f64; 4]> = m
        .coefficients()
        .rows()
        .iter()
        .zip(m.centers().points())
        .map(|(row, p)| {
            let c = level_conic(*row, *p, 0.0);
            [2.0 * c.c20, c.c10, 2.0 * c.c02, c.c01]
        })
        .collect();
    let grad_floors: Vec<f64> = m
        .coefficients()
        .rows()
        .iter()
        .map(|row| GRAD_EXCLUSION_REL * (row[0].abs() + row[1].abs()))
        .collect();

    // None = excluded node (a gradient fell below its floor).
    let objective = |q: Point2| -> Option<f64> {
        let mut grads: Vec<[f64; 2]> = Vec::with_capacity(tables.len());
        let point_scale = 1.0 + q.norm();
        for (t, floor) in tables.iter().zip(&grad_floors) {
            let g = [t[0] * q.x1 + t[1], t[2] * q.x2 + t[3]];
            if g[0].hypot(g[1]) < floor * point_scale {
                return None;
            }
            grads.push(g);
        }
        let mut worst = 0.0f64;
        for i in 0..grads.len() {
            for k in (i + 1)..grads.len() {
                let (gi, gk) = (grads[i], grads[k]);
                let cross = (gi[0] * gk[1] - gi[1] * gk[0]).abs();
                worst = worst.max(cross / (gi[0].hypot(gi[1]) * gk[0].hypot(gk[1])));
            }
        }
        Some(worst)
    };

    let sx = (window.x1 - window.x0) / (grid - 1) as f64;
    let sy = (window.y1 - window.y0) / (grid - 1) as f64;
    let node =
        |i: usize, j: usize| Point2::new(window.x0 + i as f64 * sx, window.y0 + j as f64 * sy);

    let field: Vec<Vec<Option<f64>>> = (0..grid)
        .into_par_iter()
        .map(|i| (0..grid).map(|j| objective(node(i, j))).collect())
        .collect();

    let excluded_regions = count_excluded_regions(&field);

    // Local minima over the 8-neighborhood (boundary-aware).
    let mut seeds: Vec<(usize, usize)> = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let Some(v) = field[i][j] else { continue };
            let mut is_min = true;
            'scan: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= grid as i64 || nj >= grid as i64 {
                        continue;
                    }
                    match field[ni as usize][nj as usize] {
                        Some(w) if w < v => {
                            is_min = false;
                            break 'scan;
                        }
                        _ => {}
                    }
                }
            }
            if is_min {
                seeds.push((i, j));
            }
        }
    }

    let mut found: Vec<(Point2, f64)> = Vec::new();
    let cell = sx.max(sy);
    for (i, j) in seeds {
        let (mut q, mut value) = compass_descent(node(i, j), cell, &objective);
        // The normalized objective is scale-free around a common zero of the
        // cross products, which can stall the fixed-direction compass step;
        // a Gauss–Newton pass on the raw cross products (smooth in q) closes
        // the remaining gap. Jumps beyond a few cells are rejected so the
        // polish cannot leave the basin.
        let polished = cross_polish(&tables, q);
        if polished.dist(q) <= 8.0 * cell {
            if let Some(v) = objective(polished) {
                if v < value {
                    q = polished;
                    value = v;
                }
            }
        }
        if value < tol {
            found.push((q, value));
        }
    }

    // Deduplicate (keep the lowest objective) and order lexicographically.
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut kept: Vec<(Point2, f64)> = Vec::new();
    for (q, v) in found {
        if kept.iter().all(|(p, _)| p.dist(q) > 1e-6) {
            kept.push((q, v));
        }
    }
    kept.sort_by(|a, b| a.0.x1.total_cmp(&b.0.x1).then(a.0.x2.total_cmp(&b.0.x2)));

    OracleReport {
        tangency_points: kept.iter().map(|(q, _)| [q.x1, q.x2]).collect(),
        excluded_regions,
        objective_at_points: kept.iter().map(|(_, v)| *v).collect(),
    }
}

/// Derivative-free compass descent with step halving over 8 directions.
fn compass_descent(
    start: Point2,
    initial_step: f64,
    objective: &dyn Fn(Point2) -> Option<f64>,
) -> (Point2, f64) {
    const DIRS: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [1.0, 1.0],
        [1.0, -1.0],
        [-1.0, 1.0],
        [-1.0, -1.0],
    ];
    let mut q = start;
    let mut best = objective(q).unwrap_or(f64::INFINITY);
    let mut step = initial_step;
    let mut iters = 0;
    while step > 1e-12 && iters < 400 {
        iters += 1;
        let mut improved = false;
        for d in DIRS {
            let cand = Point2::new(q.x1 + step * d[0], q.x2 + step * d[1]);
            if let Some(v) = objective(cand) {
                if v < best {
                    q = cand;
                    best = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (q, best)
}

/// Gauss–Newton refinement of the unnormalized pairwise cross products.
///
/// Each residual `g_i × g_k` is quadratic in `q` with affine gradients, so
/// the normal equations are cheap and convergence near a common tangency is
/// quadratic — exactly where the scale-free normalized objective offers the
/// compass descent no usable slope.
fn cross_polish(tables: &[[f64; 4]], start: Point2) -> Point2 {
    let mut q = start;
    for _ in 0..30 {
        let (mut j11, mut j12, mut j22) = (0.0f64, 0.0f64, 0.0f64);
        let (mut r1, mut r2) = (0.0f64, 0.0f64);
        for (i, &[ai, bi, ci, di]) in tables.iter().enumerate() {
            let gi = [ai * q.x1 + bi, ci * q.x2 + di];
            for &[ak, bk, ck, dk] in &tables[i + 1..] {
                let gk = [ak * q.x1 + bk, ck * q.x2 + dk];
                let r = gi[0] * gk[1] - gi[1] * gk[0];
                let dx1 = ai * gk[1] - ak * gi[1];
                let dx2 = ck * gi[0] - ci * gk[0];
                j11 += dx1 * dx1;
                j12 += dx1 * dx2;
                j22 += dx2 * dx2;
                r1 += dx1 * r;
                r2 += dx2 * r;
            }
        }
        let det = j11 * j22 - j12 * j12;
        if !det.is_finite() || det.abs() <= 1e-12 * j11.mul_add(j22, 1e-300) {
            break;
        }
        let s1 = -(j22 * r1 - j12 * r2) / det;
        let s2 = -(j11 * r2 - j12 * r1) / det;
        q = Point2::new(q.x1 + s1, q.x2 + s2);
        if !q.is_finite() || s1.hypot(s2) < 1e-14 * (1.0 + q.norm()) {
            break;
        }
    }
    if q.is_finite() {
        q
    } else {
        start
    }
}

/// Connected components (4-neighborhood) of the excluded-node mask.
fn count_excluded_regions(field: &[Vec<Option<f64>>]) -> usize {
    let n = field.len();
    let mut seen = vec![vec![false; n]; n];
    let mut regions = 0;
    let mut stack = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if field[i][j].is_some() || seen[i][j] {
                continue;
            }
            regions += 1;
            stack.push((i, j));
            seen[i][j] = true;
            while let Some((a, b)) = stack.pop() {
                let neighbors = [
                    (a.wrapping_sub(1), b),
                    (a + 1, b),
                    (a, b.wrapping_sub(1)),
                    (a, b + 1),
                ];
                for (na, nb) in neighbors {
                    if na < n && nb < n && !seen[na][nb] && field[na][nb].is_none() {
                        seen[na][nb] = true;
                        stack.push((na, nb));
                    }
                }
            }
        }
    }
    regions
}

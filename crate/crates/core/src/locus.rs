//! Singular loci: isolated singular points for ℓ ≥ 3 and the singular
//! curve for ℓ = 2.
//!
//! Candidate points come from Sylvester resultants of the first two minor
//! conics in each variable (their root grid, back-substituted partners,
//! and the centers themselves, which are the natural degenerate suspects).
//! Each candidate is polished by Gauss–Newton on the least-squares system
//! of all C(ℓ,2) minors and accepted only if every canonically normalized
//! minor vanishes within tolerance and the Jacobian rank drops.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conic::{
    classify_conic, eliminate_variable, minor_conics, Conic, ConicError, ConicKind, Var,
    DEFAULT_CLASSIFY_TOL,
};
use crate::map::{evaluate, rank_at, GdsMapping, Point2};
use crate::poly::{real_roots, UnivariatePoly};

/// Default tolerance on normalized minor residuals at accepted points.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// Rank-drop acceptance: accepted points must have `σ₂/σ₁` below this.
const RANK_ACCEPT_TOL: f64 = 1e-6;

/// A point closer than `1e-6 (1 + |p_i|)` to some center is flagged degenerate.
const DEGENERACY_LOCATION_TOL: f64 = 1e-6;

/// Newton iteration budget and step-norm convergence threshold.
const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_STEP_TOL: f64 = 1e-13;

/// Errors from the singular-point solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    /// The polynomial and rank certificates disagree: at least one refined
    /// point satisfies every minor equation to tolerance while the Jacobian
    /// rank estimate stays at 2 by a wide margin. The offending points are
    /// attached for diagnosis.
    #[error("certificates disagree at {} refined points", candidates.len())]
    SolverInconsistency { candidates: Vec<[f64; 2]> },
}

/// One accepted singular point with its certificate data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPointRecord {
    #[serde(flatten)]
    pub location: Point2,
    /// Numerical Jacobian rank at the point (0 or 1).
    pub rank: usize,
    /// Unit kernel direction of the Jacobian.
    pub kernel: [f64; 2],
    /// Largest |value| over all canonically normalized minor conics.
    pub residual: f64,
    /// Whether the point coincides with one of the centers.
    pub degenerate: bool,
    /// Image components `F(q)`: the level values of the leaves through the point.
    pub levels: Vec<f64>,
}

/// All isolated singular points of a mapping with ℓ ≥ 3 components,
/// sorted lexicographically by (x1, x2).
///
/// # Panics
/// If `m.ell() < 3`; use [`singular_curve`] for ℓ = 2.
pub fn solve_singular_points(
    m: &GdsMapping,
    tol: f64,
) -> Result<Vec<SingularPointRecord>, SolveError> {
    assert!(m.ell() >= 3, "solve_singular_points requires ell >= 3");
    let minors: Vec<Conic> = minor_conics(m)
        .into_iter()
        .map(|mc| mc.conic.canonical())
        .collect();

    let candidates = collect_candidates(m, &minors[0], &minors[1], tol);

    let mut accepted: Vec<SingularPointRecord> = Vec::new();
    let mut contradictions: Vec<[f64; 2]> = Vec::new();
    for &start in &candidates {
        let (q, _converged) = refine(&minors, start);
        if !q.is_finite() {
            continue;
        }
        let residual = minors.iter().fold(0.0f64, |r, c| r.max(c.eval(q).abs()));
        if residual >= tol {
            continue;
        }
        let info = rank_at(m, q, RANK_ACCEPT_TOL);
        if info.rank > 1 {
            // Every minor vanishes to tolerance yet σ₂/σ₁ is two orders of
            // magnitude above the rank threshold: the certificates disagree.
            if info.sigma[1] > 100.0 * RANK_ACCEPT_TOL * info.sigma[0] {
                contradictions.push([q.x1, q.x2]);
            }
            continue;
        }
        let kernel = info
            .kernel
            .expect("rank <= 1 always carries a kernel direction");
        accepted.push(SingularPointRecord {
            location: q,
            rank: info.rank,
            kernel: [kernel.x1, kernel.x2],
            residual,
            degenerate: is_degenerate_location(m, q),
            levels: evaluate(m, q),
        });
    }

    if accepted.is_empty() && !contradictions.is_empty() {
        return Err(SolveError::SolverInconsistency {
            candidates: contradictions,
        });
    }

    Ok(dedup_records(accepted, 10.0 * tol))
}

/// The singular set of an ℓ = 2 mapping: its single minor conic and kind.
///
/// # Panics
/// If `m.ell() != 2`.
pub fn singular_curve(m: &GdsMapping) -> (Conic, ConicKind) {
    assert!(m.ell() == 2, "singular_curve requires ell == 2");
    let conic = minor_conics(m)[0].conic;
    let kind = classify_conic(&conic, DEFAULT_CLASSIFY_TOL);
    (conic, kind)
}

/// Candidate seeds: resultant root grid of the first two minors in both
/// variables, back-substituted single-minor roots, and the centers.
fn collect_candidates(m: &GdsMapping, m01: &Conic, m02: &Conic, tol: f64) -> Vec<Point2> {
    let cluster = tol.max(1e-12);
    let roots_of = |poly: Result<UnivariatePoly, ConicError>| -> Vec<f64> {
        match poly {
            Ok(p) => real_roots(&p, cluster)
                .map(|rs| rs.into_iter().map(|(r, _)| r).collect())
                .unwrap_or_default(),
            Err(ConicError::IdenticallyZero) | Err(ConicError::DegenerateGradient) => vec![],
        }
    };
    let x1_roots = roots_of(eliminate_variable(m01, m02, Var::X2));
    let x2_roots = roots_of(eliminate_variable(m01, m02, Var::X1));

    let mut candidates: Vec<Point2> = Vec::new();
    for &x1 in &x1_roots {
        for &x2 in &x2_roots {
            candidates.push(Point2::new(x1, x2));
        }
        // Partner coordinates straight from each minor, for the cases where
        // the other resultant degenerated and the grid is incomplete.
        for conic in [m01, m02] {
            for x2 in univariate_section_roots(conic, Var::X2, x1, cluster) {
                candidates.push(Point2::new(x1, x2));
            }
        }
    }
    for &x2 in &x2_roots {
        for conic in [m01, m02] {
            for x1 in univariate_section_roots(conic, Var::X1, x2, cluster) {
                candidates.push(Point2::new(x1, x2));
            }
        }
    }
    candidates.extend(m.centers().points().iter().copied());
    candidates
}

/// Roots of a conic along the section where the *kept* variable is frozen:
/// with `kept = Var::X2` this solves `c(x1 = value, ·) = 0` for x2.
fn univariate_section_roots(c: &Conic, kept: Var, value: f64, cluster: f64) -> Vec<f64> {
    let [a0, a1, a2] = match kept {
        Var::X2 => [
            c.c20 * value * value + c.c10 * value + c.c00,
            c.c11 * value + c.c01,
            c.c02,
        ],
        Var::X1 => [
            c.c02 * value * value + c.c01 * value + c.c00,
            c.c11 * value + c.c10,
            c.c20,
        ],
    };
    real_roots(&UnivariatePoly::new(vec![a0, a1, a2]), cluster)
        .map(|rs| rs.into_iter().map(|(r, _)| r).collect())
        .unwrap_or_default()
}

/// Gauss–Newton on the least-squares system of all minors; returns the
/// final iterate and whether the step norm dropped below the threshold.
fn refine(minors: &[Conic], start: Point2) -> (Point2, bool) {
    let mut q = start;
    for _ in 0..NEWTON_MAX_ITERS {
        if !q.is_finite() {
            return (q, false);
        }
        let (mut a11, mut a12, mut a22) = (0.0f64, 0.0f64, 0.0f64);
        let (mut b1, mut b2) = (0.0f64, 0.0f64);
        for c in minors {
            let r = c.eval(q);
            let [g1, g2] = c.gradient(q);
            a11 += g1 * g1;
            a12 += g1 * g2;
            a22 += g2 * g2;
            b1 += g1 * r;
            b2 += g2 * r;
        }
        // Normal equations with a Levenberg fallback when J'J is singular.
        let (mut m11, mut m22) = (a11, a22);
        let mut det = m11 * m22 - a12 * a12;
        if !det.is_finite() {
            return (q, false);
        }
        if det.abs() < 1e-14 * (m11 + m22).max(f64::MIN_POSITIVE).powi(2) {
            let lambda = 1e-8 * (a11 + a22) + f64::MIN_POSITIVE;
            m11 += lambda;
            m22 += lambda;
            det = m11 * m22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                return (q, false);
            }
        }
        let d1 = (-b1 * m22 + b2 * a12) / det;
        let d2 = (-m11 * b2 + a12 * b1) / det;
        q = Point2::new(q.x1 + d1, q.x2 + d2);
        if d1.hypot(d2) < NEWTON_STEP_TOL {
            return (q, q.is_finite());
        }
    }
    (q, false)
}

fn is_degenerate_location(m: &GdsMapping, q: Point2) -> bool {
    m.centers()
        .points()
        .iter()
        .any(|&pi| q.dist(pi) < DEGENERACY_LOCATION_TOL * (1.0 + pi.norm()))
}

/// Lexicographic sort plus greedy cluster merge; the representative of each
/// cluster is its lowest-residual member.
fn dedup_records(mut records: Vec<SingularPointRecord>, radius: f64) -> Vec<SingularPointRecord> {
    records.sort_by(|a, b| {
        a.location
            .x1
            .total_cmp(&b.location.x1)
            .then(a.location.x2.total_cmp(&b.location.x2))
    });
    let mut out: Vec<SingularPointRecord> = Vec::new();
    for rec in records {
        match out
            .iter_mut()
            .find(|kept| kept.location.dist(rec.location) < radius)
        {
            Some(kept) => {
                if rec.residual < kept.residual {
                    *kept = rec;
                }
            }
            None => out.push(rec),
        }
    }
    out.sort_by(|a, b| {
        a.location
            .x1
            .total_cmp(&b.location.x1)
            .then(a.location.x2.total_cmp(&b.location.x2))
    });
    out
}

//! Recognition of the generic singularity type for ℓ = 3 and whole-map
//! classification.
//!
//! At a corank-1 point with kernel direction η and complement τ the map is
//! a cross-cap exactly when the three columns `dF(τ)`, `D²F(η,η)`,
//! `D²F(τ,η)` span ℝ³; the determinant, normalized by the column norms,
//! is the witness. For the quadratic components here every Hessian is the
//! constant matrix `diag(2 a_i1, 2 a_i2)`, so the columns are closed-form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::locus::{solve_singular_points, SolveError};
use crate::map::{jacobian, rank_at, GdsMapping, Point2};

/// Normalized-determinant threshold above which a point counts as a cross-cap.
pub const DEFAULT_CROSSCAP_TOL: f64 = 1e-6;

/// Rank tolerance used when gating the witness computation.
const RANK_GATE_TOL: f64 = 1e-6;

/// Errors from the cross-cap witness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    /// The Jacobian does not have rank exactly 1 at the query point.
    #[error("cross-cap witness requires Jacobian rank 1 at the point, found rank {0}")]
    NotRankOne(usize),
}

/// The data certifying (or refuting) a cross-cap at one singular point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCapWitness {
    /// Unit kernel direction of the Jacobian.
    pub eta: Point2,
    /// Unit complement, η rotated by +90°.
    pub tau: Point2,
    /// Determinant of the 3×3 column matrix `[dF(τ) | D²F(η,η) | D²F(τ,η)]`.
    /// Its sign depends on the orientation of τ; only the magnitude is used.
    pub det_value: f64,
    /// Product of the three column norms, the scale for the threshold test.
    pub column_scale: f64,
    /// Whether `|det_value| > tol · column_scale`.
    pub is_crosscap: bool,
}

impl CrossCapWitness {
    /// The scale-free witness value `det_value / column_scale`.
    pub fn normalized_det(&self) -> f64 {
        if self.column_scale == 0.0 {
            0.0
        } else {
            self.det_value / self.column_scale
        }
    }
}

/// Computes the cross-cap witness at a corank-1 point of an ℓ = 3 mapping.
///
/// # Panics
/// If `m.ell() != 3`.
pub fn crosscap_test(
    m: &GdsMapping,
    q: Point2,
    tol: f64,
) -> Result<CrossCapWitness, ClassifyError> {
    assert!(m.ell() == 3, "crosscap_test requires ell == 3");
    let info = rank_at(m, q, RANK_GATE_TOL);
    if info.rank != 1 {
        return Err(ClassifyError::NotRankOne(info.rank));
    }
    let eta = info.kernel.expect("rank 1 carries a kernel direction");
    let tau = Point2::new(-eta.x2, eta.x1);

    let j = jacobian(m, q);
    let col1 = j.apply(tau);
    // Component Hessians are diag(2 a_i1, 2 a_i2): D²F_i(u, v) = 2 a_i1 u1 v1 + 2 a_i2 u2 v2.
    let hess = |u: Point2, v: Point2| -> Vec<f64> {
        m.coefficients()
            .rows()
            .iter()
            .map(|row| 2.0 * row[0] * u.x1 * v.x1 + 2.0 * row[1] * u.x2 * v.x2)
            .collect()
    };
    let col2 = hess(eta, eta);
    let col3 = hess(tau, eta);

    let det_value = det3(&col1, &col2, &col3);
    let column_scale = norm3(&col1) * norm3(&col2) * norm3(&col3);
    Ok(CrossCapWitness {
        eta,
        tau,
        det_value,
        column_scale,
        is_crosscap: det_value.abs() > tol * column_scale,
    })
}

/// Determinant of the 3×3 matrix with the given columns.
fn det3(c1: &[f64], c2: &[f64], c3: &[f64]) -> f64 {
    c1[0] * (c2[1] * c3[2] - c2[2] * c3[1]) - c2[0] * (c1[1] * c3[2] - c1[2] * c3[1])
        + c3[0] * (c1[1] * c2[2] - c1[2] * c2[1])
}

fn norm3(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Classification outcome for a mapping with ℓ ≥ 3.
#[derive(Debug, Clone, PartialEq)]
pub enum MapClass {
    /// ℓ = 3 with exactly one singular point passing the cross-cap witness.
    WhitneyUmbrella {
        point: Point2,
        witness: CrossCapWitness,
    },
    /// No singular points at all.
    Immersion,
    /// Anything outside the generic picture, with a diagnostic reason.
    Unresolved { reason: String },
}

/// Classifies a mapping as Whitney umbrella, immersion, or unresolved.
///
/// Never panics on numerical trouble: solver failures and witness
/// rejections land in [`MapClass::Unresolved`] with the reason recorded.
///
/// # Panics
/// If `m.ell() < 3`.
pub fn classify_map(m: &GdsMapping, tol: f64) -> MapClass {
    assert!(m.ell() >= 3, "classify_map requires ell >= 3");
    let points = match solve_singular_points(m, tol) {
        Ok(points) => points,
        Err(SolveError::SolverInconsistency { candidates }) => {
            return MapClass::Unresolved {
                reason: format!(
                    "singular-point refinement diverged for all {} candidates",
                    candidates.len()
                ),
            }
        }
    };

    match (m.ell(), points.as_slice()) {
        (_, []) => MapClass::Immersion,
        (3, [rec]) => match crosscap_test(m, rec.location, DEFAULT_CROSSCAP_TOL) {
            Ok(witness) if witness.is_crosscap => MapClass::WhitneyUmbrella {
                point: rec.location,
                witness,
            },
            Ok(witness) => MapClass::Unresolved {
                reason: format!(
                    "singular point ({}, {}) fails the cross-cap witness (normalized det {:.3e})",
                    rec.location.x1,
                    rec.location.x2,
                    witness.normalized_det()
                ),
            },
            Err(ClassifyError::NotRankOne(rank)) => MapClass::Unresolved {
                reason: format!(
                    "singular point ({}, {}) has Jacobian rank {rank}, expected 1",
                    rec.location.x1, rec.location.x2
                ),
            },
        },
        (3, many) => MapClass::Unresolved {
            reason: format!("found {} singular points, expected at most one", many.len()),
        },
        (_, some) => MapClass::Unresolved {
            reason: format!(
                "found {} singular points where the generic count is zero",
                some.len()
            ),
        },
    }
}

/// JSON report for the classification: exact field names for CLI interchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&MapClass> for ClassReport {
    fn from(class: &MapClass) -> Self {
        match class {
            MapClass::WhitneyUmbrella { point, witness } => ClassReport {
                class: "whitney_umbrella".into(),
                point: Some([point.x1, point.x2]),
                det: Some(witness.normalized_det()),
                reason: None,
            },
            MapClass::Immersion => ClassReport {
                class: "immersion".into(),
                point: None,
                det: None,
                reason: None,
            },
            MapClass::Unresolved { reason } => ClassReport {
                class: "unresolved".into(),
                point: None,
                det: None,
                reason: Some(reason.clone()),
            },
        }
    }
}

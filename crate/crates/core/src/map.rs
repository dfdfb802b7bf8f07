//! Generalized distance-squared mappings of the plane.
//!
//! A mapping is determined by a coefficient matrix `A` (ℓ×2, all entries
//! non-zero) and a central point `p = (p_1, …, p_ℓ)`: component `i` sends
//! `x` to `a_i1 (x1 − p_i1)² + a_i2 (x2 − p_i2)²`. The Jacobian keeps the
//! factor 2 from differentiating the squares, so its 2×2 minors carry a
//! factor 4 relative to the coefficient-level products.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for numerical rank decisions (`σ₂/σ₁` cutoff).
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Errors from mapping construction and input validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    /// A coefficient `a_ij` is zero (the mapping would degenerate along an axis).
    #[error("coefficient matrix entry ({row}, {col}) is zero")]
    ZeroEntry { row: usize, col: usize },
    /// Row counts or declared dimensions disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// Parameters outside their admissible range, or non-finite input.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// A point (or direction) in the source plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn dist(&self, other: Point2) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x1, p.x2]
    }
}

/// The ℓ×2 coefficient matrix; every entry is finite and non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    rows: Vec<[f64; 2]>,
}

impl CoefficientMatrix {
    /// Validates shape (ℓ ≥ 2) and entries (finite, non-zero).
    pub fn new(rows: Vec<[f64; 2]>) -> Result<Self, MapError> {
        if rows.len() < 2 {
            return Err(MapError::DimensionMismatch(format!(
                "coefficient matrix needs at least 2 rows, got {}",
                rows.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if !a.is_finite() {
                    return Err(MapError::InvalidParams(format!(
                        "coefficient matrix entry ({}, {}) is not finite",
                        i + 1,
                        j + 1
                    )));
                }
                if a == 0.0 {
                    return Err(MapError::ZeroEntry {
                        row: i + 1,
                        col: j + 1,
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn ell(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> [f64; 2] {
        self.rows[i]
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    /// Numerical rank (0, 1 or 2) via the singular values of the ℓ×2 matrix.
    pub fn rank(&self, tol: f64) -> usize {
        let m = DMatrix::from_fn(self.rows.len(), 2, |i, j| self.rows[i][j]);
        rank_of_tall_matrix(&m, tol).0
    }
}

/// The central point `p = (p_1, …, p_ℓ)`, one plane point per component.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralPoint {
    points: Vec<Point2>,
}

impl CentralPoint {
    /// Validates shape (ℓ ≥ 2) and finiteness.
    pub fn new(points: Vec<Point2>) -> Result<Self, MapError> {
        if points.len() < 2 {
            return Err(MapError::DimensionMismatch(format!(
                "central point needs at least 2 components, got {}",
                points.len()
            )));
        }
        if let Some(i) = points.iter().position(|q| !q.is_finite()) {
            return Err(MapError::InvalidParams(format!(
                "central point p_{} is not finite",
                i + 1
            )));
        }
        Ok(Self { points })
    }

    pub fn ell(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, i: usize) -> Point2 {
        self.points[i]
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }
}

/// Which construction a mapping came from (reported in specs and figures).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// Arbitrary non-zero coefficient matrix.
    General,
    /// All-ones matrix (rank 1): the classical distance-squared mapping `D_p`.
    DistanceSquared,
    /// First column −1, second column 1: the Lorentzian mapping `L_p`.
    Lorentzian,
    /// Row 1 = `(a, b)` with `0 < a < b`, remaining rows `(1, 1)`: one
    /// ellipse-shaped level among circles (`F_p`).
    EllipseCircle,
}

/// Special-form constructors accepted by [`make_special`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpecialForm {
    DistanceSquared,
    Lorentzian,
    EllipseCircle { a: f64, b: f64 },
}

/// A generalized distance-squared mapping ℝ² → ℝ^ℓ.
#[derive(Debug, Clone, PartialEq)]
pub struct GdsMapping {
    a: CoefficientMatrix,
    p: CentralPoint,
    form: FormKind,
    ellipse_params: Option<(f64, f64)>,
}

impl GdsMapping {
    pub fn ell(&self) -> usize {
        self.p.ell()
    }

    pub fn coefficients(&self) -> &CoefficientMatrix {
        &self.a
    }

    pub fn centers(&self) -> &CentralPoint {
        &self.p
    }

    pub fn form(&self) -> FormKind {
        self.form
    }

    /// The `(a, b)` pair when the mapping is in ellipse-circle form.
    pub fn ellipse_params(&self) -> Option<(f64, f64)> {
        self.ellipse_params
    }
}

/// Builds a mapping from an explicit coefficient matrix and central point.
pub fn make_mapping(a: CoefficientMatrix, p: CentralPoint) -> Result<GdsMapping, MapError> {
    if a.ell() != p.ell() {
        return Err(MapError::DimensionMismatch(format!(
            "coefficient matrix has {} rows but central point has {} components",
            a.ell(),
            p.ell()
        )));
    }
    Ok(GdsMapping {
        a,
        p,
        form: FormKind::General,
        ellipse_params: None,
    })
}

/// Builds one of the named special forms over the given central point.
pub fn make_special(form: SpecialForm, p: CentralPoint) -> Result<GdsMapping, MapError> {
    let ell = p.ell();
    let (rows, kind, params) = match form {
        SpecialForm::DistanceSquared => (vec![[1.0, 1.0]; ell], FormKind::DistanceSquared, None),
        SpecialForm::Lorentzian => (vec![[-1.0, 1.0]; ell], FormKind::Lorentzian, None),
        SpecialForm::EllipseCircle { a, b } => {
            if !(a.is_finite() && b.is_finite() && 0.0 < a && a < b) {
                return Err(MapError::InvalidParams(format!(
                    "ellipse-circle form requires 0 < a < b, got a = {a}, b = {b}"
                )));
            }
            let mut rows = vec![[1.0, 1.0]; ell];
            rows[0] = [a, b];
            (rows, FormKind::EllipseCircle, Some((a, b)))
        }
    };
    Ok(GdsMapping {
        a: CoefficientMatrix::new(rows)?,
        p,
        form: kind,
        ellipse_params: params,
    })
}

/// Evaluates the mapping: `y_i = a_i1 (x1 − p_i1)² + a_i2 (x2 − p_i2)²`.
pub fn evaluate(m: &GdsMapping, x: Point2) -> Vec<f64> {
    m.a.rows()
        .iter()
        .zip(m.p.points())
        .map(|(row, pi)| {
            let d1 = x.x1 - pi.x1;
            let d2 = x.x2 - pi.x2;
            row[0] * d1 * d1 + row[1] * d2 * d2
        })
        .collect()
}

/// The ℓ×2 Jacobian at a point; row `i` is `2 (a_i1 (x1 − p_i1), a_i2 (x2 − p_i2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    rows: Vec<[f64; 2]>,
}

impl Jacobian {
    pub fn ell(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> [f64; 2] {
        self.rows[i]
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    /// The 2×2 minor built from rows `i` and `k` (carries the factor 4).
    pub fn minor(&self, i: usize, k: usize) -> f64 {
        let ri = self.rows[i];
        let rk = self.rows[k];
        ri[0] * rk[1] - ri[1] * rk[0]
    }

    /// Matrix-vector product `J v`.
    pub fn apply(&self, v: Point2) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r[0] * v.x1 + r[1] * v.x2)
            .collect()
    }
}

/// Computes the Jacobian of the mapping at `x` (factor 2 included).
pub fn jacobian(m: &GdsMapping, x: Point2) -> Jacobian {
    let rows =
        m.a.rows()
            .iter()
            .zip(m.p.points())
            .map(|(row, pi)| [2.0 * row[0] * (x.x1 - pi.x1), 2.0 * row[1] * (x.x2 - pi.x2)])
            .collect();
    Jacobian { rows }
}

/// Numerical rank of the Jacobian at a point, with kernel direction when rank ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    /// Singular values `σ₁ ≥ σ₂ ≥ 0` of the ℓ×2 Jacobian.
    pub sigma: [f64; 2],
    /// Unit kernel direction (first non-zero component positive); `None` at rank 2.
    pub kernel: Option<Point2>,
}

/// Rank of the Jacobian at `x`: rank ≤ 1 iff `σ₂/σ₁ < tol`, rank 0 iff `σ₁ < tol`.
pub fn rank_at(m: &GdsMapping, x: Point2, tol: f64) -> RankInfo {
    let j = jacobian(m, x);
    let dm = DMatrix::from_fn(j.ell(), 2, |i, c| j.rows[i][c]);
    let (rank, sigma, kernel) = rank_of_tall_matrix(&dm, tol);
    RankInfo {
        rank,
        sigma,
        kernel,
    }
}

/// Shared rank kernel for ℓ×2 matrices: returns (rank, [σ₁, σ₂], kernel direction).
fn rank_of_tall_matrix(m: &DMatrix<f64>, tol: f64) -> (usize, [f64; 2], Option<Point2>) {
    let svd = m.clone().svd(false, true);
    let s1 = svd.singular_values[0];
    let s2 = svd.singular_values[1];
    let v_t = svd
        .v_t
        .as_ref()
        .expect("SVD requested with right singular vectors");
    let kernel_row = v_t.row(1);
    let kernel = normalize_direction(Point2::new(kernel_row[0], kernel_row[1]));
    if s1 < tol {
        (0, [s1, s2], Some(kernel))
    } else if s2 / s1 < tol {
        (1, [s1, s2], Some(kernel))
    } else {
        (2, [s1, s2], None)
    }
}

/// Fixes the sign of a unit direction so its first non-zero component is positive.
fn normalize_direction(v: Point2) -> Point2 {
    let flip = if v.x1 != 0.0 { v.x1 < 0.0 } else { v.x2 < 0.0 };
    if flip {
        Point2::new(-v.x1, -v.x2)
    } else {
        v
    }
}

/// JSON interchange format for a mapping specification.
///
/// `A` is required for `form = "general"` and rejected otherwise; `a`/`b`
/// are required for `form = "ellipse_circle"` and rejected otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub ell: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a_matrix: Option<Vec<[f64; 2]>>,
    pub p: Vec<[f64; 2]>,
    pub form: FormKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl MapSpec {
    /// Validates the specification and builds the mapping it describes.
    pub fn build(&self) -> Result<GdsMapping, MapError> {
        if self.p.len() != self.ell {
            return Err(MapError::DimensionMismatch(format!(
                "\"ell\" is {} but \"p\" has {} entries",
                self.ell,
                self.p.len()
            )));
        }
        let p = CentralPoint::new(self.p.iter().map(|&q| Point2::from(q)).collect())?;
        if self.form != FormKind::EllipseCircle && (self.a.is_some() || self.b.is_some()) {
            return Err(MapError::InvalidParams(
                "fields \"a\"/\"b\" are only valid with form \"ellipse_circle\"".into(),
            ));
        }
        match self.form {
            FormKind::General => {
                let rows = self.a_matrix.clone().ok_or_else(|| {
                    MapError::InvalidParams("form \"general\" requires the matrix \"A\"".into())
                })?;
                if rows.len() != self.ell {
                    return Err(MapError::DimensionMismatch(format!(
                        "\"ell\" is {} but \"A\" has {} rows",
                        self.ell,
                        rows.len()
                    )));
                }
                make_mapping(CoefficientMatrix::new(rows)?, p)
            }
            form => {
                if self.a_matrix.is_some() {
                    return Err(MapError::InvalidParams(
                        "matrix \"A\" is only valid with form \"general\"".into(),
                    ));
                }
                let special = match form {
                    FormKind::DistanceSquared => SpecialForm::DistanceSquared,
                    FormKind::Lorentzian => SpecialForm::Lorentzian,
                    FormKind::EllipseCircle => {
                        let (a, b) = match (self.a, self.b) {
                            (Some(a), Some(b)) => (a, b),
                            _ => {
                                return Err(MapError::InvalidParams(
                                    "form \"ellipse_circle\" requires fields \"a\" and \"b\""
                                        .into(),
                                ))
                            }
                        };
                        SpecialForm::EllipseCircle { a, b }
                    }
                    FormKind::General => unreachable!(),
                };
                make_special(special, p)
            }
        }
    }

    /// Parses a specification from JSON text and builds the mapping.
    pub fn mapping_from_json(text: &str) -> Result<GdsMapping, MapError> {
        let spec: MapSpec = serde_json::from_str(text)
            .map_err(|e| MapError::InvalidParams(format!("malformed mapping spec: {e}")))?;
        spec.build()
    }
}

//! Implicit conics `c20 x1² + c11 x1x2 + c02 x2² + c10 x1 + c01 x2 + c00`.
//!
//! Covers the coefficient-level algebra behind the singular-locus work:
//! minor conics of a mapping's Jacobian, affine classification with
//! tolerance-based zero tests, Sylvester-resultant variable elimination,
//! and the gradient-parallelism tangency predicate.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::map::{GdsMapping, Point2};
use crate::poly::UnivariatePoly;

/// Default tolerance for conic classification decisions.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// Relative threshold deciding the formal degree of a conic in one variable
/// before building a Sylvester matrix.
const DEGREE_REL_TOL: f64 = 1e-14;

/// Errors from conic algebra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConicError {
    /// The two conics share a component, so the resultant vanishes identically.
    #[error("resultant is identically zero (shared component)")]
    IdenticallyZero,
    /// A gradient vanishes where the tangency predicate needs a direction.
    #[error("conic gradient vanishes at the query point")]
    DegenerateGradient,
}

/// Coefficients of an implicit conic, fixed order (c20, c11, c02, c10, c01, c00).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conic {
    pub c20: f64,
    pub c11: f64,
    pub c02: f64,
    pub c10: f64,
    pub c01: f64,
    pub c00: f64,
}

/// Affine classification of a conic's real zero set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicKind {
    Ellipse,
    Circle,
    Parabola,
    Hyperbola,
    RectangularHyperbola,
    ParallelLines,
    IntersectingLines,
    SingleLine,
    SinglePoint,
    Empty,
    WholePlane,
}

impl Conic {
    pub fn from_coeffs(c: [f64; 6]) -> Self {
        Self {
            c20: c[0],
            c11: c[1],
            c02: c[2],
            c10: c[3],
            c01: c[4],
            c00: c[5],
        }
    }

    pub fn coeffs(&self) -> [f64; 6] {
        [self.c20, self.c11, self.c02, self.c10, self.c01, self.c00]
    }

    pub fn eval(&self, q: Point2) -> f64 {
        let (x, y) = (q.x1, q.x2);
        self.c20 * x * x
            + self.c11 * x * y
            + self.c02 * y * y
            + self.c10 * x
            + self.c01 * y
            + self.c00
    }

    /// Gradient of the defining polynomial at `q`.
    pub fn gradient(&self, q: Point2) -> [f64; 2] {
        [
            2.0 * self.c20 * q.x1 + self.c11 * q.x2 + self.c10,
            self.c11 * q.x1 + 2.0 * self.c02 * q.x2 + self.c01,
        ]
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_coeffs(self.coeffs().map(|c| s * c))
    }

    /// Canonical representative of the coefficient ray: divides by the
    /// max-magnitude coefficient and makes the first non-zero coefficient
    /// positive. The zero conic is returned unchanged.
    pub fn canonical(&self) -> Self {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return *self;
        }
        let first = self
            .coeffs()
            .iter()
            .copied()
            .find(|c| *c != 0.0)
            .unwrap_or(1.0);
        self.scale(first.signum() / scale)
    }

    /// Determinant of the 2×2 quadratic-part matrix `[[c20, c11/2], [c11/2, c02]]`.
    fn quad_det(&self) -> f64 {
        self.c20 * self.c02 - 0.25 * self.c11 * self.c11
    }

    /// Determinant of the full 3×3 symmetric matrix of the conic.
    fn full_det(&self) -> f64 {
        let (a, b, c) = (self.c20, 0.5 * self.c11, self.c02);
        let (d, e, f) = (0.5 * self.c10, 0.5 * self.c01, self.c00);
        a * (c * f - e * e) - b * (b * f - e * d) + d * (b * e - c * d)
    }
}

/// Classifies the real zero set of a conic.
///
/// All zero tests run on the canonical representative, so the result is
/// invariant under non-zero coefficient scaling. Degeneracy is decided by
/// the full 3×3 determinant, the conic type by the quadratic-part
/// determinant; `rectangular_hyperbola` additionally requires zero trace
/// and `circle` requires `|c20 − c02|` and `|c11|` below `tol · max(|c20|, |c02|)`.
pub fn classify_conic(c: &Conic, tol: f64) -> ConicKind {
    let n = c.canonical();
    if n.max_abs_coeff() == 0.0 {
        return ConicKind::WholePlane;
    }

    let quad_scale = n.c20.abs().max(n.c11.abs()).max(n.c02.abs());
    if quad_scale < tol {
        // Degenerate to an affine function.
        if n.c10.abs().max(n.c01.abs()) < tol {
            return if n.c00.abs() < tol {
                ConicKind::WholePlane
            } else {
                ConicKind::Empty
            };
        }
        return ConicKind::SingleLine;
    }

    // Normalizing by the quadratic part's own scale makes every branch
    // decision invariant under coordinate dilation: δ and Δ scale with the
    // fourth power of a dilation and quad_scale² does too, so conics with
    // a dominant constant term (e.g. level curves far from their center)
    // classify the same as their unit-scale counterparts.
    let delta = n.quad_det() / (quad_scale * quad_scale);
    let det3 = n.full_det() / (quad_scale * quad_scale);
    let trace = (n.c20 + n.c02) / quad_scale;

    if delta > tol {
        // Elliptic type.
        if det3.abs() < tol {
            return ConicKind::SinglePoint;
        }
        if det3 * trace < 0.0 {
            let axis_scale = n.c20.abs().max(n.c02.abs());
            if (n.c20 - n.c02).abs() < tol * axis_scale && n.c11.abs() < tol * axis_scale {
                return ConicKind::Circle;
            }
            return ConicKind::Ellipse;
        }
        return ConicKind::Empty;
    }

    if delta < -tol {
        // Hyperbolic type.
        if det3.abs() < tol {
            return ConicKind::IntersectingLines;
        }
        if trace.abs() < tol {
            return ConicKind::RectangularHyperbola;
        }
        return ConicKind::Hyperbola;
    }

    // Parabolic type: the quadratic part is (numerically) a perfect square.
    if det3.abs() > tol {
        return ConicKind::Parabola;
    }
    // Orient so the square is non-negative, then reduce to s² + λs + μ = 0
    // along the line coordinate s = αx + βy. Rescaling the quadratic part
    // to unit size first keeps the reduction well-conditioned when the
    // canonical quadratic coefficients are small.
    let n = n.scale(1.0 / quad_scale);
    let n = if trace < 0.0 { n.scale(-1.0) } else { n };
    let (alpha, beta) = if n.c20 >= n.c02 {
        let alpha = n.c20.max(0.0).sqrt();
        (
            alpha,
            if alpha > tol {
                n.c11 / (2.0 * alpha)
            } else {
                0.0
            },
        )
    } else {
        let beta = n.c02.max(0.0).sqrt();
        (
            if beta > tol {
                n.c11 / (2.0 * beta)
            } else {
                0.0
            },
            beta,
        )
    };
    let lambda = (n.c10 * alpha + n.c01 * beta) / (alpha * alpha + beta * beta);
    let disc = lambda * lambda - 4.0 * n.c00;
    let disc_scale = (lambda * lambda).max(4.0 * n.c00.abs()).max(1.0);
    if disc > tol * disc_scale {
        ConicKind::ParallelLines
    } else if disc < -tol * disc_scale {
        ConicKind::Empty
    } else {
        ConicKind::SingleLine
    }
}

/// One 2×2 minor of the Jacobian as an implicit conic; `i < k` are 0-based
/// component indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinorConic {
    pub i: usize,
    pub k: usize,
    pub conic: Conic,
}

/// The C(ℓ,2) minor conics of a mapping in lexicographic pair order.
///
/// Coefficients are built from the undoubled Jacobian rows
/// `(a_i1 (x1 − p_i1), a_i2 (x2 − p_i2))`, so each conic equals the
/// corresponding Jacobian minor divided by its fixed factor 4. The
/// singular set is exactly the common zero set. Quadratic terms reduce to
/// the single product `(a_i1 a_k2 − a_i2 a_k1) x1x2`, so `c20 = c02 = 0`.
pub fn minor_conics(m: &GdsMapping) -> Vec<MinorConic> {
    let ell = m.ell();
    let mut out = Vec::with_capacity(ell * (ell - 1) / 2);
    for i in 0..ell {
        for k in (i + 1)..ell {
            let [u, v] = m.coefficients().row(i);
            let [s, t] = m.coefficients().row(k);
            let pi = m.centers().point(i);
            let pk = m.centers().point(k);
            let ut = u * t;
            let vs = v * s;
            out.push(MinorConic {
                i,
                k,
                conic: Conic {
                    c20: 0.0,
                    c11: ut - vs,
                    c02: 0.0,
                    c10: -ut * pk.x2 + vs * pi.x2,
                    c01: -ut * pi.x1 + vs * pk.x1,
                    c00: ut * pi.x1 * pk.x2 - vs * pk.x1 * pi.x2,
                },
            });
        }
    }
    out
}

/// Which variable to eliminate when forming a resultant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
}

/// Resultant of two conics with respect to `var`: a polynomial of degree ≤ 4
/// in the other variable whose real roots contain the projections of all
/// common zeros.
///
/// The Sylvester matrix is built at the actual degrees in the eliminated
/// variable; when one conic does not involve it the other's degree
/// exponentiates the free factor, and when neither does the product of the
/// two free factors is returned (its roots still cover all common zeros).
/// Errors with [`ConicError::IdenticallyZero`] when the conics share a
/// component and the resultant collapses.
pub fn eliminate_variable(c1: &Conic, c2: &Conic, var: Var) -> Result<UnivariatePoly, ConicError> {
    let f = coeffs_in(c1, var);
    let g = coeffs_in(c2, var);
    let d1 = eliminated_degree(&f);
    let d2 = eliminated_degree(&g);

    let result = match (d1, d2) {
        (0, 0) => f[0].mul(&g[0]),
        (0, d2) => f[0].pow(d2),
        (d1, 0) => g[0].pow(d1),
        (d1, d2) => {
            let n = d1 + d2;
            // Sylvester matrix: d2 shifted coefficient rows of f over d1 of g.
            let mut rows: Vec<Vec<UnivariatePoly>> = vec![vec![UnivariatePoly::zero(); n]; n];
            for shift in 0..d2 {
                for k in 0..=d1 {
                    rows[shift][shift + k] = f[d1 - k].clone();
                }
            }
            for shift in 0..d1 {
                for k in 0..=d2 {
                    rows[d2 + shift][shift + k] = g[d2 - k].clone();
                }
            }
            poly_det(&rows)
        }
    };

    // Scale reference: the largest product of one coefficient from each side
    // bounds the resultant's coefficients, so "identically zero" is judged
    // relative to it.
    let scale: f64 = f.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max)
        * g.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max);
    let trimmed = result.trimmed();
    if trimmed.is_zero() || trimmed.max_abs_coeff() < 1e-10 * scale.max(f64::MIN_POSITIVE) {
        return Err(ConicError::IdenticallyZero);
    }
    Ok(trimmed)
}

/// Coefficients `[A0, A1, A2]` of a conic viewed as a quadratic in the
/// eliminated variable, each a polynomial in the kept variable.
fn coeffs_in(c: &Conic, var: Var) -> [UnivariatePoly; 3] {
    match var {
        // Eliminate x2: A2 = c02, A1 = c11 t + c01, A0 = c20 t² + c10 t + c00.
        Var::X2 => [
            UnivariatePoly::new(vec![c.c00, c.c10, c.c20]),
            UnivariatePoly::new(vec![c.c01, c.c11]),
            UnivariatePoly::constant(c.c02),
        ],
        // Eliminate x1: roles of the axes swap.
        Var::X1 => [
            UnivariatePoly::new(vec![c.c00, c.c01, c.c02]),
            UnivariatePoly::new(vec![c.c10, c.c11]),
            UnivariatePoly::constant(c.c20),
        ],
    }
}

/// Actual degree (0, 1 or 2) in the eliminated variable, judged relative to
/// the conic's coefficient scale.
fn eliminated_degree(coeffs: &[UnivariatePoly; 3]) -> usize {
    let scale = coeffs.iter().map(|p| p.max_abs_coeff()).fold(0.0, f64::max);
    let cut = DEGREE_REL_TOL * scale;
    if coeffs[2].max_abs_coeff() > cut {
        2
    } else if coeffs[1].max_abs_coeff() > cut {
        1
    } else {
        0
    }
}

/// Determinant of a small matrix over the polynomial ring, by Laplace
/// expansion along the first row (n ≤ 4 here).
fn poly_det(rows: &[Vec<UnivariatePoly>]) -> UnivariatePoly {
    let n = rows.len();
    if n == 1 {
        return rows[0][0].clone();
    }
    let mut det = UnivariatePoly::zero();
    for col in 0..n {
        if rows[0][col].is_zero() {
            continue;
        }
        let sub: Vec<Vec<UnivariatePoly>> = rows[1..]
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = rows[0][col].mul(&poly_det(&sub));
        det = if col % 2 == 0 {
            det.add(&term)
        } else {
            det.sub(&term)
        };
    }
    det
}

/// Whether two conics both pass through `q` with parallel (non-zero) gradients.
///
/// Both conics are canonically normalized first; "passes through" means
/// `|value| < tol (1 + |q|²)` and "parallel" means the normalized cross
/// product of the gradients is below `tol`. A vanishing gradient is
/// reported as [`ConicError::DegenerateGradient`].
pub fn tangent_at_point(c1: &Conic, c2: &Conic, q: Point2, tol: f64) -> Result<bool, ConicError> {
    let n1 = c1.canonical();
    let n2 = c2.canonical();
    let point_scale = 1.0 + q.x1 * q.x1 + q.x2 * q.x2;
    if n1.eval(q).abs() > tol * point_scale || n2.eval(q).abs() > tol * point_scale {
        return Ok(false);
    }
    let g1 = n1.gradient(q);
    let g2 = n2.gradient(q);
    let len1 = g1[0].hypot(g1[1]);
    let len2 = g2[0].hypot(g2[1]);
    let grad_floor = tol * (1.0 + q.norm());
    if len1 < grad_floor || len2 < grad_floor {
        return Err(ConicError::DegenerateGradient);
    }
    let cross = g1[0] * g2[1] - g1[1] * g2[0];
    Ok(cross.abs() < tol * len1 * len2)
}

//! Dense univariate polynomials over `f64` and real root extraction.
//!
//! Root finding builds the companion matrix of the (trimmed, monic)
//! polynomial and takes its complex eigenvalues; eigenvalues with
//! `|Im| < 1e-8 (1 + |Re|)` are kept as real roots and clustered to
//! merge numerically split multiple roots.

use nalgebra::DMatrix;
use thiserror::Error;

/// Relative threshold below which a coefficient counts as zero when
/// trimming the degree (absorbs cancellation noise from determinant
/// expansion without touching honest small coefficients).
const TRIM_REL_TOL: f64 = 1e-12;

/// Imaginary-part cutoff for accepting a companion-matrix eigenvalue as real.
const IMAG_CUTOFF: f64 = 1e-8;

/// Errors from polynomial root extraction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    /// Every coefficient is (numerically) zero; roots are undefined.
    #[error("cannot extract roots of the zero polynomial")]
    ZeroPolynomial,
}

/// A polynomial `c₀ + c₁ t + … + c_n tⁿ` with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<f64>,
}

impl UnivariatePoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// Coefficients in ascending order (may include trailing zeros).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Degree after trimming coefficients below `TRIM_REL_TOL` relative to
    /// the largest one; `None` for the (numerically) zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return None;
        }
        self.coeffs
            .iter()
            .rposition(|c| c.abs() > TRIM_REL_TOL * scale)
    }

    /// Drops trailing coefficients that are zero relative to the largest one.
    pub fn trimmed(&self) -> Self {
        match self.degree() {
            None => Self::zero(),
            Some(d) => Self::new(self.coeffs[..=d].to_vec()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect();
        Self::new(coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(0.0)
                    + other.coeffs.get(k).copied().unwrap_or(0.0)
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self::new(coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| s * c).collect())
    }

    /// Integer power by repeated multiplication (exponents here are ≤ 2).
    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

/// Real roots of `p`, sorted ascending, with multiplicities.
///
/// Roots closer than `cluster_tol` are merged into one root (their mean)
/// whose multiplicity is the cluster size. Errors on the zero polynomial;
/// a non-zero constant has no roots.
pub fn real_roots(p: &UnivariatePoly, cluster_tol: f64) -> Result<Vec<(f64, usize)>, PolyError> {
    let p = p.trimmed();
    let n = match p.degree() {
        None => return Err(PolyError::ZeroPolynomial),
        Some(0) => return Ok(vec![]),
        Some(n) => n,
    };

    let lead = p.coeffs()[n];
    let mut reals = if n == 1 {
        vec![-p.coeffs()[0] / lead]
    } else {
        // Companion matrix of the monic polynomial: last column holds
        // -c_k / c_n, subdiagonal is 1.
        let companion = DMatrix::from_fn(n, n, |i, j| {
            if j + 1 == n {
                -p.coeffs()[i] / lead
            } else if i == j + 1 {
                1.0
            } else {
                0.0
            }
        });
        companion
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im.abs() < IMAG_CUTOFF * (1.0 + z.re.abs()))
            .map(|z| z.re)
            .collect()
    };

    // Two guarded Newton corrections sharpen eigenvalue-quality roots.
    let dp = p.derivative();
    for r in &mut reals {
        for _ in 0..2 {
            let f = p.eval(*r);
            let df = dp.eval(*r);
            if df == 0.0 {
                break;
            }
            let candidate = *r - f / df;
            if candidate.is_finite() && p.eval(candidate).abs() <= f.abs() {
                *r = candidate;
            } else {
                break;
            }
        }
    }

    reals.sort_by(f64::total_cmp);
    let mut clustered: Vec<(f64, usize)> = Vec::new();
    for r in reals {
        match clustered.last_mut() {
            Some((root, count)) if (r - *root).abs() <= cluster_tol => {
                // Running mean keeps the cluster representative centered.
                *root += (r - *root) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => clustered.push((r, 1)),
        }
    }
    Ok(clustered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_derivative() {
        let p = UnivariatePoly::new(vec![1.0, -2.0, 1.0]); // (t - 1)²
        assert_eq!(p.eval(3.0), 4.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 2.0]);
    }

    #[test]
    fn arithmetic_identities() {
        let p = UnivariatePoly::new(vec![1.0, 2.0]);
        let q = UnivariatePoly::new(vec![-1.0, 1.0]);
        assert_eq!(p.mul(&q).coeffs(), &[-1.0, -1.0, 2.0]);
        assert_eq!(p.add(&q).coeffs(), &[0.0, 3.0]);
        assert_eq!(p.pow(2).coeffs(), &[1.0, 4.0, 4.0]);
    }

    #[test]
    fn trims_relative_noise() {
        let p = UnivariatePoly::new(vec![2.0, 1.0, 1e-15]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(p.trimmed().coeffs(), &[2.0, 1.0]);
    }

    #[test]
    fn quartic_roots_with_known_values() {
        // (t - 1)(t + 2)(t - 3)(t + 4) = t⁴ + 2t³ - 13t² - 14t + 24
        let p = UnivariatePoly::new(vec![24.0, -14.0, -13.0, 2.0, 1.0]);
        let roots = real_roots(&p, 1e-9).unwrap();
        let expected = [-4.0, -2.0, 1.0, 3.0];
        assert_eq!(roots.len(), 4);
        for ((r, mult), e) in roots.iter().zip(expected) {
            assert!((r - e).abs() < 1e-10, "root {r} vs {e}");
            assert_eq!(*mult, 1);
        }
    }

    #[test]
    fn complex_pairs_are_filtered() {
        // (t² + 1)(t - 2): only the real root survives.
        let p = UnivariatePoly::new(vec![-2.0, 1.0, -2.0, 1.0]);
        let roots = real_roots(&p, 1e-9).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].0 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn double_root_is_clustered() {
        // (2t - 1)² = 4t² - 4t + 1
        let p = UnivariatePoly::new(vec![1.0, -4.0, 4.0]);
        let roots = real_roots(&p, 1e-6).unwrap();
        assert_eq!(roots.len(), 1);
        let (r, mult) = roots[0];
        assert!((r - 0.5).abs() < 1e-7);
        assert_eq!(mult, 2);
    }

    #[test]
    fn constants_and_zero_polynomial() {
        assert_eq!(
            real_roots(&UnivariatePoly::constant(3.0), 1e-9).unwrap(),
            vec![]
        );
        assert_eq!(
            real_roots(&UnivariatePoly::zero(), 1e-9).unwrap_err(),
            PolyError::ZeroPolynomial
        );
    }

    #[test]
    fn linear_root_is_exact() {
        let p = UnivariatePoly::new(vec![-3.0, 2.0]); // 2t - 3
        let roots = real_roots(&p, 1e-9).unwrap();
        assert_eq!(roots, vec![(1.5, 1)]);
    }
}

//! Singular loci of generalized distance-squared mappings of the plane.
//!
//! A mapping sends x ∈ ℝ² to the ℓ-tuple of weighted squared distances
//! `F_i(x) = a_i1 (x1 − p_i1)² + a_i2 (x2 − p_i2)²` from fixed centers
//! `p_i`. This crate locates the singular points of such mappings,
//! recognizes cross-cap (Whitney umbrella) points for ℓ = 3, classifies
//! the ℓ = 2 singular curve, and cross-checks everything against an
//! independent geometric oracle: a point is singular exactly when all ℓ
//! level curves through it are mutually tangent.
//!
//! Modules:
//! - [`map`]: mapping construction, evaluation, Jacobian, numerical rank;
//! - [`poly`]: dense univariate polynomials and real root extraction;
//! - [`conic`]: implicit conics, classification, resultants, tangency;
//! - [`locus`]: the singular-point solver and the ℓ = 2 singular curve;
//! - [`classify`]: cross-cap recognition and whole-map classification;
//! - [`foliation`]: level curves, degeneracy flags, the tangency oracle;
//! - [`experiment`]: seeded Monte Carlo validation of the generic counts;
//! - [`figure`]: SVG rendering of the level-curve geometry.

pub mod classify;
pub mod conic;
pub mod experiment;
pub mod figure;
pub mod foliation;
pub mod locus;
pub mod map;
pub mod poly;

#[cfg(test)]
pub(crate) mod testutil;

pub use classify::{
    classify_map, crosscap_test, ClassReport, ClassifyError, CrossCapWitness, MapClass,
    DEFAULT_CROSSCAP_TOL,
};
pub use conic::{
    classify_conic, eliminate_variable, minor_conics, tangent_at_point, Conic, ConicError,
    ConicKind, MinorConic, Var, DEFAULT_CLASSIFY_TOL,
};
pub use experiment::{
    run_genericity_experiment, sample_centers, ExperimentConfig, ExperimentReport, TrialRecord,
};
pub use figure::{figure_svg, render_figure, FigureError};
pub use foliation::{
    default_search_box, detect_degeneracy, levels_through_point, tangency_search, BoundingBox,
    DegeneracyReport, FoliationLevel, OracleReport, DEFAULT_ORACLE_GRID, DEFAULT_TANGENCY_TOL,
};
pub use locus::{
    singular_curve, solve_singular_points, SingularPointRecord, SolveError, DEFAULT_RESIDUAL_TOL,
};
pub use map::{
    evaluate, jacobian, make_mapping, make_special, rank_at, CentralPoint, CoefficientMatrix,
    FormKind, GdsMapping, Jacobian, MapError, MapSpec, Point2, RankInfo, SpecialForm,
    DEFAULT_RANK_TOL,
};
pub use poly::{real_roots, PolyError, UnivariatePoly};

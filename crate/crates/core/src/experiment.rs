//! Seeded Monte Carlo validation of the generic singular-point counts:
//! ℓ = 3 mappings should show exactly one singular point (a cross-cap),
//! ℓ > 3 mappings none, for almost every central point.
//!
//! Determinism contract: the report — including every ordering — is a pure
//! function of the config. Each trial draws from its own counter-derived
//! RNG stream, so thread scheduling cannot reorder sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{crosscap_test, DEFAULT_CROSSCAP_TOL};
use crate::foliation::{default_search_box, detect_degeneracy, tangency_search, BoundingBox};
use crate::locus::{solve_singular_points, DEFAULT_RESIDUAL_TOL};
use crate::map::{make_special, CentralPoint, MapError, Point2, SpecialForm};

/// Tolerance used to flag degenerate central points inside trials.
const TRIAL_DEGENERACY_TOL: f64 = 1e-6;

/// Match radius when comparing oracle and solver point sets.
const ORACLE_MATCH_TOL: f64 = 1e-5;

const ORACLE_GRID: usize = 200;
const ORACLE_OBJECTIVE_TOL: f64 = 1e-7;

/// Configuration for one deterministic experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Number of components; must be ≥ 3.
    pub ell: usize,
    /// First-row coefficients, 0 < a < b.
    pub a: f64,
    pub b: f64,
    pub trials: u64,
    /// Centers are sampled i.i.d. uniformly from this box.
    pub sampling_box: BoundingBox,
    pub seed: u64,
    /// Residual tolerance handed to the singular-point solver.
    pub tol: f64,
    /// Run the tangency oracle on every k-th trial (0 = never).
    pub oracle_every: u64,
    /// Keep per-trial records in the report.
    pub retain_trials: bool,
}

impl ExperimentConfig {
    pub fn new(ell: usize, trials: u64, seed: u64) -> Self {
        Self {
            ell,
            a: 1.0,
            b: 2.0,
            trials,
            sampling_box: BoundingBox::new(-2.0, -2.0, 2.0, 2.0),
            seed,
            tol: DEFAULT_RESIDUAL_TOL,
            oracle_every: 0,
            retain_trials: false,
        }
    }

    pub fn validate(&self) -> Result<(), MapError> {
        if self.ell < 3 {
            return Err(MapError::InvalidParams(format!(
                "experiment requires ell >= 3, got {}",
                self.ell
            )));
        }
        if !(self.a.is_finite() && self.b.is_finite() && 0.0 < self.a && self.a < self.b) {
            return Err(MapError::InvalidParams(format!(
                "coefficients must satisfy 0 < a < b, got a={}, b={}",
                self.a, self.b
            )));
        }
        if !self.sampling_box.is_valid() {
            return Err(MapError::InvalidParams(
                "sampling box must be a non-degenerate rectangle".into(),
            ));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(MapError::InvalidParams(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Everything recorded about a single trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub centers: Vec<[f64; 2]>,
    pub singular_points: Vec<[f64; 2]>,
    pub singular_count: usize,
    /// Some degeneracy flag fired for the sampled central point.
    pub degenerate: bool,
    /// The solver could not certify its result.
    pub unresolved: bool,
    /// ℓ = 3 only: the trial found exactly one point and it is a cross-cap.
    pub crosscap_pass: bool,
    /// Oracle agreement, when the oracle ran on this trial.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_agree: Option<bool>,
}

/// Aggregated outcome of a seeded experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub ell: usize,
    pub a: f64,
    pub b: f64,
    pub trials: u64,
    pub tol: f64,
    /// singular-point count → number of trials with that count.
    pub histogram: BTreeMap<usize, u64>,
    pub degenerate_trials: u64,
    pub unresolved_trials: u64,
    /// Clean trials matching the generic prediction for this ℓ
    /// (one cross-cap point for ℓ = 3, no singular point for ℓ > 3).
    pub generic_count_pass: u64,
    /// Trials whose single singular point passed the cross-cap test.
    pub crosscap_pass: u64,
    pub oracle_checked: u64,
    pub oracle_agree: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_records: Option<Vec<TrialRecord>>,
}

/// Centers for trial `trial` of a run seeded with `seed`: an independent
/// counter-derived stream, so any subset of trials can be regenerated.
pub fn sample_centers(seed: u64, trial: u64, ell: usize, window: BoundingBox) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..ell)
        .map(|_| {
            let x1 = rng.random_range(window.x0..=window.x1);
            let x2 = rng.random_range(window.y0..=window.y1);
            Point2::new(x1, x2)
        })
        .collect()
}

/// Runs the experiment described by `cfg`. Trials execute in parallel;
/// the report is byte-identical across thread counts for a fixed config.
pub fn run_genericity_experiment(cfg: &ExperimentConfig) -> ExperimentReport {
    cfg.validate().expect("experiment config must be valid");

    let records: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, trial))
        .collect();

    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();
    let mut degenerate_trials = 0;
    let mut unresolved_trials = 0;
    let mut generic_count_pass = 0;
    let mut crosscap_pass = 0;
    let mut oracle_checked = 0;
    let mut oracle_agree = 0;
    for r in &records {
        *histogram.entry(r.singular_count).or_insert(0) += 1;
        degenerate_trials += u64::from(r.degenerate);
        unresolved_trials += u64::from(r.unresolved);
        crosscap_pass += u64::from(r.crosscap_pass);
        if let Some(agree) = r.oracle_agree {
            oracle_checked += 1;
            oracle_agree += u64::from(agree);
        }
        if !r.degenerate && !r.unresolved {
            let pass = if cfg.ell == 3 {
                r.singular_count == 1 && r.crosscap_pass
            } else {
                r.singular_count == 0
            };
            generic_count_pass += u64::from(pass);
        }
    }

    ExperimentReport {
        seed: cfg.seed,
        ell: cfg.ell,
        a: cfg.a,
        b: cfg.b,
        trials: cfg.trials,
        tol: cfg.tol,
        histogram,
        degenerate_trials,
        unresolved_trials,
        generic_count_pass,
        crosscap_pass,
        oracle_checked,
        oracle_agree,
        trial_records: cfg.retain_trials.then_some(records),
    }
}

fn run_trial(cfg: &ExperimentConfig, trial: u64) -> TrialRecord {
    let centers = sample_centers(cfg.seed, trial, cfg.ell, cfg.sampling_box);
    let centers_raw: Vec<[f64; 2]> = centers.iter().map(|p| [p.x1, p.x2]).collect();
    let p = CentralPoint::new(centers).expect("sampled centers are finite");
    let m = make_special(SpecialForm::EllipseCircle { a: cfg.a, b: cfg.b }, p)
        .expect("validated coefficients");

    let degenerate = !detect_degeneracy(&m, TRIAL_DEGENERACY_TOL).is_clean();
    let (points, unresolved) = match solve_singular_points(&m, cfg.tol) {
        Ok(points) => (points, false),
        Err(_) => (Vec::new(), true),
    };
    let singular_points: Vec<[f64; 2]> = points
        .iter()
        .map(|r| [r.location.x1, r.location.x2])
        .collect();

    let crosscap_pass = cfg.ell == 3
        && points.len() == 1
        && crosscap_test(&m, points[0].location, DEFAULT_CROSSCAP_TOL)
            .map(|w| w.is_crosscap)
            .unwrap_or(false);

    let oracle_agree =
        (cfg.oracle_every > 0 && trial.is_multiple_of(cfg.oracle_every) && !unresolved)
            .then(|| oracle_agrees(&m, &singular_points));

    TrialRecord {
        trial,
        centers: centers_raw,
        singular_count: points.len(),
        degenerate,
        unresolved,
        crosscap_pass,
        oracle_agree,
        singular_points,
    }
}

/// Cross-checks the solver against the geometric oracle on the default
/// window: each interior solver point must be re-found, and every oracle
/// point must correspond to a solver point.
fn oracle_agrees(m: &crate::map::GdsMapping, solver_points: &[[f64; 2]]) -> bool {
    let window = default_search_box(m);
    let report = tangency_search(m, window, ORACLE_GRID, ORACLE_OBJECTIVE_TOL);
    let cell = ((window.x1 - window.x0) / (ORACLE_GRID - 1) as f64)
        .max((window.y1 - window.y0) / (ORACLE_GRID - 1) as f64);
    let margin = 2.0 * cell;

    let matches = |a: [f64; 2], b: [f64; 2]| {
        Point2::new(a[0], a[1]).dist(Point2::new(b[0], b[1])) < ORACLE_MATCH_TOL
    };
    let solver_found = solver_points
        .iter()
        .filter(|q| window.edge_margin(Point2::new(q[0], q[1])) > margin)
        .all(|q| report.tangency_points.iter().any(|t| matches(*q, *t)));
    let oracle_backed = report
        .tangency_points
        .iter()
        .all(|t| solver_points.iter().any(|q| matches(*q, *t)));
    solver_found && oracle_backed
}

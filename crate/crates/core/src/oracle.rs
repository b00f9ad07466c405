//! Independent search for the state of the definite-value family closest to a
//! given state.
//!
//! Neither search evaluates `sum_n P_n rho P_n`: random search scores
//! assembled family elements by their HS distance to `rho`, and projected
//! descent minimizes `|| rho - rho'' ||_HS^2` over block coordinates. Both are
//! then compared against the Lüders state, which must not be beaten.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::hs_distance;
use crate::linalg::{c, hermitian_eigendecompose, Complex64, ComplexMatrix};
use crate::measurement::{lueders_channel, measure};
use crate::quantum::{
    assemble_family_element, random_family_element, random_family_element_with, ADefiniteFamilyElement,
    DensityOperator, Observable,
};
use crate::random::lane_rng;

/// No candidate may beat the reference by more than this.
pub const GAP_TOL: f64 = 1e-7;

/// Largest accepted HS distance between a search minimizer and the reference.
pub const ARGMIN_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    RandomSearch,
    ProjectedDescent,
    Both,
}

impl SearchMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMethod::RandomSearch => "random_search",
            SearchMethod::ProjectedDescent => "projected_descent",
            SearchMethod::Both => "both",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Smallest HS distance to `rho` found by the search.
    pub best_distance: f64,
    /// HS distance from `rho` to the reference state (the Lüders state unless
    /// a claimed minimizer was supplied).
    pub lueders_distance: f64,
    /// `best_distance - lueders_distance`.
    pub gap: f64,
    pub best_state: DensityOperator,
    /// HS distance between `best_state` and the reference state. For a merged
    /// report, the larger of the two searches' values.
    pub argmin_deviation: f64,
    /// Descent iterations (zero for random search).
    pub iterations_used: usize,
    /// Number of family elements scored.
    pub candidates_evaluated: usize,
    /// Descent stopped on the change tolerance rather than `max_iter`.
    pub converged: bool,
    pub method: SearchMethod,
}

impl OracleReport {
    pub fn minimality_holds(&self) -> bool {
        self.gap >= -GAP_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub samples: usize,
    /// Random-search lanes; the result is deterministic given `(seed, lanes)`.
    pub lanes: usize,
    pub max_iter: usize,
    pub step: f64,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            lanes: 8,
            max_iter: 10_000,
            step: 0.1,
            tol: 1e-12,
            seed: 0,
        }
    }
}

/// Smallest step before descent gives up on finding a decrease.
pub const STEP_FLOOR: f64 = 1e-6;

/// Family element with the measured weights and conditional states. Outcomes
/// without a conditional state get the maximally mixed block.
pub fn measured_family_element(obs: &Observable, rho: &DensityOperator) -> Result<ADefiniteFamilyElement> {
    let result = measure(obs, rho)?;
    let total: f64 = result.probabilities.iter().sum();
    let weights = result.probabilities.iter().map(|p| p / total).collect();
    let blocks: Vec<DensityOperator> = result
        .conditional_states
        .into_iter()
        .enumerate()
        .map(|(n, state)| {
            state.unwrap_or_else(|| {
                let p = &obs.projectors()[n];
                DensityOperator::from_trusted(p.scale(1.0 / obs.ranks()[n] as f64))
            })
        })
        .collect();
    ADefiniteFamilyElement::from_embedded(obs.clone(), weights, &blocks)
}

/// Random family elements for one lane of a search.
pub fn candidate_stream(obs: &Observable, seed: u64, lane: u64) -> impl Iterator<Item = ADefiniteFamilyElement> + '_ {
    let mut rng = lane_rng(seed, lane);
    std::iter::repeat_with(move || random_family_element_with(&mut rng, obs))
}

fn lane_share(samples: usize, lanes: usize, lane: usize) -> usize {
    // Sample j goes to lane j % lanes, so a larger budget only appends
    // candidates to each lane.
    if lane >= samples {
        0
    } else {
        (samples - lane).div_ceil(lanes)
    }
}

struct Best {
    distance: f64,
    state: DensityOperator,
}

fn search_best(
    obs: &Observable,
    rho: &DensityOperator,
    samples: usize,
    seed: u64,
    lanes: usize,
) -> Result<(Best, usize)> {
    let seeded_start = measured_family_element(obs, rho)?;
    let start_state = assemble_family_element(&seeded_start);
    let mut best = Best {
        distance: hs_distance(rho.matrix(), start_state.matrix())?,
        state: start_state,
    };

    let lane_results: Vec<Option<Best>> = (0..lanes)
        .into_par_iter()
        .map(|lane| {
            let mut lane_best: Option<Best> = None;
            for element in candidate_stream(obs, seed, lane as u64).take(lane_share(samples, lanes, lane)) {
                let state = assemble_family_element(&element);
                let distance = hs_distance(rho.matrix(), state.matrix()).expect("same dimension");
                if lane_best.as_ref().is_none_or(|b| distance < b.distance) {
                    lane_best = Some(Best { distance, state });
                }
            }
            lane_best
        })
        .collect();

    for candidate in lane_results.into_iter().flatten() {
        if candidate.distance < best.distance {
            best = candidate;
        }
    }
    Ok((best, samples + 1))
}

fn report(
    best: Best,
    reference: &DensityOperator,
    rho: &DensityOperator,
    iterations_used: usize,
    candidates_evaluated: usize,
    converged: bool,
    method: SearchMethod,
) -> Result<OracleReport> {
    let lueders_distance = hs_distance(rho.matrix(), reference.matrix())?;
    let argmin_deviation = hs_distance(best.state.matrix(), reference.matrix())?;
    Ok(OracleReport {
        best_distance: best.distance,
        lueders_distance,
        gap: best.distance - lueders_distance,
        best_state: best.state,
        argmin_deviation,
        iterations_used,
        candidates_evaluated,
        converged,
        method,
    })
}

fn check_samples(samples: usize, lanes: usize) -> Result<()> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if lanes == 0 {
        return Err(Error::InvalidArgument("lanes must be at least 1".into()));
    }
    Ok(())
}

/// Random search over the family with the default lane count.
pub fn oracle_random_search(
    obs: &Observable,
    rho: &DensityOperator,
    samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    oracle_random_search_lanes(obs, rho, samples, seed, OracleConfig::default().lanes)
}

pub fn oracle_random_search_lanes(
    obs: &Observable,
    rho: &DensityOperator,
    samples: usize,
    seed: u64,
    lanes: usize,
) -> Result<OracleReport> {
    check_samples(samples, lanes)?;
    let reference = lueders_channel(obs, rho)?;
    random_search_against(obs, rho, &reference, samples, seed, lanes)
}

fn random_search_against(
    obs: &Observable,
    rho: &DensityOperator,
    reference: &DensityOperator,
    samples: usize,
    seed: u64,
    lanes: usize,
) -> Result<OracleReport> {
    let (best, evaluated) = search_best(obs, rho, samples, seed, lanes)?;
    report(best, reference, rho, 0, evaluated, true, SearchMethod::RandomSearch)
}

/// Descent iterate: unnormalized blocks `X_n = v_n rho''_n` in eigenspace
/// coordinates, with `sum_n tr X_n = 1`.
struct BlockIterate {
    blocks: Vec<DMatrix<Complex64>>,
}

impl BlockIterate {
    fn from_element(e: &ADefiniteFamilyElement) -> Self {
        let blocks = e
            .weights()
            .iter()
            .zip(e.blocks())
            .map(|(v, b)| b.matrix().as_nalgebra() * c(*v, 0.0))
            .collect();
        Self { blocks }
    }

    fn assemble(&self, obs: &Observable) -> DMatrix<Complex64> {
        let dim = obs.dim();
        let mut acc = DMatrix::zeros(dim, dim);
        for (n, x) in self.blocks.iter().enumerate() {
            let w = obs.eigenspace_basis(n);
            acc += w * x * w.adjoint();
        }
        acc
    }

    /// Clips negative block eigenvalues and rescales the joint spectrum to
    /// unit total trace.
    fn project_feasible(&mut self) -> Result<()> {
        let mut spectra = Vec::with_capacity(self.blocks.len());
        let mut total = 0.0;
        for x in &self.blocks {
            let herm = ComplexMatrix::from_nalgebra(x.clone())?.hermitian_part();
            let mut eig = hermitian_eigendecompose(&herm, f64::INFINITY)?;
            for l in eig.eigenvalues.iter_mut() {
                *l = l.max(0.0);
                total += *l;
            }
            spectra.push(eig);
        }
        if total <= f64::MIN_POSITIVE {
            // Everything clipped away; restart from the uniform mixture.
            let dim: usize = self.blocks.iter().map(|x| x.nrows()).sum();
            for x in self.blocks.iter_mut() {
                let k = x.nrows();
                *x = DMatrix::identity(k, k) * c(1.0 / dim as f64, 0.0);
            }
            return Ok(());
        }
        for (x, mut eig) in self.blocks.iter_mut().zip(spectra) {
            for l in eig.eigenvalues.iter_mut() {
                *l /= total;
            }
            *x = eig.reconstruct().into_nalgebra();
        }
        Ok(())
    }
}

fn objective(rho: &DMatrix<Complex64>, candidate: &DMatrix<Complex64>) -> f64 {
    (rho - candidate).norm_squared()
}

#[derive(Debug, Clone, Copy)]
pub struct DescentParams {
    pub max_iter: usize,
    pub step: f64,
    pub tol: f64,
}

/// Projected gradient descent from a random family element.
pub fn oracle_projected_descent(
    obs: &Observable,
    rho: &DensityOperator,
    max_iter: usize,
    step: f64,
    tol: f64,
    seed: u64,
) -> Result<OracleReport> {
    let start = random_family_element(obs, seed);
    projected_descent_from(obs, rho, &start, DescentParams { max_iter, step, tol })
}

/// Projected gradient descent from a given family element.
pub fn projected_descent_from(
    obs: &Observable,
    rho: &DensityOperator,
    start: &ADefiniteFamilyElement,
    params: DescentParams,
) -> Result<OracleReport> {
    let reference = lueders_channel(obs, rho)?;
    descent_against(obs, rho, &reference, start, params)
}

fn descent_against(
    obs: &Observable,
    rho: &DensityOperator,
    reference: &DensityOperator,
    start: &ADefiniteFamilyElement,
    params: DescentParams,
) -> Result<OracleReport> {
    let DescentParams {
        max_iter,
        mut step,
        tol,
    } = params;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    crate::linalg::check_dims(obs.dim(), rho.dim())?;
    if start.observable().dim() != obs.dim() || start.observable().len() != obs.len() {
        return Err(Error::InvalidArgument(
            "start element belongs to a different observable".into(),
        ));
    }

    let target = rho.matrix().as_nalgebra();
    let mut iterate = BlockIterate::from_element(start);
    let mut current = iterate.assemble(obs);
    let mut value = objective(target, &current);
    let mut iterations = 0;
    let mut evaluated = 1;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let residual = &current - target;
        let gradients: Vec<DMatrix<Complex64>> = (0..obs.len())
            .map(|n| {
                let w = obs.eigenspace_basis(n);
                w.adjoint() * &residual * w * c(2.0, 0.0)
            })
            .collect();

        let mut trial = BlockIterate {
            blocks: iterate
                .blocks
                .iter()
                .zip(&gradients)
                .map(|(x, g)| x - g * c(step, 0.0))
                .collect(),
        };
        trial.project_feasible()?;
        let trial_state = trial.assemble(obs);
        let trial_value = objective(target, &trial_state);
        evaluated += 1;

        if trial_value <= value {
            let change = (&trial_state - &current).norm();
            iterate = trial;
            current = trial_state;
            value = trial_value;
            if change < tol {
                converged = true;
                break;
            }
        } else {
            step *= 0.5;
            if step < STEP_FLOOR {
                // No decrease at any usable step: stationary to working precision.
                converged = true;
                break;
            }
        }
    }

    let state = DensityOperator::from_trusted(ComplexMatrix::from_nalgebra(current)?);
    let best = Best {
        distance: hs_distance(rho.matrix(), state.matrix())?,
        state,
    };
    report(
        best,
        reference,
        rho,
        iterations,
        evaluated,
        converged,
        SearchMethod::ProjectedDescent,
    )
}

fn merge(random: OracleReport, descent: OracleReport) -> OracleReport {
    let argmin_deviation = random.argmin_deviation.max(descent.argmin_deviation);
    let iterations_used = descent.iterations_used;
    let candidates_evaluated = random.candidates_evaluated + descent.candidates_evaluated;
    let converged = descent.converged;
    let lueders_distance = random.lueders_distance;
    let (best_distance, best_state) = if descent.best_distance < random.best_distance {
        (descent.best_distance, descent.best_state)
    } else {
        (random.best_distance, random.best_state)
    };
    OracleReport {
        best_distance,
        lueders_distance,
        gap: best_distance - lueders_distance,
        best_state,
        argmin_deviation,
        iterations_used,
        candidates_evaluated,
        converged,
        method: SearchMethod::Both,
    }
}

/// Runs both searches against the Lüders state and fails loudly when either
/// beats it by more than [`GAP_TOL`] or lands farther than [`ARGMIN_TOL`]
/// from it.
pub fn verify_minimality(obs: &Observable, rho: &DensityOperator, config: &OracleConfig) -> Result<OracleReport> {
    let reference = lueders_channel(obs, rho)?;
    verify_against(obs, rho, &reference, config)
}

/// Like [`verify_minimality`], but checks a caller-supplied claimed minimizer
/// in place of the Lüders state.
pub fn verify_claimed_minimizer(
    obs: &Observable,
    rho: &DensityOperator,
    claimed: &DensityOperator,
    config: &OracleConfig,
) -> Result<OracleReport> {
    crate::linalg::check_dims(rho.dim(), claimed.dim())?;
    verify_against(obs, rho, claimed, config)
}

fn verify_against(
    obs: &Observable,
    rho: &DensityOperator,
    reference: &DensityOperator,
    config: &OracleConfig,
) -> Result<OracleReport> {
    check_samples(config.samples, config.lanes)?;
    let random = random_search_against(obs, rho, reference, config.samples, config.seed, config.lanes)?;
    // The descent start uses a stream no search lane touches.
    let start = random_family_element_with(&mut lane_rng(config.seed, u64::MAX), obs);
    let descent = descent_against(
        obs,
        rho,
        reference,
        &start,
        DescentParams {
            max_iter: config.max_iter,
            step: config.step,
            tol: config.tol,
        },
    )?;
    let merged = merge(random, descent);
    if !merged.minimality_holds() || merged.argmin_deviation > ARGMIN_TOL {
        return Err(Error::MinimalityViolation(Box::new(merged)));
    }
    Ok(merged)
}

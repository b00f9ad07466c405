//! Seeded property suite over every module.
//!
//! Each check draws its inputs from its own ChaCha stream (`lane_rng(seed,
//! check index)`), so adding cases to one check never shifts another. The
//! report holds no timings and is a pure function of the configuration.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    hs_distance, hs_norm, is_closer, project_onto_operator_subspace, pythagoras_residual, ray_distance,
    vector_distance, SuperProjector,
};
use crate::linalg::{hermitian_eigendecompose, matmul, trace, ComplexMatrix, UnitVector};
use crate::measurement::{certainty_check, lueders_channel, measure, outcome_probabilities, verify_qnd};
use crate::oracle::{verify_minimality, OracleConfig, ARGMIN_TOL, GAP_TOL};
use crate::quantum::{
    assemble_family_element, make_density, random_density_with, random_family_element_with, spectral_decompose,
    DensityOperator, Observable, DEFAULT_CLUSTER_TOL,
};
use crate::random::{
    lane_rng, random_hermitian_with, random_matrix_with, random_observable_with, random_projector_with,
    random_unit_vector_with, SeededRng,
};
use crate::sampler::{repeatability_run, sample_outcomes};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Randomized cases per dimension for each check.
    pub cases: usize,
    /// Random-search budget per oracle case.
    pub oracle_samples: usize,
    /// Trials per sampler check.
    pub trials: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            dims: vec![2, 3, 4],
            seed: 0,
            cases: 20,
            oracle_samples: 1_000,
            trials: 10_000,
        }
    }
}

/// Result of one named property over all its cases.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest residual seen (or mismatch count for boolean checks).
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

/// Accumulates residuals for one check.
struct Tally {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    failures: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            cases: 0,
            failures: 0,
            worst: 0.0,
        }
    }

    /// Residual must be `<= tolerance`. NaN counts as a failure.
    fn residual(&mut self, value: f64) {
        self.cases += 1;
        if value > self.worst || value.is_nan() {
            self.worst = value;
        }
        if value.is_nan() || value > self.tolerance {
            self.failures += 1;
        }
    }

    fn boolean(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            self.worst += 1.0;
        }
    }

    fn finish(self) -> CheckResult {
        CheckResult {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            worst: self.worst,
            tolerance: self.tolerance,
        }
    }
}

type Check = fn(&SuiteConfig, &mut SeededRng) -> Result<Vec<CheckResult>>;

const CHECKS: &[Check] = &[
    check_linalg,
    check_observables,
    check_family,
    check_super_projector,
    check_phase_ordering,
    check_pythagoras,
    check_measurement,
    check_certainty,
    check_transition_probability,
    check_oracle,
    check_sampler,
];

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    if config.dims.is_empty() || config.dims.contains(&0) {
        return Err(Error::InvalidArgument("dims must be non-empty and positive".into()));
    }
    if config.cases == 0 || config.oracle_samples == 0 || config.trials == 0 {
        return Err(Error::InvalidArgument(
            "cases, oracle samples and trials must be positive".into(),
        ));
    }
    let mut checks = Vec::new();
    for (index, check) in CHECKS.iter().enumerate() {
        let mut rng = lane_rng(config.seed, index as u64);
        checks.extend(check(config, &mut rng)?);
    }
    Ok(SuiteReport {
        config: config.clone(),
        checks,
    })
}

fn random_state(rng: &mut SeededRng, dim: usize) -> Result<DensityOperator> {
    let rank = rng.random_range(1..=dim);
    random_density_with(rng, dim, rank)
}

fn check_linalg(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut recon = Tally::new("linalg.eigen_reconstruction", 1e-9);
    let mut cyclic = Tally::new("linalg.trace_cyclic", 1e-10);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let h = random_hermitian_with(rng, dim);
            let eig = hermitian_eigendecompose(&h, 1e-10)?;
            recon.residual(hs_distance(&eig.reconstruct(), &h)?);
            let a = random_matrix_with(rng, dim);
            let b = random_matrix_with(rng, dim);
            cyclic.residual((trace(&matmul(&a, &b)?) - trace(&matmul(&b, &a)?)).norm());
        }
    }
    Ok(vec![recon.finish(), cyclic.finish()])
}

fn check_observables(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut defect = Tally::new("types.projector_relations", 1e-10);
    let mut recon = Tally::new("types.spectral_reconstruction", 1e-9);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let h = random_hermitian_with(rng, dim);
            let obs = spectral_decompose(&h, DEFAULT_CLUSTER_TOL)?;
            defect.residual(obs.projector_defect());
            recon.residual(hs_distance(&obs.matrix(), &h)?);
        }
    }
    Ok(vec![defect.finish(), recon.finish()])
}

fn check_family(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut valid = Tally::new("types.family_element_is_state", 0.0);
    let mut fixed = Tally::new("types.family_element_block_diagonal", 1e-9);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let obs = random_observable_with(rng, dim);
            let e = random_family_element_with(rng, &obs);
            let state = assemble_family_element(&e);
            valid.boolean(make_density(state.matrix()).is_ok());
            let sp = SuperProjector::new(obs);
            fixed.residual(sp.apply(state.matrix())?.max_abs_diff(state.matrix()));
        }
    }
    Ok(vec![valid.finish(), fixed.finish()])
}

fn check_super_projector(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut idempotent = Tally::new("geometry.superprojector_idempotent", 1e-9);
    let mut hermitian = Tally::new("geometry.superprojector_hermitian", 1e-9);
    let mut contraction = Tally::new("geometry.superprojector_contraction", 1e-10);
    let mut state = Tally::new("geometry.projected_state_valid", 0.0);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let sp = SuperProjector::new(random_observable_with(rng, dim));
            let a = random_matrix_with(rng, dim);
            let b = random_matrix_with(rng, dim);
            idempotent.residual(sp.idempotency_residual(&b)?);
            hermitian.residual(sp.hermiticity_residual(&a, &b)?);
            contraction.residual((hs_norm(&sp.apply(&b)?) - hs_norm(&b)).max(0.0));
            let rho = random_state(rng, dim)?;
            state.boolean(make_density(&sp.apply(rho.matrix())?).is_ok());
        }
    }
    Ok(vec![
        idempotent.finish(),
        hermitian.finish(),
        contraction.finish(),
        state.finish(),
    ])
}

/// Mismatch between the "not farther" orderings of phase-aligned vector
/// distances and ray-projector distances.
pub fn ordering_mismatch(psi: &UnitVector, phi: &UnitVector, chi: &UnitVector, slack: f64) -> Result<bool> {
    let dv_phi = vector_distance(psi, phi)?;
    let dv_chi = vector_distance(psi, chi)?;
    let dr_phi = ray_distance(psi, phi)?;
    let dr_chi = ray_distance(psi, chi)?;
    let forward = is_closer(dv_phi, dv_chi, slack) == is_closer(dr_phi, dr_chi, slack);
    let backward = is_closer(dv_chi, dv_phi, slack) == is_closer(dr_chi, dr_phi, slack);
    Ok(!(forward && backward))
}

fn check_phase_ordering(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut tally = Tally::new("geometry.phase_aligned_ordering", 0.0);
    for &dim in &config.dims {
        for case in 0..config.cases {
            let psi = random_unit_vector_with(rng, dim);
            let phi = random_unit_vector_with(rng, dim);
            // Every other case probes a tie: chi is phi with another phase.
            let chi = if case % 2 == 0 {
                random_unit_vector_with(rng, dim)
            } else {
                phi.with_phase(crate::linalg::Complex64::from_polar(
                    1.0,
                    rng.random_range(0.0..std::f64::consts::TAU),
                ))
            };
            tally.boolean(!ordering_mismatch(&psi, &phi, &chi, 1e-10)?);
        }
    }
    Ok(vec![tally.finish()])
}

fn check_pythagoras(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut pythagoras = Tally::new("geometry.pythagoras", 1e-9);
    let mut basis_route = Tally::new("geometry.basis_projection_matches", 1e-9);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let sp = SuperProjector::new(random_observable_with(rng, dim));
            let a = random_matrix_with(rng, dim);
            let pa = project_onto_operator_subspace(&sp.range_basis(), &a)?;
            basis_route.residual(pa.max_abs_diff(&sp.apply(&a)?));
            let b = sp.apply(&random_matrix_with(rng, dim))?;
            pythagoras.residual(pythagoras_residual(&a, &pa, &b)?);
        }
    }
    Ok(vec![pythagoras.finish(), basis_route.finish()])
}

fn check_measurement(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut weights = Tally::new("measurement.block_traces_equal_trace_rule", 1e-10);
    let mut recombine = Tally::new("measurement.conditionals_recombine", 1e-9);
    let mut qnd = Tally::new("measurement.qnd_properties", 0.0);
    let mut conserved = Tally::new("measurement.probabilities_conserved", 1e-9);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let obs = random_observable_with(rng, dim);
            let rho = random_state(rng, dim)?;
            let result = measure(&obs, &rho)?;
            let lueders = lueders_channel(&obs, &rho)?;
            for (p, proj) in result.probabilities.iter().zip(obs.projectors()) {
                let block = &(proj * lueders.matrix()) * proj;
                weights.residual((trace(&block).re - p).abs());
            }
            recombine.residual(result.recombination_residual());
            let report = verify_qnd(&obs, &rho)?;
            qnd.boolean(report.passed());
            conserved.residual(report.conservation_residual);
        }
    }
    Ok(vec![
        weights.finish(),
        recombine.finish(),
        qnd.finish(),
        conserved.finish(),
    ])
}

/// State supported inside `range(p)` for a projector of rank `rank`.
pub fn state_inside_range<R: Rng + ?Sized>(rng: &mut R, p: &ComplexMatrix) -> Result<DensityOperator> {
    let obs = spectral_decompose(p, DEFAULT_CLUSTER_TOL)?;
    // Eigenvalue 1 is the last outcome.
    let n = obs.len() - 1;
    let w = obs.eigenspace_basis(n);
    let k = w.ncols();
    let rank = rng.random_range(1..=k);
    let local = random_density_with(rng, k, rank)?;
    DensityOperator::new(ComplexMatrix::from_nalgebra(
        w * local.matrix().as_nalgebra() * w.adjoint(),
    )?)
}

fn check_certainty(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut agree = Tally::new("measurement.certainty_agreement", 0.0);
    let mut engineered = Tally::new("measurement.certainty_engineered_cases", 0.0);
    for &dim in &config.dims {
        for case in 0..config.cases {
            let rank = rng.random_range(1..=dim);
            let p = random_projector_with(rng, dim, rank)?;
            let rho = if case % 5 == 0 {
                let rho = state_inside_range(rng, &p)?;
                let check = certainty_check(&rho, &p)?;
                engineered.boolean(check.trace_one && check.sandwich_fixed);
                rho
            } else {
                random_state(rng, dim)?
            };
            agree.boolean(certainty_check(&rho, &p)?.agrees());
        }
    }
    Ok(vec![agree.finish(), engineered.finish()])
}

fn check_transition_probability(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut tally = Tally::new("measurement.transition_probability", 1e-12);
    for &dim in config.dims.iter().filter(|&&d| d >= 2) {
        for _ in 0..config.cases {
            let psi = random_unit_vector_with(rng, dim);
            let phi = random_unit_vector_with(rng, dim);
            let p = phi.projector();
            let obs = Observable::from_parts(vec![0.0, 1.0], vec![&ComplexMatrix::identity(dim) - &p, p])?;
            let probs = outcome_probabilities(&obs, &DensityOperator::pure(&psi))?;
            tally.residual((probs[1] - phi.inner(&psi)?.norm_sqr()).abs());
        }
    }
    Ok(vec![tally.finish()])
}

fn check_oracle(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut gap = Tally::new("oracle.no_candidate_beats_lueders", GAP_TOL);
    let mut argmin = Tally::new("oracle.descent_reaches_lueders", ARGMIN_TOL);
    for &dim in &config.dims {
        for _ in 0..config.cases {
            let obs = random_observable_with(rng, dim);
            let rho = random_state(rng, dim)?;
            let oracle_config = OracleConfig {
                samples: config.oracle_samples,
                seed: rng.random(),
                ..OracleConfig::default()
            };
            let report = match verify_minimality(&obs, &rho, &oracle_config) {
                Ok(report) => report,
                Err(Error::MinimalityViolation(report)) => *report,
                Err(other) => return Err(other),
            };
            gap.residual((-report.gap).max(0.0));
            argmin.residual(report.argmin_deviation);
        }
    }
    Ok(vec![gap.finish(), argmin.finish()])
}

fn check_sampler(config: &SuiteConfig, rng: &mut SeededRng) -> Result<Vec<CheckResult>> {
    let mut repeat = Tally::new("sampler.repeatability", 0.0);
    let mut four_sigma = Tally::new("sampler.frequencies_within_4_sigma", 0.0);
    let mut chi = Tally::new("sampler.chi_square_999", 0.0);
    for &dim in &config.dims {
        let obs = random_observable_with(rng, dim);
        let rho = random_state(rng, dim)?;
        let seed = rng.random();
        let run = repeatability_run(&obs, &rho, config.trials, seed)?;
        repeat.boolean(run.fully_repeatable());

        let report = sample_outcomes(&obs, &rho, config.trials, seed)?;
        let within = (0..report.counts.len()).all(|n| {
            let dev = (report.frequencies[n] - report.probabilities[n]).abs();
            dev <= 4.0 * report.standard_error(n)
        });
        four_sigma.boolean(within);
        chi.boolean(report.chi_square_passes(0.999));
    }
    Ok(vec![repeat.finish(), four_sigma.finish(), chi.finish()])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let config = SuiteConfig {
            dims: vec![2, 3],
            seed: 7,
            cases: 4,
            oracle_samples: 50,
            trials: 2_000,
        };
        let a = run_suite(&config).unwrap();
        let b = run_suite(&config).unwrap();
        assert!(a.passed(), "{:?}", a.failed_checks().collect::<Vec<_>>());
        assert_eq!(a, b);
        assert!(a.checks.iter().all(|c| c.cases > 0));
    }

    #[test]
    fn rejects_empty_dims() {
        let config = SuiteConfig {
            dims: vec![],
            ..SuiteConfig::default()
        };
        assert!(run_suite(&config).is_err());
    }

    #[test]
    fn tally_counts_nan_as_failure() {
        let mut t = Tally::new("x", 1.0);
        t.residual(f64::NAN);
        t.residual(0.5);
        let r = t.finish();
        assert_eq!(r.failures, 1);
        assert_eq!(r.cases, 2);
    }
}

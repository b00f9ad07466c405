//! End-to-end checks of the public API against independent references.

use proptest::prelude::*;

use qnd_core::random::{random_observable, random_unit_vector};
use qnd_core::{
    hs_distance, lueders_channel, measure, oracle_random_search, outcome_probabilities, random_density,
    random_family_element, run_suite, spectral_decompose, verify_minimality, Complex64, ComplexMatrix, DensityOperator,
    Error, Observable, OracleConfig, SuiteConfig, UnitVector,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Lüders channel for a diagonal observable, computed by masking entries
/// whose row and column fall in different eigenspaces.
fn masked(diag: &[f64], rho: &ComplexMatrix) -> ComplexMatrix {
    let d = diag.len();
    ComplexMatrix::from_fn(d, |i, j| if diag[i] == diag[j] { rho[(i, j)] } else { c(0.0, 0.0) }).unwrap()
}

#[test]
fn qubit_plus_state_under_sigma_z() {
    let z = Observable::diagonal(&[1.0, -1.0]).unwrap();
    let plus = UnitVector::normalize(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    let result = measure(&z, &DensityOperator::pure(&plus)).unwrap();
    assert_eq!(result.probabilities.len(), 2);
    for p in &result.probabilities {
        assert!((p - 0.5).abs() < 1e-15);
    }
    let half = ComplexMatrix::identity(2).scale(0.5);
    assert!(result.final_state.matrix().max_abs_diff(&half) < 1e-15);
}

#[test]
fn degenerate_observable_keeps_coherence_inside_eigenspace() {
    // diag(1, 1, 2): coherence between the first two levels survives.
    let diag = [1.0, 1.0, 2.0];
    let obs = Observable::diagonal(&diag).unwrap();
    assert_eq!(obs.ranks(), vec![2, 1]);
    let rho = random_density(3, 3, 11).unwrap();
    let lueders = lueders_channel(&obs, &rho).unwrap();
    assert!(lueders.matrix().max_abs_diff(&masked(&diag, rho.matrix())) < 1e-14);
    assert!(lueders.matrix()[(0, 1)].norm() > 1e-3);
}

#[test]
fn decomposition_of_rotated_diagonal_recovers_spectrum() {
    // H = U diag(-1, 0, 0, 3) U^dagger with a random unitary U.
    let dim = 4;
    let basis: Vec<UnitVector> = qnd_core::random::random_orthonormal_basis(&mut qnd_core::random::seeded(5), dim);
    let spectrum = [-1.0, 0.0, 0.0, 3.0];
    let mut h = ComplexMatrix::zeros(dim);
    for (v, a) in basis.iter().zip(spectrum) {
        h = &h + &v.projector().scale(a);
    }
    let obs = spectral_decompose(&h, 1e-8).unwrap();
    assert_eq!(obs.len(), 3);
    assert_eq!(obs.ranks(), vec![1, 2, 1]);
    for (got, want) in obs.eigenvalues().iter().zip([-1.0, 0.0, 3.0]) {
        assert!((got - want).abs() < 1e-10);
    }
    assert!(obs.matrix().max_abs_diff(&h) < 1e-10);
}

#[test]
fn invalid_states_are_rejected() {
    let not_hermitian = ComplexMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.1, 0.0)], vec![c(0.0, 0.0), c(0.5, 0.0)]]);
    assert!(matches!(
        DensityOperator::new(not_hermitian.unwrap()),
        Err(Error::NotHermitian { .. })
    ));
    let negative = ComplexMatrix::from_real(2, &[1.5, 0.0, 0.0, -0.5]).unwrap();
    assert!(matches!(
        DensityOperator::new(negative),
        Err(Error::NegativeEigenvalue { .. })
    ));
    let trace_two = ComplexMatrix::identity(2);
    assert!(matches!(
        DensityOperator::new(trace_two),
        Err(Error::TraceNotOne { .. })
    ));
}

#[test]
fn oracle_detects_a_wrong_claim() {
    let obs = random_observable(3, 1);
    let rho = random_density(3, 2, 2).unwrap();
    let config = OracleConfig {
        samples: 300,
        ..OracleConfig::default()
    };
    assert!(verify_minimality(&obs, &rho, &config).is_ok());
    let wrong = DensityOperator::maximally_mixed(3);
    match qnd_core::verify_claimed_minimizer(&obs, &rho, &wrong, &config) {
        Err(Error::MinimalityViolation(report)) => assert!(report.gap < -1e-7),
        other => panic!("expected a violation, got {other:?}"),
    }
}

#[test]
fn random_search_result_grows_monotone_with_budget() {
    let obs = random_observable(4, 3);
    let rho = random_density(4, 4, 4).unwrap();
    let small = oracle_random_search(&obs, &rho, 200, 9).unwrap();
    let large = oracle_random_search(&obs, &rho, 2_000, 9).unwrap();
    assert!(large.best_distance <= small.best_distance);
}

#[test]
fn default_suite_passes() {
    let report = run_suite(&SuiteConfig::default()).unwrap();
    let failed: Vec<_> = report.failed_checks().map(|c| c.name).collect();
    assert!(failed.is_empty(), "{failed:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lueders_matches_masking_in_eigenbasis(dim in 2usize..=6, seed in any::<u64>()) {
        let levels: Vec<f64> = (0..dim).map(|i| ((seed >> (i % 60)) & 1) as f64 + (i % 3) as f64).collect();
        let obs = Observable::diagonal(&levels).unwrap();
        let rho = random_density(dim, 1 + (seed as usize) % dim, seed).unwrap();
        let lueders = lueders_channel(&obs, &rho).unwrap();
        prop_assert!(lueders.matrix().max_abs_diff(&masked(&levels, rho.matrix())) < 1e-14);
    }

    #[test]
    fn probabilities_are_diagonal_sums(dim in 2usize..=6, seed in any::<u64>()) {
        let levels: Vec<f64> = (0..dim).map(|i| (i % 2) as f64).collect();
        let obs = Observable::diagonal(&levels).unwrap();
        let rho = random_density(dim, dim, seed).unwrap();
        let probs = outcome_probabilities(&obs, &rho).unwrap();
        for (n, &a) in obs.eigenvalues().iter().enumerate() {
            let direct: f64 = (0..dim).filter(|&i| levels[i] == a).map(|i| rho.matrix()[(i, i)].re).sum();
            prop_assert!((probs[n] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn no_family_element_is_closer_than_lueders(dim in 2usize..=5, seed in any::<u64>()) {
        let obs = random_observable(dim, seed);
        let rho = random_density(dim, dim, seed ^ 1).unwrap();
        let best = hs_distance(rho.matrix(), lueders_channel(&obs, &rho).unwrap().matrix()).unwrap();
        for k in 0..20 {
            let e = random_family_element(&obs, seed.wrapping_add(k));
            let candidate = qnd_core::assemble_family_element(&e);
            prop_assert!(hs_distance(rho.matrix(), candidate.matrix()).unwrap() >= best - 1e-12);
        }
    }

    #[test]
    fn pure_state_born_rule(dim in 2usize..=8, seed in any::<u64>()) {
        let psi = random_unit_vector(dim, seed);
        let phi = random_unit_vector(dim, seed ^ 0xdead);
        let overlap: Complex64 = phi.components().iter().zip(psi.components()).map(|(a, b)| a.conj() * b).sum();
        let p = qnd_core::transition_probability(&psi, &phi).unwrap();
        prop_assert!((p - overlap.norm_sqr()).abs() < 1e-14);
    }
}

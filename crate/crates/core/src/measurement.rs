//! Minimal (Lüders) projective measurement.
//!
//! The non-selective update is `rho -> sum_n P_n rho P_n`. Its weights are the
//! trace-rule probabilities `p_n = tr(P_n rho)` and its components are the
//! conditional states `P_n rho P_n / p_n`.

use crate::error::{Error, Result};
use crate::geometry::{hs_distance, hs_inner, SuperProjector};
use crate::linalg::{check_dims, trace, ComplexMatrix};
use crate::quantum::{DensityOperator, Observable, Outcome};

/// Below this probability an outcome has no conditional state.
pub const P_FLOOR: f64 = 1e-12;

/// Negative probabilities above `-PROBABILITY_CLIP` are round-off.
pub const PROBABILITY_CLIP: f64 = 1e-10;

/// Tolerance on certainty (`tr(P rho) = 1`) and on probability sums.
pub const CERTAINTY_TOL: f64 = 1e-9;

/// Tolerance on `|| P rho P - rho ||_HS` in [`certainty_check`].
pub const SANDWICH_TOL: f64 = 1e-8;

/// Accepted defect of an input projector in [`certainty_check`].
pub const PROJECTOR_INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MeasurementResult {
    pub observable: Observable,
    /// `tr(P_n rho)`, clipped to `[0, 1]`.
    pub probabilities: Vec<f64>,
    /// `None` when `probabilities[n] < P_FLOOR`.
    pub conditional_states: Vec<Option<DensityOperator>>,
    /// Non-selective post-measurement state.
    pub final_state: DensityOperator,
}

impl MeasurementResult {
    pub fn outcome(&self, n: usize) -> Result<Outcome> {
        self.observable.outcome(n)
    }

    /// `sum_n p_n rho_n'` over outcomes that have a conditional state.
    pub fn recombined(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.final_state.dim());
        for (p, state) in self.probabilities.iter().zip(&self.conditional_states) {
            if let Some(state) = state {
                acc = &acc + &state.matrix().scale(*p);
            }
        }
        acc
    }

    /// Max-entry distance between the recombined conditionals and the final
    /// state.
    pub fn recombination_residual(&self) -> f64 {
        self.recombined().max_abs_diff(self.final_state.matrix())
    }
}

/// Trace-rule probabilities `tr(P_n rho)` in outcome order.
pub fn outcome_probabilities(obs: &Observable, rho: &DensityOperator) -> Result<Vec<f64>> {
    check_dims(obs.dim(), rho.dim())?;
    obs.projectors()
        .iter()
        .enumerate()
        .map(|(index, p)| {
            // P is Hermitian, so tr(P rho) = tr(P† rho).
            let value = hs_inner(p, rho.matrix())?.re;
            if value < -PROBABILITY_CLIP {
                return Err(Error::NegativeProbability { index, value });
            }
            Ok(value.clamp(0.0, 1.0))
        })
        .collect()
}

/// `sum_n P_n rho P_n`.
pub fn lueders_channel(obs: &Observable, rho: &DensityOperator) -> Result<DensityOperator> {
    let sp = SuperProjector::new(obs.clone());
    lueders_with(&sp, rho)
}

pub(crate) fn lueders_with(sp: &SuperProjector, rho: &DensityOperator) -> Result<DensityOperator> {
    Ok(DensityOperator::from_trusted(sp.apply(rho.matrix())?))
}

/// `P_n rho P_n / tr(P_n rho)`.
pub fn conditional_state(obs: &Observable, rho: &DensityOperator, n: usize) -> Result<DensityOperator> {
    check_dims(obs.dim(), rho.dim())?;
    let p = obs.projector(n)?;
    let sandwich = &(p * rho.matrix()) * p;
    // tr(P rho P) = tr(P rho); the sandwich trace keeps the result at unit
    // trace even when p_n is tiny.
    let probability = trace(&sandwich).re;
    if probability < P_FLOOR {
        return Err(Error::ProbabilityBelowFloor {
            index: n,
            probability: probability.max(0.0),
        });
    }
    Ok(DensityOperator::from_trusted(sandwich.scale(1.0 / probability)))
}

pub fn measure(obs: &Observable, rho: &DensityOperator) -> Result<MeasurementResult> {
    let probabilities = outcome_probabilities(obs, rho)?;
    let conditional_states = probabilities
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            if p < P_FLOOR {
                Ok(None)
            } else {
                conditional_state(obs, rho, n).map(Some)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let final_state = lueders_channel(obs, rho)?;
    Ok(MeasurementResult {
        observable: obs.clone(),
        probabilities,
        conditional_states,
        final_state,
    })
}

/// Both sides of the certainty equivalence `tr(rho P) = 1 <=> P rho P = rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertaintyCheck {
    pub trace_one: bool,
    pub sandwich_fixed: bool,
    /// `tr(rho P)`.
    pub trace_value: f64,
    /// `|| P rho P - rho ||_HS`.
    pub sandwich_residual: f64,
}

impl CertaintyCheck {
    pub fn agrees(&self) -> bool {
        self.trace_one == self.sandwich_fixed
    }
}

pub fn certainty_check(rho: &DensityOperator, p: &ComplexMatrix) -> Result<CertaintyCheck> {
    check_dims(rho.dim(), p.dim())?;
    let deviation = (p * p).max_abs_diff(p).max(p.hermitian_deviation());
    if deviation > PROJECTOR_INPUT_TOL {
        return Err(Error::NotProjector { deviation });
    }
    let trace_value = trace(&(rho.matrix() * p)).re;
    let sandwich_residual = hs_distance(&(&(p * rho.matrix()) * p), rho.matrix())?;
    Ok(CertaintyCheck {
        trace_one: (trace_value - 1.0).abs() < CERTAINTY_TOL,
        sandwich_fixed: sandwich_residual < SANDWICH_TOL,
        trace_value,
        sandwich_residual,
    })
}

/// Outcome of the non-demolition checks for one `(observable, state)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QndReport {
    /// Largest `|tr(P_n rho_n') - 1|` over outcomes with a conditional state.
    pub dispersion_residual: f64,
    /// Outcome on which the input is sharp, if any.
    pub sharp_input: Option<usize>,
    /// For a sharp input: whether the final state is sharp on the same outcome.
    pub sharp_preserved: Option<bool>,
    /// Largest deviation of the re-measurement distribution of a conditional
    /// state from the indicator of its own outcome.
    pub repeat_residual: f64,
    /// Largest `|p_n(channel(rho)) - p_n(rho)|`.
    pub conservation_residual: f64,
    pub tolerance: f64,
}

impl QndReport {
    pub fn dispersion_free(&self) -> bool {
        self.dispersion_residual <= self.tolerance
    }

    pub fn repeatable(&self) -> bool {
        self.repeat_residual <= self.tolerance && self.conservation_residual <= self.tolerance
    }

    pub fn passed(&self) -> bool {
        self.dispersion_free() && self.repeatable() && self.sharp_preserved != Some(false)
    }
}

fn sharp_outcome(probabilities: &[f64]) -> Option<usize> {
    probabilities.iter().position(|p| (p - 1.0).abs() < CERTAINTY_TOL)
}

pub fn verify_qnd(obs: &Observable, rho: &DensityOperator) -> Result<QndReport> {
    let result = measure(obs, rho)?;

    let mut dispersion_residual = 0.0f64;
    let mut repeat_residual = 0.0f64;
    for (n, state) in result.conditional_states.iter().enumerate() {
        let Some(state) = state else { continue };
        let again = outcome_probabilities(obs, state)?;
        dispersion_residual = dispersion_residual.max((again[n] - 1.0).abs());
        for (m, p) in again.iter().enumerate() {
            let expected = if m == n { 1.0 } else { 0.0 };
            repeat_residual = repeat_residual.max((p - expected).abs());
        }
    }

    let after = outcome_probabilities(obs, &result.final_state)?;
    let conservation_residual = after
        .iter()
        .zip(&result.probabilities)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let sharp_input = sharp_outcome(&result.probabilities);
    let sharp_preserved = sharp_input.map(|n| sharp_outcome(&after) == Some(n));

    Ok(QndReport {
        dispersion_residual,
        sharp_input,
        sharp_preserved,
        repeat_residual,
        conservation_residual,
        tolerance: CERTAINTY_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, UnitVector};
    use crate::quantum::random_density;
    use crate::random::{random_observable, random_projector, random_unit_vector};
    use proptest::prelude::*;

    fn sigma_z() -> Observable {
        Observable::diagonal(&[1.0, -1.0]).unwrap()
    }

    fn ket0() -> DensityOperator {
        DensityOperator::pure(&UnitVector::basis(2, 0))
    }

    fn ket1() -> DensityOperator {
        DensityOperator::pure(&UnitVector::basis(2, 1))
    }

    fn plus() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::pure(&UnitVector::new(vec![c(s, 0.0), c(s, 0.0)]).unwrap())
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(outcome_probabilities(&sigma_z(), &ket0()).unwrap(), vec![0.0, 1.0]);
        let p = outcome_probabilities(&sigma_z(), &plus()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rank_one_probability_is_transition_probability() {
        let psi = random_unit_vector(4, 10);
        let phi = random_unit_vector(4, 11);
        let p = phi.projector();
        let obs = Observable::from_parts(vec![0.0, 1.0], vec![&ComplexMatrix::identity(4) - &p, p]).unwrap();
        let probs = outcome_probabilities(&obs, &DensityOperator::pure(&psi)).unwrap();
        let overlap = phi.inner(&psi).unwrap().norm_sqr();
        assert!((probs[1] - overlap).abs() < 1e-12);
    }

    #[test]
    fn channel_examples() {
        let obs = sigma_z();
        let mixed = DensityOperator::maximally_mixed(2);
        assert!(
            lueders_channel(&obs, &mixed)
                .unwrap()
                .matrix()
                .max_abs_diff(mixed.matrix())
                < 1e-10
        );
        let out = lueders_channel(&obs, &plus()).unwrap();
        assert!(out.matrix().max_abs_diff(mixed.matrix()) < 1e-15);
        let rho = random_density(3, 3, 5).unwrap();
        let same = lueders_channel(&Observable::trivial(3), &rho).unwrap();
        assert!(same.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn conditional_examples() {
        // Outcome 1 is the eigenvalue +1, spanned by |0>.
        let cond = conditional_state(&sigma_z(), &plus(), 1).unwrap();
        assert!(cond.matrix().max_abs_diff(ket0().matrix()) < 1e-15);
        let same = conditional_state(&sigma_z(), &ket1(), 0).unwrap();
        assert!(same.matrix().max_abs_diff(ket1().matrix()) < 1e-15);
        assert!(matches!(
            conditional_state(&sigma_z(), &ket0(), 0),
            Err(Error::ProbabilityBelowFloor { index: 0, .. })
        ));
        assert!(matches!(
            conditional_state(&sigma_z(), &ket0(), 2),
            Err(Error::OutcomeOutOfRange { index: 2, outcomes: 2 })
        ));
    }

    #[test]
    fn measure_maximally_mixed_gives_rank_fractions() {
        let obs = random_observable(6, 31);
        let result = measure(&obs, &DensityOperator::maximally_mixed(6)).unwrap();
        for (p, k) in result.probabilities.iter().zip(obs.ranks()) {
            assert!((p - k as f64 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_eigenstate_is_undisturbed() {
        let result = measure(&sigma_z(), &ket1()).unwrap();
        assert_eq!(result.probabilities, vec![1.0, 0.0]);
        assert!(result.conditional_states[1].is_none());
        assert!(result.final_state.matrix().max_abs_diff(ket1().matrix()) < 1e-15);
    }

    #[test]
    fn measure_plus_state() {
        let result = measure(&sigma_z(), &plus()).unwrap();
        assert!((result.probabilities[0] - 0.5).abs() < 1e-15);
        let half = ComplexMatrix::identity(2).scale(0.5);
        assert!(result.final_state.matrix().max_abs_diff(&half) < 1e-15);
        let c0 = result.conditional_states[0].as_ref().unwrap();
        let c1 = result.conditional_states[1].as_ref().unwrap();
        assert!(c0.matrix().max_abs_diff(ket1().matrix()) < 1e-15);
        assert!(c1.matrix().max_abs_diff(ket0().matrix()) < 1e-15);
        assert!(result.recombination_residual() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_reported() {
        let rho = DensityOperator::maximally_mixed(3);
        assert!(matches!(
            measure(&sigma_z(), &rho),
            Err(Error::DimensionMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn certainty_examples() {
        let p0 = ket0().matrix().clone();
        let check = certainty_check(&ket0(), &p0).unwrap();
        assert!(check.trace_one && check.sandwich_fixed);
        let check = certainty_check(&DensityOperator::maximally_mixed(2), &p0).unwrap();
        assert!(!check.trace_one && !check.sandwich_fixed);
        let not_projector = ComplexMatrix::diagonal(&[0.5, 0.0]);
        assert!(matches!(
            certainty_check(&ket0(), &not_projector),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn certainty_for_state_inside_range() {
        let mut rng = crate::random::seeded(41);
        for _ in 0..20 {
            let p = crate::random::random_projector_with(&mut rng, 5, 3).unwrap();
            let basis = crate::quantum::spectral_decompose(&p, 1e-8).unwrap();
            // Outcome 1 is the eigenvalue 1, i.e. range(p).
            let w = basis.eigenspace_basis(1);
            let local = crate::quantum::random_density_with(&mut rng, 3, 2).unwrap();
            let full = ComplexMatrix::from_nalgebra(w * local.matrix().as_nalgebra() * w.adjoint()).unwrap();
            let rho = DensityOperator::new(full).unwrap();
            let check = certainty_check(&rho, &p).unwrap();
            assert!(check.trace_one && check.sandwich_fixed, "{check:?}");
        }
    }

    #[test]
    fn qnd_sharp_input_preserved() {
        let report = verify_qnd(&sigma_z(), &ket0()).unwrap();
        assert_eq!(report.sharp_input, Some(1));
        assert_eq!(report.sharp_preserved, Some(true));
        assert!(report.passed());
    }

    proptest! {
        #[test]
        fn measurement_invariants(dim in 1usize..=8, seed in any::<u64>()) {
            let obs = random_observable(dim, seed);
            let rho = random_density(dim, 1 + seed as usize % dim, seed ^ 1).unwrap();
            let result = measure(&obs, &rho).unwrap();
            prop_assert!((result.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(result.recombination_residual() < 1e-9);
            let sp = SuperProjector::new(obs.clone());
            prop_assert_eq!(result.final_state.matrix(), &sp.apply(rho.matrix()).unwrap().hermitian_part());
            let report = verify_qnd(&obs, &rho).unwrap();
            prop_assert!(report.passed(), "{:?}", report);
        }

        #[test]
        fn certainty_booleans_agree(dim in 2usize..=6, seed in any::<u64>()) {
            let rank = 1 + seed as usize % dim;
            let p = random_projector(dim, rank, seed).unwrap();
            let rho = random_density(dim, dim, seed ^ 7).unwrap();
            prop_assert!(certainty_check(&rho, &p).unwrap().agrees());
        }
    }
}

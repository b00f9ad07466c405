//! Finite-dimensional projective measurement kernel.
//!
//! The crate implements minimal (Lüders) measurement of an observable with a
//! discrete spectrum, `rho -> sum_n P_n rho P_n`, together with the
//! Hilbert-Schmidt geometry that characterizes it: the post-measurement state
//! is the unique state closest to `rho` among all mixtures of states with a
//! definite value of the observable, and its weights are the trace-rule
//! probabilities `tr(P_n rho)`.
//!
//! Module map:
//!
//! - [`linalg`]: dense complex matrices and the Hermitian eigensolver.
//! - [`quantum`]: density operators, observables, the definite-value family.
//! - [`geometry`]: HS inner product and distance, the super-projector, phase
//!   alignment of unit vectors, projection onto operator subspaces.
//! - [`measurement`]: trace-rule probabilities, the Lüders channel,
//!   conditional states, certainty and non-demolition checks.
//! - [`oracle`]: random search and projected descent over the definite-value
//!   family, compared against the Lüders state.
//! - [`sampler`]: seeded Monte Carlo outcome sampling.
//! - [`suite`]: the seeded property suite behind `qnd verify`.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod measurement;
pub mod oracle;
pub mod quantum;
pub mod random;
pub mod sampler;
pub mod suite;

pub use error::{Error, Result};
pub use geometry::{
    hs_distance, hs_inner, phase_align, project_onto_operator_subspace, superproject, vector_distance, SuperProjector,
};
pub use linalg::{adjoint, hermitian_eigendecompose, matmul, trace, Complex64, ComplexMatrix, UnitVector};
pub use measurement::{
    certainty_check, conditional_state, lueders_channel, measure, outcome_probabilities, verify_qnd, CertaintyCheck,
    MeasurementResult, QndReport,
};
pub use oracle::{
    oracle_projected_descent, oracle_random_search, verify_claimed_minimizer, verify_minimality, OracleConfig,
    OracleReport, SearchMethod,
};
pub use quantum::{
    assemble_family_element, make_density, random_density, random_family_element, spectral_decompose,
    ADefiniteFamilyElement, DensityOperator, Observable, Outcome, DEFAULT_CLUSTER_TOL,
};
pub use sampler::{repeatability_run, sample_outcomes, RepeatabilityReport, SampleReport};
pub use suite::{run_suite, CheckResult, SuiteConfig, SuiteReport};

/// `|<phi|psi>|^2`, the probability of the ray `phi` in the pure state `psi`.
pub fn transition_probability(psi: &UnitVector, phi: &UnitVector) -> Result<f64> {
    Ok(phi.inner(psi)?.norm_sqr())
}

//! States, observables in spectral form, and the family of states with
//! definite values of an observable.

pub mod density;
pub mod family;
pub mod observable;

pub use density::{make_density, random_density, random_density_with, DensityOperator};
pub use family::{assemble_family_element, random_family_element, random_family_element_with, ADefiniteFamilyElement};
pub use observable::{spectral_decompose, Observable, Outcome, DEFAULT_CLUSTER_TOL};

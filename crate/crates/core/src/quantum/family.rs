//! States that are mixtures of states with a definite value of an observable.
//!
//! Such a state is block diagonal across the eigenspaces of the observable:
//! `rho'' = sum_n v_n rho''_n` with `P_n rho''_n P_n = rho''_n`. Blocks are kept
//! in the coordinates of their eigenspace (`k_n x k_n`, `k_n = rank P_n`) and
//! embedded into the full space only when the state is assembled.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, Complex64, ComplexMatrix};
use crate::quantum::density::{random_density_with, DensityOperator};
use crate::quantum::observable::Observable;
use crate::random::{flat_dirichlet, seeded};

/// Tolerance on `sum v_n = 1` and on `P_n rho_n P_n = rho_n` for embedded blocks.
pub const FAMILY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct ADefiniteFamilyElement {
    observable: Observable,
    weights: Vec<f64>,
    blocks: Vec<DensityOperator>,
}

impl ADefiniteFamilyElement {
    /// `blocks[n]` is a `k_n x k_n` density operator in the coordinates of
    /// `observable.eigenspace_basis(n)`.
    pub fn new(observable: Observable, weights: Vec<f64>, blocks: Vec<DensityOperator>) -> Result<Self> {
        let outcomes = observable.len();
        if weights.len() != outcomes {
            return Err(Error::LengthMismatch {
                expected: outcomes,
                got: weights.len(),
            });
        }
        if blocks.len() != outcomes {
            return Err(Error::LengthMismatch {
                expected: outcomes,
                got: blocks.len(),
            });
        }
        validate_weights(&weights)?;
        for (block, rank) in blocks.iter().zip(observable.ranks()) {
            if block.dim() != rank {
                return Err(Error::DimensionMismatch {
                    left: rank,
                    right: block.dim(),
                });
            }
        }
        Ok(Self {
            observable,
            weights,
            blocks,
        })
    }

    /// Accepts full-space blocks `rho''_n`, each of which must satisfy
    /// `P_n rho''_n P_n = rho''_n` within [`FAMILY_TOL`].
    pub fn from_embedded(observable: Observable, weights: Vec<f64>, blocks: &[DensityOperator]) -> Result<Self> {
        if blocks.len() != observable.len() {
            return Err(Error::LengthMismatch {
                expected: observable.len(),
                got: blocks.len(),
            });
        }
        let mut compressed = Vec::with_capacity(blocks.len());
        for (index, block) in blocks.iter().enumerate() {
            if block.dim() != observable.dim() {
                return Err(Error::DimensionMismatch {
                    left: observable.dim(),
                    right: block.dim(),
                });
            }
            let p = &observable.projectors()[index];
            let residual = (&(p * block.matrix()) * p).max_abs_diff(block.matrix());
            if residual > FAMILY_TOL {
                return Err(Error::BlockOutsideEigenspace { index, residual });
            }
            let w = observable.eigenspace_basis(index);
            let local = w.adjoint() * block.matrix().as_nalgebra() * w;
            compressed.push(DensityOperator::from_trusted(ComplexMatrix::from_nalgebra(local)?));
        }
        Self::new(observable, weights, compressed)
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Blocks in eigenspace coordinates.
    pub fn blocks(&self) -> &[DensityOperator] {
        &self.blocks
    }

    /// `rho''_n` embedded in the full space: `W_n B_n W_n†`.
    pub fn embedded_block(&self, n: usize) -> DensityOperator {
        let w = self.observable.eigenspace_basis(n);
        let full = w * self.blocks[n].matrix().as_nalgebra() * w.adjoint();
        DensityOperator::from_trusted(ComplexMatrix::from_nalgebra(full).expect("finite block"))
    }
}

fn validate_weights(weights: &[f64]) -> Result<()> {
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidArgument(format!("weight {w} is not a probability")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > FAMILY_TOL {
        return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// `sum_n v_n rho''_n` as a full-space density operator.
pub fn assemble_family_element(e: &ADefiniteFamilyElement) -> DensityOperator {
    let dim = e.observable.dim();
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for (n, (v, block)) in e.weights.iter().zip(&e.blocks).enumerate() {
        if *v == 0.0 {
            continue;
        }
        let w = e.observable.eigenspace_basis(n);
        acc += w * (block.matrix().as_nalgebra() * c(*v, 0.0)) * w.adjoint();
    }
    DensityOperator::from_trusted(ComplexMatrix::from_nalgebra(acc).expect("finite mixture"))
}

/// Random family element: flat Dirichlet weights, full-rank Gaussian block
/// states. A one-dimensional eigenspace admits only the state `P_n`.
pub fn random_family_element(obs: &Observable, seed: u64) -> ADefiniteFamilyElement {
    random_family_element_with(&mut seeded(seed), obs)
}

pub fn random_family_element_with<R: Rng + ?Sized>(rng: &mut R, obs: &Observable) -> ADefiniteFamilyElement {
    let weights = flat_dirichlet(rng, obs.len());
    let blocks = obs
        .ranks()
        .into_iter()
        .map(|k| {
            if k == 1 {
                DensityOperator::maximally_mixed(1)
            } else {
                random_density_with(rng, k, k).expect("rank equals dimension")
            }
        })
        .collect();
    ADefiniteFamilyElement {
        observable: obs.clone(),
        weights,
        blocks,
    }
}

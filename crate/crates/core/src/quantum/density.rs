use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigendecompose, trace, ComplexMatrix, UnitVector};
use crate::random::{gaussian_block, seeded};

/// Tolerance on Hermiticity (max-entry norm) and on `|tr - 1|`.
pub const DENSITY_TOL: f64 = 1e-10;

/// Eigenvalues in `(-NEGATIVE_CLIP, 0)` are round-off and get clipped to zero.
pub const NEGATIVE_CLIP: f64 = 1e-10;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl std::fmt::Debug for DensityOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("DensityOperator").field(&self.matrix).finish()
    }
}

impl DensityOperator {
    /// Validating constructor; same as [`make_density`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        make_density(&matrix)
    }

    /// Wraps a matrix that is a density operator by construction. Only the
    /// Hermitian part is kept so that round-off never breaks Hermiticity.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self {
            matrix: matrix.hermitian_part(),
        }
    }

    /// `|psi><psi|`.
    pub fn pure(psi: &UnitVector) -> Self {
        Self::from_trusted(psi.projector())
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        self.matrix.frobenius_norm().powi(2)
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigendecompose(&self.matrix, DENSITY_TOL)
            .expect("density operators are Hermitian")
            .eigenvalues
    }
}

impl AsRef<ComplexMatrix> for DensityOperator {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Validates `m` as a density operator. Eigenvalues inside the clipping
/// window are set to zero and the state is renormalized.
pub fn make_density(m: &ComplexMatrix) -> Result<DensityOperator> {
    let eig = hermitian_eigendecompose(m, DENSITY_TOL)?;
    let min = eig.eigenvalues[0];
    if min < -NEGATIVE_CLIP {
        return Err(Error::NegativeEigenvalue { value: min });
    }
    let tr = trace(m);
    if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
        return Err(Error::TraceNotOne { trace: tr.re });
    }
    if min >= 0.0 {
        return Ok(DensityOperator::from_trusted(m.clone()));
    }
    let mut clipped = eig;
    for l in clipped.eigenvalues.iter_mut() {
        *l = l.max(0.0);
    }
    let total: f64 = clipped.eigenvalues.iter().sum();
    for l in clipped.eigenvalues.iter_mut() {
        *l /= total;
    }
    Ok(DensityOperator::from_trusted(clipped.reconstruct()))
}

/// `G G† / tr(G G†)` with `G` a `dim x rank` complex Gaussian matrix.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density_with(&mut seeded(seed), dim, rank)
}

pub fn random_density_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<DensityOperator> {
    if rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    loop {
        let g = gaussian_block(rng, dim, rank);
        let gg = &g * g.adjoint();
        let tr = gg.trace().re;
        if tr > f64::MIN_POSITIVE {
            let m = ComplexMatrix::from_nalgebra(gg * c(1.0 / tr, 0.0))?;
            return Ok(DensityOperator::from_trusted(m));
        }
    }
}

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigendecompose, Complex64, ComplexMatrix, UnitVector};

/// Eigenvalues closer than this are merged into one spectral point.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

/// Tolerance for the projector relations `P_n P_m = delta_nm P_n`,
/// `sum P_n = I` and Hermiticity of each `P_n`.
pub const PROJECTOR_TOL: f64 = 1e-10;

/// Observable in spectral form `A = sum_n a_n P_n`.
///
/// Outcomes are indexed in ascending eigenvalue order. Besides the projectors
/// the observable keeps an orthonormal basis of every eigenspace, stored as
/// the `d x k_n` matrix `W_n` with `W_n W_n† = P_n`.
#[derive(Debug, Clone)]
pub struct Observable {
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
    bases: Vec<DMatrix<Complex64>>,
}

/// One outcome of an observable: its index and eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub index: usize,
    pub eigenvalue: f64,
}

impl Observable {
    /// Validates explicit spectral data with [`DEFAULT_CLUSTER_TOL`].
    pub fn from_parts(eigenvalues: Vec<f64>, projectors: Vec<ComplexMatrix>) -> Result<Self> {
        Self::from_parts_with_tol(eigenvalues, projectors, DEFAULT_CLUSTER_TOL)
    }

    pub fn from_parts_with_tol(
        eigenvalues: Vec<f64>,
        projectors: Vec<ComplexMatrix>,
        cluster_tol: f64,
    ) -> Result<Self> {
        if eigenvalues.len() != projectors.len() {
            return Err(Error::LengthMismatch {
                expected: eigenvalues.len(),
                got: projectors.len(),
            });
        }
        if eigenvalues.is_empty() {
            return Err(Error::InvalidObservable("no outcomes".into()));
        }
        let mut pairs: Vec<(f64, ComplexMatrix)> = eigenvalues.into_iter().zip(projectors).collect();
        if pairs.iter().any(|(a, _)| !a.is_finite()) {
            return Err(Error::InvalidObservable("non-finite eigenvalue".into()));
        }
        pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (eigenvalues, projectors): (Vec<f64>, Vec<ComplexMatrix>) = pairs.into_iter().unzip();
        validate_distinct(&eigenvalues, cluster_tol)?;
        validate_projectors(&projectors)?;

        let bases = projectors
            .iter()
            .enumerate()
            .map(|(n, p)| range_basis(p, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            eigenvalues,
            projectors,
            bases,
        })
    }

    /// Builds the observable from orthonormal bases of its eigenspaces.
    pub fn from_eigenspaces(eigenvalues: Vec<f64>, spaces: Vec<Vec<UnitVector>>) -> Result<Self> {
        if spaces.iter().any(Vec::is_empty) {
            return Err(Error::InvalidObservable("empty eigenspace".into()));
        }
        let projectors = spaces
            .iter()
            .map(|space| {
                let mut p = ComplexMatrix::zeros(space[0].dim());
                for v in space {
                    p = p.checked_add(&v.projector())?;
                }
                Ok(p)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(eigenvalues, projectors)
    }

    /// Single outcome `a = 0` with `P = I`.
    pub fn trivial(dim: usize) -> Self {
        let p = ComplexMatrix::identity(dim);
        Self {
            eigenvalues: vec![0.0],
            bases: vec![p.as_nalgebra().clone()],
            projectors: vec![p],
        }
    }

    /// Diagonal observable with `|i>` in the eigenspace of `diag[i]`.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        spectral_decompose(&ComplexMatrix::diagonal(diag), DEFAULT_CLUSTER_TOL)
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    /// Number of outcomes.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn projector(&self, n: usize) -> Result<&ComplexMatrix> {
        self.projectors.get(n).ok_or(Error::OutcomeOutOfRange {
            index: n,
            outcomes: self.len(),
        })
    }

    pub fn outcome(&self, n: usize) -> Result<Outcome> {
        let eigenvalue = *self.eigenvalues.get(n).ok_or(Error::OutcomeOutOfRange {
            index: n,
            outcomes: self.len(),
        })?;
        Ok(Outcome { index: n, eigenvalue })
    }

    pub fn outcomes(&self) -> impl Iterator<Item = Outcome> + '_ {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(index, &eigenvalue)| Outcome { index, eigenvalue })
    }

    /// `rank(P_n)` for every outcome.
    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(|w| w.ncols()).collect()
    }

    /// `W_n`, the `d x k_n` isometry onto eigenspace `n`.
    pub fn eigenspace_basis(&self, n: usize) -> &DMatrix<Complex64> {
        &self.bases[n]
    }

    /// Eigenspace basis vectors of outcome `n`.
    pub fn eigenspace_vectors(&self, n: usize) -> Vec<UnitVector> {
        self.bases[n]
            .column_iter()
            .map(|col| UnitVector::normalize_nalgebra(col.into_owned()).expect("orthonormal column"))
            .collect()
    }

    /// `sum_n a_n P_n`.
    pub fn matrix(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (a, p) in self.eigenvalues.iter().zip(&self.projectors) {
            acc = &acc + &p.scale(*a);
        }
        acc
    }

    /// Largest violation of the projector relations (orthogonality,
    /// idempotency, completeness, Hermiticity) in max-entry norm.
    pub fn projector_defect(&self) -> f64 {
        projector_defect(&self.projectors)
    }
}

/// Decomposes a Hermitian matrix into spectral form. Sorted eigenvalues are
/// grouped by single linkage: a gap larger than `cluster_tol` starts a new
/// outcome. The eigenvalue of a cluster is the mean of its members.
pub fn spectral_decompose(h: &ComplexMatrix, cluster_tol: f64) -> Result<Observable> {
    if !(cluster_tol >= 0.0 && cluster_tol.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cluster tolerance must be finite and non-negative, got {cluster_tol}"
        )));
    }
    let eig = hermitian_eigendecompose(h, PROJECTOR_TOL)?;
    let dim = h.dim();

    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..dim {
        if eig.eigenvalues[i] - eig.eigenvalues[i - 1] > cluster_tol {
            clusters.push(vec![i]);
        } else {
            clusters.last_mut().expect("non-empty").push(i);
        }
    }

    let mut eigenvalues = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut bases = Vec::with_capacity(clusters.len());
    for members in &clusters {
        let mean = members.iter().map(|&i| eig.eigenvalues[i]).sum::<f64>() / members.len() as f64;
        let w = DMatrix::from_fn(dim, members.len(), |row, col| {
            eig.eigenvectors[members[col]].components()[row]
        });
        let p = ComplexMatrix::from_nalgebra(&w * w.adjoint())?.hermitian_part();
        eigenvalues.push(mean);
        projectors.push(p);
        bases.push(w);
    }
    Ok(Observable {
        eigenvalues,
        projectors,
        bases,
    })
}

fn validate_distinct(eigenvalues: &[f64], cluster_tol: f64) -> Result<()> {
    for w in eigenvalues.windows(2) {
        if w[1] - w[0] <= cluster_tol {
            return Err(Error::InvalidObservable(format!(
                "eigenvalues {} and {} are not distinct at tolerance {cluster_tol:e}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn validate_projectors(projectors: &[ComplexMatrix]) -> Result<()> {
    let dim = projectors[0].dim();
    if let Some(p) = projectors.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: p.dim(),
        });
    }
    let defect = projector_defect(projectors);
    if defect > PROJECTOR_TOL {
        return Err(Error::InvalidObservable(format!(
            "projectors violate P_n P_m = delta_nm P_n, sum P_n = I or Hermiticity (defect {defect:e})"
        )));
    }
    Ok(())
}

pub(crate) fn projector_defect(projectors: &[ComplexMatrix]) -> f64 {
    let dim = projectors[0].dim();
    let mut worst = 0.0f64;
    let mut sum = ComplexMatrix::zeros(dim);
    for (n, p) in projectors.iter().enumerate() {
        worst = worst.max(p.hermitian_deviation());
        for (m, q) in projectors.iter().enumerate() {
            let prod = p * q;
            let expected = if n == m { p.clone() } else { ComplexMatrix::zeros(dim) };
            worst = worst.max(prod.max_abs_diff(&expected));
        }
        sum = &sum + p;
    }
    worst.max(sum.max_abs_diff(&ComplexMatrix::identity(dim)))
}

/// Orthonormal basis of `range(p)` for a validated projector.
fn range_basis(p: &ComplexMatrix, index: usize) -> Result<DMatrix<Complex64>> {
    let eig = hermitian_eigendecompose(p, PROJECTOR_TOL)?;
    let columns: Vec<&UnitVector> = eig
        .eigenvalues
        .iter()
        .zip(&eig.eigenvectors)
        .filter(|(l, _)| **l > 0.5)
        .map(|(_, v)| v)
        .collect();
    if columns.is_empty() {
        return Err(Error::InvalidObservable(format!(
            "projector {index} is zero; every eigenvalue needs a non-trivial eigenspace"
        )));
    }
    Ok(DMatrix::from_fn(p.dim(), columns.len(), |row, col| {
        columns[col].components()[row]
    }))
}

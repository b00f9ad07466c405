//! Dense complex matrices and vectors.
//!
//! Everything downstream (states, projectors, super-operators) is carried by
//! [`ComplexMatrix`], a square `d x d` matrix of `Complex64`. Storage and the
//! Hermitian eigensolver are delegated to `nalgebra`; this module adds the
//! validation (square, finite) and the ascending-eigenvalue canonical form.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of a [`UnitVector`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    /// Validates squareness and finiteness.
    pub fn from_nalgebra(inner: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        for col in 0..cols {
            for row in 0..rows {
                let z = inner[(row, col)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        Ok(Self { inner })
    }

    /// Builds a matrix from row vectors. Ragged input is rejected.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    cols: row.len(),
                });
            }
        }
        Self::from_nalgebra(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
    }

    /// Builds a matrix from a row-major slice of real entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::from_nalgebra(DMatrix::from_fn(dim, dim, |i, j| c(entries[i * dim + j], 0.0)))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.inner[(i, i)] = c(x, 0.0);
        }
        m
    }

    /// The rank-one operator `|u><v|`.
    pub fn outer(u: &UnitVector, v: &UnitVector) -> Result<Self> {
        check_dims(u.dim(), v.dim())?;
        Ok(Self {
            inner: &u.inner * v.inner.adjoint(),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_nalgebra(self) -> DMatrix<Complex64> {
        self.inner
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            inner: &self.inner * c(factor, 0.0),
        }
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            inner: &self.inner + &other.inner,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        Ok(Self {
            inner: &self.inner - &other.inner,
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry norm of `self - self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.inner[(i, j)] - self.inner[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            inner: (&self.inner + self.inner.adjoint()) * c(0.5, 0.0),
        }
    }

    /// Frobenius (Hilbert-Schmidt) norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self * v` for a column vector.
    pub fn apply(&self, v: &UnitVector) -> Result<DVector<Complex64>> {
        check_dims(self.dim(), v.dim())?;
        Ok(&self.inner * &v.inner)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, index: (usize, usize)) -> &Complex64 {
        &self.inner[index]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

// Operator impls panic on dimension mismatch; the checked_* methods and
// `matmul` are the fallible entry points.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_add(rhs).expect("dimension mismatch in add")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.checked_sub(rhs).expect("dimension mismatch in sub")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs).expect("dimension mismatch in mul")
    }
}

/// Unit-norm complex column vector.
#[derive(Clone, PartialEq)]
pub struct UnitVector {
    inner: DVector<Complex64>,
}

impl UnitVector {
    /// Accepts components whose norm is 1 within [`UNIT_NORM_TOL`].
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        let inner = DVector::from_vec(components);
        let norm = inner.norm();
        if inner.is_empty() || !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { inner })
    }

    /// Normalizes arbitrary nonzero components.
    pub fn normalize(components: Vec<Complex64>) -> Result<Self> {
        let inner = DVector::from_vec(components);
        Self::normalize_nalgebra(inner)
    }

    pub fn normalize_nalgebra(inner: DVector<Complex64>) -> Result<Self> {
        let norm = inner.norm();
        if inner.is_empty() || !norm.is_finite() || norm < f64::EPSILON {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            inner: inner / c(norm, 0.0),
        })
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut inner = DVector::zeros(dim);
        inner[index] = c(1.0, 0.0);
        Self { inner }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.len()
    }

    pub fn components(&self) -> &[Complex64] {
        self.inner.as_slice()
    }

    pub fn as_nalgebra(&self) -> &DVector<Complex64> {
        &self.inner
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.inner.dotc(&other.inner))
    }

    /// Multiplies by a unimodular phase; the norm is unchanged.
    pub fn with_phase(&self, phase: Complex64) -> Self {
        Self {
            inner: &self.inner * phase,
        }
    }

    /// Ray projector `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * self.inner.adjoint(),
        }
    }
}

impl fmt::Debug for UnitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.inner.iter()).finish()
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(a.dim(), b.dim())?;
    Ok(ComplexMatrix {
        inner: &a.inner * &b.inner,
    })
}

/// Conjugate transpose.
pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix {
        inner: a.inner.adjoint(),
    }
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.inner.trace()
}

/// Spectrum of a Hermitian matrix in ascending order with an orthonormal
/// eigenbasis (`eigenvectors[i]` belongs to `eigenvalues[i]`).
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<UnitVector>,
}

impl HermitianEigen {
    /// `sum_i lambda_i |v_i><v_i|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let dim = self.eigenvectors[0].dim();
        let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            acc += &v.inner * v.inner.adjoint() * c(*lambda, 0.0);
        }
        ComplexMatrix { inner: acc }
    }

    /// Eigenvectors as the columns of a unitary matrix.
    pub fn unitary(&self) -> ComplexMatrix {
        let dim = self.eigenvectors.len();
        ComplexMatrix {
            inner: DMatrix::from_fn(dim, dim, |i, j| self.eigenvectors[j].inner[i]),
        }
    }
}

/// Eigendecomposition of `h`, which must be Hermitian to within `tol`
/// (max-entry norm). The exactly Hermitian part of `h` is decomposed.
pub fn hermitian_eigendecompose(h: &ComplexMatrix, tol: f64) -> Result<HermitianEigen> {
    let deviation = h.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let herm = h.hermitian_part().inner;
    let eig = SymmetricEigen::try_new(herm, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenFailure)?;

    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| UnitVector::normalize_nalgebra(eig.eigenvectors.column(i).into_owned()))
        .collect::<Result<Vec<_>>>()?;
    Ok(HermitianEigen {
        eigenvalues,
        eigenvectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_matrix};
    use proptest::prelude::*;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn matmul_examples() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(matmul(&i2, &i2).unwrap(), i2);
        assert_eq!(matmul(&pauli_x(), &pauli_x()).unwrap(), i2);
        let prod = matmul(
            &ComplexMatrix::diagonal(&[1.0, 2.0]),
            &ComplexMatrix::diagonal(&[3.0, 4.0]),
        )
        .unwrap();
        assert_eq!(prod, ComplexMatrix::diagonal(&[3.0, 8.0]));
    }

    #[test]
    fn matmul_rejects_mismatch() {
        let err = matmul(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn adjoint_examples() {
        let x = pauli_x();
        assert_eq!(adjoint(&x), x);
        let a = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(adjoint(&a), ComplexMatrix::from_real(2, &[0.0, 0.0, 1.0, 0.0]).unwrap());
        let b = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]).unwrap();
        let expected =
            ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, 0.0)], vec![c(0.0, -1.0), c(0.0, 0.0)]]).unwrap();
        assert_eq!(adjoint(&b), expected);
    }

    #[test]
    fn trace_examples() {
        assert_eq!(trace(&ComplexMatrix::identity(5)), c(5.0, 0.0));
        let rank2 = ComplexMatrix::diagonal(&[1.0, 0.0, 1.0]);
        assert_eq!(trace(&rank2), c(2.0, 0.0));
        let m = ComplexMatrix::from_real(2, &[1.0, 5.0, 7.0, 2.0]).unwrap();
        assert_eq!(trace(&m), c(3.0, 0.0));
    }

    #[test]
    fn constructors_validate() {
        assert!(matches!(
            ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            ComplexMatrix::from_real(2, &[1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(
            ComplexMatrix::from_rows(&[]),
            Err(Error::NotSquare { rows: 0, cols: 0 })
        ));
        assert!(UnitVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(UnitVector::normalize(vec![c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn eigen_identity() {
        let eig = hermitian_eigendecompose(&ComplexMatrix::identity(2), 1e-10).unwrap();
        assert_eq!(eig.eigenvalues.len(), 2);
        for l in &eig.eigenvalues {
            assert!((l - 1.0).abs() < 1e-14);
        }
        let overlap = eig.eigenvectors[0].inner(&eig.eigenvectors[1]).unwrap();
        assert!(overlap.norm() < 1e-14);
    }

    #[test]
    fn eigen_pauli_x() {
        // det(X - l I) = l^2 - 1
        let eig = hermitian_eigendecompose(&pauli_x(), 1e-10).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&pauli_x()) < 1e-14);
    }

    #[test]
    fn eigen_diagonal_degenerate() {
        let eig = hermitian_eigendecompose(&ComplexMatrix::diagonal(&[2.0, 5.0, 2.0]), 1e-10).unwrap();
        let expected = [2.0, 2.0, 5.0];
        for (l, e) in eig.eigenvalues.iter().zip(expected) {
            assert!((l - e).abs() < 1e-14);
        }
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            hermitian_eigendecompose(&a, 1e-10),
            Err(Error::NotHermitian { .. })
        ));
    }

    proptest! {
        #[test]
        fn eigen_reconstructs_random_hermitian(dim in 2usize..=12, seed in any::<u64>()) {
            let h = random_hermitian(dim, seed);
            let eig = hermitian_eigendecompose(&h, 1e-10).unwrap();
            let recon = eig.reconstruct();
            prop_assert!((&recon - &h).frobenius_norm() < 1e-9);
            prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let u = eig.unitary();
            let gram = &adjoint(&u) * &u;
            prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(dim)) < 1e-10);
        }

        #[test]
        fn adjoint_is_involution(dim in 1usize..=8, seed in any::<u64>()) {
            let a = random_matrix(dim, seed);
            prop_assert_eq!(adjoint(&adjoint(&a)), a);
        }

        #[test]
        fn trace_is_cyclic(dim in 1usize..=8, seed in any::<u64>()) {
            let a = random_matrix(dim, seed);
            let b = random_matrix(dim, seed.wrapping_add(1));
            let ab = trace(&matmul(&a, &b).unwrap());
            let ba = trace(&matmul(&b, &a).unwrap());
            prop_assert!((ab - ba).norm() < 1e-10);
        }
    }
}

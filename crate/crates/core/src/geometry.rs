//! Hilbert-Schmidt geometry on operators.
//!
//! The operator space carries the inner product `<A, B> = tr(A† B)`. The map
//! `B -> sum_n P_n B P_n` built from an observable is an orthogonal projector
//! on that space; its range is the set of operators that are block diagonal
//! across the eigenspaces. Vector-level helpers implement the phase
//! convention under which distances between unit vectors and distances
//! between their ray projectors order candidates identically.

use crate::error::{Error, Result};
use crate::linalg::{c, check_dims, Complex64, ComplexMatrix, UnitVector};
use crate::quantum::Observable;

/// Orthonormality tolerance for operator bases.
pub const BASIS_TOL: f64 = 1e-9;

/// `tr(a† b)`: antilinear in `a`, linear in `b`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    check_dims(a.dim(), b.dim())?;
    Ok(a.as_nalgebra().dotc(b.as_nalgebra()))
}

pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    a.frobenius_norm()
}

pub fn hs_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = a.checked_sub(b)?;
    Ok(hs_inner(&diff, &diff)?.re.max(0.0).sqrt())
}

/// `B -> sum_n P_n B P_n` for a fixed observable.
#[derive(Debug, Clone)]
pub struct SuperProjector {
    observable: Observable,
}

impl SuperProjector {
    pub fn new(observable: Observable) -> Self {
        Self { observable }
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn apply(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        superproject(self, b)
    }

    /// `|| P(P(b)) - P(b) ||_HS`.
    pub fn idempotency_residual(&self, b: &ComplexMatrix) -> Result<f64> {
        let once = self.apply(b)?;
        let twice = self.apply(&once)?;
        hs_distance(&twice, &once)
    }

    /// `| <a, P(b)> - <P(a), b> |`.
    pub fn hermiticity_residual(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
        let left = hs_inner(a, &self.apply(b)?)?;
        let right = hs_inner(&self.apply(a)?, b)?;
        Ok((left - right).norm())
    }

    /// HS-orthonormal basis of the range: matrix units `|v_i><v_j|` with
    /// `v_i, v_j` from the same eigenspace.
    pub fn range_basis(&self) -> Vec<ComplexMatrix> {
        let mut basis = Vec::new();
        for n in 0..self.observable.len() {
            let vectors = self.observable.eigenspace_vectors(n);
            for u in &vectors {
                for v in &vectors {
                    basis.push(ComplexMatrix::outer(u, v).expect("same dimension"));
                }
            }
        }
        basis
    }
}

pub fn superproject(sp: &SuperProjector, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(sp.observable.dim(), b.dim())?;
    let mut acc = ComplexMatrix::zeros(b.dim());
    for p in sp.observable.projectors() {
        acc = &acc + &(&(p * b) * p);
    }
    Ok(acc)
}

/// Returns `e^{i theta} phi` with `<phi'|psi>` real and non-negative. An
/// exactly orthogonal `phi` is returned unchanged.
pub fn phase_align(psi: &UnitVector, phi: &UnitVector) -> Result<UnitVector> {
    let overlap = phi.inner(psi)?;
    let modulus = overlap.norm();
    if modulus < f64::MIN_POSITIVE {
        return Ok(phi.clone());
    }
    Ok(phi.with_phase(overlap / c(modulus, 0.0)))
}

/// `|| psi - phi' ||` with `phi'` phase aligned to `psi`, which equals
/// `sqrt(2 - 2 |<phi|psi>|)`.
pub fn vector_distance(psi: &UnitVector, phi: &UnitVector) -> Result<f64> {
    let aligned = phase_align(psi, phi)?;
    let diff = psi.as_nalgebra() - aligned.as_nalgebra();
    Ok(diff.norm())
}

/// HS distance between `|psi><psi|` and `|phi><phi|`.
pub fn ray_distance(psi: &UnitVector, phi: &UnitVector) -> Result<f64> {
    check_dims(psi.dim(), phi.dim())?;
    hs_distance(&psi.projector(), &phi.projector())
}

/// `true` when `x` is closer to the reference than `y`, "closer" meaning
/// not farther: `x <= y + slack`.
pub fn is_closer(x: f64, y: f64, slack: f64) -> bool {
    x <= y + slack
}

/// Largest deviation of the Gram matrix of `basis` from the identity.
pub fn gram_defect(basis: &[ComplexMatrix]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((hs_inner(a, b)? - c(expected, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// Orthogonal projection of `a` onto the span of an HS-orthonormal basis:
/// `sum_j <b_j, a> b_j`.
pub fn project_onto_operator_subspace(basis: &[ComplexMatrix], a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let deviation = gram_defect(basis)?;
    if deviation > BASIS_TOL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let mut acc = ComplexMatrix::zeros(a.dim());
    for b in basis {
        let coeff = hs_inner(b, a)?;
        acc = acc.checked_add(&b.scale_complex(coeff))?;
    }
    Ok(acc)
}

/// `| ||a-b||^2 - ||a-pa||^2 - ||pa-b||^2 |` for `pa` the projection of `a`
/// and `b` any element of the same subspace.
pub fn pythagoras_residual(a: &ComplexMatrix, pa: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let ab = hs_distance(a, b)?.powi(2);
    let apa = hs_distance(a, pa)?.powi(2);
    let pab = hs_distance(pa, b)?.powi(2);
    Ok((ab - apa - pab).abs())
}

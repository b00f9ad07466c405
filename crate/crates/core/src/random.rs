//! Seeded random inputs.
//!
//! All randomness comes from ChaCha20 (`rand_chacha`), which produces the same
//! stream on every platform. A run is identified by a `u64` seed; independent
//! sub-streams (parallel lanes, sampler shards) are obtained by keeping the
//! seed and selecting ChaCha stream number `lane`. Lane 0 is the plain
//! `seed_from_u64(seed)` generator.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_eigendecompose, Complex64, ComplexMatrix, UnitVector};
use crate::quantum::Observable;

pub type SeededRng = ChaCha20Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Independent generator for lane `lane` of the run identified by `seed`.
pub fn lane_rng(seed: u64, lane: u64) -> SeededRng {
    let mut rng = seeded(seed);
    rng.set_stream(lane);
    rng
}

/// Standard complex normal: real and imaginary parts i.i.d. N(0, 1/2).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `rows x cols` matrix of standard complex normal entries.
pub fn gaussian_block<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<Complex64> {
    // Row-major fill keeps the draw order independent of nalgebra's storage.
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Uniform point on the probability simplex (flat Dirichlet).
pub fn flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Ginibre matrix (i.i.d. standard complex normal entries).
pub fn random_matrix(dim: usize, seed: u64) -> ComplexMatrix {
    random_matrix_with(&mut seeded(seed), dim)
}

pub fn random_matrix_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_nalgebra(gaussian_block(rng, dim, dim)).expect("finite square draw")
}

/// GUE-distributed Hermitian matrix.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    random_hermitian_with(&mut seeded(seed), dim)
}

pub fn random_hermitian_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    random_matrix_with(rng, dim).hermitian_part()
}

/// Haar-random unit vector.
pub fn random_unit_vector(dim: usize, seed: u64) -> UnitVector {
    random_unit_vector_with(&mut seeded(seed), dim)
}

pub fn random_unit_vector_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitVector {
    loop {
        let v: Vec<Complex64> = (0..dim).map(|_| complex_gaussian(rng)).collect();
        if let Ok(u) = UnitVector::normalize(v) {
            return u;
        }
    }
}

/// Haar-random orthonormal basis (eigenvectors of a GUE draw).
pub fn random_orthonormal_basis<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<UnitVector> {
    let h = random_hermitian_with(rng, dim);
    hermitian_eigendecompose(&h, 1e-10)
        .expect("GUE draw is Hermitian")
        .eigenvectors
}

/// Orthogonal projector of the given rank onto a Haar-random subspace.
pub fn random_projector(dim: usize, rank: usize, seed: u64) -> Result<ComplexMatrix> {
    random_projector_with(&mut seeded(seed), dim, rank)
}

pub fn random_projector_with<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> Result<ComplexMatrix> {
    if rank > dim || dim == 0 {
        return Err(Error::InvalidRank { rank, dim });
    }
    let basis = random_orthonormal_basis(rng, dim);
    let mut p = ComplexMatrix::zeros(dim);
    for v in basis.iter().take(rank) {
        p = &p + &v.projector();
    }
    Ok(p)
}

/// Observable with the given eigenspace ranks (ascending eigenvalue order),
/// a Haar-random eigenbasis and well separated random eigenvalues.
pub fn random_observable_with_ranks(ranks: &[usize], seed: u64) -> Result<Observable> {
    random_observable_with_ranks_rng(&mut seeded(seed), ranks)
}

pub fn random_observable_with_ranks_rng<R: Rng + ?Sized>(rng: &mut R, ranks: &[usize]) -> Result<Observable> {
    if ranks.is_empty() || ranks.contains(&0) {
        return Err(Error::InvalidObservable("eigenspace ranks must be positive".into()));
    }
    let dim: usize = ranks.iter().sum();
    let basis = random_orthonormal_basis(rng, dim);
    let mut eigenvalue = rng.random_range(-2.0..0.0);
    let mut eigenvalues = Vec::with_capacity(ranks.len());
    for _ in ranks {
        eigenvalues.push(eigenvalue);
        eigenvalue += rng.random_range(0.25..1.5);
    }
    let mut spaces = Vec::with_capacity(ranks.len());
    let mut offset = 0;
    for &r in ranks {
        spaces.push(basis[offset..offset + r].to_vec());
        offset += r;
    }
    Observable::from_eigenspaces(eigenvalues, spaces)
}

/// Observable on `dim` with a random number of outcomes and random
/// eigenspace ranks.
pub fn random_observable(dim: usize, seed: u64) -> Observable {
    random_observable_with(&mut seeded(seed), dim)
}

pub fn random_observable_with<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let ranks = random_composition(rng, dim);
    random_observable_with_ranks_rng(rng, &ranks).expect("composition ranks are positive")
}

/// Uniformly random composition of `n` into positive parts.
fn random_composition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut current = 1;
    for _ in 1..n {
        if rng.random_bool(0.5) {
            parts.push(current);
            current = 1;
        } else {
            current += 1;
        }
    }
    parts.push(current);
    parts
}

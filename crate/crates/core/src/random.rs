//! Seeded random sampling of vectors, matrices and subspaces.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Complex, RealSubspace};

pub type LabRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<Complex> {
    DVector::from_fn(n, |_, _| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Uniformly distributed subspace of the given rank (Gaussian frame).
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, ambient: usize, rank: usize) -> RealSubspace {
    assert!(rank <= ambient, "rank exceeds ambient dimension");
    RealSubspace::from_columns(&random_matrix(rng, ambient, rank), 1e-12)
}

/// Random subspace of `within` of the given rank.
pub fn random_subspace_within<R: Rng + ?Sized>(rng: &mut R, within: &RealSubspace, rank: usize) -> RealSubspace {
    assert!(rank <= within.rank(), "rank exceeds dimension of the ambient subspace");
    let coeffs = random_matrix(rng, within.rank(), rank);
    RealSubspace::from_columns(&(within.frame() * coeffs), 1e-12)
}

/// Invertible matrix with singular values drawn from `[1, max_condition]`.
pub fn random_well_conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize, max_condition: f64) -> DMatrix<f64> {
    let q1 = random_subspace(rng, n, n);
    let q2 = random_subspace(rng, n, n);
    let d = DVector::from_fn(n, |_, _| rng.random_range(1.0..=max_condition.max(1.0)));
    q1.frame() * DMatrix::from_diagonal(&d) * q2.frame().transpose()
}

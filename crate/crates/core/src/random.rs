//! Seeded random instances. Every generator is deterministic for a fixed seed.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Real;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with independent standard normal entries, filled column-major.
pub fn gaussian_matrix<T: Real>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        T::lit(x)
    })
}

/// `GᵀG + shift·I` for a square gaussian `G`.
pub fn spd_matrix<T: Real>(n: usize, shift: f64, rng: &mut ChaCha8Rng) -> DMatrix<T> {
    let g = gaussian_matrix::<T>(n, n, rng);
    g.transpose() * &g + DMatrix::identity(n, n) * T::lit(shift)
}

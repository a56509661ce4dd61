use nalgebra::DMatrix;

use super::{make_pair, OperatorPair, PairError};
use crate::random::{gaussian_matrix, rng};
use crate::scalar::Real;
use crate::spectral::RankPolicy;

/// Seeded pair with `X = ℝ^dim_x` (identity Gram) built from a random
/// isometry `[B; R]`, so that `BᵀB + RᵀR = I`.
pub fn random_compatible_pair<T: Real>(
    dim_x: usize,
    dim_y: usize,
    dim_z: usize,
    seed: u64,
    policy: &RankPolicy,
) -> Result<OperatorPair<T>, PairError> {
    if dim_x == 0 || dim_y + dim_z < dim_x {
        return Err(PairError::DimensionError(format!(
            "need dim_y + dim_z >= dim_x >= 1, got ({dim_x}, {dim_y}, {dim_z})"
        )));
    }
    let mut r = rng(seed);
    let a = gaussian_matrix::<T>(dim_y + dim_z, dim_x, &mut r);
    let q = a.qr().q();
    let b = q.rows(0, dim_y).into_owned();
    let rr = q.rows(dim_y, dim_z).into_owned();
    let d_form = b.transpose() * &b;
    let c_form = rr.transpose() * &rr;
    make_pair(DMatrix::identity(dim_x, dim_x), d_form, c_form, policy)
}

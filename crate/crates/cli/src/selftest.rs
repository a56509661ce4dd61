//! Seeded theorem check on abstract pairs: the identity on random compatible
//! pairs, the conjugate-triple relations, and the closed-form pairs.

use infsup_core::hilbert_pair::{
    babuska_aziz_constant, conjugate_decompose, friedrichs_velte_direct, make_pair, random_compatible_pair,
    verify_identity, PairError,
};
use infsup_core::random::rng;
use infsup_core::spectral::RankPolicy;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::report::{Bound, Check};

pub const IDENTITY_THRESHOLD: f64 = 1e-8;
pub const RELATION_THRESHOLD: f64 = 1e-9;
pub const CLOSED_FORM_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelftestConfig {
    pub pairs: usize,
    /// Largest `dim X`; at least 2.
    pub max_dim: usize,
    pub seed: u64,
    /// Random data `p` per pair for the conjugate-triple relations.
    pub relations_per_pair: usize,
    /// Bound on `max_identity_deviation`.
    pub identity_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelftestSummary {
    pub pairs: usize,
    /// `max |C − Γ − 1| / C` over the random pairs.
    pub max_identity_deviation: f64,
    /// Worst relative residual of the conjugate-triple relations.
    pub max_relation_residual: f64,
    /// Worst absolute error of the closed-form pairs.
    pub max_closed_form_error: f64,
    pub largest_dims: [usize; 3],
    pub identity_threshold: f64,
}

impl SelftestSummary {
    pub fn checks(&self) -> Vec<Check> {
        vec![
            Check::new(
                "identity_deviation",
                self.max_identity_deviation,
                Bound::AtMost,
                self.identity_threshold,
            ),
            Check::new(
                "triple_relations",
                self.max_relation_residual,
                Bound::AtMost,
                RELATION_THRESHOLD,
            ),
            Check::new(
                "closed_forms",
                self.max_closed_form_error,
                Bound::AtMost,
                CLOSED_FORM_THRESHOLD,
            ),
        ]
    }
}

/// Dimensions of pair `index`: `2 ≤ dim X ≤ max_dim`, `dim Y, dim Z ≥ 1`,
/// `dim Y + dim Z ≥ dim X`.
pub fn pair_dims(seed: u64, index: usize, max_dim: usize) -> (usize, usize, usize) {
    let mut r = rng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64));
    let dx = r.random_range(2..=max_dim);
    let dy = r.random_range(1..=dx);
    let dz = r.random_range(dx.saturating_sub(dy).max(1)..=dx);
    (dx, dy, dz)
}

fn pair_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(1_000_003 * index as u64)
}

fn closed_form_error(policy: &RankPolicy) -> Result<f64, PairError> {
    let mut worst: f64 = 0.0;
    // X = ℝ², ‖Bu‖² = α²u₀² + u₁², ‖Ru‖² = (1 − α²)u₀²: C = 1/α², Γ = C − 1
    for alpha_sq in [0.25, 0.5, 0.75] {
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![alpha_sq, 1.0]));
        let c = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 - alpha_sq, 0.0]));
        let pair = make_pair::<f64>(DMatrix::identity(2, 2), d, c, policy)?;
        let ba = babuska_aziz_constant(&pair, policy)?;
        let fv = friedrichs_velte_direct(&pair, policy)?;
        worst = worst.max((ba.constant - 1.0 / alpha_sq).abs());
        worst = worst.max((fv.gamma - (1.0 / alpha_sq - 1.0)).abs());
    }
    // B, R coordinate projections of ℝ³ onto disjoint coordinates: C = 1, Γ = 0
    let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
    let c = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.0, 1.0]));
    let pair = make_pair::<f64>(DMatrix::identity(3, 3), d, c, policy)?;
    let ba = babuska_aziz_constant(&pair, policy)?;
    let fv = friedrichs_velte_direct(&pair, policy)?;
    worst = worst.max((ba.constant - 1.0).abs()).max(fv.gamma.abs());
    Ok(worst)
}

pub fn run_selftest(config: &SelftestConfig, policy: &RankPolicy) -> Result<SelftestSummary, PairError> {
    let mut max_identity_deviation: f64 = 0.0;
    let mut max_relation_residual: f64 = 0.0;
    let mut largest_dims = [0, 0, 0];
    for i in 0..config.pairs {
        let (dx, dy, dz) = pair_dims(config.seed, i, config.max_dim);
        largest_dims = [
            largest_dims[0].max(dx),
            largest_dims[1].max(dy),
            largest_dims[2].max(dz),
        ];
        let seed = pair_seed(config.seed, i);
        let pair = random_compatible_pair::<f64>(dx, dy, dz, seed, policy)?;
        let report = verify_identity(&pair, policy)?;
        max_identity_deviation = max_identity_deviation.max(report.deviation);
        let mut r = rng(seed ^ 0x5EED);
        for _ in 0..config.relations_per_pair {
            let p = DVector::from_fn(pair.dim_y(), |_, _| r.random_range(-1.0..1.0));
            let triple = conjugate_decompose(&pair, &p)?;
            max_relation_residual = max_relation_residual.max(triple.residuals(&pair).max());
        }
    }
    Ok(SelftestSummary {
        pairs: config.pairs,
        max_identity_deviation,
        max_relation_residual,
        max_closed_form_error: closed_form_error(policy)?,
        largest_dims,
        identity_threshold: config.identity_threshold,
    })
}

//! Discrete operator pairs from assembled systems, per-level constants, the
//! Taylor–Hood and holomorphic cross-checks, and convergence studies.

mod case;
mod convergence;
mod holomorphic;
mod lbb;


pub use case::{
    build_level_meshes, compute_case, compute_level, realize_pair, CaseSpec, ConstantsReport, ConstraintSpace,
    LevelRecord, DEFAULT_GAMMA_DIRECT_MAX_DOFS, MAX_REFINEMENT_LEVEL,
};
pub use convergence::{convergence_study, extrapolate, ConvergenceSeries};
pub use holomorphic::{holomorphic_friedrichs_2d, holomorphic_friedrichs_on_mesh, HOLOMORPHIC_CONDITION_LIMIT};
pub use lbb::{lbb_cross_check, LbbResult};

use thiserror::Error;

use crate::fem::FemError;
use crate::hilbert_pair::PairError;
use crate::mesh::MeshError;
use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("unsupported case: dim {dim}, ell {ell} (need 1 <= ell <= dim - 1, dim in {{2, 3}})")]
    UnsupportedCase { dim: usize, ell: usize },
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("pressure zero modes {found} differ from component count {expected}")]
    ZeroCountMismatch { found: usize, expected: usize },
    #[error("holomorphic basis Gram condition {condition:.3e} exceeds limit")]
    IllConditionedBasis { condition: f64 },
    #[error("convergence study needs at least 3 levels, got {0}")]
    InsufficientLevels(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Pair(#[from] PairError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

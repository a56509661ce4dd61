use nalgebra::Cholesky;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::fem::FemSystem;
use crate::hilbert_pair::PairError;
use crate::spectral::{smallest_nonzero, solve_pencil, symmetrized, DensePencil, RankPolicy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbbResult {
    /// Smallest nonzero eigenvalue of the pressure Schur pencil.
    pub beta_squared: f64,
    pub zero_count: usize,
    pub spectrum_head: Vec<f64>,
}

/// Taylor–Hood inf-sup constant: the pencil `(Aᵀ K⁻¹ A, M)` over the linear
/// pressures. Its zero modes are the piecewise constants, one per component.
pub fn lbb_cross_check(system: &FemSystem, components: usize, policy: &RankPolicy) -> Result<LbbResult, PipelineError> {
    let chol = Cholesky::new(system.k.clone()).ok_or(PairError::NotSpd)?;
    let k_inv_a = chol.solve(&system.a_pressure);
    let schur = symmetrized(&(system.a_pressure.transpose() * k_inv_a));
    let spectrum = solve_pencil(&DensePencil::new(schur, system.m_pressure.clone())?)?;
    let s = smallest_nonzero(spectrum.eigenvalues.as_slice(), policy)?;
    if s.zero_count != components {
        return Err(PipelineError::ZeroCountMismatch {
            found: s.zero_count,
            expected: components,
        });
    }
    Ok(LbbResult {
        beta_squared: s.value,
        zero_count: s.zero_count,
        spectrum_head: spectrum.eigenvalues.iter().skip(s.index).take(6).copied().collect(),
    })
}

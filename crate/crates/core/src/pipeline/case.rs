use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{holomorphic_friedrichs_on_mesh, lbb_cross_check, PipelineError};
use crate::fem::{assemble, build_space, FemSystem};
use crate::hilbert_pair::{babuska_aziz_constant, friedrichs_velte_direct, make_pair, OperatorPair};
use crate::mesh::{betti_numbers, generate, refine_uniform, DomainSpec, SimplicialMesh};
use crate::spectral::RankPolicy;

/// Dense null-space work is cubic; beyond this many DOFs `Γ` is taken from `C − 1` only.
pub const DEFAULT_GAMMA_DIRECT_MAX_DOFS: usize = 900;

/// Deepest refinement level accepted by [`CaseSpec::validate`].
pub const MAX_REFINEMENT_LEVEL: usize = 6;

/// Target space of the discrete `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSpace {
    /// `B u = Π₀ div u` (or `Π₀ curl u` for `ell = 2`) with `Π₀` the L²
    /// projection onto cellwise constants; `R*R` takes the remainder
    /// `C + (D − Π₀-part)`, so compatibility rests on `K = D + C`.
    CellConstants,
    /// `B u = div u` (or `curl u`) with `Y` its full discrete range.
    ExactRange,
}

impl ConstraintSpace {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CellConstants => "cell_constants",
            Self::ExactRange => "exact_range",
        }
    }
}

impl std::str::FromStr for ConstraintSpace {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cell_constants" => Ok(Self::CellConstants),
            "exact_range" => Ok(Self::ExactRange),
            other => Err(PipelineError::InvalidCase(format!(
                "unknown constraint space '{other}'"
            ))),
        }
    }
}

/// One constants computation: a domain, a form degree and refinement levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub domain: DomainSpec,
    pub ell: usize,
    /// Number of uniform refinements of the base mesh, strictly increasing.
    pub refinement_levels: Vec<usize>,
    pub constraint_space: ConstraintSpace,
    pub policy: RankPolicy,
    pub gamma_direct_enabled: bool,
    pub gamma_direct_max_dofs: usize,
    pub lbb_cross_check_enabled: bool,
    /// Evaluated on the finest mesh when set (2D only).
    pub holomorphic_oracle_degree: Option<usize>,
    /// Wall-clock seconds per level; off keeps reports bit-reproducible.
    pub record_timings: bool,
}

impl CaseSpec {
    pub fn new(domain: DomainSpec, ell: usize, refinement_levels: Vec<usize>) -> Self {
        Self {
            domain,
            ell,
            refinement_levels,
            constraint_space: ConstraintSpace::CellConstants,
            policy: RankPolicy::default(),
            gamma_direct_enabled: true,
            gamma_direct_max_dofs: DEFAULT_GAMMA_DIRECT_MAX_DOFS,
            lbb_cross_check_enabled: false,
            holomorphic_oracle_degree: None,
            record_timings: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain.kind.dim()
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.domain.validate()?;
        check_case(self.dim(), self.ell)?;
        if self.refinement_levels.is_empty() {
            return Err(PipelineError::InvalidCase("no refinement levels".into()));
        }
        if self.refinement_levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PipelineError::InvalidCase(
                "refinement levels must be strictly increasing".into(),
            ));
        }
        if let Some(&top) = self.refinement_levels.last() {
            if top > MAX_REFINEMENT_LEVEL {
                return Err(PipelineError::InvalidCase(format!(
                    "refinement level {top} exceeds {MAX_REFINEMENT_LEVEL}"
                )));
            }
        }
        if self.lbb_cross_check_enabled && self.ell != 1 {
            return Err(PipelineError::InvalidCase("Taylor-Hood check needs ell = 1".into()));
        }
        if let Some(m) = self.holomorphic_oracle_degree {
            if self.dim() != 2 || m == 0 {
                return Err(PipelineError::InvalidCase(
                    "holomorphic oracle needs a 2D domain and degree >= 1".into(),
                ));
            }
        }
        Ok(())
    }
}

fn check_case(dim: usize, ell: usize) -> Result<(), PipelineError> {
    if (dim == 2 || dim == 3) && ell >= 1 && ell < dim {
        Ok(())
    } else {
        Err(PipelineError::UnsupportedCase { dim, ell })
    }
}

/// Constants of one mesh level. Optional fields are absent when the
/// corresponding step was disabled or failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub h: f64,
    pub vertices: usize,
    pub cells: usize,
    pub dofs: usize,
    pub volume: f64,
    /// Set for meshes approximating a curved domain; constants are those of the polygon.
    pub polygonal_approximation: bool,
    pub betti: Vec<usize>,
    /// `‖K − D − C‖_F / ‖K‖_F`.
    pub assembly_deviation: Option<f64>,
    pub c_h: Option<f64>,
    pub beta_squared: Option<f64>,
    pub gamma_identity: Option<f64>,
    pub gamma_direct: Option<f64>,
    /// `|C_h − Γ_direct − 1| / C_h`.
    pub identity_deviation: Option<f64>,
    /// `dim ker B`.
    pub zero_count: Option<usize>,
    pub lbb_beta_squared: Option<f64>,
    pub lbb_zero_count: Option<usize>,
    pub condition_estimate: Option<f64>,
    pub ill_conditioned: Option<bool>,
    pub seconds: Option<f64>,
    pub error: Option<String>,
}

/// All levels of a case plus the optional holomorphic estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub spec: CaseSpec,
    pub levels: Vec<LevelRecord>,
    pub holomorphic_gamma: Option<f64>,
}

impl ConstantsReport {
    /// `(level, C_h)` of the levels that completed.
    pub fn c_series(&self) -> (Vec<usize>, Vec<f64>) {
        self.levels.iter().filter_map(|r| r.c_h.map(|c| (r.level, c))).unzip()
    }

    pub fn max_identity_deviation(&self) -> Option<f64> {
        self.levels
            .iter()
            .filter_map(|r| r.identity_deviation)
            .fold(None, |acc, d| Some(acc.map_or(d, |a: f64| a.max(d))))
    }

    pub fn has_errors(&self) -> bool {
        self.levels.iter().any(|r| r.error.is_some())
    }
}

/// The discrete pair of a system. With [`ConstraintSpace::ExactRange`],
/// `ell = 1` gives `(K, D_div, C_curl)` and `ell = 2` gives `(K, C_curl, D_div)`.
pub fn realize_pair(
    system: &FemSystem,
    dim: usize,
    ell: usize,
    target: ConstraintSpace,
    policy: &RankPolicy,
) -> Result<OperatorPair<f64>, PipelineError> {
    check_case(dim, ell)?;
    if system.dim != dim {
        return Err(PipelineError::InvalidCase(format!(
            "system of dimension {} used as dimension {dim}",
            system.dim
        )));
    }
    let (constrained, free) = if ell == 1 {
        (&system.d_div, &system.c_curl)
    } else {
        (&system.c_curl, &system.d_div)
    };
    let (d, c) = match target {
        ConstraintSpace::ExactRange => (constrained.clone(), free.clone()),
        ConstraintSpace::CellConstants => {
            let projected = if ell == 1 {
                system.projected_div()
            } else {
                system.projected_curl()
            };
            let rest = free + (constrained - &projected);
            (projected, rest)
        }
    };
    Ok(make_pair(system.k.clone(), d, c, policy)?)
}

/// Base mesh refined to each requested level, in order.
pub fn build_level_meshes(spec: &CaseSpec) -> Result<Vec<SimplicialMesh>, PipelineError> {
    spec.validate()?;
    let mut mesh = generate(&spec.domain)?;
    let mut at = 0;
    let mut out = Vec::with_capacity(spec.refinement_levels.len());
    for &level in &spec.refinement_levels {
        while at < level {
            mesh = refine_uniform(&mesh);
            at += 1;
        }
        out.push(mesh.clone());
    }
    Ok(out)
}

fn empty_record(level: usize, mesh: &SimplicialMesh) -> LevelRecord {
    LevelRecord {
        level,
        h: mesh.mesh_size(),
        vertices: mesh.vertex_count(),
        cells: mesh.cell_count(),
        dofs: 0,
        volume: mesh.total_volume(),
        polygonal_approximation: mesh.is_polygonal_approximation(),
        betti: betti_numbers(mesh),
        assembly_deviation: None,
        c_h: None,
        beta_squared: None,
        gamma_identity: None,
        gamma_direct: None,
        identity_deviation: None,
        zero_count: None,
        lbb_beta_squared: None,
        lbb_zero_count: None,
        condition_estimate: None,
        ill_conditioned: None,
        seconds: None,
        error: None,
    }
}

fn fill_record(spec: &CaseSpec, mesh: &SimplicialMesh, rec: &mut LevelRecord) -> Result<(), PipelineError> {
    let space = build_space(mesh)?;
    rec.dofs = space.dof_count();
    let system = assemble(&space)?;
    rec.assembly_deviation = Some(system.identity_deviation());
    let pair = realize_pair(&system, mesh.dim(), spec.ell, spec.constraint_space, &spec.policy)?;
    rec.condition_estimate = Some(pair.condition_estimate());
    rec.ill_conditioned = Some(pair.ill_conditioned());
    let ba = babuska_aziz_constant(&pair, &spec.policy)?;
    rec.c_h = Some(ba.constant);
    rec.beta_squared = Some(1.0 / ba.constant);
    rec.gamma_identity = Some(ba.constant - 1.0);
    rec.zero_count = Some(ba.zero_count);
    if spec.gamma_direct_enabled && rec.dofs <= spec.gamma_direct_max_dofs {
        let fv = friedrichs_velte_direct(&pair, &spec.policy)?;
        rec.gamma_direct = Some(fv.gamma);
        rec.identity_deviation = Some((ba.constant - fv.gamma - 1.0).abs() / ba.constant);
    }
    if spec.lbb_cross_check_enabled {
        let lbb = lbb_cross_check(&system, rec.betti[0], &spec.policy)?;
        rec.lbb_beta_squared = Some(lbb.beta_squared);
        rec.lbb_zero_count = Some(lbb.zero_count);
    }
    Ok(())
}

/// Constants of a single mesh; failures are recorded in `error`.
pub fn compute_level(spec: &CaseSpec, level: usize, mesh: &SimplicialMesh) -> LevelRecord {
    let start = Instant::now();
    let mut rec = empty_record(level, mesh);
    if let Err(e) = fill_record(spec, mesh, &mut rec) {
        rec.error = Some(e.to_string());
    }
    if spec.record_timings {
        rec.seconds = Some(start.elapsed().as_secs_f64());
    }
    rec
}

/// Runs every level (concurrently, results in level order).
pub fn compute_case(spec: &CaseSpec) -> Result<ConstantsReport, PipelineError> {
    let meshes = build_level_meshes(spec)?;
    let levels: Vec<LevelRecord> = spec
        .refinement_levels
        .par_iter()
        .zip(meshes.par_iter())
        .map(|(&level, mesh)| compute_level(spec, level, mesh))
        .collect();
    let holomorphic_gamma = match spec.holomorphic_oracle_degree {
        Some(m) => {
            let finest = meshes.last().expect("levels validated non-empty");
            Some(holomorphic_friedrichs_on_mesh(finest, m)?)
        }
        None => None,
    };
    Ok(ConstantsReport {
        spec: spec.clone(),
        levels,
        holomorphic_gamma,
    })
}

//! Command-line grammar and the resolved configuration echoed into reports.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use infsup_core::mesh::{DomainKind, DomainSpec};
use infsup_core::pipeline::{ConstraintSpace, DEFAULT_GAMMA_DIRECT_MAX_DOFS, MAX_REFINEMENT_LEVEL};
use serde::{Deserialize, Serialize};

use crate::report::ReportFormat;

pub const THREADS_ENV: &str = "INFSUP_THREADS";

#[derive(Debug, Parser)]
#[command(name = "infsup", version, about = "Inf-sup and Friedrichs-Velte constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Constants of one domain at each requested refinement level.
    Compute(CaseArgs),
    /// As `compute`, plus extrapolation of the C_h sequence (at least 3 levels).
    Convergence(CaseArgs),
    /// Identity check on seeded random and closed-form abstract pairs.
    AbstractSelftest(SelftestArgs),
    /// Mesh statistics and Betti numbers of a generated domain or a mesh file.
    MeshInfo(MeshInfoArgs),
    /// Holomorphic lower estimate of the Friedrichs constant of a planar domain.
    #[command(name = "oracle-2d")]
    Oracle2d(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DomainArgs {
    #[arg(long, value_parser = parse_domain_name)]
    pub domain: String,
    /// Base mesh resolution.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub resolution: u64,
    /// Inner radius of the annulus.
    #[arg(long, value_parser = parse_inner_radius)]
    pub inner_radius: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Report path; defaults to `report.json` or `report.csv`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=2))]
    pub ell: u64,
    /// Number of levels: refinements `0..levels` of the base mesh.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..=(MAX_REFINEMENT_LEVEL as u64 + 1)))]
    pub levels: u64,
    #[arg(long, value_enum, default_value_t = ConstraintArg::CellConstants)]
    pub constraint_space: ConstraintArg,
    /// Relative zero threshold for eigenvalues and singular values.
    #[arg(long, default_value_t = 1e-10, value_parser = parse_tolerance)]
    pub rank_tol: f64,
    /// Largest DOF count for the direct Friedrichs-Velte computation.
    #[arg(long, default_value_t = DEFAULT_GAMMA_DIRECT_MAX_DOFS as u64, value_parser = clap::value_parser!(u64).range(0..=20_000))]
    pub gamma_direct_max_dofs: u64,
    #[arg(long)]
    pub no_gamma_direct: bool,
    /// Taylor-Hood cross-check (ell = 1).
    #[arg(long)]
    pub lbb: bool,
    /// Holomorphic estimate of this degree on the finest mesh (2D).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=30))]
    pub holomorphic_degree: Option<u64>,
    /// Record wall-clock seconds per level (reports are then not reproducible).
    #[arg(long)]
    pub timings: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ConstraintArg {
    CellConstants,
    ExactRange,
}

impl From<ConstraintArg> for ConstraintSpace {
    fn from(c: ConstraintArg) -> Self {
        match c {
            ConstraintArg::CellConstants => ConstraintSpace::CellConstants,
            ConstraintArg::ExactRange => ConstraintSpace::ExactRange,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..=100_000))]
    pub pairs: u64,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u64).range(2..=400))]
    pub max_dim: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(0..=10_000))]
    pub relations_per_pair: u64,
    #[arg(long, default_value_t = 1e-10, value_parser = parse_tolerance)]
    pub rank_tol: f64,
    /// Bound on the worst relative identity deviation; exceeding it exits with code 4.
    #[arg(long, default_value_t = crate::selftest::IDENTITY_THRESHOLD, value_parser = parse_threshold)]
    pub identity_threshold: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MeshInfoArgs {
    #[arg(long, value_parser = parse_domain_name, conflicts_with = "mesh", required_unless_present = "mesh")]
    pub domain: Option<String>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub resolution: u64,
    #[arg(long, value_parser = parse_inner_radius)]
    pub inner_radius: Option<f64>,
    /// Uniform refinements applied before reporting.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(0..=MAX_REFINEMENT_LEVEL as u64))]
    pub refine: u64,
    /// Mesh file: plain text format or Gmsh MSH 2 ASCII.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(0..=MAX_REFINEMENT_LEVEL as u64))]
    pub refine: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=30))]
    pub degree: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_domain_name(s: &str) -> Result<String, String> {
    s.parse::<DomainKind>()
        .map(|_| s.to_string())
        .map_err(|e| e.to_string())
}

fn parse_inner_radius(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(format!("{r} outside (0, 1)"))
    }
}

fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t < 1e-2 {
        Ok(t)
    } else {
        Err(format!("{t} outside (0, 1e-2)"))
    }
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(format!("{t} outside (0, 1)"))
    }
}

/// Resolves a domain name and its parameters.
pub fn domain_spec(name: &str, resolution: u64, inner_radius: Option<f64>) -> Result<DomainSpec, String> {
    let mut kind: DomainKind = name.parse().map_err(|e: infsup_core::mesh::MeshError| e.to_string())?;
    match (&mut kind, inner_radius) {
        (DomainKind::Annulus { inner_radius: r }, Some(given)) => *r = given,
        (_, Some(_)) => return Err("--inner-radius applies to the annulus only".into()),
        _ => {}
    }
    DomainSpec::new(kind, resolution as usize).map_err(|e| e.to_string())
}

/// Everything a run depends on, after defaults are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub command: String,
    pub domain: Option<DomainSpec>,
    pub ell: Option<usize>,
    pub refinement_levels: Vec<usize>,
    pub constraint_space: Option<ConstraintSpace>,
    pub rank_tolerance: Option<f64>,
    pub gamma_direct_enabled: Option<bool>,
    pub gamma_direct_max_dofs: Option<usize>,
    pub lbb_cross_check: Option<bool>,
    pub holomorphic_degree: Option<usize>,
    pub record_timings: Option<bool>,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub max_dim: Option<usize>,
    pub relations_per_pair: Option<usize>,
    pub identity_threshold: Option<f64>,
    pub output: Option<String>,
    pub format: Option<ReportFormat>,
}

impl ResolvedConfig {
    pub fn empty(command: &str) -> Self {
        Self {
            command: command.to_string(),
            domain: None,
            ell: None,
            refinement_levels: Vec::new(),
            constraint_space: None,
            rank_tolerance: None,
            gamma_direct_enabled: None,
            gamma_direct_max_dofs: None,
            lbb_cross_check: None,
            holomorphic_degree: None,
            record_timings: None,
            seed: None,
            pairs: None,
            max_dim: None,
            relations_per_pair: None,
            identity_threshold: None,
            output: None,
            format: None,
        }
    }
}

/// `INFSUP_THREADS`, when set, must be a positive integer.
pub fn thread_cap(value: Option<&str>) -> Result<Option<usize>, String> {
    match value {
        None => Ok(None),
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
        },
    }
}

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use infsup_core::mesh::{
    betti_numbers, generate, mesh_statistics, read_mesh_file, refine_uniform, MeshError, SimplicialMesh,
};
use infsup_core::pipeline::{
    compute_case, convergence_study, holomorphic_friedrichs_2d, CaseSpec, ConstantsReport, PipelineError,
};
use infsup_core::spectral::RankPolicy;

use crate::config::{
    domain_spec, thread_cap, CaseArgs, Cli, Command, MeshInfoArgs, OracleArgs, OutputArgs, ResolvedConfig,
    SelftestArgs, THREADS_ENV,
};
use crate::report::{write_report, Bound, Check, ReportDocument, ReportFormat, Summary};
use crate::selftest::{run_selftest, SelftestConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_THRESHOLD: i32 = 4;

/// Per-level bound on `|C_h − Γ_direct − 1| / C_h`.
pub const IDENTITY_THRESHOLD: f64 = 1e-7;
/// Lower bound on `C_h`, one minus rounding slack.
pub const C_LOWER_BOUND: f64 = 1.0 - 1e-12;

#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Numerical(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::UnsupportedCase { .. }
            | PipelineError::InvalidCase(_)
            | PipelineError::InsufficientLevels(_)
            | PipelineError::Mesh(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<MeshError> for Failure {
    fn from(e: MeshError) -> Self {
        Self::Usage(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let threads = match thread_cap(std::env::var(THREADS_ENV).ok().as_deref()) {
        Ok(t) => t,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    let outcome = pool.install(|| match cli.command {
        Command::Compute(a) => run_case(a, false),
        Command::Convergence(a) => run_case(a, true),
        Command::AbstractSelftest(a) => run_abstract_selftest(a),
        Command::MeshInfo(a) => run_mesh_info(a),
        Command::Oracle2d(a) => run_oracle(a),
    });
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

fn output_path(out: &OutputArgs) -> PathBuf {
    out.output.clone().unwrap_or_else(|| match out.format {
        ReportFormat::Json => PathBuf::from("report.json"),
        ReportFormat::Csv => PathBuf::from("report.csv"),
    })
}

fn write(doc: &ReportDocument, path: &Path, format: ReportFormat) -> Result<(), Failure> {
    write_report(doc, path, format).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("report written to {}", path.display());
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
}

fn print_levels(report: &ConstantsReport) {
    println!(
        "{:>5} {:>10} {:>7} {:>14} {:>14} {:>14} {:>11} {:>9}",
        "level", "h", "dofs", "C_h", "beta^2", "Gamma_direct", "identity", "betti"
    );
    for r in &report.levels {
        let betti: Vec<String> = r.betti.iter().map(|b| b.to_string()).collect();
        println!(
            "{:>5} {:>10.4e} {:>7} {:>14} {:>14} {:>14} {:>11} {:>9}",
            r.level,
            r.h,
            r.dofs,
            fmt_opt(r.c_h),
            fmt_opt(r.beta_squared),
            fmt_opt(r.gamma_direct),
            r.identity_deviation
                .map(|d| format!("{d:.2e}"))
                .unwrap_or_else(|| "-".into()),
            betti.join(",")
        );
        if let Some(e) = &r.error {
            println!("      level {} failed: {e}", r.level);
        }
        if r.polygonal_approximation && r.level == report.levels[0].level {
            println!("      (constants of the polygonal approximation)");
        }
    }
}

fn case_checks(report: &ConstantsReport) -> Vec<Check> {
    let mut checks = Vec::new();
    if let Some(d) = report.max_identity_deviation() {
        checks.push(Check::new("identity_deviation", d, Bound::AtMost, IDENTITY_THRESHOLD));
    }
    let (_, values) = report.c_series();
    if let Some(min) = values.iter().copied().reduce(f64::min) {
        checks.push(Check::new("c_h_lower_bound", min, Bound::AtLeast, C_LOWER_BOUND));
    }
    checks
}

fn run_case(a: CaseArgs, convergence: bool) -> Result<i32, Failure> {
    let domain = domain_spec(&a.domain.domain, a.domain.resolution, a.domain.inner_radius).map_err(Failure::Usage)?;
    let mut spec = CaseSpec::new(domain, a.ell as usize, (0..a.levels as usize).collect());
    spec.constraint_space = a.constraint_space.into();
    spec.policy = RankPolicy::new(a.rank_tol).map_err(|e| Failure::Usage(e.to_string()))?;
    spec.gamma_direct_enabled = !a.no_gamma_direct;
    spec.gamma_direct_max_dofs = a.gamma_direct_max_dofs as usize;
    spec.lbb_cross_check_enabled = a.lbb;
    spec.holomorphic_oracle_degree = a.holomorphic_degree.map(|m| m as usize);
    spec.record_timings = a.timings;
    spec.validate()?;
    let path = output_path(&a.output);

    let (report, series) = if convergence {
        let (r, s) = convergence_study(&spec)?;
        (r, Some(s))
    } else {
        (compute_case(&spec)?, None)
    };

    let mut config = ResolvedConfig::empty(if convergence { "convergence" } else { "compute" });
    config.domain = Some(spec.domain);
    config.ell = Some(spec.ell);
    config.refinement_levels = spec.refinement_levels.clone();
    config.constraint_space = Some(spec.constraint_space);
    config.rank_tolerance = Some(spec.policy.relative_tolerance());
    config.gamma_direct_enabled = Some(spec.gamma_direct_enabled);
    config.gamma_direct_max_dofs = Some(spec.gamma_direct_max_dofs);
    config.lbb_cross_check = Some(spec.lbb_cross_check_enabled);
    config.holomorphic_degree = spec.holomorphic_oracle_degree;
    config.record_timings = Some(spec.record_timings);
    config.output = Some(path.display().to_string());
    config.format = Some(a.output.format);

    println!(
        "{} ell={} ({} pair)",
        spec.domain.kind,
        spec.ell,
        spec.constraint_space.name()
    );
    print_levels(&report);
    if let Some(g) = report.holomorphic_gamma {
        println!("holomorphic Friedrichs estimate: {g:.10e}");
    }
    if let Some(s) = &series {
        match (s.extrapolated_value, s.estimated_rate) {
            (Some(v), Some(r)) => println!("extrapolated C = {v:.8e} (rate {r:.3}), beta^2 = {:.8e}", 1.0 / v),
            _ => println!(
                "extrapolation withheld: {}",
                s.diagnostic.as_deref().unwrap_or("insufficient data")
            ),
        }
    }

    let summary = Summary {
        max_identity_deviation: report.max_identity_deviation(),
        convergence: series,
        holomorphic_gamma: report.holomorphic_gamma,
        checks: case_checks(&report),
        ..Summary::default()
    };
    let doc = ReportDocument::new(config, report.levels, summary);
    if let Some(d) = doc.summary.max_identity_deviation {
        println!("max identity deviation: {d:.3e}");
    }
    write(&doc, &path, a.output.format)?;
    if doc.summary.passed {
        Ok(EXIT_OK)
    } else {
        eprintln!("numerical failure: failed levels {:?}", doc.summary.failed_levels);
        for c in doc.summary.checks.iter().filter(|c| !c.passed) {
            eprintln!("check {} failed: {:.3e}", c.name, c.value);
        }
        Ok(EXIT_NUMERICAL)
    }
}

fn run_abstract_selftest(a: SelftestArgs) -> Result<i32, Failure> {
    let policy = RankPolicy::new(a.rank_tol).map_err(|e| Failure::Usage(e.to_string()))?;
    let cfg = SelftestConfig {
        pairs: a.pairs as usize,
        max_dim: a.max_dim as usize,
        seed: a.seed,
        relations_per_pair: a.relations_per_pair as usize,
        identity_threshold: a.identity_threshold,
    };
    let summary = run_selftest(&cfg, &policy).map_err(|e| Failure::Numerical(e.to_string()))?;
    println!("pairs: {}", summary.pairs);
    println!("max identity deviation: {:.3e}", summary.max_identity_deviation);
    println!("max conjugate-triple residual: {:.3e}", summary.max_relation_residual);
    println!("max closed-form error: {:.3e}", summary.max_closed_form_error);
    let checks = summary.checks();
    for c in &checks {
        println!("{}: {}", c.name, if c.passed { "pass" } else { "FAIL" });
    }

    let mut config = ResolvedConfig::empty("abstract-selftest");
    config.seed = Some(cfg.seed);
    config.pairs = Some(cfg.pairs);
    config.max_dim = Some(cfg.max_dim);
    config.relations_per_pair = Some(cfg.relations_per_pair);
    config.identity_threshold = Some(cfg.identity_threshold);
    config.rank_tolerance = Some(policy.relative_tolerance());
    config.output = a.output.output.as_ref().map(|p| p.display().to_string());
    config.format = a.output.output.as_ref().map(|_| a.output.format);
    let doc = ReportDocument::new(
        config,
        Vec::new(),
        Summary {
            max_identity_deviation: Some(summary.max_identity_deviation),
            selftest: Some(summary),
            checks,
            ..Summary::default()
        },
    );
    if let Some(path) = &a.output.output {
        write(&doc, path, a.output.format)?;
    }
    Ok(if doc.summary.passed { EXIT_OK } else { EXIT_THRESHOLD })
}

fn format_betti(betti: &[usize], dim: usize) -> String {
    let shown: Vec<String> = betti.iter().take(dim).map(|b| b.to_string()).collect();
    format!("({})", shown.join(", "))
}

fn run_mesh_info(a: MeshInfoArgs) -> Result<i32, Failure> {
    let mut mesh: SimplicialMesh = match (&a.mesh, &a.domain) {
        (Some(path), _) => {
            let import = read_mesh_file(path)?;
            for w in &import.warnings {
                eprintln!("warning: {w}");
            }
            import.mesh
        }
        (None, Some(name)) => generate(&domain_spec(name, a.resolution, a.inner_radius).map_err(Failure::Usage)?)?,
        (None, None) => return Err(Failure::Usage("need --domain or --mesh".into())),
    };
    for _ in 0..a.refine {
        mesh = refine_uniform(&mesh);
    }
    let stats = mesh_statistics(&mesh)?;
    println!("dim = {}", stats.dim);
    println!("vertices = {}", stats.vertex_count);
    println!("cells = {}", stats.cell_count);
    println!("h = {:.6e}", stats.h);
    println!("volume = {:.12e}", mesh.total_volume());
    println!(
        "cell volume range = [{:.6e}, {:.6e}]",
        stats.min_volume, stats.max_volume
    );
    let angle = if stats.dim == 2 {
        "min angle"
    } else {
        "min dihedral angle"
    };
    println!("{angle} = {:.6} rad", stats.min_angle);
    if mesh.is_polygonal_approximation() {
        println!("polygonal approximation of a curved domain");
    }
    println!("b = {}", format_betti(&betti_numbers(&mesh), mesh.dim()));
    Ok(EXIT_OK)
}

fn run_oracle(a: OracleArgs) -> Result<i32, Failure> {
    let domain = domain_spec(&a.domain.domain, a.domain.resolution, a.domain.inner_radius).map_err(Failure::Usage)?;
    let gamma = holomorphic_friedrichs_2d(&domain, a.refine as usize, a.degree as usize)?;
    println!(
        "{} degree {}: Friedrichs estimate = {gamma:.15e}",
        domain.kind, a.degree
    );
    println!("implied C >= {:.15e}", gamma + 1.0);
    let mut config = ResolvedConfig::empty("oracle-2d");
    config.domain = Some(domain);
    config.refinement_levels = vec![a.refine as usize];
    config.holomorphic_degree = Some(a.degree as usize);
    config.output = a.output.output.as_ref().map(|p| p.display().to_string());
    config.format = a.output.output.as_ref().map(|_| a.output.format);
    if let Some(path) = &a.output.output {
        let doc = ReportDocument::new(
            config,
            Vec::new(),
            Summary {
                holomorphic_gamma: Some(gamma),
                ..Summary::default()
            },
        );
        write(&doc, path, a.output.format)?;
    }
    Ok(EXIT_OK)
}

use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::PipelineError;
use crate::fem::grundmann_moller;
use crate::mesh::{distance, generate, refine_uniform, DomainSpec, SimplicialMesh};
use crate::spectral::{solve_pencil, DensePencil};

/// Largest accepted condition number of the conjugate-part Gram matrix.
pub const HOLOMORPHIC_CONDITION_LIMIT: f64 = 1e12;

fn diameter(mesh: &SimplicialMesh) -> f64 {
    let pts: Vec<_> = (0..mesh.vertex_count())
        .filter(|&v| mesh.is_boundary_vertex(v))
        .map(|v| mesh.vertices()[v])
        .collect();
    let mut best: f64 = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(distance(a, b));
        }
    }
    best
}

/// Lower estimate of the Friedrichs constant of a planar mesh domain:
/// `max ‖h‖² / ‖g‖²` over `h + ig = Σ_{k=1..m} c_k ((z − z_c)/diam)^k`, with
/// `h` and `g` projected onto mean-zero functions.
///
/// Integrals use a rule exact for the degree-`2m` integrands, so the value is
/// that of the polygon itself.
pub fn holomorphic_friedrichs_on_mesh(mesh: &SimplicialMesh, max_degree: usize) -> Result<f64, PipelineError> {
    if mesh.dim() != 2 || max_degree == 0 {
        return Err(PipelineError::InvalidCase(
            "holomorphic oracle needs a 2D mesh and degree >= 1".into(),
        ));
    }
    let m = max_degree;
    let rule = grundmann_moller(2, m)?;
    let c = mesh.centroid();
    let center = Complex::new(c[0], c[1]);
    let scale = 1.0 / diameter(mesh);
    // fields F = [Re z^1..Re z^m, Im z^1..Im z^m]
    let n = 2 * m;
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut sums = vec![0.0; n];
    let mut volume = 0.0;
    let mut f = vec![0.0; n];
    for cell in 0..mesh.cell_count() {
        let pts = mesh.cell_points(cell);
        let vol = mesh.cell_volume(cell);
        volume += vol;
        for (lam, &w0) in rule.points.iter().zip(&rule.weights) {
            let w = 2.0 * vol * w0;
            let x = lam[0] * pts[0][0] + lam[1] * pts[1][0] + lam[2] * pts[2][0];
            let y = lam[0] * pts[0][1] + lam[1] * pts[1][1] + lam[2] * pts[2][1];
            let z = (Complex::new(x, y) - center) * scale;
            let mut power = Complex::new(1.0, 0.0);
            for k in 0..m {
                power *= z;
                f[k] = power.re;
                f[m + k] = power.im;
            }
            for i in 0..n {
                sums[i] += w * f[i];
                for j in 0..n {
                    gram[(i, j)] += w * (f[i] * f[j]);
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] -= sums[i] * sums[j] / volume;
        }
    }
    // coefficients (a, b) of c_k = a_k + i b_k:
    // h = Σ a_k Re_k − b_k Im_k, g = Σ a_k Im_k + b_k Re_k
    let mut th = DMatrix::<f64>::zeros(n, n);
    let mut tg = DMatrix::<f64>::zeros(n, n);
    for k in 0..m {
        th[(k, k)] = 1.0;
        th[(m + k, m + k)] = -1.0;
        tg[(m + k, k)] = 1.0;
        tg[(k, m + k)] = 1.0;
    }
    let gram_h = th.transpose() * &gram * &th;
    let gram_g = tg.transpose() * &gram * &tg;
    let eig = SymmetricEigen::new(gram_g.clone()).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= HOLOMORPHIC_CONDITION_LIMIT) {
        return Err(PipelineError::IllConditionedBasis { condition });
    }
    let spectrum = solve_pencil(&DensePencil::new(
        crate::spectral::symmetrized(&gram_h),
        crate::spectral::symmetrized(&gram_g),
    )?)?;
    Ok(spectrum.largest().expect("nonempty basis"))
}

/// [`holomorphic_friedrichs_on_mesh`] on a generated domain after `refinements` refinements.
pub fn holomorphic_friedrichs_2d(
    domain: &DomainSpec,
    refinements: usize,
    max_degree: usize,
) -> Result<f64, PipelineError> {
    let mut mesh = generate(domain)?;
    for _ in 0..refinements {
        mesh = refine_uniform(&mesh);
    }
    holomorphic_friedrichs_on_mesh(&mesh, max_degree)
}

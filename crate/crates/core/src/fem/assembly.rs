use nalgebra::{DMatrix, DVector};

use super::{basis_gradients, quadrature, CellGeometry, FemError, FemSpace};
use crate::mesh::Point;

const ASSEMBLY_DEGREE: usize = 4;

/// Assembled forms over the interior vector DOFs.
///
/// `d_div[(a,i),(b,j)] = ∫ ∂_a φ_i ∂_b φ_j` and
/// `c_curl[(a,i),(b,j)] = ∫ δ_ab ∇φ_i·∇φ_j − ∂_b φ_i ∂_a φ_j`, the latter being
/// the scalar curl product in 2D and the vector curl product in 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct FemSystem {
    pub dim: usize,
    /// `∫ ∇u : ∇v`.
    pub k: DMatrix<f64>,
    pub d_div: DMatrix<f64>,
    pub c_curl: DMatrix<f64>,
    /// `a_pressure[(a,i), p] = ∫ λ_p ∂_a φ_i` over all mesh vertices `p`.
    pub a_pressure: DMatrix<f64>,
    /// Linear mass matrix over all vertices; constants are not removed.
    pub m_pressure: DMatrix<f64>,
    /// `div_cell[(a,i), T] = ∫_T ∂_a φ_i`.
    pub div_cell: DMatrix<f64>,
    /// Cell moments of the curl: column `T` in 2D, columns `3T..3T+3` in 3D.
    pub curl_cell: DMatrix<f64>,
    pub cell_volumes: DVector<f64>,
}

impl FemSystem {
    pub fn dof_count(&self) -> usize {
        self.k.nrows()
    }

    /// `‖Π₀ div u‖²`, with `Π₀` the L² projection onto cellwise constants.
    pub fn projected_div(&self) -> DMatrix<f64> {
        cellwise_projection(&self.div_cell, &self.cell_volumes, 1)
    }

    /// `‖Π₀ curl u‖²`.
    pub fn projected_curl(&self) -> DMatrix<f64> {
        let per_cell = if self.dim == 2 { 1 } else { 3 };
        cellwise_projection(&self.curl_cell, &self.cell_volumes, per_cell)
    }

    /// `‖K − D − C‖_F / ‖K‖_F`.
    pub fn identity_deviation(&self) -> f64 {
        (&self.k - &self.d_div - &self.c_curl).norm() / self.k.norm()
    }
}

fn cellwise_projection(moments: &DMatrix<f64>, volumes: &DVector<f64>, per_cell: usize) -> DMatrix<f64> {
    let mut scaled = moments.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= volumes[j / per_cell].sqrt();
    }
    let out = &scaled * scaled.transpose();
    crate::spectral::symmetrized(&out)
}

/// Scalar quadratic element stiffness `∫ ∇φ_i·∇φ_j` on one simplex.
pub fn scalar_element_stiffness(dim: usize, pts: &[Point]) -> Result<DMatrix<f64>, FemError> {
    let geo = CellGeometry::new(dim, pts).ok_or(FemError::DegenerateCell { cell: 0 })?;
    let rule = quadrature(dim, ASSEMBLY_DEGREE)?;
    let n = super::local_node_count(dim);
    let scale = geo.volume / rule.reference_volume();
    let mut out = DMatrix::zeros(n, n);
    for (lam, &w) in rule.points.iter().zip(&rule.weights) {
        let g = basis_gradients(&geo, lam);
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..dim).map(|a| g[i][a] * g[j][a]).sum();
                out[(i, j)] += w * scale * dot;
            }
        }
    }
    Ok(out)
}

pub fn assemble(space: &FemSpace) -> Result<FemSystem, FemError> {
    let dim = space.dim();
    let mesh = space.mesh();
    let nint = space.interior_node_count();
    let ndof = space.dof_count();
    let nv = mesh.vertex_count();
    let nloc = space.local_node_count();
    let rule = quadrature(dim, ASSEMBLY_DEGREE)?;

    let mut k = DMatrix::zeros(ndof, ndof);
    let mut d_div = DMatrix::zeros(ndof, ndof);
    let mut c_curl = DMatrix::zeros(ndof, ndof);
    let mut a_pressure = DMatrix::zeros(ndof, nv);
    let mut m_pressure = DMatrix::zeros(nv, nv);
    let ncell = mesh.cell_count();
    let curl_dim = if dim == 2 { 1 } else { 3 };
    let mut div_cell = DMatrix::zeros(ndof, ncell);
    let mut curl_cell = DMatrix::zeros(ndof, ncell * curl_dim);
    let mut cell_volumes = DVector::zeros(ncell);

    // local[n][m] = ∫ ∇φ_n·∇φ_m, mixed[a][b][n][m] = ∫ ∂_aφ_n ∂_bφ_m
    let mut local = vec![0.0; nloc * nloc];
    let mut mixed = vec![0.0; dim * dim * nloc * nloc];
    let mut coupling = vec![0.0; dim * nloc * (dim + 1)];
    let mut mass = vec![0.0; (dim + 1) * (dim + 1)];
    let mx = |a: usize, b: usize, n: usize, m: usize| ((a * dim + b) * nloc + n) * nloc + m;

    for c in 0..mesh.cell_count() {
        let geo = CellGeometry::new(dim, &mesh.cell_points(c)).ok_or(FemError::DegenerateCell { cell: c })?;
        let scale = geo.volume / rule.reference_volume();
        cell_volumes[c] = geo.volume;
        local.fill(0.0);
        mixed.fill(0.0);
        coupling.fill(0.0);
        mass.fill(0.0);
        for (lam, &w0) in rule.points.iter().zip(&rule.weights) {
            let w = w0 * scale;
            let g = basis_gradients(&geo, lam);
            for n in 0..nloc {
                for m in 0..nloc {
                    let mut dot = 0.0;
                    for a in 0..dim {
                        dot += g[n][a] * g[m][a];
                    }
                    local[n * nloc + m] += w * dot;
                    for a in 0..dim {
                        for b in 0..dim {
                            mixed[mx(a, b, n, m)] += w * (g[n][a] * g[m][b]);
                        }
                    }
                }
                for a in 0..dim {
                    for p in 0..=dim {
                        coupling[(a * nloc + n) * (dim + 1) + p] += w * (g[n][a] * lam[p]);
                    }
                }
            }
            for p in 0..=dim {
                for r in 0..=dim {
                    mass[p * (dim + 1) + r] += w * (lam[p] * lam[r]);
                }
            }
        }

        let nodes = space.cell_nodes(c);
        let verts = mesh.cell(c);
        for p in 0..=dim {
            for r in 0..=dim {
                m_pressure[(verts[p], verts[r])] += mass[p * (dim + 1) + r];
            }
        }
        for (n, &gn) in nodes.iter().enumerate() {
            let Some(sn) = space.node_dof(gn) else { continue };
            for a in 0..dim {
                let row = a * nint + sn;
                let mut moment = 0.0;
                for p in 0..=dim {
                    let v = coupling[(a * nloc + n) * (dim + 1) + p];
                    a_pressure[(row, verts[p])] += v;
                    moment += v;
                }
                div_cell[(row, c)] = moment;
                // curl(φ e_a) = ∇φ × e_a; in 2D the scalar curl is component 2
                if dim == 2 {
                    let other = moment_of(&coupling, nloc, dim, 1 - a, n);
                    curl_cell[(row, c)] = if a == 0 { -other } else { other };
                } else {
                    let (b, e) = ((a + 1) % 3, (a + 2) % 3);
                    curl_cell[(row, 3 * c + b)] = moment_of(&coupling, nloc, dim, e, n);
                    curl_cell[(row, 3 * c + e)] = -moment_of(&coupling, nloc, dim, b, n);
                }
            }
            for (m, &gm) in nodes.iter().enumerate() {
                let Some(sm) = space.node_dof(gm) else { continue };
                let kl = local[n * nloc + m];
                for a in 0..dim {
                    let row = a * nint + sn;
                    k[(row, a * nint + sm)] += kl;
                    for b in 0..dim {
                        let col = b * nint + sm;
                        d_div[(row, col)] += mixed[mx(a, b, n, m)];
                        let diag = if a == b { kl } else { 0.0 };
                        c_curl[(row, col)] += diag - mixed[mx(b, a, n, m)];
                    }
                }
            }
        }
    }
    Ok(FemSystem {
        dim,
        k,
        d_div,
        c_curl,
        a_pressure,
        m_pressure,
        div_cell,
        curl_cell,
        cell_volumes,
    })
}

/// `∫_T ∂_a φ_n`, as the sum of the linear-pressure couplings over the cell's vertices.
fn moment_of(coupling: &[f64], nloc: usize, dim: usize, a: usize, n: usize) -> f64 {
    (0..=dim).map(|p| coupling[(a * nloc + n) * (dim + 1) + p]).sum()
}

/// `m_i = ∫ div φ_i` for every vector DOF, by a separate element loop.
pub fn divergence_moment(space: &FemSpace) -> Result<DVector<f64>, FemError> {
    let dim = space.dim();
    let mesh = space.mesh();
    let nint = space.interior_node_count();
    let rule = quadrature(dim, ASSEMBLY_DEGREE)?;
    let mut out = DVector::zeros(space.dof_count());
    for c in 0..mesh.cell_count() {
        let geo = CellGeometry::new(dim, &mesh.cell_points(c)).ok_or(FemError::DegenerateCell { cell: c })?;
        let scale = geo.volume / rule.reference_volume();
        let nodes = space.cell_nodes(c);
        for (lam, &w) in rule.points.iter().zip(&rule.weights) {
            let g = basis_gradients(&geo, lam);
            for (n, &gn) in nodes.iter().enumerate() {
                if let Some(sn) = space.node_dof(gn) {
                    for a in 0..dim {
                        out[a * nint + sn] += w * scale * g[n][a];
                    }
                }
            }
        }
    }
    Ok(out)
}

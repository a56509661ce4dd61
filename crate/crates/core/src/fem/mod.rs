//! Componentwise quadratic Lagrange vector fields with homogeneous Dirichlet
//! conditions, and the assembled quadratic forms `|u|₁²`, `‖div u‖²`,
//! `‖curl u‖²` together with a continuous linear pressure companion.
//!
//! Scalar nodes are numbered vertices first, then edge midpoints in the
//! lexicographic order of their vertex pairs. A vector degree of freedom
//! `(component a, interior node i)` has index `a · n_interior + i`.

mod assembly;
mod probe;
mod quadrature;

#[cfg(test)]
mod tests;

pub use assembly::{assemble, divergence_moment, scalar_element_stiffness, FemSystem};
pub use probe::{field_probe, prolongation, ProbeValue};
pub use quadrature::{grundmann_moller, quadrature, QuadratureRule, MAX_ASSEMBLY_DEGREE};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::mesh::{local_pairs, Point, SimplicialMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("mesh has no interior scalar nodes; refine it")]
    NoInteriorDofs,
    #[error("quadrature degree {degree} not supported (max 4)")]
    UnsupportedDegree { degree: usize },
    #[error("degenerate cell {cell}")]
    DegenerateCell { cell: usize },
    #[error("point {point:?} lies outside the mesh")]
    PointOutsideMesh { point: Point },
    #[error("spaces are not nested: {0}")]
    NotNested(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Vector quadratic Lagrange space on a mesh with all boundary nodes removed.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: SimplicialMesh,
    edges: Vec<[usize; 2]>,
    cell_edges: Vec<Vec<usize>>,
    node_boundary: Vec<bool>,
    /// Interior index of each scalar node, `None` on the boundary.
    node_dof: Vec<Option<usize>>,
    interior_nodes: Vec<usize>,
}

pub fn build_space(mesh: &SimplicialMesh) -> Result<FemSpace, FemError> {
    let topo = mesh.topology();
    let nv = mesh.vertex_count();
    let mut node_boundary: Vec<bool> = mesh.boundary_flags().to_vec();
    node_boundary.extend_from_slice(&topo.boundary_edge);
    let mut node_dof = vec![None; node_boundary.len()];
    let mut interior_nodes = Vec::new();
    for (n, &b) in node_boundary.iter().enumerate() {
        if !b {
            node_dof[n] = Some(interior_nodes.len());
            interior_nodes.push(n);
        }
    }
    if interior_nodes.is_empty() {
        return Err(FemError::NoInteriorDofs);
    }
    debug_assert_eq!(node_boundary.len(), nv + topo.edges.len());
    Ok(FemSpace {
        mesh: mesh.clone(),
        edges: topo.edges,
        cell_edges: topo.cell_edges,
        node_boundary,
        node_dof,
        interior_nodes,
    })
}

impl FemSpace {
    pub fn mesh(&self) -> &SimplicialMesh {
        &self.mesh
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn node_count(&self) -> usize {
        self.node_boundary.len()
    }

    pub fn interior_node_count(&self) -> usize {
        self.interior_nodes.len()
    }

    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior_nodes
    }

    pub fn dof_count(&self) -> usize {
        self.dim() * self.interior_nodes.len()
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        self.node_boundary[node]
    }

    /// Interior index of a scalar node.
    pub fn node_dof(&self, node: usize) -> Option<usize> {
        self.node_dof[node]
    }

    /// Vector DOF of `(component, node)`, `None` for boundary nodes.
    pub fn dof(&self, component: usize, node: usize) -> Option<usize> {
        self.node_dof[node].map(|i| component * self.interior_nodes.len() + i)
    }

    pub fn node_position(&self, node: usize) -> Point {
        let nv = self.mesh.vertex_count();
        let v = self.mesh.vertices();
        if node < nv {
            v[node]
        } else {
            let [a, b] = self.edges[node - nv];
            [
                0.5 * (v[a][0] + v[b][0]),
                0.5 * (v[a][1] + v[b][1]),
                0.5 * (v[a][2] + v[b][2]),
            ]
        }
    }

    /// Global scalar nodes of a cell: its sorted vertices, then its edges in
    /// local pair order.
    pub fn cell_nodes(&self, c: usize) -> Vec<usize> {
        let nv = self.mesh.vertex_count();
        let mut out = self.mesh.cell(c).to_vec();
        out.extend(self.cell_edges[c].iter().map(|e| nv + e));
        out
    }

    pub fn local_node_count(&self) -> usize {
        local_node_count(self.dim())
    }
}

pub(crate) fn local_node_count(dim: usize) -> usize {
    (dim + 1) * (dim + 2) / 2
}

/// Affine geometry of one simplex.
pub(crate) struct CellGeometry {
    pub dim: usize,
    pub origin: Point,
    /// `jinv[k][a] = ∂λ_{k+1}/∂x_a`.
    pub jinv: DMatrix<f64>,
    /// `∇λ_k` for `k = 0..=dim`.
    pub grad_lambda: Vec<[f64; 3]>,
    pub volume: f64,
}

impl CellGeometry {
    pub fn new(dim: usize, pts: &[Point]) -> Option<Self> {
        let jac = DMatrix::from_fn(dim, dim, |a, k| pts[k + 1][a] - pts[0][a]);
        let det = jac.determinant();
        let jinv = jac.try_inverse()?;
        if !det.is_finite() || det == 0.0 {
            return None;
        }
        let mut grad_lambda = vec![[0.0; 3]; dim + 1];
        for k in 0..dim {
            for a in 0..dim {
                grad_lambda[k + 1][a] = jinv[(k, a)];
                grad_lambda[0][a] -= jinv[(k, a)];
            }
        }
        let volume = det.abs() / (1..=dim).map(|k| k as f64).product::<f64>();
        Some(Self {
            dim,
            origin: pts[0],
            jinv,
            grad_lambda,
            volume,
        })
    }

    pub fn barycentric(&self, x: &Point) -> Vec<f64> {
        let mut lam = vec![0.0; self.dim + 1];
        let mut rest = 1.0;
        for k in 0..self.dim {
            let mut s = 0.0;
            for a in 0..self.dim {
                s += self.jinv[(k, a)] * (x[a] - self.origin[a]);
            }
            lam[k + 1] = s;
            rest -= s;
        }
        lam[0] = rest;
        lam
    }
}

/// Values of the local quadratic basis at barycentric point `lam`.
pub(crate) fn basis_values(dim: usize, lam: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = lam.iter().map(|&l| l * (2.0 * l - 1.0)).collect();
    out.extend(local_pairs(dim + 1).iter().map(|&(i, j)| 4.0 * lam[i] * lam[j]));
    out
}

/// Physical gradients of the local quadratic basis at barycentric point `lam`.
pub(crate) fn basis_gradients(geo: &CellGeometry, lam: &[f64]) -> Vec<[f64; 3]> {
    let dim = geo.dim;
    let g = &geo.grad_lambda;
    let mut out = Vec::with_capacity(local_node_count(dim));
    for i in 0..=dim {
        let s = 4.0 * lam[i] - 1.0;
        out.push([s * g[i][0], s * g[i][1], s * g[i][2]]);
    }
    for (i, j) in local_pairs(dim + 1) {
        let mut v = [0.0; 3];
        for a in 0..dim {
            v[a] = 4.0 * (lam[i] * g[j][a] + lam[j] * g[i][a]);
        }
        out.push(v);
    }
    out
}

use nalgebra::{DMatrix, DVector};

use super::{basis_gradients, basis_values, CellGeometry, FemError, FemSpace};
use crate::mesh::Point;

const INSIDE_TOLERANCE: f64 = 1e-12;

/// A vector field and its derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeValue {
    pub value: Vec<f64>,
    /// `gradient[a][b] = ∂_b u_a`.
    pub gradient: Vec<Vec<f64>>,
    pub divergence: f64,
    /// One component in 2D, three in 3D.
    pub curl: Vec<f64>,
}

fn locate(space: &FemSpace, x: &Point) -> Option<(usize, CellGeometry, Vec<f64>)> {
    let mesh = space.mesh();
    for c in 0..mesh.cell_count() {
        let geo = CellGeometry::new(mesh.dim(), &mesh.cell_points(c))?;
        let lam = geo.barycentric(x);
        if lam.iter().all(|&l| l >= -INSIDE_TOLERANCE) {
            return Some((c, geo, lam));
        }
    }
    None
}

/// Evaluates the field with the given DOF coefficients at a point.
pub fn field_probe(space: &FemSpace, coeffs: &DVector<f64>, x: &Point) -> Result<ProbeValue, FemError> {
    if coeffs.len() != space.dof_count() {
        return Err(FemError::DimensionMismatch(format!(
            "{} coefficients for {} DOFs",
            coeffs.len(),
            space.dof_count()
        )));
    }
    let dim = space.dim();
    let (c, geo, lam) = locate(space, x).ok_or(FemError::PointOutsideMesh { point: *x })?;
    let phi = basis_values(dim, &lam);
    let grad = basis_gradients(&geo, &lam);
    let mut value = vec![0.0; dim];
    let mut gradient = vec![vec![0.0; dim]; dim];
    let mut divergence = 0.0;
    let mut curl = vec![0.0; if dim == 2 { 1 } else { 3 }];
    for (n, node) in space.cell_nodes(c).into_iter().enumerate() {
        for a in 0..dim {
            let Some(i) = space.dof(a, node) else { continue };
            let u = coeffs[i];
            value[a] += u * phi[n];
            for b in 0..dim {
                gradient[a][b] += u * grad[n][b];
            }
            divergence += u * grad[n][a];
            if dim == 2 {
                // curl(φ e_0) = −∂_1 φ, curl(φ e_1) = ∂_0 φ
                curl[0] += if a == 0 { -u * grad[n][1] } else { u * grad[n][0] };
            } else {
                // curl(φ e_a) = ∇φ × e_a
                let (b, c) = ((a + 1) % 3, (a + 2) % 3);
                curl[b] += u * grad[n][c];
                curl[c] -= u * grad[n][b];
            }
        }
    }
    Ok(ProbeValue {
        value,
        gradient,
        divergence,
        curl,
    })
}

/// Interpolation of coarse fields into the space on the uniform refinement of
/// the coarse mesh, as a `fine_dofs × coarse_dofs` matrix.
///
/// The fine mesh must be the output of `refine_uniform` on a mesh without
/// curved boundary, so that child cells `2^dim·c .. 2^dim·(c+1)` lie in parent `c`.
pub fn prolongation(coarse: &FemSpace, fine: &FemSpace) -> Result<DMatrix<f64>, FemError> {
    let dim = coarse.dim();
    let (cm, fm) = (coarse.mesh(), fine.mesh());
    if cm.is_polygonal_approximation() {
        return Err(FemError::NotNested("curved boundary moves refined vertices".into()));
    }
    let children = 1usize << dim;
    if fm.dim() != dim || fm.cell_count() != cm.cell_count() * children {
        return Err(FemError::NotNested("fine mesh is not a uniform refinement".into()));
    }
    if fm.vertices()[..cm.vertex_count()] != *cm.vertices() {
        return Err(FemError::NotNested("coarse vertices not preserved".into()));
    }
    let mut scalar = DMatrix::zeros(fine.interior_node_count(), coarse.interior_node_count());
    for f in 0..fm.cell_count() {
        let parent = f / children;
        let geo = CellGeometry::new(dim, &cm.cell_points(parent)).ok_or(FemError::DegenerateCell { cell: parent })?;
        let coarse_nodes = coarse.cell_nodes(parent);
        for node in fine.cell_nodes(f) {
            let Some(row) = fine.node_dof(node) else { continue };
            let lam = geo.barycentric(&fine.node_position(node));
            if lam.iter().any(|&l| l < -1e-9) {
                return Err(FemError::NotNested(format!("fine cell {f} leaves parent {parent}")));
            }
            for (n, v) in basis_values(dim, &lam).into_iter().enumerate() {
                if let Some(col) = coarse.node_dof(coarse_nodes[n]) {
                    scalar[(row, col)] = v;
                }
            }
        }
    }
    let (rf, rc) = scalar.shape();
    let mut out = DMatrix::zeros(dim * rf, dim * rc);
    for a in 0..dim {
        out.view_mut((a * rf, a * rc), (rf, rc)).copy_from(&scalar);
    }
    Ok(out)
}

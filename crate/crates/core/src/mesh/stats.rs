use serde::{Deserialize, Serialize};

use super::{distance, MeshError, Point, SimplicialMesh};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStatistics {
    pub dim: usize,
    pub cell_count: usize,
    pub vertex_count: usize,
    pub min_volume: f64,
    pub max_volume: f64,
    /// Smallest interior angle (2D) or dihedral angle (3D), radians.
    pub min_angle: f64,
    /// Max edge length.
    pub h: f64,
}

fn angle_between(u: Point, v: Point) -> f64 {
    let dot = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (dot / (nu * nv)).clamp(-1.0, 1.0).acos()
}

fn diff(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn min_angle(dim: usize, p: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    if dim == 2 {
        for i in 0..3 {
            let (a, b) = ((i + 1) % 3, (i + 2) % 3);
            best = best.min(angle_between(diff(&p[a], &p[i]), diff(&p[b], &p[i])));
        }
    } else {
        // dihedral angle along edge (i, j): angle between the projections of the
        // two opposite vertices onto the plane normal to the edge
        for i in 0..4 {
            for j in (i + 1)..4 {
                let others: Vec<usize> = (0..4).filter(|&x| x != i && x != j).collect();
                let e = diff(&p[j], &p[i]);
                let n1 = cross(e, diff(&p[others[0]], &p[i]));
                let n2 = cross(e, diff(&p[others[1]], &p[i]));
                best = best.min(angle_between(n1, n2));
            }
        }
    }
    best
}

pub fn mesh_statistics(mesh: &SimplicialMesh) -> Result<MeshStatistics, MeshError> {
    let mut min_volume = f64::INFINITY;
    let mut max_volume: f64 = 0.0;
    let mut min_ang = f64::INFINITY;
    for c in 0..mesh.cell_count() {
        let vol = mesh.cell_volume(c);
        if !(vol > 0.0) {
            return Err(MeshError::DegenerateCell { cell: c, volume: vol });
        }
        min_volume = min_volume.min(vol);
        max_volume = max_volume.max(vol);
        min_ang = min_ang.min(min_angle(mesh.dim(), &mesh.cell_points(c)));
    }
    let h = mesh
        .topology()
        .edges
        .iter()
        .map(|e| distance(&mesh.vertices()[e[0]], &mesh.vertices()[e[1]]))
        .fold(0.0, f64::max);
    Ok(MeshStatistics {
        dim: mesh.dim(),
        cell_count: mesh.cell_count(),
        vertex_count: mesh.vertex_count(),
        min_volume,
        max_volume,
        min_angle: min_ang,
        h,
    })
}

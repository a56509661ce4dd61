use super::{distance, Point, SimplicialMesh};

const ON_CIRCLE: f64 = 1e-9;

/// Red refinement: one new vertex per edge, 4 children per triangle and 8 per
/// tetrahedron (octahedron split along its shortest diagonal, first of
/// `m02–m13`, `m03–m12`, `m01–m23` on ties). New midpoints of boundary edges
/// on a curved boundary are projected radially onto the circle.
pub fn refine_uniform(mesh: &SimplicialMesh) -> SimplicialMesh {
    let topo = mesh.topology();
    let nv = mesh.vertex_count();
    let mut vertices = mesh.vertices().to_vec();
    for (e, edge) in topo.edges.iter().enumerate() {
        let (a, b) = (&mesh.vertices()[edge[0]], &mesh.vertices()[edge[1]]);
        let mut m: Point = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
        if topo.boundary_edge[e] {
            if let Some(r) = shared_circle(mesh.circles(), a, b) {
                let norm = (m[0] * m[0] + m[1] * m[1]).sqrt();
                m = [m[0] * r / norm, m[1] * r / norm, 0.0];
            }
        }
        vertices.push(m);
    }
    let mut cells = Vec::with_capacity(mesh.cell_count() << mesh.dim());
    for c in 0..mesh.cell_count() {
        let v = mesh.cell(c);
        let e = &topo.cell_edges[c];
        let mid = |local: usize| nv + e[local];
        if mesh.dim() == 2 {
            // local pairs: 0=(0,1) 1=(0,2) 2=(1,2)
            let (m01, m02, m12) = (mid(0), mid(1), mid(2));
            cells.push(vec![v[0], m01, m02]);
            cells.push(vec![m01, v[1], m12]);
            cells.push(vec![m02, m12, v[2]]);
            cells.push(vec![m01, m12, m02]);
        } else {
            // local pairs: 0=(0,1) 1=(0,2) 2=(0,3) 3=(1,2) 4=(1,3) 5=(2,3)
            let (m01, m02, m03, m12, m13, m23) = (mid(0), mid(1), mid(2), mid(3), mid(4), mid(5));
            cells.push(vec![v[0], m01, m02, m03]);
            cells.push(vec![m01, v[1], m12, m13]);
            cells.push(vec![m02, m12, v[2], m23]);
            cells.push(vec![m03, m13, m23, v[3]]);
            let options = [
                ((m02, m13), [m01, m12, m23, m03]),
                ((m03, m12), [m01, m02, m23, m13]),
                ((m01, m23), [m02, m03, m13, m12]),
            ];
            let mut best = 0;
            let mut best_len = f64::INFINITY;
            for (i, ((p, q), _)) in options.iter().enumerate() {
                let len = distance(&vertices[*p], &vertices[*q]);
                if len < best_len * (1.0 - 1e-12) {
                    best = i;
                    best_len = len;
                }
            }
            let ((p, q), ring) = options[best];
            for s in 0..4 {
                cells.push(vec![p, q, ring[s], ring[(s + 1) % 4]]);
            }
        }
    }
    SimplicialMesh::new(mesh.dim(), vertices, cells)
        .expect("refinement of a valid mesh is valid")
        .with_circles(mesh.circles().to_vec())
}

fn shared_circle(circles: &[f64], a: &Point, b: &Point) -> Option<f64> {
    let ra = (a[0] * a[0] + a[1] * a[1]).sqrt();
    let rb = (b[0] * b[0] + b[1] * b[1]).sqrt();
    circles
        .iter()
        .copied()
        .find(|&r| (ra - r).abs() <= ON_CIRCLE * r && (rb - r).abs() <= ON_CIRCLE * r)
}

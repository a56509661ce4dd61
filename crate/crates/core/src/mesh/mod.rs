//! Simplicial meshes of the test domains, uniform refinement, and the
//! combinatorial cochain complex used for Betti numbers.

mod cochain;
mod generate;
mod io;
mod refine;
mod stats;


pub use cochain::{betti_numbers, betti_numbers_mod, cochain_complex, CochainComplex, SparseIntMatrix};
pub use generate::{generate, DomainKind, DomainSpec};
pub use io::{read_gmsh, read_mesh_file, read_mesh_text, write_mesh_text, GmshImport};
pub use refine::refine_uniform;
pub use stats::{mesh_statistics, MeshStatistics};

use thiserror::Error;

/// Vertex coordinates; the third component is zero for planar meshes.
pub type Point = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("invalid domain specification: {0}")]
    InvalidSpec(String),
    #[error("degenerate cell {cell} (signed volume {volume:.3e})")]
    DegenerateCell { cell: usize, volume: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A conforming simplicial mesh in two or three dimensions.
///
/// Cells are stored with their vertex indices sorted ascending. `parity[c]`
/// records the orientation of that sorted tuple: `+1` when it is positively
/// oriented, `-1` when swapping its first two entries is needed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<usize>,
    parity: Vec<i8>,
    boundary: Vec<bool>,
    /// Radii of origin-centred circles that boundary edges approximate.
    circles: Vec<f64>,
}

/// Edges, faces and their incidences, all sorted lexicographically.
#[derive(Debug, Clone)]
pub struct Topology {
    pub edges: Vec<[usize; 2]>,
    /// Triangles of a tetrahedral mesh; empty in 2D where the cells are the faces.
    pub faces: Vec<[usize; 3]>,
    /// Per cell, the global edge of each local vertex pair `(i, j)`, `i < j`, in
    /// lexicographic order.
    pub cell_edges: Vec<Vec<usize>>,
    pub boundary_edge: Vec<bool>,
    /// Sorted vertex tuples of facets incident to exactly one cell.
    pub boundary_facets: Vec<Vec<usize>>,
}

pub(crate) fn local_pairs(nv: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..nv {
        for j in (i + 1)..nv {
            out.push((i, j));
        }
    }
    out
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn distance(a: &Point, b: &Point) -> f64 {
    let d = sub(a, b);
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Signed volume of the simplex with the given vertices, in the stated order.
pub fn signed_volume(dim: usize, pts: &[Point]) -> f64 {
    match dim {
        2 => {
            let a = sub(&pts[1], &pts[0]);
            let b = sub(&pts[2], &pts[0]);
            0.5 * (a[0] * b[1] - a[1] * b[0])
        }
        3 => {
            let a = sub(&pts[1], &pts[0]);
            let b = sub(&pts[2], &pts[0]);
            let c = sub(&pts[3], &pts[0]);
            let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]);
            det / 6.0
        }
        _ => unreachable!("dimension checked on construction"),
    }
}

fn permutation_parity(tuple: &[usize]) -> i8 {
    let mut inversions = 0;
    for i in 0..tuple.len() {
        for j in (i + 1)..tuple.len() {
            if tuple[i] > tuple[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

impl SimplicialMesh {
    /// Builds a mesh from arbitrary vertex tuples. Orientation is derived from
    /// the geometry; cells with (near) zero volume are rejected.
    pub fn new(dim: usize, vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        if dim != 2 && dim != 3 {
            return Err(MeshError::InvalidMesh(format!("dimension {dim} not in {{2, 3}}")));
        }
        if cells.is_empty() {
            return Err(MeshError::InvalidMesh("mesh has no cells".into()));
        }
        let nv = vertices.len();
        let mut flat = Vec::with_capacity(cells.len() * (dim + 1));
        let mut parity = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() != dim + 1 {
                return Err(MeshError::InvalidMesh(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.len(),
                    dim + 1
                )));
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::InvalidMesh(format!(
                    "cell {c} references vertex {bad} of {nv}"
                )));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let vol = signed_volume(dim, &pts);
            let h = local_pairs(dim + 1)
                .iter()
                .map(|&(i, j)| distance(&pts[i], &pts[j]))
                .fold(0.0, f64::max);
            if !(vol.abs() > 1e-12 * h.powi(dim as i32)) {
                return Err(MeshError::DegenerateCell { cell: c, volume: vol });
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::InvalidMesh(format!("cell {c} repeats a vertex")));
            }
            let sign = if vol > 0.0 { 1 } else { -1 };
            parity.push(sign * permutation_parity(cell));
            flat.extend_from_slice(&sorted);
        }
        let mut mesh = Self {
            dim,
            vertices,
            cells: flat,
            parity,
            boundary: Vec::new(),
            circles: Vec::new(),
        };
        mesh.boundary = mesh.compute_boundary_flags();
        Ok(mesh)
    }

    pub(crate) fn with_circles(mut self, radii: Vec<f64>) -> Self {
        self.circles = radii;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn cell_count(&self) -> usize {
        self.parity.len()
    }

    /// Sorted vertex indices of a cell.
    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.dim + 1;
        &self.cells[c * k..(c + 1) * k]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.dim + 1)
    }

    pub fn parity(&self, c: usize) -> i8 {
        self.parity[c]
    }

    /// Vertex tuple of a cell in positive orientation.
    pub fn oriented_cell(&self, c: usize) -> Vec<usize> {
        let mut v = self.cell(c).to_vec();
        if self.parity[c] < 0 {
            v.swap(0, 1);
        }
        v
    }

    pub fn cell_points(&self, c: usize) -> Vec<Point> {
        self.cell(c).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Positive volume of a cell.
    pub fn cell_volume(&self, c: usize) -> f64 {
        let pts: Vec<Point> = self.oriented_cell(c).iter().map(|&v| self.vertices[v]).collect();
        signed_volume(self.dim, &pts)
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn circles(&self) -> &[f64] {
        &self.circles
    }

    /// True when the mesh approximates a domain with curved boundary.
    pub fn is_polygonal_approximation(&self) -> bool {
        !self.circles.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        (0..self.cell_count()).map(|c| self.cell_volume(c)).sum()
    }

    /// Max edge length.
    pub fn mesh_size(&self) -> f64 {
        self.topology()
            .edges
            .iter()
            .map(|e| distance(&self.vertices[e[0]], &self.vertices[e[1]]))
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Point {
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for c in 0..self.cell_count() {
            let vol = self.cell_volume(c);
            let pts = self.cell_points(c);
            for p in &pts {
                for k in 0..3 {
                    acc[k] += vol * p[k] / pts.len() as f64;
                }
            }
            total += vol;
        }
        [acc[0] / total, acc[1] / total, acc[2] / total]
    }

    /// Applies `f` to every vertex; cells with flipped orientation are re-oriented.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<Self, MeshError> {
        let vertices = self.vertices.iter().map(f).collect();
        let cells = self.cells().map(|c| c.to_vec()).collect();
        Ok(Self::new(self.dim, vertices, cells)?.with_circles(Vec::new()))
    }

    fn facet_counts(&self) -> Vec<(Vec<usize>, usize)> {
        let mut facets: Vec<Vec<usize>> = Vec::with_capacity(self.cell_count() * (self.dim + 1));
        for cell in self.cells() {
            for skip in 0..cell.len() {
                let f: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                facets.push(f);
            }
        }
        facets.sort_unstable();
        let mut out: Vec<(Vec<usize>, usize)> = Vec::new();
        for f in facets {
            match out.last_mut() {
                Some((last, n)) if *last == f => *n += 1,
                _ => out.push((f, 1)),
            }
        }
        out
    }

    fn compute_boundary_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for (f, n) in self.facet_counts() {
            if n == 1 {
                for v in f {
                    flags[v] = true;
                }
            }
        }
        flags
    }

    /// Edges, faces and boundary information.
    pub fn topology(&self) -> Topology {
        let pairs = local_pairs(self.dim + 1);
        let mut edges: Vec<[usize; 2]> = Vec::new();
        for cell in self.cells() {
            for &(i, j) in &pairs {
                edges.push([cell[i], cell[j]]);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let cell_edges = self
            .cells()
            .map(|cell| {
                pairs
                    .iter()
                    .map(|&(i, j)| edges.binary_search(&[cell[i], cell[j]]).expect("edge collected above"))
                    .collect()
            })
            .collect();
        let mut faces: Vec<[usize; 3]> = Vec::new();
        if self.dim == 3 {
            for cell in self.cells() {
                for skip in 0..4 {
                    let f: Vec<usize> = (0..4).filter(|&i| i != skip).map(|i| cell[i]).collect();
                    faces.push([f[0], f[1], f[2]]);
                }
            }
            faces.sort_unstable();
            faces.dedup();
        }
        let boundary_facets: Vec<Vec<usize>> = self
            .facet_counts()
            .into_iter()
            .filter(|(_, n)| *n == 1)
            .map(|(f, _)| f)
            .collect();
        let mut boundary_edge = vec![false; edges.len()];
        for f in &boundary_facets {
            for a in 0..f.len() {
                for b in (a + 1)..f.len() {
                    let e = edges.binary_search(&[f[a], f[b]]).expect("facet edge exists");
                    boundary_edge[e] = true;
                }
            }
        }
        Topology {
            edges,
            faces,
            cell_edges,
            boundary_edge,
            boundary_facets,
        }
    }
}

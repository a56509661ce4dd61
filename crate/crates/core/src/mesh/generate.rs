use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MeshError, Point, SimplicialMesh};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum DomainKind {
    UnitSquare,
    UnitDisk,
    Annulus { inner_radius: f64 },
    LShape,
    UnitCube,
}

impl DomainKind {
    pub const DEFAULT_INNER_RADIUS: f64 = 0.5;

    pub fn name(&self) -> &'static str {
        match self {
            Self::UnitSquare => "unit_square",
            Self::UnitDisk => "unit_disk",
            Self::Annulus { .. } => "annulus",
            Self::LShape => "l_shape",
            Self::UnitCube => "unit_cube",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::UnitCube => 3,
            _ => 2,
        }
    }

    /// Area or volume of the exact domain.
    pub fn exact_volume(&self) -> f64 {
        match self {
            Self::UnitSquare | Self::UnitCube => 1.0,
            Self::UnitDisk => PI,
            Self::Annulus { inner_radius } => PI * (1.0 - inner_radius * inner_radius),
            Self::LShape => 3.0,
        }
    }

    pub fn has_curved_boundary(&self) -> bool {
        matches!(self, Self::UnitDisk | Self::Annulus { .. })
    }
}

impl FromStr for DomainKind {
    type Err = MeshError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit_square" => Ok(Self::UnitSquare),
            "unit_disk" => Ok(Self::UnitDisk),
            "annulus" => Ok(Self::Annulus {
                inner_radius: Self::DEFAULT_INNER_RADIUS,
            }),
            "l_shape" => Ok(Self::LShape),
            "unit_cube" => Ok(Self::UnitCube),
            other => Err(MeshError::InvalidSpec(format!("unknown domain '{other}'"))),
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A test domain at a base resolution `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub resolution: usize,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, resolution: usize) -> Result<Self, MeshError> {
        let spec = Self { kind, resolution };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), MeshError> {
        if self.resolution < 1 {
            return Err(MeshError::InvalidSpec("resolution must be >= 1".into()));
        }
        if let DomainKind::Annulus { inner_radius } = self.kind {
            if !(inner_radius > 0.0 && inner_radius < 1.0) {
                return Err(MeshError::InvalidSpec(format!(
                    "inner radius {inner_radius} outside (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Generates the base mesh of a domain.
pub fn generate(spec: &DomainSpec) -> Result<SimplicialMesh, MeshError> {
    spec.validate()?;
    let k = spec.resolution;
    match spec.kind {
        DomainKind::UnitSquare => unit_square(k),
        DomainKind::UnitDisk => unit_disk(k),
        DomainKind::Annulus { inner_radius } => annulus(k, inner_radius),
        DomainKind::LShape => l_shape(k),
        DomainKind::UnitCube => unit_cube(k),
    }
}

/// Splits a grid square so that the diagonal points towards the nearest block
/// corner; corner cells then never have two boundary edges.
fn square_triangles(a: usize, b: usize, c: usize, d: usize, towards_ne: bool) -> [Vec<usize>; 2] {
    // a = (0,0), b = (1,0), c = (1,1), d = (0,1) corners of the square
    if towards_ne {
        [vec![a, b, c], vec![a, c, d]]
    } else {
        [vec![a, b, d], vec![b, c, d]]
    }
}

fn diagonal_towards_ne(local_i: usize, local_j: usize, k: usize) -> bool {
    (2 * local_i + 1 < k) == (2 * local_j + 1 < k)
}

fn unit_square(k: usize) -> Result<SimplicialMesh, MeshError> {
    let idx = |i: usize, j: usize| j * (k + 1) + i;
    let scale = k as f64;
    let mut vertices = Vec::with_capacity((k + 1) * (k + 1));
    for j in 0..=k {
        for i in 0..=k {
            vertices.push([i as f64 / scale, j as f64 / scale, 0.0]);
        }
    }
    let mut cells = Vec::with_capacity(2 * k * k);
    for j in 0..k {
        for i in 0..k {
            let ne = diagonal_towards_ne(i, j, k);
            cells.extend(square_triangles(
                idx(i, j),
                idx(i + 1, j),
                idx(i + 1, j + 1),
                idx(i, j + 1),
                ne,
            ));
        }
    }
    SimplicialMesh::new(2, vertices, cells)
}

fn l_shape(k: usize) -> Result<SimplicialMesh, MeshError> {
    // Grid on [-1,1]² with spacing 1/k, without the block [0,1]×[-1,0].
    let n = 2 * k;
    let removed = |i: usize, j: usize| i >= k && j < k;
    let mut index = vec![usize::MAX; (n + 1) * (n + 1)];
    let mut used = vec![false; (n + 1) * (n + 1)];
    for j in 0..n {
        for i in 0..n {
            if !removed(i, j) {
                for (di, dj) in [(0, 0), (1, 0), (1, 1), (0, 1)] {
                    used[(j + dj) * (n + 1) + i + di] = true;
                }
            }
        }
    }
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            if used[j * (n + 1) + i] {
                index[j * (n + 1) + i] = vertices.len();
                vertices.push([-1.0 + i as f64 / k as f64, -1.0 + j as f64 / k as f64, 0.0]);
            }
        }
    }
    let idx = |i: usize, j: usize| index[j * (n + 1) + i];
    let mut cells = Vec::with_capacity(6 * k * k);
    for j in 0..n {
        for i in 0..n {
            if removed(i, j) {
                continue;
            }
            let ne = diagonal_towards_ne(i % k, j % k, k);
            cells.extend(square_triangles(
                idx(i, j),
                idx(i + 1, j),
                idx(i + 1, j + 1),
                idx(i, j + 1),
                ne,
            ));
        }
    }
    SimplicialMesh::new(2, vertices, cells)
}

fn unit_cube(k: usize) -> Result<SimplicialMesh, MeshError> {
    let idx = |i: usize, j: usize, l: usize| (l * (k + 1) + j) * (k + 1) + i;
    let scale = k as f64;
    let mut vertices = Vec::with_capacity((k + 1).pow(3));
    for l in 0..=k {
        for j in 0..=k {
            for i in 0..=k {
                vertices.push([i as f64 / scale, j as f64 / scale, l as f64 / scale]);
            }
        }
    }
    // Kuhn subdivision: one tetrahedron per monotone lattice path through the cube.
    const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut cells = Vec::with_capacity(6 * k * k * k);
    for l in 0..k {
        for j in 0..k {
            for i in 0..k {
                for perm in PERMUTATIONS {
                    let mut at = [i, j, l];
                    let mut tet = vec![idx(at[0], at[1], at[2])];
                    for axis in perm {
                        at[axis] += 1;
                        tet.push(idx(at[0], at[1], at[2]));
                    }
                    cells.push(tet);
                }
            }
        }
    }
    SimplicialMesh::new(3, vertices, cells)
}

fn polar(r: f64, theta: f64) -> Point {
    [r * theta.cos(), r * theta.sin(), 0.0]
}

/// Triangulates the band between two closed rings of points, advancing by angle.
///
/// Ring positions are `t / n` turns; ties advance the outer ring first.
fn stitch_rings(inner: &[usize], outer: &[usize], cells: &mut Vec<Vec<usize>>) {
    let (n_in, n_out) = (inner.len(), outer.len());
    let (mut a, mut b) = (0usize, 0usize);
    while a < n_in || b < n_out {
        let advance_outer = if a == n_in {
            true
        } else if b == n_out {
            false
        } else {
            // (b+1)/n_out <= (a+1)/n_in, compared exactly
            (b + 1) * n_in <= (a + 1) * n_out
        };
        if advance_outer {
            cells.push(vec![inner[a % n_in], outer[b % n_out], outer[(b + 1) % n_out]]);
            b += 1;
        } else {
            cells.push(vec![inner[a % n_in], outer[b % n_out], inner[(a + 1) % n_in]]);
            a += 1;
        }
    }
}

fn unit_disk(k: usize) -> Result<SimplicialMesh, MeshError> {
    let mut vertices = vec![[0.0, 0.0, 0.0]];
    let mut rings: Vec<Vec<usize>> = vec![vec![0]];
    for j in 1..=k {
        let n = 6 * j;
        let r = j as f64 / k as f64;
        let ring: Vec<usize> = (0..n)
            .map(|t| {
                vertices.push(polar(r, 2.0 * PI * t as f64 / n as f64));
                vertices.len() - 1
            })
            .collect();
        rings.push(ring);
    }
    let mut cells = Vec::with_capacity(6 * k * k);
    for t in 0..6 {
        cells.push(vec![0, rings[1][t], rings[1][(t + 1) % 6]]);
    }
    for j in 2..=k {
        stitch_rings(&rings[j - 1], &rings[j], &mut cells);
    }
    Ok(SimplicialMesh::new(2, vertices, cells)?.with_circles(vec![1.0]))
}

/// Points per ring for the annulus, chosen so cells stay close to isotropic.
pub(crate) fn annulus_ring_points(k: usize, inner_radius: f64) -> usize {
    let dr = (1.0 - inner_radius) / k as f64;
    let sectors = (PI * (1.0 + inner_radius) / (6.0 * dr)).ceil().max(1.0) as usize;
    6 * sectors
}

fn annulus(k: usize, inner_radius: f64) -> Result<SimplicialMesh, MeshError> {
    let n = annulus_ring_points(k, inner_radius);
    let mut vertices = Vec::with_capacity(n * (k + 1));
    for j in 0..=k {
        let r = inner_radius + (1.0 - inner_radius) * j as f64 / k as f64;
        for t in 0..n {
            vertices.push(polar(r, 2.0 * PI * t as f64 / n as f64));
        }
    }
    let idx = |j: usize, t: usize| j * n + t % n;
    let mut cells = Vec::with_capacity(2 * n * k);
    for j in 0..k {
        for t in 0..n {
            let (a, b, c, d) = (idx(j, t), idx(j, t + 1), idx(j + 1, t + 1), idx(j + 1, t));
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    Ok(SimplicialMesh::new(2, vertices, cells)?.with_circles(vec![inner_radius, 1.0]))
}

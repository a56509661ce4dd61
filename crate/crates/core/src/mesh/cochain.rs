use std::collections::HashMap;

use super::SimplicialMesh;

/// Prime used for exact ranks.
pub const BETTI_PRIME: u64 = 1_000_003;

/// Row-major sparse integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseIntMatrix {
    pub nrows: usize,
    pub ncols: usize,
    /// Per row, `(column, value)` sorted by column, no zeros.
    pub rows: Vec<Vec<(usize, i64)>>,
}

impl SparseIntMatrix {
    fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: vec![Vec::new(); nrows],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.rows[r]
            .binary_search_by_key(&c, |&(col, _)| col)
            .map(|i| self.rows[r][i].1)
            .unwrap_or(0)
    }

    /// Exact product `self · rhs`.
    pub fn mul(&self, rhs: &SparseIntMatrix) -> SparseIntMatrix {
        assert_eq!(self.ncols, rhs.nrows, "inner dimensions differ");
        let mut out = SparseIntMatrix::new(self.nrows, rhs.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            let mut acc: HashMap<usize, i64> = HashMap::new();
            for &(k, a) in row {
                for &(c, b) in &rhs.rows[k] {
                    *acc.entry(c).or_insert(0) += a * b;
                }
            }
            let mut entries: Vec<(usize, i64)> = acc.into_iter().filter(|&(_, v)| v != 0).collect();
            entries.sort_unstable();
            out.rows[r] = entries;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.is_empty())
    }

    /// Rank over the prime field `GF(prime)`.
    pub fn rank_mod(&self, prime: u64) -> usize {
        let to_field = |v: i64| v.rem_euclid(prime as i64) as u64;
        let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
        for row in &self.rows {
            let mut r: Vec<(usize, u64)> = row
                .iter()
                .map(|&(c, v)| (c, to_field(v)))
                .filter(|&(_, v)| v != 0)
                .collect();
            while let Some(&(lead, value)) = r.first() {
                match pivots.get(&lead) {
                    Some(p) => {
                        // r -= (value / p_lead) · p, with p normalized to p_lead = 1
                        r = axpy_mod(&r, p, prime - value, prime);
                    }
                    None => {
                        let inv = pow_mod(value, prime - 2, prime);
                        let normalized = r.iter().map(|&(c, v)| (c, v * inv % prime)).collect();
                        pivots.insert(lead, normalized);
                        break;
                    }
                }
            }
        }
        pivots.len()
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// `x + a·y` over `GF(m)`, sparse rows sorted by column.
fn axpy_mod(x: &[(usize, u64)], y: &[(usize, u64)], a: u64, m: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let take_x = j == y.len() || (i < x.len() && x[i].0 < y[j].0);
        let take_y = i == x.len() || (j < y.len() && y[j].0 < x[i].0);
        let (c, v) = if take_x {
            i += 1;
            x[i - 1]
        } else if take_y {
            j += 1;
            (y[j - 1].0, a * y[j - 1].1 % m)
        } else {
            i += 1;
            j += 1;
            (x[i - 1].0, (x[i - 1].1 + a * y[j - 1].1) % m)
        };
        if v != 0 {
            out.push((c, v));
        }
    }
    out
}

/// Signed incidence matrices `d_k: C^k → C^{k+1}` of a mesh.
#[derive(Debug, Clone)]
pub struct CochainComplex {
    /// Simplex counts `n_0, …, n_dim`.
    pub counts: Vec<usize>,
    /// `d[k]` maps k-cochains to (k+1)-cochains, `k = 0..dim`.
    pub d: Vec<SparseIntMatrix>,
}

impl CochainComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &n)| if k % 2 == 0 { n as i64 } else { -(n as i64) })
            .sum()
    }

    /// True when every composition `d_{k+1} · d_k` vanishes exactly.
    pub fn is_complex(&self) -> bool {
        self.d.windows(2).all(|w| w[1].mul(&w[0]).is_zero())
    }
}

/// Boundary coefficients of a sorted simplex: face without vertex `i` has sign `(−1)^i`.
fn incidence(simplices: &[Vec<usize>], faces_of_lower: &dyn Fn(&[usize]) -> usize, n_lower: usize) -> SparseIntMatrix {
    let mut m = SparseIntMatrix::new(simplices.len(), n_lower);
    for (r, s) in simplices.iter().enumerate() {
        let mut row: Vec<(usize, i64)> = (0..s.len())
            .map(|skip| {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if skip % 2 == 0 { 1 } else { -1 };
                (faces_of_lower(&face), sign)
            })
            .collect();
        row.sort_unstable();
        m.rows[r] = row;
    }
    m
}

/// Incidence matrices with orientation induced by the global vertex ordering.
pub fn cochain_complex(mesh: &SimplicialMesh) -> CochainComplex {
    let topo = mesh.topology();
    let nv = mesh.vertex_count();
    let edges: Vec<Vec<usize>> = topo.edges.iter().map(|e| e.to_vec()).collect();
    let d0 = incidence(&edges, &|f: &[usize]| f[0], nv);
    let edge_index = |f: &[usize]| topo.edges.binary_search(&[f[0], f[1]]).expect("face edge exists");
    let cells: Vec<Vec<usize>> = mesh.cells().map(|c| c.to_vec()).collect();
    if mesh.dim() == 2 {
        let d1 = incidence(&cells, &edge_index, edges.len());
        CochainComplex {
            counts: vec![nv, edges.len(), cells.len()],
            d: vec![d0, d1],
        }
    } else {
        let faces: Vec<Vec<usize>> = topo.faces.iter().map(|f| f.to_vec()).collect();
        let d1 = incidence(&faces, &edge_index, edges.len());
        let face_index = |f: &[usize]| topo.faces.binary_search(&[f[0], f[1], f[2]]).expect("cell face exists");
        let d2 = incidence(&cells, &face_index, faces.len());
        CochainComplex {
            counts: vec![nv, edges.len(), faces.len(), cells.len()],
            d: vec![d0, d1, d2],
        }
    }
}

/// Betti numbers over `GF(prime)`.
pub fn betti_numbers_mod(mesh: &SimplicialMesh, prime: u64) -> Vec<usize> {
    let complex = cochain_complex(mesh);
    let ranks: Vec<usize> = complex.d.iter().map(|d| d.rank_mod(prime)).collect();
    (0..complex.counts.len())
        .map(|k| {
            let rank_out = ranks.get(k).copied().unwrap_or(0);
            let rank_in = if k == 0 { 0 } else { ranks[k - 1] };
            complex.counts[k] - rank_out - rank_in
        })
        .collect()
}

/// `b_k = dim ker d_k − rank d_{k−1}`, ranks over `GF(1_000_003)`.
pub fn betti_numbers(mesh: &SimplicialMesh) -> Vec<usize> {
    betti_numbers_mod(mesh, BETTI_PRIME)
}

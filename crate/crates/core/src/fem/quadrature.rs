use super::FemError;

/// A quadrature rule on the reference simplex with vertices `0, e_1, …, e_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Barycentric coordinates, `dim + 1` per point.
    pub points: Vec<Vec<f64>>,
    /// Weights summing to the reference volume `1/dim!`.
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn reference_volume(&self) -> f64 {
        1.0 / factorial(self.dim)
    }
}

/// Largest degree served by [`quadrature`].
pub const MAX_ASSEMBLY_DEGREE: usize = 4;

/// A rule exact for polynomials of the requested degree, `degree ≤ 4`.
pub fn quadrature(dim: usize, degree: usize) -> Result<QuadratureRule, FemError> {
    if degree > MAX_ASSEMBLY_DEGREE {
        return Err(FemError::UnsupportedDegree { degree });
    }
    grundmann_moller(dim, degree / 2)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// All `β ∈ ℕ^parts` with `|β| = total`, in lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Grundmann–Möller rule of index `s`, exact to degree `2s + 1` on the
/// `dim`-simplex. Some weights are negative for `s ≥ 1`.
pub fn grundmann_moller(dim: usize, s: usize) -> Result<QuadratureRule, FemError> {
    if dim == 0 {
        return Err(FemError::DimensionMismatch("simplex dimension must be positive".into()));
    }
    let d = 2 * s + 1;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for i in 0..=s {
        let denom = (d + dim - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * denom.powi(d as i32) / (2f64.powi(2 * s as i32) * factorial(i) * factorial(d + dim - i));
        for beta in compositions(s - i, dim + 1) {
            points.push(beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect());
            weights.push(w);
        }
    }
    Ok(QuadratureRule {
        dim,
        points,
        weights,
        degree: d,
    })
}

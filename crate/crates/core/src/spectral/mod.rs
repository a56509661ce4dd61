//! Dense spectral kernels shared by every other module.
//!
//! All constants computed in this crate are extreme nonzero eigenvalues of
//! symmetric-definite pencils `A v = λ M v`. The routines here solve such
//! pencils densely via a Cholesky reduction of `M`, extract orthonormal null
//! spaces, and build `G`-orthonormal coordinates on the range of a positive
//! semi-definite form. Zero classification is always relative, controlled by a
//! [`RankPolicy`].

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};
use thiserror::Error;

use crate::scalar::Real;


#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not symmetric (max deviation {deviation:.3e})")]
    NotSymmetric { deviation: f64 },
    #[error("mass matrix is not positive definite (Cholesky failed)")]
    NotPositiveDefinite,
    #[error("matrix is not positive semi-definite (eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("no eigenvalue above the zero threshold")]
    AllZero,
    #[error("spectrum has an eigenvalue {value:.3e} below the negative zero threshold")]
    Indefinite { value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("relative tolerance {0} outside (0, 1)")]
    InvalidTolerance(f64),
}

/// Relative threshold below which singular values and eigenvalues count as zero.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RankPolicy {
    relative_tolerance: f64,
}

impl RankPolicy {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(relative_tolerance: f64) -> Result<Self, SpectralError> {
        if relative_tolerance > 0.0 && relative_tolerance < 1.0 {
            Ok(Self { relative_tolerance })
        } else {
            Err(SpectralError::InvalidTolerance(relative_tolerance))
        }
    }

    pub fn relative_tolerance(&self) -> f64 {
        self.relative_tolerance
    }

    fn tol<T: Real>(&self) -> T {
        T::lit(self.relative_tolerance)
    }
}

impl Default for RankPolicy {
    fn default() -> Self {
        Self {
            relative_tolerance: Self::DEFAULT_TOLERANCE,
        }
    }
}

/// Largest absolute entry of `a - aᵀ`.
pub fn symmetry_deviation<T: Real>(a: &DMatrix<T>) -> T {
    let n = a.nrows();
    let mut dev = T::zero();
    for j in 0..n {
        for i in (j + 1)..n {
            dev = dev.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    dev
}

pub(crate) fn max_abs<T: Real>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub(crate) fn check_symmetric<T: Real>(a: &DMatrix<T>) -> Result<(), SpectralError> {
    if !a.is_square() {
        return Err(SpectralError::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let dev = symmetry_deviation(a);
    if dev > T::symmetry_tolerance() * (T::one() + max_abs(a)) {
        return Err(SpectralError::NotSymmetric {
            deviation: dev.as_f64(),
        });
    }
    Ok(())
}

pub(crate) fn symmetrized<T: Real>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.transpose()) * T::lit(0.5)
}

/// Makes the largest-magnitude entry of every column positive (first one on ties).
pub fn normalize_column_signs<T: Real>(v: &mut DMatrix<T>) {
    for mut col in v.column_iter_mut() {
        let mut best = T::zero();
        let mut sign_negative = false;
        for &x in col.iter() {
            if x.abs() > best {
                best = x.abs();
                sign_negative = x < T::zero();
            }
        }
        if sign_negative {
            col.neg_mut();
        }
    }
}

/// A symmetric-definite pencil `(A, M)`.
#[derive(Debug, Clone)]
pub struct DensePencil<T: Real> {
    a: DMatrix<T>,
    m: DMatrix<T>,
}

impl<T: Real> DensePencil<T> {
    /// Validates symmetry of both matrices. Positive definiteness of `M` is
    /// checked by [`solve_pencil`].
    pub fn new(a: DMatrix<T>, m: DMatrix<T>) -> Result<Self, SpectralError> {
        check_symmetric(&a)?;
        check_symmetric(&m)?;
        if a.shape() != m.shape() {
            return Err(SpectralError::DimensionMismatch(format!(
                "pencil sides {:?} and {:?}",
                a.shape(),
                m.shape()
            )));
        }
        Ok(Self { a, m })
    }

    pub fn a(&self) -> &DMatrix<T> {
        &self.a
    }

    pub fn m(&self) -> &DMatrix<T> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

/// Ascending eigenvalues with `M`-orthonormal eigenvectors stored column-wise.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Real> {
    pub eigenvalues: DVector<T>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: Real> Spectrum<T> {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> Option<T> {
        self.eigenvalues.iter().last().copied()
    }

    /// Max over columns of `‖Av − λMv‖ / ((‖A‖ + |λ|‖M‖)‖v‖)`.
    pub fn residual(&self, pencil: &DensePencil<T>) -> T {
        let a_norm = pencil.a.norm();
        let m_norm = pencil.m.norm();
        let av = &pencil.a * &self.eigenvectors;
        let mv = &pencil.m * &self.eigenvectors;
        let mut worst = T::zero();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let r = (av.column(j) - mv.column(j) * lambda).norm();
            let scale = (a_norm + lambda.abs() * m_norm) * self.eigenvectors.column(j).norm();
            if scale > T::zero() {
                worst = worst.max(r / scale);
            }
        }
        worst
    }

    /// Largest entry of `|VᵀMV − I|`.
    pub fn orthonormality_error(&self, pencil: &DensePencil<T>) -> T {
        let g = self.eigenvectors.transpose() * &pencil.m * &self.eigenvectors;
        let n = g.nrows();
        max_abs(&(g - DMatrix::identity(n, n)))
    }
}

/// Solves `A v = λ M v` for the full spectrum via `M = LLᵀ`.
pub fn solve_pencil<T: Real>(pencil: &DensePencil<T>) -> Result<Spectrum<T>, SpectralError> {
    let n = pencil.dim();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: DVector::zeros(0),
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let chol = Cholesky::new(pencil.m.clone()).ok_or(SpectralError::NotPositiveDefinite)?;
    let l = chol.l();
    // L⁻¹ A L⁻ᵀ, formed by two lower-triangular solves.
    let mut half = pencil.a.clone();
    if !l.solve_lower_triangular_mut(&mut half) {
        return Err(SpectralError::NotPositiveDefinite);
    }
    let mut reduced = half.transpose();
    if !l.solve_lower_triangular_mut(&mut reduced) {
        return Err(SpectralError::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new(symmetrized(&reduced));
    let lt = l.transpose();
    let mut vectors = eig.eigenvectors;
    if !lt.solve_upper_triangular_mut(&mut vectors) {
        return Err(SpectralError::NotPositiveDefinite);
    }
    Ok(sorted_spectrum(eig.eigenvalues, vectors))
}

fn sorted_spectrum<T: Real>(values: DVector<T>, vectors: DMatrix<T>) -> Spectrum<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite eigenvalues"));
    let eigenvalues = DVector::from_iterator(order.len(), order.iter().map(|&i| values[i]));
    let mut eigenvectors = vectors.select_columns(&order);
    normalize_column_signs(&mut eigenvectors);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// First eigenvalue above the zero threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallestNonzero<T> {
    pub value: T,
    pub index: usize,
    pub zero_count: usize,
}

/// Eigenvalues `≤ tol · max(λ_max, 1)` are zero; returns the first one above.
///
/// `eigenvalues` must be ascending.
pub fn smallest_nonzero<T: Real>(eigenvalues: &[T], policy: &RankPolicy) -> Result<SmallestNonzero<T>, SpectralError> {
    let lambda_max = *eigenvalues.last().ok_or(SpectralError::AllZero)?;
    let threshold = policy.tol::<T>() * lambda_max.max(T::one());
    if let Some(&low) = eigenvalues.iter().find(|&&x| x < -threshold) {
        return Err(SpectralError::Indefinite { value: low.as_f64() });
    }
    let index = eigenvalues
        .iter()
        .position(|&x| x > threshold)
        .ok_or(SpectralError::AllZero)?;
    Ok(SmallestNonzero {
        value: eigenvalues[index],
        index,
        zero_count: index,
    })
}

/// Orthonormal basis (columns) of the null space of an `m × n` matrix.
///
/// Singular values `≤ tol · σ_max` count as zero. A full-rank input yields an
/// `n × 0` matrix.
pub fn orthonormal_null_space<T: Real>(matrix: &DMatrix<T>, policy: &RankPolicy) -> DMatrix<T> {
    let (m, n) = matrix.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the SVD returns all n right singular vectors.
    let padded = if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(matrix);
        p
    } else {
        matrix.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma = &svd.singular_values;
    let sigma_max = sigma.iter().fold(T::zero(), |a, &b| a.max(b));
    let threshold = policy.tol::<T>() * sigma_max;
    let mut null: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] <= threshold).collect();
    null.sort_by(|&i, &j| sigma[i].partial_cmp(&sigma[j]).expect("finite singular values"));
    let mut basis = DMatrix::zeros(n, null.len());
    for (c, &i) in null.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    normalize_column_signs(&mut basis);
    basis
}

/// Numerical rank under the same singular value rule as [`orthonormal_null_space`].
pub fn numerical_rank<T: Real>(matrix: &DMatrix<T>, policy: &RankPolicy) -> usize {
    matrix.ncols() - orthonormal_null_space(matrix, policy).ncols()
}

/// Returns `W` with `WᵀGW = I_k` whose columns span the range of the PSD form `G`.
pub fn reduce_to_range<T: Real>(g: &DMatrix<T>, policy: &RankPolicy) -> Result<DMatrix<T>, SpectralError> {
    check_symmetric(g)?;
    let n = g.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrized(g));
    let lambda_max = eig.eigenvalues.iter().fold(T::zero(), |a, &b| a.max(b));
    let threshold = policy.tol::<T>() * lambda_max;
    if let Some(&low) = eig.eigenvalues.iter().find(|&&x| x < -threshold) {
        return Err(SpectralError::NotPsd {
            min_eigenvalue: low.as_f64(),
        });
    }
    if lambda_max <= T::zero() {
        return Ok(DMatrix::zeros(n, 0));
    }
    let mut kept: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > threshold).collect();
    kept.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("finite eigenvalues")
    });
    let mut w = DMatrix::zeros(n, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        let scale = T::one() / eig.eigenvalues[i].sqrt();
        w.set_column(c, &(eig.eigenvectors.column(i) * scale));
    }
    normalize_column_signs(&mut w);
    Ok(w)
}

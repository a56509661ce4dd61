//! Finite-dimensional operator pairs `(B, R)` on Hilbert spaces `X, Y, Z`.
//!
//! A pair is described by three quadratic forms on `X`:
//!
//! * `gram_x`: the inner product of `X`,
//! * `d_form`: `u ↦ ‖Bu‖²_Y`, i.e. `B*B` in `X` coordinates,
//! * `c_form`: `u ↦ ‖Ru‖²_Z`, i.e. `R*R`,
//!
//! subject to the Pythagoras identity `gram_x = d_form + c_form`. `Y` and `Z`
//! are represented as the ranges of `B` and `R` with their induced inner
//! products, through `G`-orthonormal bases returned by
//! [`reduce_to_range`]. In these coordinates every `h ∈ Y` automatically lies
//! in `(ker B*)^⊥`, so no kernel has to be computed explicitly.
//!
//! Two constants are computed independently:
//!
//! * the Babuška–Aziz constant `C = 1 / λ_min⁺(d_form, gram_x)`,
//! * the Friedrichs–Velte constant `Γ = sup ‖h‖² / ‖g‖²` over conjugate pairs
//!   `B*h = R*g`,
//!
//! and in exact arithmetic they satisfy `C = Γ + 1`.
//!
//! In finite dimensions the supremum defining `Γ` is attained and the
//! maximizer is reported. It is a property of the discrete pair only and says
//! nothing about attainment for a continuum problem.

mod random_pair;

pub use random_pair::random_compatible_pair;

use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::scalar::Real;
use crate::spectral::{
    check_symmetric, orthonormal_null_space, reduce_to_range, smallest_nonzero, solve_pencil, DensePencil, RankPolicy,
    SpectralError,
};


/// Condition number estimate above which a pair is flagged as ill-conditioned.
pub const CONDITIONING_FLAG: f64 = 1e10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairError {
    #[error("gram_x differs from d_form + c_form by {deviation:.3e} (relative Frobenius)")]
    CompatibilityViolated { deviation: f64 },
    #[error("gram_x is not positive definite")]
    NotSpd,
    #[error("singular gram matrix")]
    SingularGram,
    #[error("zero vector")]
    ZeroVector,
    #[error("dimension error: {0}")]
    DimensionError(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// The abstract triple `(X, B, R)` in Gram-form coordinates.
#[derive(Debug, Clone)]
pub struct OperatorPair<T: Real> {
    gram_x: DMatrix<T>,
    d_form: DMatrix<T>,
    c_form: DMatrix<T>,
    y_basis: DMatrix<T>,
    z_basis: DMatrix<T>,
    gram_cholesky: Cholesky<T, nalgebra::Dyn>,
    compatibility_deviation: T,
    condition_estimate: T,
}

/// Validates the three forms and computes the range bases.
pub fn make_pair<T: Real>(
    gram_x: DMatrix<T>,
    d_form: DMatrix<T>,
    c_form: DMatrix<T>,
    policy: &RankPolicy,
) -> Result<OperatorPair<T>, PairError> {
    let n = gram_x.nrows();
    if d_form.shape() != (n, n) || c_form.shape() != (n, n) || gram_x.ncols() != n {
        return Err(PairError::DimensionError(format!(
            "forms of shapes {:?}, {:?}, {:?}",
            gram_x.shape(),
            d_form.shape(),
            c_form.shape()
        )));
    }
    if n == 0 {
        return Err(PairError::DimensionError("empty space X".into()));
    }
    check_symmetric(&gram_x)?;
    check_symmetric(&d_form)?;
    check_symmetric(&c_form)?;

    let gram_norm = gram_x.norm();
    let deviation = (&gram_x - &d_form - &c_form).norm() / gram_norm;
    if !(deviation <= T::compatibility_tolerance()) {
        return Err(PairError::CompatibilityViolated {
            deviation: deviation.as_f64(),
        });
    }
    let gram_cholesky = Cholesky::new(gram_x.clone()).ok_or(PairError::NotSpd)?;
    let diag = gram_cholesky.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((T::max_value().unwrap(), T::zero()), |(lo, hi), &x| {
        (lo.min(x.abs()), hi.max(x.abs()))
    });
    let ratio = hi / lo;
    let y_basis = reduce_to_range(&d_form, policy)?;
    let z_basis = reduce_to_range(&c_form, policy)?;
    Ok(OperatorPair {
        gram_x,
        d_form,
        c_form,
        y_basis,
        z_basis,
        gram_cholesky,
        compatibility_deviation: deviation,
        condition_estimate: ratio * ratio,
    })
}

impl<T: Real> OperatorPair<T> {
    pub fn dim_x(&self) -> usize {
        self.gram_x.nrows()
    }

    pub fn dim_y(&self) -> usize {
        self.y_basis.ncols()
    }

    pub fn dim_z(&self) -> usize {
        self.z_basis.ncols()
    }

    pub fn gram_x(&self) -> &DMatrix<T> {
        &self.gram_x
    }

    pub fn d_form(&self) -> &DMatrix<T> {
        &self.d_form
    }

    pub fn c_form(&self) -> &DMatrix<T> {
        &self.c_form
    }

    pub fn y_basis(&self) -> &DMatrix<T> {
        &self.y_basis
    }

    pub fn z_basis(&self) -> &DMatrix<T> {
        &self.z_basis
    }

    /// `‖gram_x − d_form − c_form‖_F / ‖gram_x‖_F`.
    pub fn compatibility_deviation(&self) -> T {
        self.compatibility_deviation
    }

    /// Squared ratio of extreme Cholesky pivots of `gram_x`, a lower bound on
    /// its condition number.
    pub fn condition_estimate(&self) -> T {
        self.condition_estimate
    }

    pub fn ill_conditioned(&self) -> bool {
        self.condition_estimate.as_f64() > CONDITIONING_FLAG
    }

    /// `B*h` in `X′` coordinates for `h` in `Y` coordinates.
    pub fn b_adjoint(&self, h: &DVector<T>) -> DVector<T> {
        &self.d_form * (&self.y_basis * h)
    }

    /// `R*g` in `X′` coordinates for `g` in `Z` coordinates.
    pub fn r_adjoint(&self, g: &DVector<T>) -> DVector<T> {
        &self.c_form * (&self.z_basis * g)
    }

    /// `Y` coordinates of `Bu`.
    pub fn apply_b(&self, u: &DVector<T>) -> DVector<T> {
        self.y_basis.transpose() * (&self.d_form * u)
    }

    /// `Z` coordinates of `Ru`.
    pub fn apply_r(&self, u: &DVector<T>) -> DVector<T> {
        self.z_basis.transpose() * (&self.c_form * u)
    }

    /// Solves `gram_x · u = rhs`.
    pub fn solve_gram(&self, rhs: &DVector<T>) -> DVector<T> {
        self.gram_cholesky.solve(rhs)
    }

    /// `‖u‖²_X`.
    pub fn norm_x_squared(&self, u: &DVector<T>) -> T {
        u.dot(&(&self.gram_x * u))
    }
}

/// Babuška–Aziz constant with its extremal direction.
#[derive(Debug, Clone)]
pub struct BabuskaAziz<T: Real> {
    pub constant: T,
    /// `dim ker B`.
    pub zero_count: usize,
    /// Extremal `u ∈ X` for `λ_min⁺`, normalized in `X`.
    pub extremal_u: DVector<T>,
    /// `Y` coordinates of `B·extremal_u`: the hardest `q` for the inf-sup condition.
    pub extremal_q: DVector<T>,
    /// Leading eigenvalues of the pencil `(d_form, gram_x)`.
    pub spectrum_head: Vec<T>,
}

/// `C = 1 / λ_min⁺` of the pencil `(d_form, gram_x)`.
pub fn babuska_aziz_constant<T: Real>(
    pair: &OperatorPair<T>,
    policy: &RankPolicy,
) -> Result<BabuskaAziz<T>, PairError> {
    let pencil = DensePencil::new(pair.d_form.clone(), pair.gram_x.clone())?;
    let spectrum = solve_pencil(&pencil)?;
    let s = smallest_nonzero(spectrum.eigenvalues.as_slice(), policy)?;
    let extremal_u: DVector<T> = spectrum.eigenvectors.column(s.index).into_owned();
    let extremal_q = pair.apply_b(&extremal_u);
    Ok(BabuskaAziz {
        constant: T::one() / s.value,
        zero_count: s.zero_count,
        extremal_u,
        extremal_q,
        spectrum_head: head(spectrum.eigenvalues.as_slice(), s.index),
    })
}

fn head<T: Real>(values: &[T], from: usize) -> Vec<T> {
    values.iter().skip(from).take(SPECTRUM_HEAD).copied().collect()
}

const SPECTRUM_HEAD: usize = 6;

/// Result of the direct Friedrichs–Velte computation.
#[derive(Debug, Clone)]
pub struct FriedrichsVelte<T: Real> {
    pub gamma: T,
    /// Maximizing `h` in `Y` coordinates.
    pub h: DVector<T>,
    /// Its conjugate `g` in `Z` coordinates.
    pub g: DVector<T>,
    /// Dimension of the space of conjugate pairs.
    pub constraint_dim: usize,
    /// Set when only `(0, 0)` is conjugate; `gamma` is then `0`.
    pub empty_constraint_space: bool,
    /// Largest eigenvalues of the ratio pencil, descending.
    pub spectrum_head: Vec<T>,
}

/// `Γ = sup ‖h‖²_Y / ‖g‖²_Z` over all `(h, g)` with `B*h = R*g`.
pub fn friedrichs_velte_direct<T: Real>(
    pair: &OperatorPair<T>,
    policy: &RankPolicy,
) -> Result<FriedrichsVelte<T>, PairError> {
    let (n, ky, kz) = (pair.dim_x(), pair.dim_y(), pair.dim_z());
    if ky == 0 || kz == 0 {
        return Err(PairError::DimensionError(format!(
            "Friedrichs-Velte needs nontrivial B and R (dim Y = {ky}, dim Z = {kz})"
        )));
    }
    let mut constraint = DMatrix::zeros(n, ky + kz);
    constraint
        .view_mut((0, 0), (n, ky))
        .copy_from(&(&pair.d_form * &pair.y_basis));
    constraint
        .view_mut((0, ky), (n, kz))
        .copy_from(&(-(&pair.c_form * &pair.z_basis)));
    let w = orthonormal_null_space(&constraint, policy);
    let k = w.ncols();
    if k == 0 {
        return Ok(FriedrichsVelte {
            gamma: T::zero(),
            h: DVector::zeros(ky),
            g: DVector::zeros(kz),
            constraint_dim: 0,
            empty_constraint_space: true,
            spectrum_head: Vec::new(),
        });
    }
    let wh = w.rows(0, ky);
    let wg = w.rows(ky, kz);
    let numerator = wh.transpose() * wh;
    let denominator = wg.transpose() * wg;
    let spectrum = solve_pencil(&DensePencil::new(
        crate::spectral::symmetrized(&numerator),
        crate::spectral::symmetrized(&denominator),
    )?)?;
    let top = k - 1;
    let coeffs = spectrum.eigenvectors.column(top);
    let h = wh * coeffs;
    let g = wg * coeffs;
    let spectrum_head = spectrum.eigenvalues.iter().rev().take(SPECTRUM_HEAD).copied().collect();
    Ok(FriedrichsVelte {
        gamma: spectrum.eigenvalues[top].max(T::zero()),
        h,
        g,
        constraint_dim: k,
        empty_constraint_space: false,
        spectrum_head,
    })
}

/// Both constants side by side.
#[derive(Debug, Clone)]
pub struct IdentityReport<T: Real> {
    pub c_constant: T,
    pub gamma_direct: T,
    /// `|C − Γ − 1| / C`.
    pub deviation: T,
    pub zero_count_b: usize,
    pub constraint_dim: usize,
    pub empty_constraint_space: bool,
    pub ba_spectrum_head: Vec<T>,
    pub fv_spectrum_head: Vec<T>,
    pub ill_conditioned: bool,
}

/// Runs [`babuska_aziz_constant`] and [`friedrichs_velte_direct`] independently.
pub fn verify_identity<T: Real>(pair: &OperatorPair<T>, policy: &RankPolicy) -> Result<IdentityReport<T>, PairError> {
    let ba = babuska_aziz_constant(pair, policy)?;
    let fv = friedrichs_velte_direct(pair, policy)?;
    let deviation = (ba.constant - fv.gamma - T::one()).abs() / ba.constant;
    Ok(IdentityReport {
        c_constant: ba.constant,
        gamma_direct: fv.gamma,
        deviation,
        zero_count_b: ba.zero_count,
        constraint_dim: fv.constraint_dim,
        empty_constraint_space: fv.empty_constraint_space,
        ba_spectrum_head: ba.spectrum_head,
        fv_spectrum_head: fv.spectrum_head,
        ill_conditioned: pair.ill_conditioned(),
    })
}

/// The objects `u, q = Bu, g = Ru, h = p − q` built from a datum `p ∈ Y`.
#[derive(Debug, Clone)]
pub struct ConjugateTriple<T: Real> {
    pub p: DVector<T>,
    pub u: DVector<T>,
    pub q: DVector<T>,
    pub g: DVector<T>,
    pub h: DVector<T>,
}

/// Residuals of the relations a [`ConjugateTriple`] satisfies, all relative.
#[derive(Debug, Clone, Copy)]
pub struct TripleResiduals<T> {
    /// `⟨p,q⟩` vs `‖u‖²_X`.
    pub energy: T,
    /// `‖u‖²_X` vs `‖q‖² + ‖g‖²`.
    pub pythagoras: T,
    /// `‖g‖²` vs `⟨p − q, q⟩`.
    pub g_norm: T,
    /// `‖B*h − R*g‖ / (‖B*h‖ + ‖R*g‖ + ‖B*p‖)`; `h` may vanish when `B` is onto.
    pub conjugacy: T,
}

impl<T: Real> TripleResiduals<T> {
    pub fn max(&self) -> T {
        self.energy.max(self.pythagoras).max(self.g_norm).max(self.conjugacy)
    }
}

fn rel_gap<T: Real>(a: T, b: T, scale: T) -> T {
    (a - b).abs() / scale
}

impl<T: Real> ConjugateTriple<T> {
    pub fn residuals(&self, pair: &OperatorPair<T>) -> TripleResiduals<T> {
        let pq = self.p.dot(&self.q);
        let uu = pair.norm_x_squared(&self.u);
        let qq = self.q.norm_squared();
        let gg = self.g.norm_squared();
        let scale = self.p.norm_squared();
        let bh = pair.b_adjoint(&self.h);
        let rg = pair.r_adjoint(&self.g);
        let conj_scale = bh.norm() + rg.norm() + pair.b_adjoint(&self.p).norm();
        let conjugacy = if conj_scale > T::zero() {
            (&bh - &rg).norm() / conj_scale
        } else {
            T::zero()
        };
        if scale == T::zero() {
            return TripleResiduals {
                energy: uu,
                pythagoras: qq + gg,
                g_norm: gg,
                conjugacy,
            };
        }
        TripleResiduals {
            energy: rel_gap(pq, uu, scale),
            pythagoras: rel_gap(uu, qq + gg, scale),
            g_norm: rel_gap(gg, (&self.p - &self.q).dot(&self.q), scale),
            conjugacy,
        }
    }
}

/// Solves `⟨u, v⟩_X = ⟨p, Bv⟩_Y` for all `v` and forms the conjugate triple.
pub fn conjugate_decompose<T: Real>(pair: &OperatorPair<T>, p: &DVector<T>) -> Result<ConjugateTriple<T>, PairError> {
    if p.len() != pair.dim_y() {
        return Err(PairError::DimensionError(format!(
            "p has length {} but dim Y = {}",
            p.len(),
            pair.dim_y()
        )));
    }
    let u = pair.solve_gram(&pair.b_adjoint(p));
    if u.iter().any(|x| !x.is_finite()) {
        return Err(PairError::SingularGram);
    }
    let q = pair.apply_b(&u);
    let g = pair.apply_r(&u);
    let h = p - &q;
    Ok(ConjugateTriple {
        p: p.clone(),
        u,
        q,
        g,
        h,
    })
}

/// `sup_v ⟨q, Bv⟩ / (‖v‖_X ‖q‖_Y)` for `q` in `Y` coordinates.
pub fn infsup_value<T: Real>(pair: &OperatorPair<T>, q: &DVector<T>) -> Result<T, PairError> {
    let norm = q.norm();
    if norm == T::zero() {
        return Err(PairError::ZeroVector);
    }
    let a = pair.b_adjoint(q);
    let x = pair.solve_gram(&a);
    Ok(a.dot(&x).max(T::zero()).sqrt() / norm)
}

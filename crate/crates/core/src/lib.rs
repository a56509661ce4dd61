//! Babuška–Aziz (inf-sup) and Friedrichs–Velte constants of operator pairs,
//! from abstract finite-dimensional pairs down to de Rham finite element
//! discretizations on simplicial meshes.
//!
//! The dense kernels in [`spectral`] and [`hilbert_pair`] are generic over
//! [`Real`]; meshes, assembly and the pipeline work in `f64`.

// `!(x <= tol)` rejects NaN as well; index loops mirror the tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod fem;
pub mod hilbert_pair;
pub mod mesh;
pub mod pipeline;
pub mod random;
pub mod scalar;
pub mod spectral;

pub use scalar::Real;

pub type OperatorPairF64 = hilbert_pair::OperatorPair<f64>;
pub type OperatorPairF32 = hilbert_pair::OperatorPair<f32>;
pub type DensePencilF64 = spectral::DensePencil<f64>;
pub type SpectrumF64 = spectral::Spectrum<f64>;
pub type BabuskaAzizF64 = hilbert_pair::BabuskaAziz<f64>;
pub type FriedrichsVelteF64 = hilbert_pair::FriedrichsVelte<f64>;
pub type IdentityReportF64 = hilbert_pair::IdentityReport<f64>;

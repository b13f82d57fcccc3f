//! Complex Hermitian linear-algebra kernel.
//!
//! Everything else in the crate is built on the types and operations here:
//! tensor products, partial traces, the Hilbert-Schmidt inner product,
//! spectral matrix functions (exp/log of Hermitian matrices) and seeded
//! random-state generation.
//!
//! All matrices are dense `nalgebra` matrices over `Complex<f64>`, small by
//! construction (the experiments in this crate never exceed 64x64), so every
//! matrix function goes through a full spectral decomposition.

mod hermitian;
mod ops;
mod random;

pub use hermitian::{
    herm_eig, herm_expm, herm_logm, hermiticity_deviation, normalized_expm, DensityMatrix,
    ExpShift, HermitianMatrix, Spectrum,
};
pub use ops::{
    frobenius_norm, hs_inner, identity, partial_trace, pauli_x, pauli_y, pauli_z, symmetrize,
    tensor_product, Subsystem,
};
pub use random::{complex_ginibre, random_density};

use nalgebra::DMatrix;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix, the working representation for all operators.
pub type CMatrix = DMatrix<C64>;

/// Maximum allowed deviation from `M = M†` when constructing a [`HermitianMatrix`].
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Maximum allowed deviation of a density matrix trace from 1.
pub const TRACE_TOL: f64 = 1e-10;
/// How far below zero the smallest eigenvalue of a density matrix may dip.
pub const PSD_TOL: f64 = 1e-10;
/// Relative reconstruction tolerance for spectral decompositions.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;
/// Eigenvalues at or below this floor are treated as zero by the matrix logarithm.
pub const PD_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |M[i,j] - conj(M[j,i])| = {deviation:.3e} exceeds {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("trace {trace:.12} is not 1 within {tol:.3e}")]
    TraceNotOne { trace: f64, tol: f64 },
    #[error("matrix is not positive semi-definite: min eigenvalue {min_eig:.3e}")]
    NotPositiveSemiDefinite { min_eig: f64 },
    #[error("matrix is not positive definite: min eigenvalue {min_eig:.3e} at or below floor {floor:.3e}")]
    NotPositiveDefinite { min_eig: f64, floor: f64 },
    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    EigConvergence { dim: usize },
}

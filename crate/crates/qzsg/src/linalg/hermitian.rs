//! Hermitian matrices, density matrices and spectral matrix functions.

use super::ops::symmetrize;
use super::{C64, CMatrix, LinalgError, HERMITICITY_TOL, PD_FLOOR, PSD_TOL, TRACE_TOL};

/// Square complex matrix equal to its own conjugate transpose (within
/// [`HERMITICITY_TOL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

/// Largest deviation `|M[i,j] - conj(M[j,i])|` over all entries.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

impl HermitianMatrix {
    /// Validates the Hermitian invariant on construction.
    pub fn new(m: CMatrix) -> Result<Self, LinalgError> {
        assert_eq!(m.nrows(), m.ncols(), "Hermitian matrix must be square");
        let deviation = hermiticity_deviation(&m);
        if deviation > HERMITICITY_TOL {
            return Err(LinalgError::NotHermitian {
                deviation,
                tol: HERMITICITY_TOL,
            });
        }
        // Exact symmetrization so downstream spectral code sees a perfectly
        // Hermitian matrix regardless of rounding in the input.
        Ok(Self { m: symmetrize(&m) })
    }

    /// Repairs hermiticity drift via `(M + M†)/2` and wraps the result.
    ///
    /// For compositions that are Hermitian by math but accumulate
    /// floating-point asymmetry.
    pub fn from_symmetrized(m: &CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "Hermitian matrix must be square");
        Self { m: symmetrize(m) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }
}

/// Hermitian, positive semi-definite, trace-one matrix: a quantum mixed
/// strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    h: HermitianMatrix,
}

impl DensityMatrix {
    /// Validates trace one and positive semi-definiteness.
    pub fn new(h: HermitianMatrix) -> Result<Self, LinalgError> {
        let trace = h.matrix().trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(LinalgError::TraceNotOne {
                trace,
                tol: TRACE_TOL,
            });
        }
        let spectrum = herm_eig(&h)?;
        let min_eig = spectrum.eigenvalues[0];
        if min_eig < -PSD_TOL {
            return Err(LinalgError::NotPositiveSemiDefinite { min_eig });
        }
        Ok(Self { h })
    }

    /// Validates a raw complex matrix as a density matrix.
    pub fn from_cmatrix(m: CMatrix) -> Result<Self, LinalgError> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// Skips the eigenvalue check; for outputs that are PSD and trace-one by
    /// construction (normalized exponentials, Ginibre quotients).
    pub(crate) fn new_unchecked(h: HermitianMatrix) -> Self {
        debug_assert!((h.matrix().trace().re - 1.0).abs() <= 1e-9);
        Self { h }
    }

    /// The maximally mixed state `I/n`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let scale = C64::new(1.0 / dim as f64, 0.0);
        Self {
            h: HermitianMatrix::from_symmetrized(&(CMatrix::identity(dim, dim) * scale)),
        }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.h.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn into_matrix(self) -> CMatrix {
        self.h.into_matrix()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        herm_eig(&self.h).expect("density matrix eigendecomposition").eigenvalues[0]
    }
}

/// Spectral decomposition `M = U diag(λ) U†` of a Hermitian matrix:
/// eigenvalues ascending, eigenvector columns unitary.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    /// `U diag(f(λ)) U†`, drift-repaired.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let fv = C64::new(f(lambda), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= fv;
            }
        }
        symmetrize(&(scaled * self.eigenvectors.adjoint()))
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Dimensions 1 and 2 use closed forms; larger matrices use a cyclic
/// complex Jacobi iteration, which keeps reconstruction error near machine
/// precision even for wide spectra (the matrix-log/exp roundtrips depend on
/// that). Eigenvalues come back ascending with matching eigenvector columns.
pub fn herm_eig(h: &HermitianMatrix) -> Result<Spectrum, LinalgError> {
    let m = h.matrix();
    let n = m.nrows();
    match n {
        0 => Ok(Spectrum {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
        }),
        1 => Ok(Spectrum {
            eigenvalues: vec![m[(0, 0)].re],
            eigenvectors: CMatrix::identity(1, 1),
        }),
        2 => Ok(eig2(m)),
        _ => jacobi_eig(m),
    }
}

/// Cyclic complex Jacobi: repeatedly zero the off-diagonal entry of the
/// `(p, q)` block with the unitary rotation
/// `W = [[c, s], [-s·ū, c·ū]]` where `u` is the phase of `H[p,q]` and
/// `(c, s)` the classical symmetric-Jacobi pair. Quadratic convergence;
/// a handful of sweeps suffice at these dimensions.
fn jacobi_eig(m: &CMatrix) -> Result<Spectrum, LinalgError> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut vectors = CMatrix::identity(n, n);
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = (1e-15 * scale).max(f64::MIN_POSITIVE);

    let mut converged = false;
    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let h = a[(p, q)];
                let habs = h.norm();
                if habs <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = h / habs;
                let phase_c = phase.conj();
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * habs);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = akp * c - akq * phase_c * s;
                    let new_kq = akp * s + akq * phase_c * c;
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp.conj();
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq.conj();
                }
                a[(p, p)] = C64::new(app - t * habs, 0.0);
                a[(q, q)] = C64::new(aqq + t * habs, 0.0);
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = vectors[(k, p)];
                    let vkq = vectors[(k, q)];
                    vectors[(k, p)] = vkp * c - vkq * phase_c * s;
                    vectors[(k, q)] = vkp * s + vkq * phase_c * c;
                }
            }
        }
    }
    if !converged {
        return Err(LinalgError::EigConvergence { dim: n });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .expect("real eigenvalues")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &vectors.column(src));
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// Closed-form 2x2 Hermitian eigendecomposition; this is the hot path for
/// single-qubit trajectories.
fn eig2(m: &CMatrix) -> Spectrum {
    let a = m[(0, 0)].re;
    let c = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + c);
    let d = 0.5 * (a - c);
    let r = d.hypot(b.norm());
    let (lo, hi) = (mean - r, mean + r);

    // Eigenvector for the larger eigenvalue, picking the formula that avoids
    // cancellation based on the sign of d.
    let (p, q) = if d >= 0.0 {
        (C64::new(r + d, 0.0), b.conj())
    } else {
        (b, C64::new(r - d, 0.0))
    };
    let norm = (p.norm_sqr() + q.norm_sqr()).sqrt();
    let mut vectors = CMatrix::identity(2, 2);
    if norm > 0.0 {
        let (p, q) = (p / norm, q / norm);
        // hi eigenvector (p, q); lo eigenvector is its orthogonal complement.
        vectors[(0, 0)] = -q.conj();
        vectors[(1, 0)] = p.conj();
        vectors[(0, 1)] = p;
        vectors[(1, 1)] = q;
    }
    Spectrum {
        eigenvalues: vec![lo, hi],
        eigenvectors: vectors,
    }
}

/// Spectral shift applied inside the matrix exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpShift {
    None,
    /// Computes `exp(H - λ_max 1) = exp(-λ_max) exp(H)`, which leaves any
    /// normalized quantity `exp(H)/Tr exp(H)` unchanged while keeping every
    /// intermediate finite as `‖H‖` grows.
    MaxEigenvalue,
}

/// Matrix exponential of a Hermitian matrix via spectral decomposition.
pub fn herm_expm(h: &HermitianMatrix, shift: ExpShift) -> HermitianMatrix {
    let spectrum = herm_eig(h).expect("Hermitian exponential always exists");
    let s = match shift {
        ExpShift::None => 0.0,
        ExpShift::MaxEigenvalue => spectrum.max(),
    };
    HermitianMatrix::from_symmetrized(&spectrum.apply(|x| (x - s).exp()))
}

/// Matrix logarithm of a strictly positive definite Hermitian matrix.
pub fn herm_logm(p: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    let spectrum = herm_eig(p)?;
    let min_eig = spectrum.min();
    if min_eig <= PD_FLOOR {
        return Err(LinalgError::NotPositiveDefinite {
            min_eig,
            floor: PD_FLOOR,
        });
    }
    Ok(HermitianMatrix::from_symmetrized(
        &spectrum.apply(f64::ln),
    ))
}

/// Normalized exponential `exp(H)/Tr exp(H)` together with
/// `log Tr exp(H)` of the *unshifted* exponent.
///
/// One spectral decomposition serves both outputs; the max-eigenvalue shift
/// keeps the weights finite for arbitrarily large `‖H‖`.
pub fn normalized_expm(h: &HermitianMatrix) -> (DensityMatrix, f64) {
    let spectrum = herm_eig(h).expect("Hermitian exponential always exists");
    let s = spectrum.max();
    let z: f64 = spectrum.eigenvalues.iter().map(|&l| (l - s).exp()).sum();
    let state = spectrum.apply(|l| (l - s).exp() / z);
    (
        DensityMatrix::new_unchecked(HermitianMatrix::from_symmetrized(&state)),
        s + z.ln(),
    )
}

//! Free-standing matrix operations: tensor products, partial traces and the
//! Hilbert-Schmidt inner product.

use super::{C64, CMatrix};

/// Which factor of a bipartite space `A ⊗ B` to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// n x n identity matrix.
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product `a ⊗ b`; dimensions multiply.
///
/// Composite indexing follows the usual convention
/// `(a ⊗ b)[(i*m + k), (j*m + l)] = a[i,j] * b[k,l]` with `m = b.nrows()`.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Partial trace of a `(dim_a * dim_b)`-dimensional operator over one factor.
///
/// Tracing over `B` yields the `dim_a x dim_a` matrix with entries
/// `sum_k m[(i,k),(j,k)]`; tracing over `A` yields `sum_i m[(i,k),(i,l)]`.
/// The full trace is preserved either way.
///
/// Panics if `m` is not square of dimension `dim_a * dim_b`.
pub fn partial_trace(m: &CMatrix, dim_a: usize, dim_b: usize, over: Subsystem) -> CMatrix {
    assert_eq!(m.nrows(), m.ncols(), "partial trace needs a square matrix");
    assert_eq!(
        m.nrows(),
        dim_a * dim_b,
        "matrix dimension {} does not factor as {} x {}",
        m.nrows(),
        dim_a,
        dim_b
    );
    match over {
        Subsystem::B => {
            let mut out = CMatrix::zeros(dim_a, dim_a);
            for i in 0..dim_a {
                for j in 0..dim_a {
                    let mut s = C64::new(0.0, 0.0);
                    for k in 0..dim_b {
                        s += m[(i * dim_b + k, j * dim_b + k)];
                    }
                    out[(i, j)] = s;
                }
            }
            out
        }
        Subsystem::A => {
            let mut out = CMatrix::zeros(dim_b, dim_b);
            for k in 0..dim_b {
                for l in 0..dim_b {
                    let mut s = C64::new(0.0, 0.0);
                    for i in 0..dim_a {
                        s += m[(i * dim_b + k, i * dim_b + l)];
                    }
                    out[(k, l)] = s;
                }
            }
            out
        }
    }
}

/// Hilbert-Schmidt inner product `⟨a, b⟩ = Tr(a† b)`.
///
/// Real for Hermitian pairs, non-negative for PSD pairs.
/// Panics on dimension mismatch.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    assert_eq!(a.shape(), b.shape(), "hs_inner dimension mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Frobenius norm `sqrt(Tr(A†A))`.
pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian drift repair: `(M + M†)/2`.
///
/// Applied after arithmetic that is Hermitian by math so floating-point
/// asymmetry never accumulates past the construction tolerance.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
    }
    out
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0), C64::new(1.0, 0.0),
        C64::new(1.0, 0.0), C64::new(0.0, 0.0),
    ])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[
        C64::new(0.0, 0.0), C64::new(0.0, -1.0),
        C64::new(0.0, 1.0), C64::new(0.0, 0.0),
    ])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[
        C64::new(1.0, 0.0), C64::new(0.0, 0.0),
        C64::new(0.0, 0.0), C64::new(-1.0, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::complex_ginibre;

    fn approx_eq(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        frobenius_norm(&(a - b)) <= tol
    }

    /// Nested-loop Kronecker oracle, independent of nalgebra's kronecker.
    fn kron_oracle(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let (n, p) = a.shape();
        let (m, q) = b.shape();
        let mut out = CMatrix::zeros(n * m, p * q);
        for i in 0..n {
            for j in 0..p {
                for k in 0..m {
                    for l in 0..q {
                        out[(i * m + k, j * q + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn tensor_identity_case() {
        let i2 = identity(2);
        assert!(approx_eq(&tensor_product(&i2, &i2), &identity(4), 0.0));
    }

    #[test]
    fn tensor_matching_pennies_observable() {
        let z = pauli_z();
        let r = tensor_product(&z, &z);
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(1.0, 0.0),
        ]));
        assert!(approx_eq(&r, &expected, 0.0));
    }

    #[test]
    fn tensor_of_densities_matches_oracle_and_has_unit_trace() {
        let rho = crate::linalg::random_density(2, 11).into_matrix();
        let sigma = crate::linalg::random_density(2, 12).into_matrix();
        let t = tensor_product(&rho, &sigma);
        assert!(approx_eq(&t, &kron_oracle(&rho, &sigma), 1e-14));
        assert!((t.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_state_recovers_factor() {
        let rho = crate::linalg::random_density(2, 3).into_matrix();
        let sigma = crate::linalg::random_density(3, 4).into_matrix();
        let joint = tensor_product(&rho, &sigma);
        assert!(approx_eq(&partial_trace(&joint, 2, 3, Subsystem::B), &rho, 1e-12));
        assert!(approx_eq(&partial_trace(&joint, 2, 3, Subsystem::A), &sigma, 1e-12));
    }

    #[test]
    fn partial_trace_identity_over_a() {
        let got = partial_trace(&identity(4), 2, 2, Subsystem::A);
        assert!(approx_eq(&got, &(identity(2) * C64::new(2.0, 0.0)), 0.0));
    }

    #[test]
    fn partial_trace_matches_index_summation_oracle() {
        let g = complex_ginibre(4, 4, 99);
        let h = symmetrize(&g);
        let reduced = partial_trace(&h, 2, 2, Subsystem::B);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = C64::new(0.0, 0.0);
                for k in 0..2 {
                    s += h[(i * 2 + k, j * 2 + k)];
                }
                assert!((reduced[(i, j)] - s).norm() < 1e-12);
            }
        }
        // trace preservation
        assert!((reduced.trace() - h.trace()).norm() < 1e-12);
    }

    #[test]
    fn hs_inner_against_identity_is_trace() {
        let rho = crate::linalg::random_density(3, 7).into_matrix();
        let v = hs_inner(&identity(3), &rho);
        assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }

    #[test]
    fn hs_inner_matching_pennies_uniform_is_zero() {
        let r = tensor_product(&pauli_z(), &pauli_z());
        let half = C64::new(0.5, 0.0);
        let joint = tensor_product(&(identity(2) * half), &(identity(2) * half));
        assert!(hs_inner(&r, &joint).norm() < 1e-14);
    }

    #[test]
    fn hs_inner_self_is_frobenius_squared() {
        let a = symmetrize(&complex_ginibre(4, 4, 5));
        let v = hs_inner(&a, &a);
        assert!((v.re - frobenius_norm(&a).powi(2)).abs() < 1e-10);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn hs_inner_factorizes_over_tensor_products() {
        // <a, b (x) c> computed on the joint space equals the nested-loop oracle.
        for seed in 0..20u64 {
            let b = symmetrize(&complex_ginibre(2, 2, 3 * seed + 1));
            let c = symmetrize(&complex_ginibre(3, 3, 3 * seed + 2));
            let a = symmetrize(&complex_ginibre(6, 6, 3 * seed + 3));
            let joint = tensor_product(&b, &c);
            let fast = hs_inner(&a, &joint);
            let mut slow = C64::new(0.0, 0.0);
            for i in 0..6 {
                for j in 0..6 {
                    slow += a[(i, j)].conj() * kron_entry(&b, &c, i, j);
                }
            }
            assert!((fast - slow).norm() < 1e-12);
        }
    }

    fn kron_entry(b: &CMatrix, c: &CMatrix, row: usize, col: usize) -> C64 {
        let m = c.nrows();
        b[(row / m, col / m)] * c[(row % m, col % m)]
    }

    #[test]
    fn symmetrize_is_idempotent_on_hermitian_input() {
        let h = symmetrize(&complex_ginibre(3, 3, 17));
        assert!(approx_eq(&symmetrize(&h), &h, 1e-15));
    }
}

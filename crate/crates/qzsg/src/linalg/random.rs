//! Seeded random matrix generation.
//!
//! Every generator is keyed by an explicit `u64` seed through ChaCha8, so
//! equal seeds give bit-identical output on every call and every thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::hermitian::{DensityMatrix, HermitianMatrix};
use super::{C64, CMatrix};

/// Matrix with i.i.d. standard complex Gaussian entries (Ginibre ensemble).
pub fn complex_ginibre(rows: usize, cols: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    })
}

/// Random density matrix `G G† / Tr(G G†)` from a seeded Ginibre matrix.
///
/// Full rank with probability one, so the output can seed dynamics that must
/// start in the interior of the state space.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    assert!(dim >= 1, "density matrix dimension must be positive");
    let g = complex_ginibre(dim, dim, seed);
    let gram = &g * g.adjoint();
    let trace = gram.trace().re;
    if trace <= f64::MIN_POSITIVE {
        // Unreachable in practice; keeps the output well-defined anyway.
        return DensityMatrix::maximally_mixed(dim);
    }
    let normalized = gram / C64::new(trace, 0.0);
    DensityMatrix::new_unchecked(HermitianMatrix::from_symmetrized(&normalized))
}

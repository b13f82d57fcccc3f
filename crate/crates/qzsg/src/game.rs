//! Quantum zero-sum game representation.
//!
//! A game is a Hermitian payoff observable `R` on the joint space
//! `A ⊗ B`. It induces the payoff superoperator
//! `Φ(σ) = Tr_B(R (1_A ⊗ σ⊤))` and its adjoint `Φ†`, fixed by
//! `⟨ρ, Φ(σ)⟩ = ⟨Φ†(ρ), σ⟩`. Alice's expected payoff is
//! `u(ρ, σ) = ⟨ρ, Φ(σ)⟩`; Bob receives the negation.
//!
//! `u(ρ, σ) = ⟨R, ρ ⊗ σ⟩` is exposed separately as [`payoff_via_joint`]:
//! for general complex `R` the two formulas differ by a transpose on σ, and
//! this crate standardizes on the `Φ` form, which is the one the dynamics
//! are written in. The two provably agree for diagonal (classical) games.
//!
//! [`payoff_via_joint`]: PayoffObservable::payoff_via_joint

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{
    complex_ginibre, frobenius_norm, herm_eig, hs_inner, tensor_product, C64, CMatrix,
    DensityMatrix, HermitianMatrix, LinalgError,
};

/// Reference states below this smallest eigenvalue do not count as fully
/// mixed and are rejected by entropy tracking.
pub const MIXED_FLOOR: f64 = 1e-6;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("matrix is not unitary: ‖U†U - 1‖_F = {deviation:.3e}")]
    NotUnitary { deviation: f64 },
    #[error("observable dimension {got} does not equal dim_a * dim_b = {want}")]
    DimensionMismatch { got: usize, want: usize },
    #[error("payoff matrix must be square for the unitary embedding, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("unsupported qubit count {0}; supported counts are 1, 2 and 3")]
    UnsupportedQubitCount(u32),
    #[error("matrix rows have inconsistent lengths")]
    RaggedRows,
    #[error("empty matrix payload")]
    EmptyMatrix,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("certificate exploitability {0} is negative beyond tolerance")]
    NegativeExploitability(f64),
}

/// Hermitian payoff observable on the joint space of an `n`-dimensional
/// register for Alice and an `m`-dimensional register for Bob.
#[derive(Debug, Clone)]
pub struct PayoffObservable {
    dim_a: usize,
    dim_b: usize,
    r: HermitianMatrix,
}

impl PayoffObservable {
    pub fn new(dim_a: usize, dim_b: usize, r: HermitianMatrix) -> Result<Self, GameError> {
        if r.dim() != dim_a * dim_b {
            return Err(GameError::DimensionMismatch {
                got: r.dim(),
                want: dim_a * dim_b,
            });
        }
        Ok(Self { dim_a, dim_b, r })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn observable(&self) -> &HermitianMatrix {
        &self.r
    }

    /// `Φ(σ) = Tr_B(R (1_A ⊗ σ⊤))` as a direct index kernel:
    /// `Φ(σ)[i,j] = Σ_{k,l} R[(i,k),(j,l)] σ[k,l]`.
    ///
    /// No hermiticity repair; accepts arbitrary operators (needed for the
    /// operator-basis tests).
    pub fn phi_matrix(&self, sigma: &CMatrix) -> CMatrix {
        assert_eq!(sigma.nrows(), self.dim_b, "phi dimension mismatch");
        assert_eq!(sigma.ncols(), self.dim_b, "phi dimension mismatch");
        let r = self.r.matrix();
        let m = self.dim_b;
        let mut out = CMatrix::zeros(self.dim_a, self.dim_a);
        for i in 0..self.dim_a {
            for j in 0..self.dim_a {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..m {
                    for l in 0..m {
                        acc += r[(i * m + k, j * m + l)] * sigma[(k, l)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Adjoint kernel `Φ†(ρ)[k,l] = Σ_{i,j} conj(R[(i,k),(j,l)]) ρ[i,j]`,
    /// the closed form of `Tr_A(R̄ (ρ⊤ ⊗ 1_B))`.
    pub fn phi_adjoint_matrix(&self, rho: &CMatrix) -> CMatrix {
        assert_eq!(rho.nrows(), self.dim_a, "phi adjoint dimension mismatch");
        assert_eq!(rho.ncols(), self.dim_a, "phi adjoint dimension mismatch");
        let r = self.r.matrix();
        let m = self.dim_b;
        let mut out = CMatrix::zeros(m, m);
        for k in 0..m {
            for l in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..self.dim_a {
                    for j in 0..self.dim_a {
                        acc += r[(i * m + k, j * m + l)].conj() * rho[(i, j)];
                    }
                }
                out[(k, l)] = acc;
            }
        }
        out
    }

    /// `Φ` on a Hermitian operator, drift-repaired.
    pub fn phi_apply(&self, sigma: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_symmetrized(&self.phi_matrix(sigma.matrix()))
    }

    /// `Φ†` on a Hermitian operator, drift-repaired.
    pub fn phi_adjoint_apply(&self, rho: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix::from_symmetrized(&self.phi_adjoint_matrix(rho.matrix()))
    }

    /// Alice's expected payoff `u(ρ, σ) = ⟨ρ, Φ(σ)⟩`.
    pub fn payoff(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
        hs_inner(rho.matrix(), &self.phi_matrix(sigma.matrix())).re
    }

    /// The joint-space form `⟨R, ρ ⊗ σ⟩`; agrees with [`Self::payoff`] for
    /// diagonal observables.
    pub fn payoff_via_joint(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
        hs_inner(
            self.r.matrix(),
            &tensor_product(rho.matrix(), sigma.matrix()),
        )
        .re
    }

    /// Nash gap `λ_max(Φ(σ)) - λ_min(Φ†(ρ))`: Alice's best-response payoff
    /// against σ minus Bob's counterpart. Zero exactly at equilibria,
    /// non-negative everywhere else.
    pub fn exploitability(&self, rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
        let best_alice = herm_eig(&self.phi_apply(sigma.hermitian()))
            .expect("phi image eigendecomposition")
            .max();
        let best_bob = herm_eig(&self.phi_adjoint_apply(rho.hermitian()))
            .expect("phi adjoint image eigendecomposition")
            .min();
        best_alice - best_bob
    }
}

/// Diagonal embedding of a classical payoff matrix:
/// `R = diag(p row-major)` on the `n*m`-dimensional joint space.
pub fn embed_classical_diagonal(p: &[Vec<f64>]) -> Result<PayoffObservable, GameError> {
    let (n, m) = real_matrix_shape(p)?;
    let joint = n * m;
    let mut r = CMatrix::zeros(joint, joint);
    for i in 0..n {
        for k in 0..m {
            r[(i * m + k, i * m + k)] = C64::new(p[i][k], 0.0);
        }
    }
    PayoffObservable::new(n, m, HermitianMatrix::new(r)?)
}

/// Unitary basis transform of a classical game:
/// `R = (V ⊗ W) Λ (V ⊗ W)†` with `Λ = diag(p row-major)`.
///
/// The eigenvalue multiset of `R` equals the entries of `p`, so the quantum
/// game inherits the classical payoff range exactly.
pub fn embed_unitary(
    p: &[Vec<f64>],
    v: &CMatrix,
    w: &CMatrix,
) -> Result<PayoffObservable, GameError> {
    let (n, m) = real_matrix_shape(p)?;
    if n != m {
        return Err(GameError::NotSquare { rows: n, cols: m });
    }
    check_unitary(v)?;
    check_unitary(w)?;
    assert_eq!(v.nrows(), n, "V must act on Alice's space");
    assert_eq!(w.nrows(), m, "W must act on Bob's space");
    let basis = tensor_product(v, w);
    let mut lambda = CMatrix::zeros(n * m, n * m);
    for i in 0..n {
        for k in 0..m {
            lambda[(i * m + k, i * m + k)] = C64::new(p[i][k], 0.0);
        }
    }
    let r = &basis * lambda * basis.adjoint();
    PayoffObservable::new(n, m, HermitianMatrix::from_symmetrized(&r))
}

fn check_unitary(u: &CMatrix) -> Result<(), GameError> {
    let gram = u.adjoint() * u;
    let deviation = frobenius_norm(&(gram - CMatrix::identity(u.nrows(), u.ncols())));
    if deviation > UNITARY_TOL {
        return Err(GameError::NotUnitary { deviation });
    }
    Ok(())
}

fn real_matrix_shape(p: &[Vec<f64>]) -> Result<(usize, usize), GameError> {
    let n = p.len();
    if n == 0 {
        return Err(GameError::EmptyMatrix);
    }
    let m = p[0].len();
    if m == 0 {
        return Err(GameError::EmptyMatrix);
    }
    if p.iter().any(|row| row.len() != m) {
        return Err(GameError::RaggedRows);
    }
    Ok((n, m))
}

/// Haar-distributed random unitary: QR factorization of a seeded Ginibre
/// matrix with the diagonal phases of `R` absorbed into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> CMatrix {
    assert!(dim >= 1);
    let g = complex_ginibre(dim, dim, seed);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// The quantum Matching Pennies observable `diag(1, -1, -1, 1)`.
pub fn matching_pennies() -> PayoffObservable {
    embed_classical_diagonal(&matching_pennies_payoff()).expect("static matrix is valid")
}

/// The classical Matching Pennies payoff matrix.
pub fn matching_pennies_payoff() -> Vec<Vec<f64>> {
    vec![vec![1.0, -1.0], vec![-1.0, 1.0]]
}

/// Seeded `2^q x 2^q` classical payoff matrix with entries in `[-1, 1]` whose
/// uniform strategies are an interior Nash equilibrium, embedded diagonally.
///
/// For two and three qubits the matrix is antisymmetric with all row sums
/// zero (zero row sums are what actually pin the uniform equilibrium; plain
/// antisymmetry is not enough). A 2x2 antisymmetric matrix with zero row sums
/// is identically zero, so the one-qubit game is `±` Matching Pennies, the
/// only 2x2 game with zero row and column sums after normalization; the sign
/// is drawn from the seed.
pub fn multi_qubit_interior_game(qubits: u32, seed: u64) -> Result<GameSpec, GameError> {
    if !(1..=3).contains(&qubits) {
        return Err(GameError::UnsupportedQubitCount(qubits));
    }
    let n = 1usize << qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = if n == 2 {
        let sign: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        matching_pennies_payoff()
            .into_iter()
            .map(|row| row.into_iter().map(|x| sign * x).collect())
            .collect::<Vec<_>>()
    } else {
        loop {
            let mut a = vec![vec![0.0f64; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    a[i][j] = x;
                    a[j][i] = -x;
                }
            }
            // Project onto zero row sums while preserving antisymmetry:
            // P = A - (r 1ᵀ - 1 rᵀ)/n with r the row-sum vector.
            let r: Vec<f64> = a.iter().map(|row| row.iter().sum::<f64>()).collect();
            let mut p = vec![vec![0.0f64; n]; n];
            let mut max_abs = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    p[i][j] = a[i][j] - (r[i] - r[j]) / n as f64;
                    max_abs = max_abs.max(p[i][j].abs());
                }
            }
            if max_abs < 1e-12 {
                continue;
            }
            for row in &mut p {
                for x in row.iter_mut() {
                    *x /= max_abs;
                }
            }
            break p;
        }
    };
    let game = embed_classical_diagonal(&p)?;
    Ok(GameSpec::from_observable(
        format!("{qubits}-qubit-interior-{seed}"),
        &game,
        Provenance::ClassicalDiagonal { p },
    ))
}

/// How a game's observable was constructed.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    ClassicalDiagonal { p: Vec<Vec<f64>> },
    UnitaryEmbedded { p: Vec<Vec<f64>>, seed: u64 },
    Explicit,
}

/// Serializable description of a game instance. Complex entries are
/// `[re, im]` pairs; hermiticity is re-validated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameSpec {
    pub name: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub r: Vec<Vec<[f64; 2]>>,
    pub provenance: Provenance,
}

impl GameSpec {
    pub fn from_observable(name: String, game: &PayoffObservable, provenance: Provenance) -> Self {
        Self {
            name,
            dim_a: game.dim_a,
            dim_b: game.dim_b,
            r: cmatrix_to_rows(game.r.matrix()),
            provenance,
        }
    }

    /// Reconstructs and validates the payoff observable.
    pub fn to_observable(&self) -> Result<PayoffObservable, GameError> {
        let r = cmatrix_from_rows(&self.r)?;
        PayoffObservable::new(self.dim_a, self.dim_b, HermitianMatrix::new(r)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GameError> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, GameError> {
        let spec: GameSpec = serde_json::from_str(&fs::read_to_string(path)?)?;
        // Validate eagerly so a malformed file fails at load, not mid-run.
        spec.to_observable()?;
        Ok(spec)
    }
}

/// Complex matrix as nested rows of `[re, im]` pairs.
pub fn cmatrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Parses nested `[re, im]` rows into a complex matrix.
pub fn cmatrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, GameError> {
    let n = rows.len();
    if n == 0 {
        return Err(GameError::EmptyMatrix);
    }
    let m = rows[0].len();
    if m == 0 {
        return Err(GameError::EmptyMatrix);
    }
    if rows.iter().any(|r| r.len() != m) {
        return Err(GameError::RaggedRows);
    }
    Ok(CMatrix::from_fn(n, m, |i, j| {
        C64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// An (approximate) equilibrium pair with the numbers a caller needs to
/// decide whether to trust it as an entropy reference.
#[derive(Debug, Clone)]
pub struct NashCertificate {
    pub rho_star: DensityMatrix,
    pub sigma_star: DensityMatrix,
    pub value: f64,
    pub exploitability: f64,
    pub epsilon_target: f64,
    pub min_eig_rho: f64,
    pub min_eig_sigma: f64,
}

impl NashCertificate {
    /// Certifies a candidate pair against a game: evaluates its value,
    /// exploitability and minimum eigenvalues.
    pub fn from_states(
        game: &PayoffObservable,
        rho: DensityMatrix,
        sigma: DensityMatrix,
        epsilon_target: f64,
    ) -> Result<Self, GameError> {
        let exploitability = game.exploitability(&rho, &sigma);
        if exploitability < -1e-10 {
            return Err(GameError::NegativeExploitability(exploitability));
        }
        let value = game.payoff(&rho, &sigma);
        let min_eig_rho = rho.min_eigenvalue();
        let min_eig_sigma = sigma.min_eigenvalue();
        Ok(Self {
            rho_star: rho,
            sigma_star: sigma,
            value,
            exploitability,
            epsilon_target,
            min_eig_rho,
            min_eig_sigma,
        })
    }

    /// The maximally mixed pair `(1/n, 1/m)`, certified against the game.
    /// This is the exact analytic equilibrium for Matching Pennies and every
    /// game produced by [`multi_qubit_interior_game`].
    pub fn uniform(game: &PayoffObservable) -> Result<Self, GameError> {
        Self::from_states(
            game,
            DensityMatrix::maximally_mixed(game.dim_a()),
            DensityMatrix::maximally_mixed(game.dim_b()),
            0.0,
        )
    }

    /// Both states bounded away from the boundary of the state space.
    pub fn fully_mixed(&self) -> bool {
        self.min_eig_rho > MIXED_FLOOR && self.min_eig_sigma > MIXED_FLOOR
    }

    pub fn save(&self, path: &Path) -> Result<(), GameError> {
        fs::write(
            path,
            serde_json::to_string_pretty(&WireCertificate::from(self))?,
        )?;
        Ok(())
    }

    /// Loads a certificate and re-validates the density-matrix invariants.
    pub fn load(path: &Path) -> Result<Self, GameError> {
        let wire: WireCertificate = serde_json::from_str(&fs::read_to_string(path)?)?;
        wire.validate()
    }
}

#[derive(Serialize, Deserialize)]
struct WireCertificate {
    rho_star: Vec<Vec<[f64; 2]>>,
    sigma_star: Vec<Vec<[f64; 2]>>,
    value: f64,
    exploitability: f64,
    epsilon_target: f64,
    min_eig_rho: f64,
    min_eig_sigma: f64,
}

impl From<&NashCertificate> for WireCertificate {
    fn from(c: &NashCertificate) -> Self {
        Self {
            rho_star: cmatrix_to_rows(c.rho_star.matrix()),
            sigma_star: cmatrix_to_rows(c.sigma_star.matrix()),
            value: c.value,
            exploitability: c.exploitability,
            epsilon_target: c.epsilon_target,
            min_eig_rho: c.min_eig_rho,
            min_eig_sigma: c.min_eig_sigma,
        }
    }
}

impl WireCertificate {
    fn validate(self) -> Result<NashCertificate, GameError> {
        if self.exploitability < -1e-10 {
            return Err(GameError::NegativeExploitability(self.exploitability));
        }
        Ok(NashCertificate {
            rho_star: DensityMatrix::from_cmatrix(cmatrix_from_rows(&self.rho_star)?)?,
            sigma_star: DensityMatrix::from_cmatrix(cmatrix_from_rows(&self.sigma_star)?)?,
            value: self.value,
            exploitability: self.exploitability,
            epsilon_target: self.epsilon_target,
            min_eig_rho: self.min_eig_rho,
            min_eig_sigma: self.min_eig_sigma,
        })
    }
}

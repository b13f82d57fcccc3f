//! Continuous-time quantum replicator dynamics.
//!
//! The dynamics are integrated in the *dual* space of cumulative payoff
//! operators, where the vector field is globally smooth:
//!
//! ```text
//! dA/dt = Φ(σ(t))      ρ(t) = exp(A(t)) / Tr exp(A(t))
//! dB/dt = -Φ†(ρ(t))    σ(t) = exp(B(t)) / Tr exp(B(t))
//! ```
//!
//! The primal (density-matrix) form of the flow only exists when the
//! accumulated duals commute with their derivatives, which is the classical
//! case; integrating the duals and normalizing at read-out avoids that
//! assumption entirely.
//!
//! The canonical transform pins the `(1,1)` dual entry to zero. It leaves
//! `ρ`, `σ` untouched (shifting an exponent by a multiple of the identity
//! cancels in the normalization) while making the transformed flow volume
//! preserving with bounded orbits, which is what the recurrence argument
//! needs. [`divergence_probe`] checks the volume preservation numerically
//! on a fixed real coordinate chart and [`Trajectory`] carries the
//! orbit-boundedness and return-distance observables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    bloch_vector, conservation_report, detect_recurrence, quantum_relative_entropy,
    AnalysisError, ConservationReport, RecurrenceReport,
};
use crate::game::{GameError, NashCertificate, PayoffObservable};
use crate::linalg::{
    frobenius_norm, herm_eig, herm_logm, normalized_expm, C64, CMatrix, DensityMatrix,
    HermitianMatrix, LinalgError,
};

#[derive(Debug, Error)]
pub enum ReplicatorError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("invalid probability vector: {0}")]
    InvalidSimplex(String),
}

/// Pair of cumulative payoff operators at a point in time.
#[derive(Debug, Clone)]
pub struct DualState {
    pub t: f64,
    pub a: HermitianMatrix,
    pub b: HermitianMatrix,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Rk4,
    Euler,
}

/// Which dual coordinates to integrate in.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// Plain duals `A(t), B(t)`.
    Raw,
    /// `(1,1)`-pinned duals `A'(t), B'(t)`; same strategies, bounded orbits.
    Canonical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicatorConfig {
    pub t_end: f64,
    pub step_h: f64,
    #[serde(default = "default_integrator")]
    pub integrator: Integrator,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub seed_rho0: u64,
    #[serde(default = "default_seed_sigma0")]
    pub seed_sigma0: u64,
    #[serde(default = "default_transform")]
    pub transform: Transform,
}

fn default_integrator() -> Integrator {
    Integrator::Rk4
}
fn default_record_every() -> usize {
    1
}
fn default_seed_sigma0() -> u64 {
    1
}
fn default_transform() -> Transform {
    Transform::Canonical
}

impl ReplicatorConfig {
    pub fn rk4(t_end: f64, step_h: f64) -> Self {
        Self {
            t_end,
            step_h,
            integrator: Integrator::Rk4,
            record_every: 1,
            seed_rho0: 0,
            seed_sigma0: 1,
            transform: Transform::Canonical,
        }
    }

    fn validate(&self) -> Result<(), ReplicatorError> {
        if !(self.step_h > 0.0) {
            return Err(ReplicatorError::BadConfig(format!(
                "step_h must be positive, got {}",
                self.step_h
            )));
        }
        if self.t_end < 0.0 {
            return Err(ReplicatorError::BadConfig(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if self.t_end > 0.0 && self.step_h > self.t_end {
            return Err(ReplicatorError::BadConfig(format!(
                "step_h {} exceeds t_end {}",
                self.step_h, self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(ReplicatorError::BadConfig(
                "record_every must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// `(dA/dt, dB/dt) = (Φ(σ), -Φ†(ρ))` with `ρ`, `σ` read from the duals
/// through the shifted normalized exponential.
pub fn dual_vector_field(
    game: &PayoffObservable,
    state: &DualState,
) -> (HermitianMatrix, HermitianMatrix) {
    let (rho, _) = normalized_expm(&state.a);
    let (sigma, _) = normalized_expm(&state.b);
    let da = game.phi_apply(sigma.hermitian());
    let db_neg = game.phi_adjoint_apply(rho.hermitian());
    let db = HermitianMatrix::from_symmetrized(&(-db_neg.matrix()));
    (da, db)
}

/// Subtracts the `(1,1)` entry times the identity; the result has an exact
/// zero pinned there. Idempotent.
pub fn canonical_transform(a: &HermitianMatrix) -> HermitianMatrix {
    let pivot = a.matrix()[(0, 0)].re;
    let mut m = a.matrix().clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= C64::new(pivot, 0.0);
    }
    m[(0, 0)] = C64::new(0.0, 0.0);
    HermitianMatrix::from_symmetrized(&m)
}

/// The canonical-coordinate field: the raw field with its `(1,1)` entry
/// pinned back to zero. The strategies read from `A'`, `B'` equal those
/// read from `A`, `B`, so only the pinning differs from
/// [`dual_vector_field`].
pub fn transformed_vector_field(
    game: &PayoffObservable,
    state: &DualState,
) -> (HermitianMatrix, HermitianMatrix) {
    let (da, db) = dual_vector_field(game, state);
    (canonical_transform(&da), canonical_transform(&db))
}

/// `ρ = f(A') = exp(A') / Tr exp(A')`: full-rank by construction.
pub fn diffeo_forward(a_prime: &HermitianMatrix) -> DensityMatrix {
    normalized_expm(a_prime).0
}

/// `f⁻¹(ρ) = log ρ - (log ρ)[1,1] · 1`, the inverse of [`diffeo_forward`]
/// on the interior of the state space.
pub fn diffeo_inverse(rho: &DensityMatrix) -> Result<HermitianMatrix, ReplicatorError> {
    Ok(canonical_transform(&herm_logm(rho.hermitian())?))
}

/// One recorded point of an integrated trajectory, with analytics.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub dual: DualState,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    /// `S(ρ*‖ρ(t))`
    pub s_rho: f64,
    pub s_sigma: f64,
    pub s_total: f64,
    /// `‖ρ(t)-ρ(0)‖_F + ‖σ(t)-σ(0)‖_F`
    pub frob_return: f64,
    pub bloch_rho: Option<(f64, f64, f64)>,
    pub bloch_sigma: Option<(f64, f64, f64)>,
    /// Largest absolute eigenvalue of the canonical dual `A'(t)`.
    pub max_abs_eig_a_prime: f64,
    pub max_abs_eig_b_prime: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn frob_series(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, s.frob_return)).collect()
    }

    pub fn s_total_series(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, s.s_total)).collect()
    }

    pub fn recurrence(&self, return_frac: f64) -> RecurrenceReport {
        detect_recurrence(&self.frob_series(), return_frac)
    }

    pub fn conservation(
        &self,
        reference: &NashCertificate,
    ) -> Result<ConservationReport, AnalysisError> {
        conservation_report(&self.s_total_series(), reference)
    }
}

fn field(
    game: &PayoffObservable,
    transform: Transform,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
) -> (HermitianMatrix, HermitianMatrix) {
    let state = DualState {
        t: 0.0,
        a: a.clone(),
        b: b.clone(),
    };
    match transform {
        Transform::Raw => dual_vector_field(game, &state),
        Transform::Canonical => transformed_vector_field(game, &state),
    }
}

fn pin(transform: Transform, h: &HermitianMatrix) -> HermitianMatrix {
    match transform {
        Transform::Raw => h.clone(),
        Transform::Canonical => canonical_transform(h),
    }
}

/// Forward Euler step, written so that with `h = μ` the arithmetic is
/// identical to one [`crate::mmwu::mmwu_step`] on the same pair.
fn euler_step(
    game: &PayoffObservable,
    transform: Transform,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    h: f64,
) -> (HermitianMatrix, HermitianMatrix) {
    let (fa, fb) = field(game, transform, a, b);
    let hc = C64::new(h, 0.0);
    let a_next = HermitianMatrix::from_symmetrized(&(a.matrix() + fa.matrix() * hc));
    let b_next = HermitianMatrix::from_symmetrized(&(b.matrix() + fb.matrix() * hc));
    (pin(transform, &a_next), pin(transform, &b_next))
}

fn rk4_step(
    game: &PayoffObservable,
    transform: Transform,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    h: f64,
) -> (HermitianMatrix, HermitianMatrix) {
    let half = C64::new(h * 0.5, 0.0);
    let full = C64::new(h, 0.0);
    let sixth = C64::new(h / 6.0, 0.0);
    let two = C64::new(2.0, 0.0);

    let at = |m: &CMatrix| HermitianMatrix::from_symmetrized(m);
    let (k1a, k1b) = field(game, transform, a, b);
    let (k2a, k2b) = field(
        game,
        transform,
        &at(&(a.matrix() + k1a.matrix() * half)),
        &at(&(b.matrix() + k1b.matrix() * half)),
    );
    let (k3a, k3b) = field(
        game,
        transform,
        &at(&(a.matrix() + k2a.matrix() * half)),
        &at(&(b.matrix() + k2b.matrix() * half)),
    );
    let (k4a, k4b) = field(
        game,
        transform,
        &at(&(a.matrix() + k3a.matrix() * full)),
        &at(&(b.matrix() + k3b.matrix() * full)),
    );

    let a_next = at(&(a.matrix()
        + (k1a.matrix() + (k2a.matrix() + k3a.matrix()) * two + k4a.matrix()) * sixth));
    let b_next = at(&(b.matrix()
        + (k1b.matrix() + (k2b.matrix() + k3b.matrix()) * two + k4b.matrix()) * sixth));
    (pin(transform, &a_next), pin(transform, &b_next))
}

/// Integrates the dual dynamics from seeded random interior states.
pub fn integrate(
    game: &PayoffObservable,
    cfg: &ReplicatorConfig,
    reference: &NashCertificate,
) -> Result<Trajectory, ReplicatorError> {
    let rho0 = crate::linalg::random_density(game.dim_a(), cfg.seed_rho0);
    let sigma0 = crate::linalg::random_density(game.dim_b(), cfg.seed_sigma0);
    integrate_from(game, cfg, reference, &rho0, &sigma0)
}

/// Integrates from explicit initial states (must be strictly positive
/// definite: the initial duals are their matrix logarithms).
pub fn integrate_from(
    game: &PayoffObservable,
    cfg: &ReplicatorConfig,
    reference: &NashCertificate,
    rho0: &DensityMatrix,
    sigma0: &DensityMatrix,
) -> Result<Trajectory, ReplicatorError> {
    cfg.validate()?;
    if !reference.fully_mixed() {
        return Err(AnalysisError::ReferenceNotFullyMixed {
            min_eig_rho: reference.min_eig_rho,
            min_eig_sigma: reference.min_eig_sigma,
        }
        .into());
    }
    let (mut a, mut b) = match cfg.transform {
        Transform::Raw => (herm_logm(rho0.hermitian())?, herm_logm(sigma0.hermitian())?),
        Transform::Canonical => (diffeo_inverse(rho0)?, diffeo_inverse(sigma0)?),
    };

    let steps = (cfg.t_end / cfg.step_h).round() as usize;
    let mut samples = Vec::with_capacity(steps / cfg.record_every + 2);

    // Baseline for the return distance: the t = 0 states as read back from
    // the duals, so frob_return starts at exactly zero.
    let (rho_base, _) = normalized_expm(&a);
    let (sigma_base, _) = normalized_expm(&b);

    let mut push_sample = |t: f64,
                           a: &HermitianMatrix,
                           b: &HermitianMatrix|
     -> Result<(), ReplicatorError> {
        let (rho, _) = normalized_expm(a);
        let (sigma, _) = normalized_expm(b);
        let s_rho = quantum_relative_entropy(&reference.rho_star, &rho)?;
        let s_sigma = quantum_relative_entropy(&reference.sigma_star, &sigma)?;
        let frob_return = frobenius_norm(&(rho.matrix() - rho_base.matrix()))
            + frobenius_norm(&(sigma.matrix() - sigma_base.matrix()));
        let a_prime = canonical_transform(a);
        let b_prime = canonical_transform(b);
        let eigs_a = herm_eig(&a_prime)?;
        let eigs_b = herm_eig(&b_prime)?;
        samples.push(TrajectorySample {
            t,
            dual: DualState {
                t,
                a: a.clone(),
                b: b.clone(),
            },
            bloch_rho: bloch_vector(&rho).ok(),
            bloch_sigma: bloch_vector(&sigma).ok(),
            s_rho,
            s_sigma,
            s_total: s_rho + s_sigma,
            frob_return,
            rho,
            sigma,
            max_abs_eig_a_prime: eigs_a.min().abs().max(eigs_a.max().abs()),
            max_abs_eig_b_prime: eigs_b.min().abs().max(eigs_b.max().abs()),
        });
        Ok(())
    };

    push_sample(0.0, &a, &b)?;
    for step in 1..=steps {
        let (a_next, b_next) = match cfg.integrator {
            Integrator::Rk4 => rk4_step(game, cfg.transform, &a, &b, cfg.step_h),
            Integrator::Euler => euler_step(game, cfg.transform, &a, &b, cfg.step_h),
        };
        a = a_next;
        b = b_next;
        if step % cfg.record_every == 0 || step == steps {
            push_sample(step as f64 * cfg.step_h, &a, &b)?;
        }
    }
    Ok(Trajectory { samples })
}

/// One recorded point of the classical oracle trajectory.
#[derive(Debug, Clone)]
pub struct ClassicalSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Classical replicator oracle on the simplex:
/// `dx_i/dt = x_i((Py)_i - xᵀPy)` with the mirrored equation for `y`,
/// integrated with the same fixed-step integrator settings.
///
/// Used to cross-check the diagonal embedding: for diagonal observables the
/// quantum dynamics restricted to diagonal states are exactly this system.
pub fn classical_replicator_oracle(
    p: &[Vec<f64>],
    x0: &[f64],
    y0: &[f64],
    cfg: &ReplicatorConfig,
) -> Result<Vec<ClassicalSample>, ReplicatorError> {
    cfg.validate()?;
    let n = x0.len();
    let m = y0.len();
    if p.len() != n || p.iter().any(|row| row.len() != m) {
        return Err(ReplicatorError::BadConfig(format!(
            "payoff matrix shape does not match strategy dimensions {n}x{m}"
        )));
    }
    for (name, v) in [("x0", x0), ("y0", y0)] {
        if v.iter().any(|&p| p <= 0.0) {
            return Err(ReplicatorError::InvalidSimplex(format!(
                "{name} must be strictly positive"
            )));
        }
        let sum: f64 = v.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(ReplicatorError::InvalidSimplex(format!(
                "{name} sums to {sum}, not 1"
            )));
        }
    }

    let deriv = |x: &[f64], y: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let py: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|j| p[i][j] * y[j]).sum())
            .collect();
        let ptx: Vec<f64> = (0..m)
            .map(|j| (0..n).map(|i| p[i][j] * x[i]).sum())
            .collect();
        let value: f64 = (0..n).map(|i| x[i] * py[i]).sum();
        let dx: Vec<f64> = (0..n).map(|i| x[i] * (py[i] - value)).collect();
        let dy: Vec<f64> = (0..m).map(|j| y[j] * (-ptx[j] + value)).collect();
        (dx, dy)
    };
    let axpy = |x: &[f64], d: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(d.iter()).map(|(a, b)| a + h * b).collect()
    };

    let steps = (cfg.t_end / cfg.step_h).round() as usize;
    let h = cfg.step_h;
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(steps / cfg.record_every + 2);
    out.push(ClassicalSample {
        t: 0.0,
        x: x.clone(),
        y: y.clone(),
    });
    for step in 1..=steps {
        match cfg.integrator {
            Integrator::Euler => {
                let (dx, dy) = deriv(&x, &y);
                x = axpy(&x, &dx, h);
                y = axpy(&y, &dy, h);
            }
            Integrator::Rk4 => {
                let (k1x, k1y) = deriv(&x, &y);
                let (k2x, k2y) = deriv(&axpy(&x, &k1x, h * 0.5), &axpy(&y, &k1y, h * 0.5));
                let (k3x, k3y) = deriv(&axpy(&x, &k2x, h * 0.5), &axpy(&y, &k2y, h * 0.5));
                let (k4x, k4y) = deriv(&axpy(&x, &k3x, h), &axpy(&y, &k3y, h));
                for i in 0..n {
                    x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
                }
                for j in 0..m {
                    y[j] += h / 6.0 * (k1y[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j]);
                }
            }
        }
        if step % cfg.record_every == 0 || step == steps {
            out.push(ClassicalSample {
                t: step as f64 * h,
                x: x.clone(),
                y: y.clone(),
            });
        }
    }
    Ok(out)
}

/// Central finite-difference estimate of the divergence (trace of the
/// Jacobian) of the canonical-coordinate vector field at a dual state.
///
/// The chart treats a pinned Hermitian `n x n` matrix as `n² - 1` real
/// coordinates: the diagonal without the pinned `(1,1)` entry, plus real
/// and imaginary parts of the strict upper triangle. The separable structure
/// of the field makes the exact divergence zero; the probe reports what the
/// numerics see.
pub fn divergence_probe(game: &PayoffObservable, state: &DualState, fd_step: f64) -> f64 {
    let a = canonical_transform(&state.a);
    let b = canonical_transform(&state.b);
    let dims = (a.dim(), b.dim());
    let mut coords = Vec::new();
    encode_pinned(a.matrix(), &mut coords);
    encode_pinned(b.matrix(), &mut coords);

    let eval = |coords: &[f64]| -> Vec<f64> {
        let na = dims.0 * dims.0 - 1;
        let a = decode_pinned(&coords[..na], dims.0);
        let b = decode_pinned(&coords[na..], dims.1);
        let (fa, fb) = transformed_vector_field(
            game,
            &DualState { t: 0.0, a, b },
        );
        let mut out = Vec::with_capacity(coords.len());
        encode_pinned(fa.matrix(), &mut out);
        encode_pinned(fb.matrix(), &mut out);
        out
    };

    let mut divergence = 0.0;
    for i in 0..coords.len() {
        let mut plus = coords.clone();
        plus[i] += fd_step;
        let mut minus = coords.clone();
        minus[i] -= fd_step;
        divergence += (eval(&plus)[i] - eval(&minus)[i]) / (2.0 * fd_step);
    }
    divergence
}

fn encode_pinned(m: &CMatrix, out: &mut Vec<f64>) {
    let n = m.nrows();
    for i in 1..n {
        out.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(m[(i, j)].re);
            out.push(m[(i, j)].im);
        }
    }
}

fn decode_pinned(coords: &[f64], n: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 1..n {
        m[(i, i)] = C64::new(coords[k], 0.0);
        k += 1;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(coords[k], coords[k + 1]);
            k += 2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    debug_assert_eq!(k, coords.len());
    HermitianMatrix::from_symmetrized(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{embed_classical_diagonal, matching_pennies, matching_pennies_payoff};
    use crate::linalg::{identity, random_density};
    use crate::mmwu::{mmwu_step, MmwuState};

    fn mp_reference() -> NashCertificate {
        NashCertificate::uniform(&matching_pennies()).unwrap()
    }

    fn diagonal_density(probs: &[f64]) -> DensityMatrix {
        let n = probs.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        DensityMatrix::from_cmatrix(m).unwrap()
    }

    #[test]
    fn field_vanishes_at_uniform_duals_on_matching_pennies() {
        let mp = matching_pennies();
        let state = DualState {
            t: 0.0,
            a: HermitianMatrix::zeros(2),
            b: HermitianMatrix::zeros(2),
        };
        let (da, db) = dual_vector_field(&mp, &state);
        assert!(frobenius_norm(da.matrix()) < 1e-14);
        assert!(frobenius_norm(db.matrix()) < 1e-14);
    }

    #[test]
    fn constant_observable_gives_identity_direction_field() {
        let g = embed_classical_diagonal(&[vec![0.7, 0.7], vec![0.7, 0.7]]).unwrap();
        let state = DualState {
            t: 0.0,
            a: herm_logm(random_density(2, 1).hermitian()).unwrap(),
            b: herm_logm(random_density(2, 2).hermitian()).unwrap(),
        };
        let (da, db) = dual_vector_field(&g, &state);
        // field components are multiples of the identity
        for f in [&da, &db] {
            let c = f.matrix()[(0, 0)];
            assert!(frobenius_norm(&(f.matrix() - identity(2) * c)) < 1e-12);
        }
        // and the strategies do not move along a short trajectory
        let cfg = ReplicatorConfig {
            record_every: 10,
            ..ReplicatorConfig::rk4(1.0, 0.01)
        };
        let reference = NashCertificate::uniform(&g).unwrap();
        let traj = integrate(&g, &cfg, &reference).unwrap();
        let first = &traj.samples[0];
        for s in &traj.samples {
            assert!(frobenius_norm(&(s.rho.matrix() - first.rho.matrix())) < 1e-10);
        }
    }

    #[test]
    fn canonical_transform_pins_and_is_idempotent() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(5.0, 0.0);
        m[(0, 1)] = C64::new(1.0, 2.0);
        m[(1, 0)] = C64::new(1.0, -2.0);
        m[(1, 1)] = C64::new(-3.0, 0.0);
        let h = HermitianMatrix::new(m.clone()).unwrap();
        let c = canonical_transform(&h);
        assert_eq!(c.matrix()[(0, 0)], C64::new(0.0, 0.0));
        assert!(frobenius_norm(&(c.matrix() - (m - identity(2) * C64::new(5.0, 0.0)))) < 1e-14);
        let cc = canonical_transform(&c);
        assert_eq!(cc.matrix(), c.matrix());

        let zero = canonical_transform(&HermitianMatrix::zeros(3));
        assert!(frobenius_norm(zero.matrix()) == 0.0);
    }

    #[test]
    fn transformed_field_is_pinned_canonical_of_raw_field() {
        let mp = matching_pennies();
        for seed in 0..10u64 {
            let state = DualState {
                t: 0.0,
                a: herm_logm(random_density(2, 100 + seed).hermitian()).unwrap(),
                b: herm_logm(random_density(2, 200 + seed).hermitian()).unwrap(),
            };
            let (ra, rb) = dual_vector_field(&mp, &state);
            let (ta, tb) = transformed_vector_field(&mp, &state);
            assert_eq!(ta.matrix()[(0, 0)], C64::new(0.0, 0.0));
            assert_eq!(tb.matrix()[(0, 0)], C64::new(0.0, 0.0));
            assert!(
                frobenius_norm(&(ta.matrix() - canonical_transform(&ra).matrix())) < 1e-14
            );
            assert!(
                frobenius_norm(&(tb.matrix() - canonical_transform(&rb).matrix())) < 1e-14
            );
        }
    }

    #[test]
    fn uniform_start_is_stationary_with_zero_entropy() {
        let mp = matching_pennies();
        let cfg = ReplicatorConfig {
            record_every: 20,
            ..ReplicatorConfig::rk4(2.0, 0.01)
        };
        let u = DensityMatrix::maximally_mixed(2);
        let traj = integrate_from(&mp, &cfg, &mp_reference(), &u, &u).unwrap();
        for s in &traj.samples {
            assert!(s.s_total.abs() < 1e-12);
            assert!(s.frob_return < 1e-12);
        }
    }

    #[test]
    fn entropy_sum_is_conserved_on_matching_pennies() {
        let mp = matching_pennies();
        let cfg = ReplicatorConfig {
            seed_rho0: 5,
            seed_sigma0: 6,
            record_every: 100,
            ..ReplicatorConfig::rk4(10.0, 1e-3)
        };
        let traj = integrate(&mp, &cfg, &mp_reference()).unwrap();
        let report = traj.conservation(&mp_reference()).unwrap();
        assert!(
            report.max_drift <= 1e-5,
            "entropy drift {} too large",
            report.max_drift
        );
        assert!(report.s_total_initial > 0.0);
    }

    #[test]
    fn euler_integration_reproduces_mmwu_exactly() {
        let mp = matching_pennies();
        let rho0 = random_density(2, 3);
        let sigma0 = random_density(2, 4);
        let mu = 0.05;
        let steps = 100;

        let cfg = ReplicatorConfig {
            integrator: Integrator::Euler,
            transform: Transform::Raw,
            ..ReplicatorConfig::rk4(mu * steps as f64, mu)
        };
        let traj = integrate_from(&mp, &cfg, &mp_reference(), &rho0, &sigma0).unwrap();

        let mut state = MmwuState::from_initial_states(&mp, &rho0, &sigma0).unwrap();
        for (k, sample) in traj.samples.iter().enumerate() {
            assert!(
                frobenius_norm(&(sample.dual.a.matrix() - state.cum_a.matrix())) <= 1e-12,
                "dual A mismatch at step {k}"
            );
            assert!(
                frobenius_norm(&(sample.dual.b.matrix() - state.cum_b.matrix())) <= 1e-12,
                "dual B mismatch at step {k}"
            );
            assert!(
                frobenius_norm(&(sample.rho.matrix() - state.rho.matrix())) <= 1e-12,
                "state mismatch at step {k}"
            );
            if k < traj.samples.len() - 1 {
                state = mmwu_step(&mp, &state, mu);
            }
        }
    }

    #[test]
    fn canonical_and_raw_coordinates_admit_the_same_strategies() {
        let mp = matching_pennies();
        let rho0 = random_density(2, 9);
        let sigma0 = random_density(2, 10);
        let mut cfg = ReplicatorConfig {
            record_every: 50,
            transform: Transform::Raw,
            ..ReplicatorConfig::rk4(5.0, 1e-2)
        };
        let raw = integrate_from(&mp, &cfg, &mp_reference(), &rho0, &sigma0).unwrap();
        cfg.transform = Transform::Canonical;
        let canonical = integrate_from(&mp, &cfg, &mp_reference(), &rho0, &sigma0).unwrap();
        assert_eq!(raw.samples.len(), canonical.samples.len());
        for (r, c) in raw.samples.iter().zip(canonical.samples.iter()) {
            assert!(
                frobenius_norm(&(r.rho.matrix() - c.rho.matrix())) <= 1e-8,
                "strategies diverged at t = {}",
                r.t
            );
            // the canonical duals stay pinned
            assert_eq!(c.dual.a.matrix()[(0, 0)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn diagonal_game_keeps_diagonal_duals_diagonal() {
        let mp = matching_pennies();
        let rho0 = diagonal_density(&[0.7, 0.3]);
        let sigma0 = diagonal_density(&[0.4, 0.6]);
        let cfg = ReplicatorConfig {
            record_every: 25,
            ..ReplicatorConfig::rk4(5.0, 1e-2)
        };
        let traj = integrate_from(&mp, &cfg, &mp_reference(), &rho0, &sigma0).unwrap();
        for s in &traj.samples {
            assert!(s.dual.a.matrix()[(0, 1)].norm() < 1e-10);
            assert!(s.dual.b.matrix()[(0, 1)].norm() < 1e-10);
        }
    }

    #[test]
    fn diffeo_examples_and_roundtrip() {
        assert!(
            frobenius_norm(
                &(diffeo_forward(&HermitianMatrix::zeros(3)).matrix()
                    - DensityMatrix::maximally_mixed(3).matrix())
            ) < 1e-14
        );
        let mut m = CMatrix::zeros(2, 2);
        m[(1, 1)] = C64::new(2f64.ln(), 0.0);
        let fwd = diffeo_forward(&HermitianMatrix::new(m).unwrap());
        assert!((fwd.matrix()[(0, 0)].re - 1.0 / 3.0).abs() < 1e-14);
        assert!((fwd.matrix()[(1, 1)].re - 2.0 / 3.0).abs() < 1e-14);

        let inv = diffeo_inverse(&DensityMatrix::maximally_mixed(4)).unwrap();
        assert!(frobenius_norm(inv.matrix()) < 1e-14);
        let inv = diffeo_inverse(&diagonal_density(&[1.0 / 3.0, 2.0 / 3.0])).unwrap();
        assert!((inv.matrix()[(1, 1)].re - 2f64.ln()).abs() < 1e-14);

        for seed in 0..20u64 {
            for dim in [2usize, 4, 8] {
                let rho = random_density(dim, 37 * seed + dim as u64);
                let back = diffeo_forward(&diffeo_inverse(&rho).unwrap());
                assert!(
                    frobenius_norm(&(back.matrix() - rho.matrix())) <= 1e-10,
                    "roundtrip failed at dim {dim} seed {seed}"
                );
            }
        }
    }

    #[test]
    fn diffeo_inverse_rejects_singular_states() {
        let pure = diagonal_density(&[1.0, 0.0]);
        assert!(matches!(
            diffeo_inverse(&pure),
            Err(ReplicatorError::Linalg(
                LinalgError::NotPositiveDefinite { .. }
            ))
        ));
    }

    #[test]
    fn classical_oracle_uniform_start_is_constant_and_on_simplex() {
        let cfg = ReplicatorConfig {
            record_every: 10,
            ..ReplicatorConfig::rk4(5.0, 1e-2)
        };
        let traj =
            classical_replicator_oracle(&matching_pennies_payoff(), &[0.5, 0.5], &[0.5, 0.5], &cfg)
                .unwrap();
        for s in &traj {
            assert!((s.x[0] - 0.5).abs() < 1e-12);
            assert!((s.y[1] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn classical_oracle_preserves_the_simplex_while_cycling() {
        let cfg = ReplicatorConfig {
            record_every: 10,
            ..ReplicatorConfig::rk4(10.0, 1e-3)
        };
        let traj =
            classical_replicator_oracle(&matching_pennies_payoff(), &[0.9, 0.1], &[0.5, 0.5], &cfg)
                .unwrap();
        let mut moved = false;
        for s in &traj {
            assert!((s.x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!((s.y.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            if (s.x[0] - 0.9).abs() > 0.05 {
                moved = true;
            }
        }
        assert!(moved, "orbit did not cycle");
    }

    #[test]
    fn quantum_diagonal_embedding_matches_classical_oracle() {
        let p = matching_pennies_payoff();
        let mp = embed_classical_diagonal(&p).unwrap();
        let cfg = ReplicatorConfig {
            record_every: 100,
            ..ReplicatorConfig::rk4(5.0, 1e-3)
        };
        let x0 = [0.9, 0.1];
        let y0 = [0.5, 0.5];
        let classical = classical_replicator_oracle(&p, &x0, &y0, &cfg).unwrap();
        let quantum = integrate_from(
            &mp,
            &cfg,
            &mp_reference(),
            &diagonal_density(&x0),
            &diagonal_density(&y0),
        )
        .unwrap();
        assert_eq!(classical.len(), quantum.samples.len());
        for (c, q) in classical.iter().zip(quantum.samples.iter()) {
            for i in 0..2 {
                assert!(
                    (q.rho.matrix()[(i, i)].re - c.x[i]).abs() < 1e-6,
                    "x[{i}] mismatch at t = {}: {} vs {}",
                    c.t,
                    q.rho.matrix()[(i, i)].re,
                    c.x[i]
                );
                assert!(
                    (q.sigma.matrix()[(i, i)].re - c.y[i]).abs() < 1e-6,
                    "y[{i}] mismatch at t = {}",
                    c.t
                );
            }
        }
    }

    #[test]
    fn classical_oracle_rejects_degenerate_input() {
        let cfg = ReplicatorConfig::rk4(1.0, 0.1);
        assert!(matches!(
            classical_replicator_oracle(&matching_pennies_payoff(), &[1.0, 0.0], &[0.5, 0.5], &cfg),
            Err(ReplicatorError::InvalidSimplex(_))
        ));
        assert!(matches!(
            classical_replicator_oracle(&matching_pennies_payoff(), &[0.6, 0.6], &[0.5, 0.5], &cfg),
            Err(ReplicatorError::InvalidSimplex(_))
        ));
    }

    #[test]
    fn divergence_is_numerically_zero_on_matching_pennies() {
        let mp = matching_pennies();
        for seed in 0..5u64 {
            let state = DualState {
                t: 0.0,
                a: diffeo_inverse(&random_density(2, 300 + seed)).unwrap(),
                b: diffeo_inverse(&random_density(2, 400 + seed)).unwrap(),
            };
            let div = divergence_probe(&mp, &state, 1e-5);
            assert!(div.abs() <= 1e-6, "divergence {div:.3e} at seed {seed}");
        }
    }

    #[test]
    fn divergence_is_zero_for_constant_observables() {
        let g = embed_classical_diagonal(&[vec![0.7, 0.7], vec![0.7, 0.7]]).unwrap();
        let state = DualState {
            t: 0.0,
            a: diffeo_inverse(&random_density(2, 1)).unwrap(),
            b: diffeo_inverse(&random_density(2, 2)).unwrap(),
        };
        assert!(divergence_probe(&g, &state, 1e-5).abs() <= 1e-8);
    }

    #[test]
    fn euler_drifts_more_than_rk4() {
        let mp = matching_pennies();
        let mut cfg = ReplicatorConfig {
            seed_rho0: 5,
            seed_sigma0: 6,
            record_every: 10,
            ..ReplicatorConfig::rk4(10.0, 1e-2)
        };
        let rk4 = integrate(&mp, &cfg, &mp_reference()).unwrap();
        cfg.integrator = Integrator::Euler;
        let euler = integrate(&mp, &cfg, &mp_reference()).unwrap();
        let drift_rk4 = rk4.conservation(&mp_reference()).unwrap().max_drift;
        let drift_euler = euler.conservation(&mp_reference()).unwrap().max_drift;
        assert!(
            drift_euler > drift_rk4,
            "euler drift {drift_euler:.3e} not larger than rk4 {drift_rk4:.3e}"
        );
    }

    #[test]
    fn zero_horizon_yields_a_single_sample() {
        let mp = matching_pennies();
        let cfg = ReplicatorConfig {
            seed_rho0: 1,
            seed_sigma0: 2,
            ..ReplicatorConfig::rk4(0.0, 1e-3)
        };
        let traj = integrate(&mp, &cfg, &mp_reference()).unwrap();
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(traj.samples[0].frob_return, 0.0);
    }

    #[test]
    fn config_validation() {
        let mp = matching_pennies();
        let mut cfg = ReplicatorConfig::rk4(1.0, 2.0);
        assert!(matches!(
            integrate(&mp, &cfg, &mp_reference()),
            Err(ReplicatorError::BadConfig(_))
        ));
        cfg = ReplicatorConfig::rk4(1.0, -0.1);
        assert!(matches!(
            integrate(&mp, &cfg, &mp_reference()),
            Err(ReplicatorError::BadConfig(_))
        ));
        // boundary reference is rejected
        let cfg = ReplicatorConfig::rk4(1.0, 0.1);
        let boundary = NashCertificate::from_states(
            &mp,
            diagonal_density(&[1.0, 0.0]),
            DensityMatrix::maximally_mixed(2),
            0.0,
        )
        .unwrap();
        assert!(matches!(
            integrate(&mp, &cfg, &boundary),
            Err(ReplicatorError::Analysis(
                AnalysisError::ReferenceNotFullyMixed { .. }
            ))
        ));
    }

    #[test]
    fn orbit_eigenvalues_stay_bounded() {
        let mp = matching_pennies();
        let cfg = ReplicatorConfig {
            seed_rho0: 13,
            seed_sigma0: 14,
            record_every: 50,
            ..ReplicatorConfig::rk4(50.0, 5e-3)
        };
        let traj = integrate(&mp, &cfg, &mp_reference()).unwrap();
        let half = traj.samples.len() / 2;
        let max_first: f64 = traj.samples[..half]
            .iter()
            .map(|s| s.max_abs_eig_a_prime.max(s.max_abs_eig_b_prime))
            .fold(0.0, f64::max);
        let max_second: f64 = traj.samples[half..]
            .iter()
            .map(|s| s.max_abs_eig_a_prime.max(s.max_abs_eig_b_prime))
            .fold(0.0, f64::max);
        assert!(
            max_second <= 1.1 * max_first,
            "orbit growing: {max_second} vs {max_first}"
        );
    }

    #[test]
    fn matching_pennies_orbit_recurs() {
        let mp = matching_pennies();
        let cfg = ReplicatorConfig {
            seed_rho0: 23,
            seed_sigma0: 24,
            record_every: 20,
            ..ReplicatorConfig::rk4(50.0, 5e-3)
        };
        let traj = integrate(&mp, &cfg, &mp_reference()).unwrap();
        let report = traj.recurrence(0.1);
        assert!(report.recurred, "no recurrence within t = 50: {report:?}");
        assert!(report.t_return.unwrap() > report.t_excursion);
    }
}

//! Discrete-time Matrix Multiplicative Weights Update.
//!
//! Each player's state is the normalized matrix exponential of a signed
//! cumulative payoff operator:
//!
//! ```text
//! A_j = exp(μ Σ_{i<j} Φ(σ_i))    ρ_j = A_j / Tr A_j
//! B_j = exp(-μ Σ_{i<j} Φ†(ρ_i))  σ_j = B_j / Tr B_j
//! ```
//!
//! The state stores the cumulative exponents rather than `A_j`, `B_j`
//! themselves: `Tr A_j` grows exponentially in `j` and overflows doubles
//! once `j μ ‖Φ‖` passes ~700, while the exponent only grows linearly. The
//! exponential is applied with a max-eigenvalue shift at read time, and the
//! `log_tr` accumulators are shift-corrected so they always equal
//! `log Tr exp(cum)` of the unshifted exponent.
//!
//! The per-step bookkeeping exposes the relative-entropy ledger: with a
//! fully mixed equilibrium reference, the change of the summed relative
//! entropies equals the log trace ratios exactly, and is sandwiched by the
//! payoff-weighted bounds
//!
//! ```text
//! μ e^{-μ} Tr(ρ_j Φ(σ_{j-1})) - μ e^{μ} Tr(ρ_{j-1} Φ(σ_j))
//!     ≤ ΔS(ρ*‖ρ_j) + ΔS(σ*‖σ_j) ≤
//! (μ e^{μ} - μ e^{-μ}) Tr(ρ_{j-1} Φ(σ_{j-1}))
//! ```
//!
//! The sandwich is only valid for observables with spectrum in `[0, 1]`
//! (its derivation bounds `exp(δA)` by `1 + δ e^δ A`, which needs
//! `0 ≼ A ≼ 1`). For a general Hermitian observable the ledger therefore
//! evaluates the bounds through the affinely normalized equivalent game
//! `R̃ = (R - λ_min 1) / (λ_max - λ_min)` with step `μ̃ = μ (λ_max - λ_min)`:
//! shifting and scaling the observable this way leaves every iterate (and
//! the entropy deltas) bit-identical while making the sandwich sound. When
//! `R` already has spectrum in `[0, 1]` this reduces to the formulas above.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{quantum_relative_entropy, AnalysisError};
use crate::game::{GameError, NashCertificate, PayoffObservable};
use crate::linalg::{
    herm_logm, normalized_expm, C64, CMatrix, DensityMatrix, HermitianMatrix, LinalgError,
};

#[derive(Debug, Error)]
pub enum MmwuError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("entropy ledger needs a trajectory recorded every step, got record_every = {0}")]
    SubsampledTrajectory(usize),
}

/// Step-size schedule.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    /// Fixed μ; defaults to ε/8 when unset.
    Constant {
        #[serde(default)]
        mu: Option<f64>,
    },
    /// `μ_t = log(1 + 1/t^a)` with `t` starting at 1, so `μ_1 = log 2`.
    Decreasing { exponent: f64 },
}

/// Initial condition for both players.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// `A_0 = 1`, i.e. both players start maximally mixed.
    UniformIdentity,
    /// Seeded random full-rank density matrices.
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MmwuConfig {
    /// Target approximation quality of the time-averaged pair.
    pub epsilon: f64,
    #[serde(default = "Schedule::default_constant")]
    pub schedule: Schedule,
    /// Defaults to `ceil(64 log(nm) / ε²)`.
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub seed_rho0: u64,
    #[serde(default = "default_seed_sigma0")]
    pub seed_sigma0: u64,
    #[serde(default = "Init::default_uniform")]
    pub init: Init,
    /// Include the initial iterate in the time average (the guarantee is for
    /// averages; whether `j = 0` joins them is a convention).
    #[serde(default = "default_true")]
    pub average_include_initial: bool,
}

fn default_record_every() -> usize {
    1
}
fn default_seed_sigma0() -> u64 {
    1
}
fn default_true() -> bool {
    true
}

impl Schedule {
    fn default_constant() -> Self {
        Schedule::Constant { mu: None }
    }
}

impl Init {
    fn default_uniform() -> Self {
        Init::UniformIdentity
    }
}

impl MmwuConfig {
    pub fn constant(epsilon: f64) -> Self {
        Self {
            epsilon,
            schedule: Schedule::default_constant(),
            max_iters: None,
            record_every: 1,
            seed_rho0: 0,
            seed_sigma0: 1,
            init: Init::UniformIdentity,
            average_include_initial: true,
        }
    }

    /// Step size used for the step from state `j` to `j + 1`.
    pub fn mu_at(&self, step: usize) -> f64 {
        match &self.schedule {
            Schedule::Constant { mu } => mu.unwrap_or(self.epsilon / 8.0),
            Schedule::Decreasing { exponent } => {
                let t = (step + 1) as f64;
                (1.0 + t.powf(-exponent)).ln()
            }
        }
    }

    /// `max_iters`, defaulting to `ceil(64 log(nm) / ε²)`.
    pub fn iters_for(&self, game: &PayoffObservable) -> usize {
        self.max_iters.unwrap_or_else(|| {
            let nm = (game.dim_a() * game.dim_b()) as f64;
            (64.0 * nm.ln() / (self.epsilon * self.epsilon)).ceil() as usize
        })
    }

    fn validate(&self) -> Result<(), MmwuError> {
        if self.epsilon <= 0.0 {
            return Err(MmwuError::BadConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.record_every == 0 {
            return Err(MmwuError::BadConfig("record_every must be >= 1".into()));
        }
        if let Schedule::Constant { mu: Some(mu) } = self.schedule {
            if mu < 0.0 {
                return Err(MmwuError::BadConfig(format!("mu must be >= 0, got {mu}")));
            }
        }
        Ok(())
    }
}

/// Full per-step state of the coupled update.
#[derive(Debug, Clone)]
pub struct MmwuState {
    pub step: usize,
    /// `μ`-weighted sum of `Φ(σ_i)`: the exponent of `A_j`.
    pub cum_a: HermitianMatrix,
    /// Negated `μ`-weighted sum of `Φ†(ρ_i)`: the exponent of `B_j`.
    pub cum_b: HermitianMatrix,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    /// `log Tr exp(cum_a)` of the unshifted exponent.
    pub log_tr_a: f64,
    pub log_tr_b: f64,
}

impl MmwuState {
    /// Algorithm start: `A_0 = 1`, `ρ_0 = 1/n` (and likewise for Bob).
    pub fn uniform(game: &PayoffObservable) -> Self {
        let (n, m) = (game.dim_a(), game.dim_b());
        let cum_a = HermitianMatrix::zeros(n);
        let cum_b = HermitianMatrix::zeros(m);
        let (rho, log_tr_a) = normalized_expm(&cum_a);
        let (sigma, log_tr_b) = normalized_expm(&cum_b);
        Self {
            step: 0,
            cum_a,
            cum_b,
            rho,
            sigma,
            log_tr_a,
            log_tr_b,
        }
    }

    /// Start from given strictly positive definite states: the cumulative
    /// exponents are their matrix logarithms, so `ρ_0`, `σ_0` reproduce the
    /// inputs under the normalized exponential.
    pub fn from_initial_states(
        game: &PayoffObservable,
        rho0: &DensityMatrix,
        sigma0: &DensityMatrix,
    ) -> Result<Self, MmwuError> {
        assert_eq!(rho0.dim(), game.dim_a(), "rho dimension mismatch");
        assert_eq!(sigma0.dim(), game.dim_b(), "sigma dimension mismatch");
        let cum_a = herm_logm(rho0.hermitian())?;
        let cum_b = herm_logm(sigma0.hermitian())?;
        let (rho, log_tr_a) = normalized_expm(&cum_a);
        let (sigma, log_tr_b) = normalized_expm(&cum_b);
        Ok(Self {
            step: 0,
            cum_a,
            cum_b,
            rho,
            sigma,
            log_tr_a,
            log_tr_b,
        })
    }

    fn for_config(game: &PayoffObservable, cfg: &MmwuConfig) -> Result<Self, MmwuError> {
        match cfg.init {
            Init::UniformIdentity => Ok(Self::uniform(game)),
            Init::Random => {
                let rho0 = crate::linalg::random_density(game.dim_a(), cfg.seed_rho0);
                let sigma0 = crate::linalg::random_density(game.dim_b(), cfg.seed_sigma0);
                Self::from_initial_states(game, &rho0, &sigma0)
            }
        }
    }
}

/// One simultaneous update: both exponents accumulate the payoff images of
/// the *current* pair, then the states are re-read through the shifted
/// exponential.
pub fn mmwu_step(game: &PayoffObservable, state: &MmwuState, mu: f64) -> MmwuState {
    assert!(mu >= 0.0, "step size must be non-negative");
    let gain_a = game.phi_apply(state.sigma.hermitian());
    let loss_b = game.phi_adjoint_apply(state.rho.hermitian());
    let mu_c = C64::new(mu, 0.0);
    let cum_a = HermitianMatrix::from_symmetrized(&(state.cum_a.matrix() + gain_a.matrix() * mu_c));
    let cum_b = HermitianMatrix::from_symmetrized(&(state.cum_b.matrix() - loss_b.matrix() * mu_c));
    let (rho, log_tr_a) = normalized_expm(&cum_a);
    let (sigma, log_tr_b) = normalized_expm(&cum_b);
    MmwuState {
        step: state.step + 1,
        cum_a,
        cum_b,
        rho,
        sigma,
        log_tr_a,
        log_tr_b,
    }
}

/// Recorded snapshot of a run.
#[derive(Debug, Clone)]
pub struct MmwuSample {
    pub step: usize,
    /// Step size used for the update that produced this state; 0 at `j = 0`.
    pub mu_applied: f64,
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
    pub log_tr_a: f64,
    pub log_tr_b: f64,
}

#[derive(Debug, Clone)]
pub struct MmwuTrajectory {
    pub samples: Vec<MmwuSample>,
    pub record_every: usize,
}

fn sample_of(state: &MmwuState, mu_applied: f64) -> MmwuSample {
    MmwuSample {
        step: state.step,
        mu_applied,
        rho: state.rho.clone(),
        sigma: state.sigma.clone(),
        log_tr_a: state.log_tr_a,
        log_tr_b: state.log_tr_b,
    }
}

/// Runs the full iteration and certifies the uniform time average.
///
/// The average runs over the `N` iterates that generated updates
/// (`j = 0 .. N-1`), or over `j = 1 .. N` when
/// `average_include_initial` is off.
pub fn run_mmwu(
    game: &PayoffObservable,
    cfg: &MmwuConfig,
) -> Result<(MmwuTrajectory, NashCertificate), MmwuError> {
    cfg.validate()?;
    let iters = cfg.iters_for(game);
    let mut state = MmwuState::for_config(game, cfg)?;

    let (n, m) = (game.dim_a(), game.dim_b());
    let mut sum_rho = CMatrix::zeros(n, n);
    let mut sum_sigma = CMatrix::zeros(m, m);
    let mut samples = Vec::with_capacity(iters / cfg.record_every + 2);
    samples.push(sample_of(&state, 0.0));

    for j in 0..iters {
        if cfg.average_include_initial {
            sum_rho += state.rho.matrix();
            sum_sigma += state.sigma.matrix();
        }
        let mu = cfg.mu_at(j);
        state = mmwu_step(game, &state, mu);
        if !cfg.average_include_initial {
            sum_rho += state.rho.matrix();
            sum_sigma += state.sigma.matrix();
        }
        if state.step % cfg.record_every == 0 || state.step == iters {
            samples.push(sample_of(&state, mu));
        }
    }

    let scale = C64::new(1.0 / iters.max(1) as f64, 0.0);
    let avg_rho = DensityMatrix::from_cmatrix(sum_rho * scale)?;
    let avg_sigma = DensityMatrix::from_cmatrix(sum_sigma * scale)?;
    let certificate = NashCertificate::from_states(game, avg_rho, avg_sigma, cfg.epsilon)?;
    Ok((
        MmwuTrajectory {
            samples,
            record_every: cfg.record_every,
        },
        certificate,
    ))
}

/// Convenience wrapper: compute an ε-approximate equilibrium with the
/// algorithm's own defaults and return only the certificate.
pub fn find_nash(game: &PayoffObservable, epsilon: f64) -> Result<NashCertificate, MmwuError> {
    let cfg = MmwuConfig::constant(epsilon);
    run_mmwu(game, &cfg).map(|(_, cert)| cert)
}

/// Per-step entropy bookkeeping row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyLedgerRow {
    pub step: usize,
    /// `S(ρ*‖ρ_j) - S(ρ*‖ρ_{j-1})`
    pub delta_s_rho: f64,
    pub delta_s_sigma: f64,
    /// `log Tr A_j - log Tr A_{j-1}`
    pub log_ratio_a: f64,
    pub log_ratio_b: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Evaluates the per-step entropy deltas, the log-trace-ratio identity and
/// the payoff-weighted sandwich bounds against a fully mixed reference.
///
/// Requires a trajectory recorded at every step; subsampled trajectories are
/// rejected rather than interpolated. The bounds are evaluated for the
/// `[0, 1]`-normalized equivalent game (see the module docs), so they are
/// sound for any Hermitian observable.
pub fn entropy_ledger(
    game: &PayoffObservable,
    traj: &MmwuTrajectory,
    reference: &NashCertificate,
) -> Result<Vec<EntropyLedgerRow>, MmwuError> {
    if !reference.fully_mixed() {
        return Err(AnalysisError::ReferenceNotFullyMixed {
            min_eig_rho: reference.min_eig_rho,
            min_eig_sigma: reference.min_eig_sigma,
        }
        .into());
    }
    if traj.record_every != 1 {
        return Err(MmwuError::SubsampledTrajectory(traj.record_every));
    }
    // Spectral window of the observable; shift/scale to [0, 1] for the
    // bounds. A (near-)constant observable freezes the iterates, so zero
    // bounds are exact there.
    let spectrum = crate::linalg::herm_eig(game.observable())?;
    let shift = spectrum.min();
    let scale = spectrum.max() - spectrum.min();
    let degenerate = scale <= 1e-300;

    let mut rows = Vec::with_capacity(traj.samples.len().saturating_sub(1));
    let mut prev_s = None;
    for pair in traj.samples.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        debug_assert_eq!(cur.step, prev.step + 1);
        let (s_rho_prev, s_sigma_prev) = match prev_s {
            Some(v) => v,
            None => (
                quantum_relative_entropy(&reference.rho_star, &prev.rho)?,
                quantum_relative_entropy(&reference.sigma_star, &prev.sigma)?,
            ),
        };
        let s_rho_cur = quantum_relative_entropy(&reference.rho_star, &cur.rho)?;
        let s_sigma_cur = quantum_relative_entropy(&reference.sigma_star, &cur.sigma)?;

        let (lower_bound, upper_bound) = if degenerate {
            (0.0, 0.0)
        } else {
            let mu_n = cur.mu_applied * scale;
            let u_norm = |payoff: f64| (payoff - shift) / scale;
            let cross_new = u_norm(game.payoff(&cur.rho, &prev.sigma));
            let cross_old = u_norm(game.payoff(&prev.rho, &cur.sigma));
            let diag_prev = u_norm(game.payoff(&prev.rho, &prev.sigma));
            (
                mu_n * (-mu_n).exp() * cross_new - mu_n * mu_n.exp() * cross_old,
                (mu_n * mu_n.exp() - mu_n * (-mu_n).exp()) * diag_prev,
            )
        };
        rows.push(EntropyLedgerRow {
            step: cur.step,
            delta_s_rho: s_rho_cur - s_rho_prev,
            delta_s_sigma: s_sigma_cur - s_sigma_prev,
            log_ratio_a: cur.log_tr_a - prev.log_tr_a,
            log_ratio_b: cur.log_tr_b - prev.log_tr_b,
            lower_bound,
            upper_bound,
        });
        prev_s = Some((s_rho_cur, s_sigma_cur));
    }
    Ok(rows)
}

/// Empirical step-size limit probe: for each `μ` runs `steps` iterations
/// from the same seeded initial condition and reports
/// `max_j |ΔS_total| / μ`.
///
/// With respect to any exact fully mixed equilibrium the per-step change of
/// the summed relative entropies equals
/// `log(Tr A_j / Tr A_{j-1}) + log(Tr B_j / Tr B_{j-1})`, so that quantity
/// is measured directly and no reference state is needed. The per-step
/// change is O(μ²), so the reported normalized sequence vanishes linearly
/// with μ.
pub fn vanishing_limit_probe(
    game: &PayoffObservable,
    mus: &[f64],
    steps: usize,
    init: Init,
    seed: u64,
) -> Vec<(f64, f64)> {
    assert!(
        mus.windows(2).all(|w| w[0] > w[1]) && mus.iter().all(|&m| m > 0.0),
        "step sizes must be strictly decreasing and positive"
    );
    let start = match init {
        Init::UniformIdentity => MmwuState::uniform(game),
        Init::Random => {
            let rho0 = crate::linalg::random_density(game.dim_a(), seed);
            let sigma0 = crate::linalg::random_density(game.dim_b(), seed.wrapping_add(1));
            MmwuState::from_initial_states(game, &rho0, &sigma0)
                .expect("random densities are full rank")
        }
    };
    mus.iter()
        .map(|&mu| {
            let mut state = start.clone();
            let mut worst = 0.0f64;
            for _ in 0..steps {
                let next = mmwu_step(game, &state, mu);
                let ds_total =
                    (next.log_tr_a - state.log_tr_a) + (next.log_tr_b - state.log_tr_b);
                worst = worst.max(ds_total.abs() / mu);
                state = next;
            }
            (mu, worst)
        })
        .collect()
}

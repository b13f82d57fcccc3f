//! Information-theoretic and dynamical analytics.
//!
//! Entropies are natural-log (nats) throughout. The conserved quantity of
//! the replicator flow is the sum of quantum relative entropies from a fully
//! mixed equilibrium to the evolving pair; [`conservation_report`] measures
//! its drift and [`detect_recurrence`] turns the Frobenius return distance
//! into a Poincare-recurrence verdict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::NashCertificate;
use crate::linalg::{
    herm_eig, hs_inner, pauli_x, pauli_y, pauli_z, DensityMatrix, LinalgError, PD_FLOOR,
};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("support violation: rho has weight {overlap:.3e} on a null eigendirection of sigma (relative entropy diverges)")]
    SupportViolation { overlap: f64 },
    #[error("invalid probability vector: {reason}")]
    InvalidSimplex { reason: String },
    #[error("Bloch vector requires a qubit state, got dimension {dim}")]
    NotAQubit { dim: usize },
    #[error("reference is not fully mixed: min eigenvalues {min_eig_rho:.3e}, {min_eig_sigma:.3e}")]
    ReferenceNotFullyMixed { min_eig_rho: f64, min_eig_sigma: f64 },
}

/// Von Neumann entropy `S(ρ) = -Tr(ρ log ρ)` in nats, in `[0, log dim]`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let spectrum = herm_eig(rho.hermitian()).expect("density matrix eigendecomposition");
    let s: f64 = spectrum
        .eigenvalues
        .iter()
        .filter(|&&p| p > PD_FLOOR)
        .map(|&p| -p * p.ln())
        .sum();
    s.max(0.0)
}

/// Quantum relative entropy `S(ρ‖σ) = Tr(ρ(log ρ - log σ))` in nats.
///
/// Computed spectrally with `0 log 0 = 0` on ρ's null space. If σ has a
/// null eigendirection carrying ρ-weight above 1e-10 the divergence is
/// infinite; that is reported as [`AnalysisError::SupportViolation`] since
/// every in-scope trajectory stays interior and a violation signals a
/// numerical failure worth surfacing.
pub fn quantum_relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
) -> Result<f64, AnalysisError> {
    let rho_spectrum = herm_eig(rho.hermitian())?;
    let tr_rho_log_rho: f64 = rho_spectrum
        .eigenvalues
        .iter()
        .filter(|&&p| p > PD_FLOOR)
        .map(|&p| p * p.ln())
        .sum();

    let sigma_spectrum = herm_eig(sigma.hermitian())?;
    let mut tr_rho_log_sigma = 0.0;
    for (i, &q) in sigma_spectrum.eigenvalues.iter().enumerate() {
        let u = sigma_spectrum.eigenvectors.column(i);
        // weight of rho in this eigendirection: <u| rho |u>
        let weight = (u.adjoint() * rho.matrix() * u)[(0, 0)].re;
        if q <= PD_FLOOR {
            if weight > 1e-10 {
                return Err(AnalysisError::SupportViolation { overlap: weight });
            }
        } else {
            tr_rho_log_sigma += weight * q.ln();
        }
    }
    Ok(tr_rho_log_rho - tr_rho_log_sigma)
}

/// Shannon entropy `-Σ p log p` in nats; equals the von Neumann entropy of
/// `diag(p)`.
pub fn shannon_entropy(p: &[f64]) -> Result<f64, AnalysisError> {
    if p.is_empty() {
        return Err(AnalysisError::InvalidSimplex {
            reason: "empty vector".into(),
        });
    }
    if let Some(&bad) = p.iter().find(|&&x| x < -1e-12) {
        return Err(AnalysisError::InvalidSimplex {
            reason: format!("negative entry {bad}"),
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(AnalysisError::InvalidSimplex {
            reason: format!("entries sum to {sum}, not 1"),
        });
    }
    Ok(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum())
}

/// Pauli expectation triple `(Tr ρσ_x, Tr ρσ_y, Tr ρσ_z)` of a qubit state;
/// its norm is at most 1, with equality exactly for pure states.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<(f64, f64, f64), AnalysisError> {
    if rho.dim() != 2 {
        return Err(AnalysisError::NotAQubit { dim: rho.dim() });
    }
    Ok((
        hs_inner(&pauli_x(), rho.matrix()).re,
        hs_inner(&pauli_y(), rho.matrix()).re,
        hs_inner(&pauli_z(), rho.matrix()).re,
    ))
}

/// Whether and when a trajectory returned near its starting point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecurrenceReport {
    /// First time the return distance exceeds half its trajectory maximum.
    pub t_excursion: f64,
    /// First later time it drops below `return_frac * max_excursion`.
    pub t_return: Option<f64>,
    pub max_excursion: f64,
    pub return_frac: f64,
    pub recurred: bool,
}

/// Scans a `(t, frob_return)` series for an excursion followed by a return.
///
/// The criterion is a fixed-threshold rendering of "returns arbitrarily
/// close": t_excursion is the first crossing of half the global maximum and
/// t_return the first subsequent drop below `return_frac` times the maximum.
/// A trajectory that never leaves its starting point (zero excursion) counts
/// as recurred at the first sample.
///
/// Panics if fewer than 3 samples are supplied.
pub fn detect_recurrence(samples: &[(f64, f64)], return_frac: f64) -> RecurrenceReport {
    assert!(samples.len() >= 3, "recurrence detection needs >= 3 samples");
    let max_excursion = samples.iter().map(|&(_, f)| f).fold(0.0f64, f64::max);
    if max_excursion < 1e-14 {
        return RecurrenceReport {
            t_excursion: samples[0].0,
            t_return: Some(samples[0].0),
            max_excursion,
            return_frac,
            recurred: true,
        };
    }
    let excursion_idx = samples
        .iter()
        .position(|&(_, f)| f > 0.5 * max_excursion)
        .expect("the maximum itself exceeds half-max");
    let t_return = samples[excursion_idx + 1..]
        .iter()
        .find(|&&(_, f)| f < return_frac * max_excursion)
        .map(|&(t, _)| t);
    RecurrenceReport {
        t_excursion: samples[excursion_idx].0,
        t_return,
        max_excursion,
        return_frac,
        recurred: t_return.is_some(),
    }
}

/// Drift summary for the conserved relative-entropy sum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConservationReport {
    pub s_total_initial: f64,
    pub max_drift: f64,
    pub drift_per_unit_time: f64,
    /// Exploitability of the reference pair; the conservation law is exact
    /// only at an exact equilibrium, so this records the slack budget.
    pub reference_epsilon: f64,
}

/// Measures `max_t |s_total(t) - s_total(0)|` over a `(t, s_total)` series.
///
/// The reference must be fully mixed, otherwise the entropies backing the
/// series were not well-defined in the first place.
pub fn conservation_report(
    samples: &[(f64, f64)],
    reference: &NashCertificate,
) -> Result<ConservationReport, AnalysisError> {
    if !reference.fully_mixed() {
        return Err(AnalysisError::ReferenceNotFullyMixed {
            min_eig_rho: reference.min_eig_rho,
            min_eig_sigma: reference.min_eig_sigma,
        });
    }
    assert!(!samples.is_empty(), "conservation report needs samples");
    let s0 = samples[0].1;
    let max_drift = samples
        .iter()
        .map(|&(_, s)| (s - s0).abs())
        .fold(0.0f64, f64::max);
    let duration = samples.last().unwrap().0 - samples[0].0;
    Ok(ConservationReport {
        s_total_initial: s0,
        max_drift,
        drift_per_unit_time: if duration > 0.0 {
            max_drift / duration
        } else {
            0.0
        },
        reference_epsilon: reference.exploitability,
    })
}

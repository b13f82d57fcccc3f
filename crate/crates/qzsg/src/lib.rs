//! Learning dynamics in two-player zero-sum quantum games.
//!
//! Players hold density matrices instead of probability vectors; a Hermitian
//! payoff observable `R` on the joint space induces the payoff superoperator
//! `Φ` and its adjoint. On top of that this crate implements
//!
//! * the discrete Matrix Multiplicative Weights Update ([`mmwu`]), with the
//!   per-step relative-entropy ledger and its lower/upper bounds,
//! * the continuous-time quantum replicator dynamics ([`replicator`]),
//!   integrated in the dual (cumulative payoff) space,
//! * analytics ([`analysis`]): von Neumann and relative entropies, Bloch
//!   vectors, entropy-conservation and Poincare-recurrence reports,
//! * game construction ([`game`]): classical payoff matrices embedded
//!   diagonally or through a unitary basis transform, plus seeded multi-qubit
//!   games with a uniform interior equilibrium.
//!
//! The `qzsg` binary drives experiments from JSON configs and writes
//! plot-ready CSV; see the crate examples for library usage.

pub mod analysis;
pub mod cli;
pub mod game;
pub mod linalg;
pub mod mmwu;
pub mod replicator;

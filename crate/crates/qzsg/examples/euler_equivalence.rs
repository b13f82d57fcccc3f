//! The discrete update is exactly the forward-Euler discretization of the
//! dual-space flow: with matching step sizes the two code paths agree to
//! the last bit.
//!
//! ```sh
//! cargo run --release --example euler_equivalence
//! ```

use qzsg::game::{matching_pennies, NashCertificate};
use qzsg::linalg::{frobenius_norm, random_density};
use qzsg::mmwu::{mmwu_step, MmwuState};
use qzsg::replicator::{integrate_from, Integrator, ReplicatorConfig, Transform};

fn main() -> Result<(), Box<dyn std::error::Error>> {
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
    let reference = NashCertificate::uniform(&mp)?;
    let traj = integrate_from(&mp, &cfg, &reference, &rho0, &sigma0)?;

    let mut state = MmwuState::from_initial_states(&mp, &rho0, &sigma0)?;
    let mut worst: f64 = 0.0;
    for (k, sample) in traj.samples.iter().enumerate() {
        let gap = frobenius_norm(&(sample.dual.a.matrix() - state.cum_a.matrix()))
            .max(frobenius_norm(&(sample.dual.b.matrix() - state.cum_b.matrix())));
        worst = worst.max(gap);
        if k < traj.samples.len() - 1 {
            state = mmwu_step(&mp, &state, mu);
        }
    }
    println!("{steps} Euler steps (h = {mu}) vs {steps} MMWU steps (mu = {mu}):");
    println!("worst entrywise dual gap = {worst:.3e}");
    Ok(())
}

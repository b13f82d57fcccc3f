//! The commuting case: for a diagonal observable and diagonal initial
//! states, quantum replicator dynamics reduce to the classical replicator
//! equations on the simplex.
//!
//! ```sh
//! cargo run --release --example classical_vs_quantum
//! ```

use qzsg::game::{embed_classical_diagonal, matching_pennies_payoff, NashCertificate};
use qzsg::linalg::{C64, CMatrix, DensityMatrix};
use qzsg::replicator::{classical_replicator_oracle, integrate_from, ReplicatorConfig};

fn diagonal_density(probs: &[f64]) -> DensityMatrix {
    let mut m = CMatrix::zeros(probs.len(), probs.len());
    for (i, &p) in probs.iter().enumerate() {
        m[(i, i)] = C64::new(p, 0.0);
    }
    DensityMatrix::from_cmatrix(m).unwrap()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = matching_pennies_payoff();
    let game = embed_classical_diagonal(&p)?;
    let reference = NashCertificate::uniform(&game)?;
    let cfg = ReplicatorConfig {
        record_every: 1000,
        ..ReplicatorConfig::rk4(10.0, 1e-3)
    };
    let x0 = [0.9, 0.1];
    let y0 = [0.5, 0.5];

    let classical = classical_replicator_oracle(&p, &x0, &y0, &cfg)?;
    let quantum = integrate_from(
        &game,
        &cfg,
        &reference,
        &diagonal_density(&x0),
        &diagonal_density(&y0),
    )?;

    println!(
        "{:>6} {:>12} {:>12} {:>12}",
        "t", "classical x0", "quantum x0", "gap"
    );
    let mut worst: f64 = 0.0;
    for (c, q) in classical.iter().zip(quantum.samples.iter()) {
        let qx = q.rho.matrix()[(0, 0)].re;
        let gap = (qx - c.x[0]).abs();
        worst = worst.max(gap);
        println!("{:>6.1} {:>12.8} {:>12.8} {:>12.3e}", c.t, c.x[0], qx, gap);
    }
    println!("\nworst diagonal gap over t in [0, 10]: {worst:.3e}");
    Ok(())
}

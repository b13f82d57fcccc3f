//! Approximating equilibria with the matrix multiplicative weights update:
//! the time-averaged iterates converge to an ε-Nash pair even though the
//! day-to-day iterates cycle forever.
//!
//! ```sh
//! cargo run --release --example mmwu_nash
//! ```

use qzsg::game::{matching_pennies, multi_qubit_interior_game};
use qzsg::mmwu::{run_mmwu, Init, MmwuConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mp = matching_pennies();
    let mut cfg = MmwuConfig::constant(0.1);
    cfg.init = Init::Random;
    cfg.seed_rho0 = 7;
    cfg.seed_sigma0 = 8;
    cfg.record_every = 1000;
    println!(
        "Matching Pennies, epsilon = {}, mu = {}, N = {} steps",
        cfg.epsilon,
        cfg.mu_at(0),
        cfg.iters_for(&mp)
    );
    let (_, cert) = run_mmwu(&mp, &cfg)?;
    println!(
        "  time-average: value {:+.4}, exploitability {:.3e}, min eigs ({:.4}, {:.4})\n",
        cert.value, cert.exploitability, cert.min_eig_rho, cert.min_eig_sigma
    );

    let spec = multi_qubit_interior_game(2, 3)?;
    let game = spec.to_observable()?;
    let mut cfg = MmwuConfig::constant(0.2);
    cfg.init = Init::Random;
    cfg.seed_rho0 = 17;
    cfg.seed_sigma0 = 18;
    cfg.record_every = 1000;
    println!(
        "{}, epsilon = {}, N = {} steps",
        spec.name,
        cfg.epsilon,
        cfg.iters_for(&game)
    );
    let (_, cert) = run_mmwu(&game, &cfg)?;
    println!(
        "  time-average: value {:+.4}, exploitability {:.3e}, min eigs ({:.4}, {:.4})",
        cert.value, cert.exploitability, cert.min_eig_rho, cert.min_eig_sigma
    );
    println!("  (the uniform pair is the exact equilibrium of this construction)");
    Ok(())
}

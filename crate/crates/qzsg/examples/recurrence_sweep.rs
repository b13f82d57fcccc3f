//! Poincare recurrence at desk scale: a 20-seed Matching Pennies sweep plus
//! a single 2-qubit trajectory, reporting when each orbit first returns
//! close to its starting point.
//!
//! ```sh
//! cargo run --release --example recurrence_sweep
//! ```

use qzsg::game::{matching_pennies, multi_qubit_interior_game, NashCertificate};
use qzsg::replicator::{integrate, ReplicatorConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mp = matching_pennies();
    let reference = NashCertificate::uniform(&mp)?;

    println!("Matching Pennies, 20 seeds, t_end = 200:");
    println!("{:>6} {:>10} {:>12} {:>10}", "seed", "t_return", "max_excursion", "recurred");
    let mut recurred = 0;
    for seed in 0..20u64 {
        let cfg = ReplicatorConfig {
            seed_rho0: seed,
            seed_sigma0: seed + 1000,
            record_every: 10,
            ..ReplicatorConfig::rk4(200.0, 5e-3)
        };
        let report = integrate(&mp, &cfg, &reference)?.recurrence(0.1);
        if report.recurred {
            recurred += 1;
        }
        println!(
            "{:>6} {:>10} {:>12.4} {:>10}",
            seed,
            report.t_return.map(|t| format!("{t:.2}")).unwrap_or_else(|| "-".into()),
            report.max_excursion,
            report.recurred
        );
    }
    println!("recurrence fraction: {}/20\n", recurred);

    let spec = multi_qubit_interior_game(2, 3)?;
    let game = spec.to_observable()?;
    let reference = NashCertificate::uniform(&game)?;
    let cfg = ReplicatorConfig {
        seed_rho0: 1,
        seed_sigma0: 2,
        record_every: 4,
        ..ReplicatorConfig::rk4(400.0, 1e-2)
    };
    let traj = integrate(&game, &cfg, &reference)?;
    let report = traj.recurrence(0.1);
    println!("2-qubit game `{}`: {} recorded steps", spec.name, traj.samples.len());
    println!(
        "max excursion {:.4}, first half-max crossing at t = {:.2}, return below {:.0}% at t = {}",
        report.max_excursion,
        report.t_excursion,
        100.0 * report.return_frac,
        report.t_return.map(|t| format!("{t:.2}")).unwrap_or_else(|| "never".into()),
    );
    Ok(())
}

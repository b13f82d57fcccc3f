//! As the step size shrinks, the normalized per-step change of the total
//! relative entropy vanishes linearly — the discrete dynamics approach a
//! conservative flow.
//!
//! ```sh
//! cargo run --release --example stepsize_limit
//! ```

use qzsg::game::matching_pennies;
use qzsg::mmwu::{vanishing_limit_probe, Init};

fn main() {
    let mp = matching_pennies();
    let mus = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let out = vanishing_limit_probe(&mp, &mus, 200, Init::Random, 5);

    println!("{:>10} {:>18}", "mu", "max |dS_total|/mu");
    for (mu, v) in &out {
        println!("{mu:>10.0e} {v:>18.6e}");
    }
    println!("\nthe ratio shrinks like O(mu): per-step entropy change is O(mu^2)");
}

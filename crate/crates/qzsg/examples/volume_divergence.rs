//! Volume preservation of the canonical-coordinate flow: the divergence of
//! the transformed vector field is zero, measured here by central finite
//! differences over the full real coordinate chart.
//!
//! ```sh
//! cargo run --release --example volume_divergence
//! ```

use qzsg::game::{matching_pennies, multi_qubit_interior_game};
use qzsg::linalg::random_density;
use qzsg::replicator::{diffeo_inverse, divergence_probe, DualState};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let games = [
        ("matching-pennies".to_string(), matching_pennies()),
        {
            let spec = multi_qubit_interior_game(2, 3)?;
            (spec.name.clone(), spec.to_observable()?)
        },
    ];
    for (name, game) in &games {
        let chart_dim = (game.dim_a() * game.dim_a() - 1) + (game.dim_b() * game.dim_b() - 1);
        println!("{name}: chart dimension {chart_dim}");
        for i in 0..5u64 {
            let state = DualState {
                t: 0.0,
                a: diffeo_inverse(&random_density(game.dim_a(), 700 + 2 * i))?,
                b: diffeo_inverse(&random_density(game.dim_b(), 701 + 2 * i))?,
            };
            let div = divergence_probe(game, &state, 1e-5);
            println!("  state {i}: divergence = {div:.3e}");
        }
    }
    println!("\nthe field is separable (each dual moves by the other player's payoff image),");
    println!("so every diagonal Jacobian entry vanishes and volume is preserved");
    Ok(())
}

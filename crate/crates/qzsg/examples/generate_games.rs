//! Builds the bundled game files: quantum Matching Pennies, a unitary
//! basis-transformed version of it, a 2-qubit interior game, and the exact
//! uniform reference certificate that the replicator configs consume.
//!
//! ```sh
//! cargo run --release --example generate_games
//! ```

use std::fs;
use std::path::Path;

use qzsg::game::{
    embed_unitary, matching_pennies, matching_pennies_payoff, multi_qubit_interior_game,
    random_unitary, GameSpec, NashCertificate, Provenance,
};
use qzsg::linalg::herm_eig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new("games");
    fs::create_dir_all(dir)?;

    let mp = matching_pennies();
    let p = matching_pennies_payoff();
    let spec = GameSpec::from_observable(
        "matching-pennies".into(),
        &mp,
        Provenance::ClassicalDiagonal { p: p.clone() },
    );
    spec.save(&dir.join("matching_pennies.json"))?;
    NashCertificate::uniform(&mp)?.save(&dir.join("matching_pennies_uniform_nash.json"))?;

    let seed = 7;
    let v = random_unitary(2, seed);
    let w = random_unitary(2, seed + 1);
    let unitary = embed_unitary(&p, &v, &w)?;
    let spec = GameSpec::from_observable(
        format!("matching-pennies-unitary-{seed}"),
        &unitary,
        Provenance::UnitaryEmbedded { p, seed },
    );
    spec.save(&dir.join("matching_pennies_unitary.json"))?;
    println!(
        "unitary-embedded MP eigenvalues: {:?}",
        herm_eig(unitary.observable())?.eigenvalues
    );

    let spec = multi_qubit_interior_game(2, 3)?;
    let game = spec.to_observable()?;
    spec.save(&dir.join("two_qubit_interior.json"))?;
    NashCertificate::uniform(&game)?.save(&dir.join("two_qubit_uniform_nash.json"))?;

    println!("wrote game files and reference certificates under {}/", dir.display());
    Ok(())
}

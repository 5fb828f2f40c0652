//! Concentration function of a small ensemble: the largest mass any ball of
//! radius R can hold, and the centre distance that attains it.
//!
//! `cargo run --example concentration`

use vpdisp::model::{concentration_mass, ConcentrationIndex, Ensemble, ShellParticle};

fn main() -> vpdisp::Result<()> {
    let particles = [(0.5, 1.0), (1.0, 1.0), (3.0, 2.0)]
        .into_iter()
        .map(|(r, m)| ShellParticle::new(r, 0.0, 0.0, m))
        .collect::<vpdisp::Result<Vec<_>>>()?;
    let ensemble = Ensemble::new(0.0, particles)?;
    let index = ConcentrationIndex::new(&ensemble);
    for big_r in [0.25, 0.75, 1.5, 3.0, 5.0] {
        let (mass, d) = index.sup(big_r)?;
        let direct = concentration_mass(&ensemble, d, big_r)?;
        println!("R = {big_r:4}: sup mass {mass:.4} at d = {d:.4} (direct sum {direct:.4}), centred {:.4}", index.mass_in_ball(0.0, big_r));
    }
    Ok(())
}

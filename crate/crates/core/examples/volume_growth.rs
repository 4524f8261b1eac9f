//! Ball volumes in the universal cover and the fitted volume entropy.

use ncpgeom::asymptotics::{ball_volume, volume_entropy_scaled};

fn main() -> ncpgeom::Result<()> {
    for r in [1.0, 5.0, 10.0, 20.0, 30.0] {
        println!("V({r:>4}) = {:.6e}", ball_volume(1.0, r)?);
    }
    for kappa in [0.25, 1.0, 4.0] {
        let h = volume_entropy_scaled(30.0, kappa)?;
        println!(
            "kappa = {kappa:<5} entropy {:.5} (sqrt kappa {:.5}), raw ln V / R = {:.5}",
            h.estimate,
            kappa.sqrt(),
            h.raw_ratio
        );
    }
    Ok(())
}

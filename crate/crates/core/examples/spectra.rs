//! Product Laplace spectrum and the marked length spectrum for a small
//! generator set.

use ncpgeom::hyperbolic::MobiusElement;
use ncpgeom::invariants::{enumerate_length_spectrum, product_spectrum, spectral_gap, SigmaSpectrum};

fn main() -> ncpgeom::Result<()> {
    let sig = SigmaSpectrum::new(vec![0.0, 0.25, 1.8, 3.9])?;
    let l = 2.0;
    for e in product_spectrum(&sig, l, 20.0)? {
        println!("{:>10.6}  x{}", e.value, e.multiplicity);
    }
    println!("gap = {}", spectral_gap(&sig, l)?);

    let gens = [
        MobiusElement::new(2.0, 1.0, 1.0, 1.0)?,
        MobiusElement::new(3.0, 1.0, 2.0, 1.0)?,
    ];
    for e in enumerate_length_spectrum(&gens, 2, l, 1)?.iter().take(12) {
        println!("{:<4} n = {:>2}  ell = {:.6}", e.word, e.n, e.ell);
    }
    Ok(())
}

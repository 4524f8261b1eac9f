//! Distances, Möbius action and translation lengths in the upper half-plane.

use ncpgeom::hyperbolic::{disk_area, hyp_distance, mobius_apply, translation_length, HPoint, MobiusElement};

fn main() -> ncpgeom::Result<()> {
    let p = HPoint::new(0.0, 1.0)?;
    let q = HPoint::new(1.0, 2.0)?;
    println!("d(i, 1+2i) = {:.9}", hyp_distance(&p, &q)?);

    let g = MobiusElement::new(2.0, 1.0, 1.0, 1.0)?;
    let (gp, gq) = (mobius_apply(&g, &p)?, mobius_apply(&g, &q)?);
    println!("after g:     {:.9}", hyp_distance(&gp, &gq)?);
    println!(
        "trace {} -> translation length {:.9}",
        g.trace(),
        translation_length(&g)?
    );

    for r in [0.5, 1.0, 2.0] {
        println!("area of disk r = {r}: {:.6}", disk_area(r)?);
    }
    Ok(())
}

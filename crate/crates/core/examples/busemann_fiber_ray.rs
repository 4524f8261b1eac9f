//! Busemann function of the fiber ray in the product and its derivatives.

use ncpgeom::asymptotics::{busemann, busemann_estimate, busemann_gradient, busemann_hessian, ProductPoint};

fn main() -> ncpgeom::Result<()> {
    let l = 1.0;
    let x = ProductPoint::new(1.0, 2.0, 3.0)?;
    for s in [30.0, 100.0, 1e4, 1e8] {
        println!("b_s at s = {s:e}: {:.12}", busemann_estimate(l, &x, s)?);
    }
    println!("converged: {:.12}", busemann(l, &x)?);
    let g = busemann_gradient(l, &x, None)?;
    println!("|grad b| = {:.12}, fiber alignment {:.12}", g.norm, g.fiber_alignment);
    let h = busemann_hessian(l, &x, None)?;
    println!("horizontal Hessian max entry {:e}", h.horizontal.amax());
    Ok(())
}

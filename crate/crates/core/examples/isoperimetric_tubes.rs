//! Boundary area of disk and collar tubes against the isoperimetric bound.

use ncpgeom::invariants::{disk_tube_limit_ratio, tube_profiles};

fn main() -> ncpgeom::Result<()> {
    let rows = tube_profiles(1.0, &[0.25, 0.5, 1.0, 2.0, 4.0], 2.0, &[0.5, 1.0, 2.0])?;
    for r in &rows {
        println!(
            "{:<6} {:>5}  v = {:>10.4}  area = {:>10.4}  bound = {:>10.4}",
            r.kind.name(),
            r.parameter,
            r.volume,
            r.area,
            r.bound
        );
    }
    println!("small-disk area/bound -> {:.6}", disk_tube_limit_ratio(1.0)?);
    Ok(())
}

//! Monte Carlo curvature deviation for the product and warped metrics.

use ncpgeom::hyperbolic::HPoint;
use ncpgeom::invariants::curvature_deviation;
use ncpgeom::metric::{MetricSpec, WarpProfile};
use ncpgeom::sampling::SampleBox;

fn main() -> ncpgeom::Result<()> {
    let bx = SampleBox::new((-1.0, 1.0), (0.5, 2.0), (0.0, 1.0))?;
    for (name, spec) in [
        ("product", MetricSpec::product(1.0)?),
        ("warped", MetricSpec::warped(WarpProfile::new(HPoint::I, 0.1)?)),
    ] {
        let d = curvature_deviation(&spec, &bx, 10_000, 0)?;
        println!("{name:<8} D = {:.6e} ± {:.1e}", d.value, d.std_error);
    }
    Ok(())
}

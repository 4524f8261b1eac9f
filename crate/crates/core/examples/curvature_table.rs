//! Sectional curvatures and `R_V` for the three metric kinds at a few points.

use ncpgeom::hyperbolic::HPoint;
use ncpgeom::metric::{
    curvature_at, orthonormal_frame, potential_by_name, r_v_operator, ChartPoint, MetricSpec, WarpProfile,
};

fn main() -> ncpgeom::Result<()> {
    let specs = [
        MetricSpec::product(1.0)?,
        MetricSpec::warped(WarpProfile::new(HPoint::I, 0.1)?),
        MetricSpec::twisted(1e-3, potential_by_name("log_y")?)?,
    ];
    for spec in &specs {
        for (x, y) in [(0.0, 1.0), (0.3, 1.2), (1.0, 2.0)] {
            let q = ChartPoint::new(x, y, 0.0)?;
            let c = curvature_at(spec, &q)?;
            let [e1, e2, e3] = orthonormal_frame(spec, &q)?;
            let rv = r_v_operator(spec, &q)?;
            println!(
                "{:<8} ({x:>4}, {y:>4})  K12 = {:>10.6}  K13 = {:>10.6}  K23 = {:>10.6}  eig R_V = {:?}",
                spec.kind_name(),
                c.sectional(&e1, &e2),
                c.sectional(&e1, &e3),
                c.sectional(&e2, &e3),
                rv.symmetric_eigenvalues().as_slice()
            );
        }
    }
    Ok(())
}

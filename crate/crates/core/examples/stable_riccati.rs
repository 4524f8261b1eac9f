//! Stable Riccati tensor along product geodesics from anchors 20 and 40.

use nalgebra::Vector3;
use ncpgeom::geodesic::integrate_geodesic;
use ncpgeom::metric::{ChartPoint, MetricSpec};
use ncpgeom::riccati::stable_tensor;

fn main() -> ncpgeom::Result<()> {
    let spec = MetricSpec::product(1.0)?;
    let q = ChartPoint::new(0.0, 1.0, 0.0)?;
    for (name, dir) in [
        ("upward", Vector3::new(0.0, 1.0, 0.0)),
        ("fiber", Vector3::new(0.0, 0.0, 1.0)),
    ] {
        let traj = integrate_geodesic(&spec, q, dir, 40.0, 1e-3)?;
        let st = stable_tensor(&traj, 20.0)?;
        println!(
            "{name:<8} U(0) = {:?}  anchor gap {:e}",
            st.value.as_slice(),
            st.discrepancy
        );
    }
    Ok(())
}

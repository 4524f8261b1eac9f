//! Jacobi fields along the central fiber of the warped metric: the first
//! conjugate point and the oscillation frequency of the radial block.

use nalgebra::Vector3;
use ncpgeom::geodesic::{integrate_geodesic, PhaseState};
use ncpgeom::hyperbolic::HPoint;
use ncpgeom::jacobi::{fit_sine_frequency, propagate_jacobi};
use ncpgeom::metric::{ChartPoint, MetricSpec, WarpProfile};

fn main() -> ncpgeom::Result<()> {
    for eps in [0.05, 0.1, 0.2] {
        let spec = MetricSpec::warped(WarpProfile::new(HPoint::I, eps)?);
        let q = ChartPoint::new(0.0, 1.0, 0.0)?;
        let s = PhaseState::normalized(&spec, q, Vector3::new(0.0, 0.0, 1.0))?;
        let traj = integrate_geodesic(&spec, q, s.v, 15.0, 1e-3)?;
        let run = propagate_jacobi(&traj)?;
        let block: Vec<f64> = run.a.iter().map(|a| a[(0, 0)]).collect();
        let (omega, _) = fit_sine_frequency(&run.times, &block, 0.1, 1.5)?;
        println!(
            "eps = {eps:<5} t* = {:>10.6}  omega = {omega:.6}  pi/omega = {:.6}",
            run.first_conjugate().unwrap_or(f64::NAN),
            std::f64::consts::PI / omega
        );
    }
    Ok(())
}

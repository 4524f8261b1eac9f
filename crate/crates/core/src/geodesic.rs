//! Unit-speed geodesics with a parallel orthonormal frame.
//!
//! The geodesic and two normal frame vectors are advanced together as one
//! 12-component state by the classical fourth-order Runge–Kutta scheme, so the
//! frame is transported along exactly the curve that is reported.

use nalgebra::{SVector, Vector3};

use crate::error::{Error, Result};
use crate::metric::{christoffel_at, inverse_metric, metric_at, norm_g, ChartPoint, MetricSpec, T};
use crate::report::{fmt_f, Table};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_ADAPTIVE_TOL: f64 = 1e-10;
/// Trajectories are cut off once they come this close to the chart boundary.
pub const Y_MIN: f64 = 1e-6;

const UNIT_SPEED_TOL: f64 = 1e-9;

pub(crate) type State = SVector<f64, 12>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: ChartPoint,
    pub v: Vector3<f64>,
}

impl PhaseState {
    /// Requires `g(v, v) = 1` within `1e-9`.
    pub fn new(spec: &MetricSpec, q: ChartPoint, v: Vector3<f64>) -> Result<Self> {
        let g = metric_at(spec, &q)?;
        let speed2 = v.dot(&(g * v));
        if (speed2 - 1.0).abs() > UNIT_SPEED_TOL {
            return Err(Error::domain(format!(
                "initial velocity has g(v, v) = {speed2}, expected 1"
            )));
        }
        Ok(Self { q, v })
    }

    /// Rescales `dir` to unit speed.
    pub fn normalized(spec: &MetricSpec, q: ChartPoint, dir: Vector3<f64>) -> Result<Self> {
        let g = metric_at(spec, &q)?;
        let n = norm_g(&g, &dir);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("direction has zero or non-finite length"));
        }
        Ok(Self { q, v: dir / n })
    }
}

/// The two normal vectors of the parallel frame; the third is `γ̇`.
pub type NormalFrame = [Vector3<f64>; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Uniform steps; the requested step is shrunk slightly so that the grid
    /// ends exactly at the final time.
    Fixed { step: f64 },
    /// Step doubling with local error control.
    Adaptive { initial_step: f64, tolerance: f64 },
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator::Fixed { step: DEFAULT_STEP }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub spec: MetricSpec,
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub frames: Option<Vec<NormalFrame>>,
    /// Nominal step (the uniform step for fixed integration).
    pub step: f64,
    /// Requested final time. `end_time()` is smaller when truncated.
    pub total_time: f64,
    /// Set when integration stopped at the chart boundary `y ≤ Y_MIN`.
    pub truncated: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn without_frame(mut self) -> Self {
        self.frames = None;
        self
    }

    /// CSV export with columns `time, x, y, t, vx, vy, vt`.
    pub fn to_table(&self, name: &str) -> Table {
        let mut table = Table::new(name, &["time", "x", "y", "t", "vx", "vy", "vt"]);
        for (time, s) in self.times.iter().zip(&self.states) {
            table.push(vec![
                fmt_f(*time),
                fmt_f(s.q.x),
                fmt_f(s.q.y),
                fmt_f(s.q.t),
                fmt_f(s.v[0]),
                fmt_f(s.v[1]),
                fmt_f(s.v[2]),
            ]);
        }
        table
    }
}

pub(crate) fn pack(q: &ChartPoint, v: &Vector3<f64>, frame: &NormalFrame) -> State {
    let mut s = State::zeros();
    s.fixed_rows_mut::<3>(0).copy_from(&q.coords());
    s.fixed_rows_mut::<3>(3).copy_from(v);
    s.fixed_rows_mut::<3>(6).copy_from(&frame[0]);
    s.fixed_rows_mut::<3>(9).copy_from(&frame[1]);
    s
}

pub(crate) fn unpack(s: &State) -> (ChartPoint, Vector3<f64>, NormalFrame) {
    let q = ChartPoint::from_coords(&s.fixed_rows::<3>(0).into_owned());
    let v = s.fixed_rows::<3>(3).into_owned();
    let e1 = s.fixed_rows::<3>(6).into_owned();
    let e2 = s.fixed_rows::<3>(9).into_owned();
    (q, v, [e1, e2])
}

pub(crate) fn geodesic_rhs(spec: &MetricSpec, s: &State) -> Result<State> {
    let (q, v, [e1, e2]) = unpack(s);
    let gam = christoffel_at(spec, &q)?;
    let mut out = State::zeros();
    for k in 0..3 {
        out[k] = v[k];
        let (mut acc, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let gk = gam[k][i][j];
                acc += gk * v[i] * v[j];
                d1 += gk * v[i] * e1[j];
                d2 += gk * v[i] * e2[j];
            }
        }
        out[3 + k] = -acc;
        out[6 + k] = -d1;
        out[9 + k] = -d2;
    }
    Ok(out)
}

pub(crate) fn rk4_step(spec: &MetricSpec, s: &State, h: f64) -> Result<State> {
    let k1 = geodesic_rhs(spec, s)?;
    let k2 = geodesic_rhs(spec, &(s + k1 * (0.5 * h)))?;
    let k3 = geodesic_rhs(spec, &(s + k2 * (0.5 * h)))?;
    let k4 = geodesic_rhs(spec, &(s + k3 * h))?;
    Ok(s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// A normal frame for `v` at `q`: the first vector is orthogonal to both `v`
/// and the vertical direction, the second is the normalized vertical part
/// orthogonal to `v`. For vertical `v` the first vector comes from `∂_x`.
pub fn default_normal_frame(spec: &MetricSpec, q: &ChartPoint, v: &Vector3<f64>) -> Result<NormalFrame> {
    let g = metric_at(spec, q)?;
    let unit_v = v / norm_g(&g, v);
    let reject = |w: Vector3<f64>, basis: &[Vector3<f64>]| {
        let mut w = w;
        for b in basis {
            w -= b * b.dot(&(g * w));
        }
        w
    };
    let vertical = reject(Vector3::new(0.0, 0.0, 1.0), &[unit_v]);
    let second;
    let first;
    if norm_g(&g, &vertical) > 1e-6 {
        second = vertical / norm_g(&g, &vertical);
        // metric cross product: g⁻¹(v × w) is g-orthogonal to v and w
        let ginv = inverse_metric(&g)?;
        let c = ginv * unit_v.cross(&second);
        first = c / norm_g(&g, &c);
    } else {
        let a = reject(Vector3::new(1.0, 0.0, 0.0), &[unit_v]);
        first = a / norm_g(&g, &a);
        let b = reject(Vector3::new(0.0, 1.0, 0.0), &[unit_v, first]);
        second = b / norm_g(&g, &b);
    }
    Ok([first, second])
}

fn check_frame(spec: &MetricSpec, q: &ChartPoint, v: &Vector3<f64>, frame: &NormalFrame) -> Result<()> {
    let g = metric_at(spec, q)?;
    let vecs = [frame[0], frame[1], *v];
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            let ip = vecs[i].dot(&(g * vecs[j]));
            if (ip - target).abs() > 1e-7 {
                return Err(Error::DegenerateFrame(format!(
                    "g(e{}, e{}) = {ip}, expected {target}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// Integrates the unit-speed geodesic from `q0` in direction `v0` on
/// `[0, total_time]` with fixed steps, transporting the default frame.
pub fn integrate_geodesic(
    spec: &MetricSpec,
    q0: ChartPoint,
    v0: Vector3<f64>,
    total_time: f64,
    step: f64,
) -> Result<Trajectory> {
    integrate_geodesic_with(spec, q0, v0, total_time, Integrator::Fixed { step })
}

pub fn integrate_geodesic_with(
    spec: &MetricSpec,
    q0: ChartPoint,
    v0: Vector3<f64>,
    total_time: f64,
    integrator: Integrator,
) -> Result<Trajectory> {
    let start = PhaseState::new(spec, q0, v0)?;
    let frame = default_normal_frame(spec, &start.q, &start.v)?;
    integrate_from(spec, start, frame, total_time, integrator)
}

fn integrate_from(
    spec: &MetricSpec,
    start: PhaseState,
    frame: NormalFrame,
    total_time: f64,
    integrator: Integrator,
) -> Result<Trajectory> {
    if !(total_time >= 0.0) || !total_time.is_finite() {
        return Err(Error::domain(format!("total time {total_time} must be >= 0")));
    }
    check_frame(spec, &start.q, &start.v, &frame)?;
    let mut traj = Trajectory {
        spec: spec.clone(),
        times: vec![0.0],
        states: vec![start],
        frames: Some(vec![frame]),
        step: 0.0,
        total_time,
        truncated: false,
    };
    let mut state = pack(&start.q, &start.v, &frame);
    let push = |traj: &mut Trajectory, time: f64, s: &State| -> Result<bool> {
        if s.iter().any(|c| !c.is_finite()) {
            return Err(Error::Integration {
                time,
                reason: "non-finite state".into(),
            });
        }
        let (q, v, fr) = unpack(s);
        if q.y <= Y_MIN {
            traj.truncated = true;
            return Ok(false);
        }
        traj.times.push(time);
        traj.states.push(PhaseState { q, v });
        if let Some(frames) = traj.frames.as_mut() {
            frames.push(fr);
        }
        Ok(true)
    };

    match integrator {
        Integrator::Fixed { step } => {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::domain(format!("step {step} must be > 0")));
            }
            let n = ((total_time / step) - 1e-9).ceil().max(0.0) as usize;
            let h = if n == 0 { step } else { total_time / n as f64 };
            traj.step = h;
            traj.times.reserve(n);
            traj.states.reserve(n);
            for i in 1..=n {
                let next = rk4_step(spec, &state, h)?;
                let time = if i == n { total_time } else { i as f64 * h };
                if !push(&mut traj, time, &next)? {
                    break;
                }
                state = next;
            }
        }
        Integrator::Adaptive {
            initial_step,
            tolerance,
        } => {
            if !(initial_step > 0.0 && tolerance > 0.0) {
                return Err(Error::domain("adaptive step and tolerance must be > 0"));
            }
            traj.step = initial_step;
            let mut h = initial_step;
            let mut time = 0.0;
            while time < total_time {
                let h_try = h.min(total_time - time);
                let full = rk4_step(spec, &state, h_try)?;
                let half = rk4_step(spec, &state, 0.5 * h_try)?;
                let two_half = rk4_step(spec, &half, 0.5 * h_try)?;
                let err = (two_half - full).amax() / 15.0;
                if err <= tolerance || h_try < 1e-12 {
                    time = if total_time - (time + h_try) < 1e-14 {
                        total_time
                    } else {
                        time + h_try
                    };
                    if !push(&mut traj, time, &two_half)? {
                        break;
                    }
                    state = two_half;
                }
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * (tolerance / err).powf(0.2)).clamp(0.2, 5.0)
                };
                h = h_try * factor;
            }
        }
    }
    Ok(traj)
}

/// Re-transports the default normal frame along `traj` by integrating the
/// combined geodesic-and-frame system from its initial state with the same
/// step.
pub fn parallel_frame(traj: &Trajectory) -> Result<Trajectory> {
    let start = *traj.states.first().ok_or_else(|| Error::domain("empty trajectory"))?;
    let frame = default_normal_frame(&traj.spec, &start.q, &start.v)?;
    parallel_frame_from(traj, frame)
}

/// As [`parallel_frame`] with a caller-chosen initial normal frame, which must
/// be orthonormal and orthogonal to `γ̇(0)`.
pub fn parallel_frame_from(traj: &Trajectory, frame: NormalFrame) -> Result<Trajectory> {
    let start = *traj.states.first().ok_or_else(|| Error::domain("empty trajectory"))?;
    let step = if traj.step > 0.0 { traj.step } else { DEFAULT_STEP };
    integrate_from(&traj.spec, start, frame, traj.total_time, Integrator::Fixed { step })
}

/// `max |g(v, v) − 1|` over all samples.
pub fn speed_drift(traj: &Trajectory) -> f64 {
    traj.states
        .iter()
        .map(|s| match metric_at(&traj.spec, &s.q) {
            Ok(g) => (s.v.dot(&(g * s.v)) - 1.0).abs(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// Largest deviation of the Gram matrix of `(e1, e2, γ̇)` from the identity.
pub fn frame_orthonormality_error(traj: &Trajectory) -> Result<f64> {
    let frames = traj.frames.as_ref().ok_or(Error::MissingFrame)?;
    let mut worst: f64 = 0.0;
    for (s, fr) in traj.states.iter().zip(frames) {
        let g = metric_at(&traj.spec, &s.q)?;
        let vecs = [fr[0], fr[1], s.v];
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((vecs[i].dot(&(g * vecs[j])) - target).abs());
            }
        }
    }
    Ok(worst)
}

/// `g(γ̇, V)` with `V` the unit vertical field, at the first sample.
pub fn initial_vertical_component(traj: &Trajectory) -> Result<f64> {
    let s = traj.states.first().ok_or_else(|| Error::domain("empty trajectory"))?;
    let g = metric_at(&traj.spec, &s.q)?;
    Ok((g * s.v)[T] / g[(T, T)].sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::HPoint;
    use crate::metric::WarpProfile;

    fn product(l: f64) -> MetricSpec {
        MetricSpec::product(l).unwrap()
    }

    #[test]
    fn vertical_fiber_geodesic_is_linear() {
        let spec = product(1.5);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 0.0, 1.0 / 1.5), 10.0, 1e-3).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.q.t - 10.0 / 1.5).abs() < 1e-12);
        assert_eq!(last.q.x, 0.0);
        assert_eq!(last.q.y, 1.0);
        assert!(speed_drift(&traj) <= 1e-12);
    }

    #[test]
    fn upward_hyperbolic_geodesic_reaches_e() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 1.0, 0.0), 1.0, 1e-3).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.q.y - std::f64::consts::E).abs() < 1e-11);
        assert!(last.q.x.abs() < 1e-15);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
    }

    #[test]
    fn warped_central_vertical_stays_put() {
        let spec = MetricSpec::warped(WarpProfile::new(HPoint::I, 0.1).unwrap());
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let s = PhaseState::normalized(&spec, q0, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let traj = integrate_geodesic(&spec, q0, s.v, 10.0, 1e-3).unwrap();
        for st in &traj.states {
            assert!(st.q.x.abs() < 1e-14 && (st.q.y - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn product_vertical_frame_is_constant() {
        let spec = product(2.0);
        let q0 = ChartPoint::new(0.3, 0.7, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 0.0, 0.5), 5.0, 1e-2).unwrap();
        let frames = traj.frames.as_ref().unwrap();
        for fr in frames {
            assert_eq!(fr, &frames[0]);
        }
    }

    #[test]
    fn frame_stays_orthonormal() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let s = PhaseState::normalized(&spec, q0, Vector3::new(0.6, 0.3, 0.5)).unwrap();
        let traj = integrate_geodesic(&spec, q0, s.v, 10.0, 1e-3).unwrap();
        assert!(frame_orthonormality_error(&traj).unwrap() < 1e-7);
        assert!(speed_drift(&traj) < 1e-8 * 11.0);
    }

    #[test]
    fn rejects_non_unit_velocity() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        assert!(integrate_geodesic(&spec, q0, Vector3::new(0.0, 2.0, 0.0), 1.0, 1e-3).is_err());
    }

    #[test]
    fn degenerate_frame_is_rejected() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 1.0, 0.0), 1.0, 1e-2).unwrap();
        let bad = [Vector3::new(1.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)];
        assert!(matches!(
            parallel_frame_from(&traj, bad),
            Err(Error::DegenerateFrame(_))
        ));
    }

    #[test]
    fn downward_geodesic_truncates() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, -1.0, 0.0), 20.0, 1e-2).unwrap();
        assert!(traj.truncated);
        // y = e^{-s} crosses 1e-6 at s = 6 ln 10
        assert!((traj.end_time() - 6.0 * 10f64.ln()).abs() < 0.02);
    }

    #[test]
    fn zero_length_trajectory() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 1.0, 0.0), 0.0, 1e-3).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(speed_drift(&traj), 0.0);
    }

    #[test]
    fn adaptive_mode_matches_fixed() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let s = PhaseState::normalized(&spec, q0, Vector3::new(1.0, 0.2, 0.3)).unwrap();
        let fixed = integrate_geodesic(&spec, q0, s.v, 3.0, 1e-3).unwrap();
        let adaptive = integrate_geodesic_with(
            &spec,
            q0,
            s.v,
            3.0,
            Integrator::Adaptive {
                initial_step: 1e-2,
                tolerance: DEFAULT_ADAPTIVE_TOL,
            },
        )
        .unwrap();
        assert_eq!(adaptive.end_time(), 3.0);
        let a = adaptive.states.last().unwrap().q.coords();
        let b = fixed.states.last().unwrap().q.coords();
        assert!((a - b).amax() < 1e-8);
        assert!(adaptive.len() < fixed.len());
    }

    #[test]
    fn csv_export_header() {
        let spec = product(1.0);
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 1.0, 0.0), 0.01, 1e-3).unwrap();
        let table = traj.to_table("trajectory");
        assert_eq!(table.header, ["time", "x", "y", "t", "vx", "vy", "vt"]);
        assert_eq!(table.rows.len(), traj.len());
    }
}

//! Stable Riccati solutions `U' = −U² − R⊥` along a geodesic.
//!
//! The stable solution at time 0 is the limit, as the anchor `T` grows, of
//! the solution started from `U(T) = 0` and integrated backward. It equals
//! `A'A⁻¹` for the Jacobi solution with `A(T) = I, A'(T) = 0`.

use nalgebra::{Matrix2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesic::{integrate_geodesic, Trajectory, DEFAULT_STEP};
use crate::hyperbolic::HPoint;
use crate::jacobi::{interpolate, normal_curvature, propagate_backward};
use crate::metric::{christoffel_at, metric_at, ChartPoint, MetricSpec, T, X, Y};
use crate::report::{fmt_f, fmt_opt, Table};
use crate::sampling::{stream_rng, SampleBox};

/// `|U|` above this counts as a focal blow-up.
pub const BLOW_UP: f64 = 1e6;
/// Agreement required between the `T` and `2T` anchors.
pub const ANCHOR_AGREEMENT: f64 = 1e-6;
pub const DEFAULT_ANCHOR: f64 = 20.0;
const VERTICAL_GEODESIC_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RiccatiRun {
    /// Samples on `[0, anchor]`.
    pub times: Vec<f64>,
    pub u: Vec<Matrix2<f64>>,
    pub normal_curvature: Vec<Matrix2<f64>>,
    /// Anchor actually used (the last sample not past the requested one).
    pub anchor: f64,
}

impl RiccatiRun {
    pub fn at_zero(&self) -> Matrix2<f64> {
        self.u[0]
    }

    /// `Tr(U(0)² + R⊥(0))`.
    pub fn trace_quantity(&self) -> f64 {
        (self.u[0] * self.u[0] + self.normal_curvature[0]).trace()
    }

    pub fn to_table(&self, name: &str) -> Table {
        let mut table = Table::new(name, &["time", "u11", "u12", "u21", "u22"]);
        for (t, u) in self.times.iter().zip(&self.u) {
            table.push(vec![
                fmt_f(*t),
                fmt_f(u[(0, 0)]),
                fmt_f(u[(0, 1)]),
                fmt_f(u[(1, 0)]),
                fmt_f(u[(1, 1)]),
            ]);
        }
        table
    }
}

fn anchor_index(traj: &Trajectory, anchor: f64) -> Result<usize> {
    if !(anchor > 0.0) || !anchor.is_finite() {
        return Err(Error::domain(format!("anchor {anchor} must be > 0")));
    }
    if traj.end_time() < anchor - 1e-9 {
        return Err(Error::domain(format!(
            "trajectory ends at {} before the anchor {anchor}",
            traj.end_time()
        )));
    }
    Ok(traj.times.partition_point(|&t| t <= anchor + 1e-9) - 1)
}

fn riccati_rhs(u: &Matrix2<f64>, r: &Matrix2<f64>) -> Matrix2<f64> {
    -(u * u) - r
}

/// Integrates from `U(anchor) = 0` back to time 0.
pub fn riccati_stable(traj: &Trajectory, anchor: f64) -> Result<RiccatiRun> {
    let kt = anchor_index(traj, anchor)?;
    let all = normal_curvature(traj)?;
    let times = &traj.times[..=kt];
    let r = &all[..=kt];
    let mut u = vec![Matrix2::zeros(); kt + 1];
    for k in (0..kt).rev() {
        let h = times[k] - times[k + 1];
        let r_mid = interpolate(times, r, k, 0.5 * (times[k] + times[k + 1]));
        let x = u[k + 1];
        let k1 = riccati_rhs(&x, &r[k + 1]);
        let k2 = riccati_rhs(&(x + k1 * (0.5 * h)), &r_mid);
        let k3 = riccati_rhs(&(x + k2 * (0.5 * h)), &r_mid);
        let k4 = riccati_rhs(&(x + k3 * h), &r[k]);
        let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if !(next.amax() <= BLOW_UP) {
            return Err(Error::FocalBlowUp { time: times[k] });
        }
        u[k] = next;
    }
    Ok(RiccatiRun {
        times: times.to_vec(),
        u,
        normal_curvature: r.to_vec(),
        anchor: times[kt],
    })
}

#[derive(Debug, Clone)]
pub struct StableTensor {
    /// `U(0)` from the `2T` anchor.
    pub value: Matrix2<f64>,
    pub anchor: f64,
    /// `max |U_T(0) − U_2T(0)|`.
    pub discrepancy: f64,
    pub run: RiccatiRun,
}

/// Stable tensor at time 0, checked by comparing anchors `T` and `2T`; the
/// trajectory must reach `2T`.
pub fn stable_tensor(traj: &Trajectory, anchor: f64) -> Result<StableTensor> {
    let short = riccati_stable(traj, anchor)?;
    let long = riccati_stable(traj, 2.0 * anchor)?;
    let discrepancy = (short.at_zero() - long.at_zero()).amax();
    if !(discrepancy <= ANCHOR_AGREEMENT) {
        return Err(Error::Accuracy(format!(
            "stable tensor moved by {discrepancy:e} between anchors {} and {}",
            short.anchor, long.anchor
        )));
    }
    Ok(StableTensor {
        value: long.at_zero(),
        anchor: long.anchor,
        discrepancy,
        run: long,
    })
}

/// `A'A⁻¹` on `[0, anchor]` for the Jacobi solution with `A(anchor) = I`,
/// `A'(anchor) = 0`.
pub fn anchored_jacobi_ratio(traj: &Trajectory, anchor: f64) -> Result<Vec<Matrix2<f64>>> {
    let kt = anchor_index(traj, anchor)?;
    let all = normal_curvature(traj)?;
    let times = &traj.times[..=kt];
    let run = propagate_backward(times, &all[..=kt], (Matrix2::identity(), Matrix2::zeros()));
    run.iter()
        .zip(times)
        .map(|((a, da), t)| {
            a.try_inverse()
                .map(|inv| da * inv)
                .ok_or(Error::FocalBlowUp { time: *t })
        })
        .collect()
}

/// Base points for vertical geodesics.
#[derive(Debug, Clone, PartialEq)]
pub enum VerticalSampler {
    Box(SampleBox),
    Points(Vec<HPoint>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageOptions {
    pub n: usize,
    pub seed: u64,
    pub anchor: f64,
    pub step: f64,
}

impl Default for AverageOptions {
    fn default() -> Self {
        Self {
            n: 100,
            seed: 0,
            anchor: DEFAULT_ANCHOR,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageSample {
    pub point: ChartPoint,
    /// `None` when the vertical curve through the point is not a geodesic.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiAverage {
    pub mean: f64,
    pub std_error: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub samples: Vec<AverageSample>,
}

impl RiccatiAverage {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new("riccati_average", &["index", "x", "y", "t", "value"]);
        for (i, s) in self.samples.iter().enumerate() {
            table.push(vec![
                i.to_string(),
                fmt_f(s.point.x),
                fmt_f(s.point.y),
                fmt_f(s.point.t),
                fmt_opt(s.value),
            ]);
        }
        table
    }
}

/// Whether the vertical curve through `q` is a geodesic, i.e. `Γ^x_tt` and
/// `Γ^y_tt` vanish.
pub fn vertical_is_geodesic(spec: &MetricSpec, q: &ChartPoint) -> Result<bool> {
    let gam = christoffel_at(spec, q)?;
    Ok(gam[X][T][T].abs() <= VERTICAL_GEODESIC_TOL && gam[Y][T][T].abs() <= VERTICAL_GEODESIC_TOL)
}

/// `Tr(U(0)² + R_V(0))` for the stable tensor along the vertical geodesic
/// through `q`.
pub fn vertical_trace_quantity(spec: &MetricSpec, q: ChartPoint, anchor: f64, step: f64) -> Result<f64> {
    let g = metric_at(spec, &q)?;
    let v = Vector3::new(0.0, 0.0, 1.0 / g[(T, T)].sqrt());
    let traj = integrate_geodesic(spec, q, v, 2.0 * anchor, step)?;
    Ok(stable_tensor(&traj, anchor)?.run.trace_quantity())
}

/// Averages `Tr(U(0)² + R_V(0))` over sampled base points. Points whose
/// vertical curve is not a geodesic are rejected; more than half rejected is
/// an error.
pub fn riccati_average(spec: &MetricSpec, sampler: &VerticalSampler, opts: &AverageOptions) -> Result<RiccatiAverage> {
    let points: Vec<ChartPoint> = match sampler {
        VerticalSampler::Box(bx) => (0..opts.n)
            .map(|i| bx.sample(&mut stream_rng(opts.seed, i as u64)))
            .collect(),
        VerticalSampler::Points(ps) => ps
            .iter()
            .map(|p| ChartPoint::new(p.x, p.y, 0.0))
            .collect::<Result<_>>()?,
    };
    if points.is_empty() {
        return Err(Error::domain("no sample points"));
    }
    let samples: Vec<AverageSample> = points
        .par_iter()
        .map(|&q| {
            let value = if vertical_is_geodesic(spec, &q)? {
                Some(vertical_trace_quantity(spec, q, opts.anchor, opts.step)?)
            } else {
                None
            };
            Ok(AverageSample { point: q, value })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = samples.iter().filter_map(|s| s.value).collect();
    let accepted = values.len();
    let rejected = samples.len() - accepted;
    if 2 * rejected > samples.len() {
        return Err(Error::ExcessiveRejection {
            rejected,
            total: samples.len(),
        });
    }
    let mean = values.iter().sum::<f64>() / accepted as f64;
    let std_error = if accepted > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (accepted - 1) as f64;
        (var / accepted as f64).sqrt()
    } else {
        0.0
    };
    Ok(RiccatiAverage {
        mean,
        std_error,
        accepted,
        rejected,
        samples,
    })
}

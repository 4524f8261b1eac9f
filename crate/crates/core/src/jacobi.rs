//! Jacobi fields along a framed geodesic.
//!
//! In the parallel frame `(e1, e2)` normal Jacobi fields satisfy
//! `A'' + R⊥(t) A = 0` with `R⊥_ij = g(R(e_i, γ̇)γ̇, e_j)`. Two matrix solutions
//! are propagated: `A` with `A(0) = 0, A'(0) = I`, whose determinant vanishes
//! exactly at conjugate points, and its companion `B` with `B(0) = I, B'(0) = 0`.

use nalgebra::{Matrix2, Vector2, Vector3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesic::{geodesic_rhs, integrate_geodesic, pack, unpack, NormalFrame, PhaseState, State, Trajectory};
use crate::metric::{curvature_at, metric_at, ChartPoint, MetricSpec, T};
use crate::report::{fmt_f, fmt_opt, Table};
use crate::sampling::{random_unit_direction, stream_rng, SampleBox};

/// Conjugate times are located to this width.
pub const ROOT_TOL: f64 = 1e-8;
/// A local minimum of `|det A|` at or below this value counts as a zero.
pub const TANGENT_ZERO_TOL: f64 = 1e-10;
const TANGENT_PREFILTER: f64 = 1e-4;
const DENSE_STEP: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct JacobiRun {
    pub spec: MetricSpec,
    pub times: Vec<f64>,
    /// `R⊥` at each sample.
    pub normal_curvature: Vec<Matrix2<f64>>,
    pub a: Vec<Matrix2<f64>>,
    pub a_prime: Vec<Matrix2<f64>>,
    pub b: Vec<Matrix2<f64>>,
    pub b_prime: Vec<Matrix2<f64>>,
    /// Components `(g(e1, V), g(e2, V))` of the unit vertical field.
    pub frame_vertical: Vec<Vector2<f64>>,
    /// `g(γ̇(0), V)`.
    pub initial_vertical: f64,
    /// Zeros of `det A` in `(0, end]`, increasing.
    pub conjugate_points: Vec<f64>,
    /// `min det A(t) / t²` over samples with `t > 0`; NaN for a single sample.
    pub det_min: f64,
}

impl JacobiRun {
    pub fn first_conjugate(&self) -> Option<f64> {
        self.conjugate_points.first().copied()
    }

    pub fn det_a(&self) -> Vec<f64> {
        self.a.iter().map(|m| m.determinant()).collect()
    }

    /// Columns `time, a11, a12, a21, a22, det_a, b11, b12, b21, b22`.
    pub fn to_table(&self, name: &str) -> Table {
        let mut table = Table::new(
            name,
            &["time", "a11", "a12", "a21", "a22", "det_a", "b11", "b12", "b21", "b22"],
        );
        for k in 0..self.times.len() {
            let (a, b) = (&self.a[k], &self.b[k]);
            table.push(vec![
                fmt_f(self.times[k]),
                fmt_f(a[(0, 0)]),
                fmt_f(a[(0, 1)]),
                fmt_f(a[(1, 0)]),
                fmt_f(a[(1, 1)]),
                fmt_f(a.determinant()),
                fmt_f(b[(0, 0)]),
                fmt_f(b[(0, 1)]),
                fmt_f(b[(1, 0)]),
                fmt_f(b[(1, 1)]),
            ]);
        }
        table
    }
}

/// `R⊥` at every sample of a framed trajectory.
pub fn normal_curvature(traj: &Trajectory) -> Result<Vec<Matrix2<f64>>> {
    let frames = traj.frames.as_ref().ok_or(Error::MissingFrame)?;
    traj.states
        .par_iter()
        .zip(frames.par_iter())
        .map(|(s, fr)| normal_curvature_at(&traj.spec, &s.q, &s.v, fr))
        .collect()
}

fn normal_curvature_at(spec: &MetricSpec, q: &ChartPoint, v: &Vector3<f64>, fr: &NormalFrame) -> Result<Matrix2<f64>> {
    Ok(curvature_at(spec, q)?.jacobi_operator(fr, v))
}

/// Cubic Lagrange interpolation of sampled matrices at `t ∈ [times[k], times[k+1]]`.
pub(crate) fn interpolate(times: &[f64], mats: &[Matrix2<f64>], k: usize, t: f64) -> Matrix2<f64> {
    let n = times.len();
    if n < 4 {
        let k1 = (k + 1).min(n - 1);
        if k1 == k {
            return mats[k];
        }
        let w = (t - times[k]) / (times[k1] - times[k]);
        return mats[k] * (1.0 - w) + mats[k1] * w;
    }
    let j0 = k.saturating_sub(1).min(n - 4);
    let mut out = Matrix2::zeros();
    for i in j0..j0 + 4 {
        let mut w = 1.0;
        for j in j0..j0 + 4 {
            if j != i {
                w *= (t - times[j]) / (times[i] - times[j]);
            }
        }
        out += mats[i] * w;
    }
    out
}

type Pair = (Matrix2<f64>, Matrix2<f64>);

/// One RK4 step of `X'' = −R X` over `[times[k], times[k+1]]` (or the reverse
/// when `backward`), with `R` interpolated at the half step.
fn jacobi_step(times: &[f64], r: &[Matrix2<f64>], k: usize, x: &Pair, backward: bool) -> Pair {
    let (t0, t1) = (times[k], times[k + 1]);
    let h = if backward { t0 - t1 } else { t1 - t0 };
    let r_start = if backward { r[k + 1] } else { r[k] };
    let r_end = if backward { r[k] } else { r[k + 1] };
    let r_mid = interpolate(times, r, k, 0.5 * (t0 + t1));
    let f = |rm: &Matrix2<f64>, (p, dp): &Pair| -> Pair { (*dp, -(rm * p)) };
    let add = |(p, dp): &Pair, (q, dq): &Pair, s: f64| -> Pair { (p + q * s, dp + dq * s) };
    let k1 = f(&r_start, x);
    let k2 = f(&r_mid, &add(x, &k1, 0.5 * h));
    let k3 = f(&r_mid, &add(x, &k2, 0.5 * h));
    let k4 = f(&r_end, &add(x, &k3, h));
    (
        x.0 + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
        x.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
    )
}

/// Solves `X'' + R⊥ X = 0` on the sample grid from the initial data at sample 0.
pub(crate) fn propagate_forward(times: &[f64], r: &[Matrix2<f64>], init: Pair) -> Vec<Pair> {
    let mut out = Vec::with_capacity(times.len());
    out.push(init);
    for k in 0..times.len().saturating_sub(1) {
        let next = jacobi_step(times, r, k, &out[k], false);
        out.push(next);
    }
    out
}

/// Solves `X'' + R⊥ X = 0` from data at the last sample towards sample 0.
/// The result is indexed like `times`.
pub(crate) fn propagate_backward(times: &[f64], r: &[Matrix2<f64>], end: Pair) -> Vec<Pair> {
    let n = times.len();
    let mut out = vec![end; n];
    for k in (0..n.saturating_sub(1)).rev() {
        out[k] = jacobi_step(times, r, k, &out[k + 1], true);
    }
    out
}

/// Propagates `A` and `B` along a framed trajectory and locates conjugate points.
pub fn propagate_jacobi(traj: &Trajectory) -> Result<JacobiRun> {
    let frames = traj.frames.as_ref().ok_or(Error::MissingFrame)?;
    let r = normal_curvature(traj)?;
    let times = &traj.times;
    let a_run = propagate_forward(times, &r, (Matrix2::zeros(), Matrix2::identity()));
    let b_run = propagate_forward(times, &r, (Matrix2::identity(), Matrix2::zeros()));

    let mut frame_vertical = Vec::with_capacity(times.len());
    for (s, fr) in traj.states.iter().zip(frames) {
        let g = metric_at(&traj.spec, &s.q)?;
        let vt = 1.0 / g[(T, T)].sqrt();
        // g(e, V) = vt · (g e)_t
        frame_vertical.push(Vector2::new((g * fr[0])[T] * vt, (g * fr[1])[T] * vt));
    }
    let initial_vertical = {
        let s = &traj.states[0];
        let g = metric_at(&traj.spec, &s.q)?;
        (g * s.v)[T] / g[(T, T)].sqrt()
    };

    let a: Vec<_> = a_run.iter().map(|p| p.0).collect();
    let a_prime: Vec<_> = a_run.iter().map(|p| p.1).collect();
    let det: Vec<f64> = a.iter().map(|m| m.determinant()).collect();
    let det_min = times
        .iter()
        .zip(&det)
        .skip(1)
        .map(|(t, d)| d / (t * t))
        .fold(f64::NAN, f64::min);

    let dense = Dense {
        traj,
        frames,
        a_run: &a_run,
    };
    let conjugate_points = locate_zeros(times, &det, &a, &dense)?;

    Ok(JacobiRun {
        spec: traj.spec.clone(),
        times: times.clone(),
        normal_curvature: r,
        a,
        a_prime,
        b: b_run.iter().map(|p| p.0).collect(),
        b_prime: b_run.iter().map(|p| p.1).collect(),
        frame_vertical,
        initial_vertical,
        conjugate_points,
        det_min,
    })
}

/// Re-integrates geodesic, frame and `A` together from a sample with the exact
/// curvature at every stage. Used only to refine zeros of `det A`.
struct Dense<'a> {
    traj: &'a Trajectory,
    frames: &'a [NormalFrame],
    a_run: &'a [Pair],
}

type DenseState = (State, Matrix2<f64>, Matrix2<f64>);

impl Dense<'_> {
    fn rhs(&self, (s, a, da): &DenseState) -> Result<DenseState> {
        let (q, v, fr) = unpack(s);
        let r = normal_curvature_at(&self.traj.spec, &q, &v, &fr)?;
        Ok((geodesic_rhs(&self.traj.spec, s)?, *da, -(r * a)))
    }

    fn det_at(&self, k: usize, t: f64) -> Result<f64> {
        let t0 = self.traj.times[k];
        let span = t - t0;
        if span <= 0.0 {
            return Ok(self.a_run[k].0.determinant());
        }
        let st = &self.traj.states[k];
        let mut x: DenseState = (pack(&st.q, &st.v, &self.frames[k]), self.a_run[k].0, self.a_run[k].1);
        let n = (span / DENSE_STEP).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let add =
            |x: &DenseState, d: &DenseState, s: f64| -> DenseState { (x.0 + d.0 * s, x.1 + d.1 * s, x.2 + d.2 * s) };
        for _ in 0..n {
            let k1 = self.rhs(&x)?;
            let k2 = self.rhs(&add(&x, &k1, 0.5 * h))?;
            let k3 = self.rhs(&add(&x, &k2, 0.5 * h))?;
            let k4 = self.rhs(&add(&x, &k3, h))?;
            x = (
                x.0 + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
                x.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
                x.2 + (k1.2 + k2.2 * 2.0 + k3.2 * 2.0 + k4.2) * (h / 6.0),
            );
        }
        Ok(x.1.determinant())
    }
}

fn bisect(dense: &Dense, k: usize, lo: f64, hi: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut f_lo = dense.det_at(k, lo)?;
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = dense.det_at(k, mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn golden_min_abs(dense: &Dense, k: usize, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = dense.det_at(k, c)?.abs();
    let mut fd = dense.det_at(k, d)?.abs();
    while b - a > ROOT_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = dense.det_at(k, c)?.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = dense.det_at(k, d)?.abs();
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

fn locate_zeros(times: &[f64], det: &[f64], a: &[Matrix2<f64>], dense: &Dense) -> Result<Vec<f64>> {
    let n = times.len();
    let mut roots = Vec::new();
    for k in 1..n {
        if det[k] == 0.0 {
            roots.push(times[k]);
            continue;
        }
        if k + 1 < n && det[k + 1] != 0.0 && (det[k] > 0.0) != (det[k + 1] > 0.0) {
            roots.push(bisect(dense, k, times[k], times[k + 1])?);
        }
        // a double zero (both singular values vanish together) shows up only
        // as a local minimum of |det A|
        if k >= 2 && k + 1 < n {
            let (l, m, r) = (det[k - 1], det[k], det[k + 1]);
            let same_sign = (l > 0.0) == (m > 0.0) && (m > 0.0) == (r > 0.0);
            let scale = a[k].norm_squared().max(1.0);
            if same_sign && m.abs() <= l.abs() && m.abs() <= r.abs() && m.abs() <= TANGENT_PREFILTER * scale {
                let (t_min, f_min) = golden_min_abs(dense, k - 1, times[k - 1], times[k + 1])?;
                if f_min <= TANGENT_ZERO_TOL {
                    roots.push(t_min);
                }
            }
        }
    }
    roots.sort_by(|x, y| x.total_cmp(y));
    roots.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
    Ok(roots)
}

/// First zero of `det A` in `(0, end]`, or `None`.
pub fn first_conjugate_point(traj: &Trajectory) -> Result<Option<f64>> {
    Ok(propagate_jacobi(traj)?.first_conjugate())
}

/// Least-squares fit of `c · sin(ω t)` to samples, with `ω` searched in
/// `[omega_lo, omega_hi]`. Returns `(ω, c)`.
pub fn fit_sine_frequency(times: &[f64], values: &[f64], omega_lo: f64, omega_hi: f64) -> Result<(f64, f64)> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::domain("sine fit needs at least three paired samples"));
    }
    if !(0.0 < omega_lo && omega_lo < omega_hi) {
        return Err(Error::domain("sine fit needs 0 < omega_lo < omega_hi"));
    }
    // residual after eliminating the amplitude in closed form
    let residual = |w: f64| {
        let (mut sy, mut ss) = (0.0, 0.0);
        for (t, y) in times.iter().zip(values) {
            let s = (w * t).sin();
            sy += s * y;
            ss += s * s;
        }
        let c = if ss > 0.0 { sy / ss } else { 0.0 };
        let r: f64 = times
            .iter()
            .zip(values)
            .map(|(t, y)| (y - c * (w * t).sin()).powi(2))
            .sum();
        (r, c)
    };
    let grid = 2000;
    let dw = (omega_hi - omega_lo) / grid as f64;
    let mut best = (f64::INFINITY, omega_lo);
    for i in 0..=grid {
        let w = omega_lo + i as f64 * dw;
        let (r, _) = residual(w);
        if r < best.0 {
            best = (r, w);
        }
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((best.1 - dw).max(omega_lo), (best.1 + dw).min(omega_hi));
    while b - a > 1e-12 * best.1.max(1.0) {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if residual(c).0 <= residual(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let w = 0.5 * (a + b);
    Ok((w, residual(w).1))
}

/// One initial condition of the comparison: `J(0) = h · n_h`, `J'(0) = w · V`
/// with `n_h` the horizontal unit normal and `V` the vertical field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RauchCase {
    pub name: &'static str,
    pub horizontal: f64,
    pub vertical_rate: f64,
    /// `max (bound − |J|)⁺ / max(1, bound)`.
    pub violation: f64,
    /// `max |bound − |J|| / max(1, bound)`.
    pub equality_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RauchReport {
    pub k_min: f64,
    pub cases: Vec<RauchCase>,
}

impl RauchReport {
    pub fn max_violation(&self) -> f64 {
        self.cases.iter().map(|c| c.violation).fold(0.0, f64::max)
    }

    pub fn max_equality_gap(&self) -> f64 {
        self.cases.iter().map(|c| c.equality_gap).fold(0.0, f64::max)
    }
}

/// Rauch-type lower bound `|J(t)|² ≥ h² C(t)² + w² t²`, with
/// `C(t) = cosh(√−K_min t)` (or `1` when `K_min ≥ 0`), for the horizontal,
/// vertical and mixed initial conditions.
///
/// The field is `J = B (h n_h) + A (w V)`: the horizontal part is launched by
/// value and the vertical part by velocity. Only horizontal geodesics of the
/// product metric are supported.
pub fn rauch_check(run: &JacobiRun, k_min: f64) -> Result<RauchReport> {
    if !run.spec.is_product() {
        return Err(Error::Unsupported("Rauch comparison needs the product metric".into()));
    }
    if run.initial_vertical.abs() > 1e-9 {
        return Err(Error::Unsupported(format!(
            "Rauch comparison needs a horizontal geodesic, got g(γ', V) = {}",
            run.initial_vertical
        )));
    }
    let nv = run.frame_vertical[0];
    let nh = Vector2::new(-nv[1], nv[0]);
    let c = |t: f64| if k_min < 0.0 { ((-k_min).sqrt() * t).cosh() } else { 1.0 };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut cases = Vec::new();
    for (name, h, w) in [("horizontal", 1.0, 0.0), ("vertical", 0.0, 1.0), ("mixed", s, s)] {
        let (mut violation, mut gap) = (0.0f64, 0.0f64);
        for k in 0..run.times.len() {
            let t = run.times[k];
            let j = run.b[k] * (nh * h) + run.a[k] * (nv * w);
            let bound = (h * h * c(t).powi(2) + w * w * t * t).sqrt();
            let scale = bound.max(1.0);
            violation = violation.max((bound - j.norm()).max(0.0) / scale);
            gap = gap.max((bound - j.norm()).abs() / scale);
        }
        cases.push(RauchCase {
            name,
            horizontal: h,
            vertical_rate: w,
            violation,
            equality_gap: gap,
        });
    }
    Ok(RauchReport { k_min, cases })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub n: usize,
    pub seed: u64,
    pub tmax: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub index: usize,
    pub start: PhaseState,
    /// Arc length actually integrated (less than `tmax` when truncated).
    pub t_reached: f64,
    pub truncated: bool,
    pub first_conjugate: Option<f64>,
    pub det_min: f64,
}

/// Random unit-speed geodesics from base points in `bx`, each searched for a
/// first conjugate point on `[0, tmax]`.
pub fn scan_conjugate(spec: &MetricSpec, bx: &SampleBox, opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    if !(opts.tmax > 0.0 && opts.step > 0.0) {
        return Err(Error::domain("scan needs tmax > 0 and step > 0"));
    }
    (0..opts.n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(opts.seed, i as u64);
            let q = bx.sample(&mut rng);
            let v = random_unit_direction(spec, &q, &mut rng)?;
            let traj = integrate_geodesic(spec, q, v, opts.tmax, opts.step)?;
            let run = propagate_jacobi(&traj)?;
            Ok(ScanRecord {
                index: i,
                start: traj.states[0],
                t_reached: traj.end_time(),
                truncated: traj.truncated,
                first_conjugate: run.first_conjugate(),
                det_min: run.det_min,
            })
        })
        .collect()
}

pub fn scan_table(records: &[ScanRecord]) -> Table {
    let mut table = Table::new(
        "scan_conjugate",
        &[
            "index",
            "x",
            "y",
            "t",
            "vx",
            "vy",
            "vt",
            "t_star",
            "det_min",
            "t_reached",
            "truncated",
        ],
    );
    for r in records {
        let s = &r.start;
        table.push(vec![
            r.index.to_string(),
            fmt_f(s.q.x),
            fmt_f(s.q.y),
            fmt_f(s.q.t),
            fmt_f(s.v[0]),
            fmt_f(s.v[1]),
            fmt_f(s.v[2]),
            fmt_opt(r.first_conjugate),
            fmt_f(r.det_min),
            fmt_f(r.t_reached),
            r.truncated.to_string(),
        ]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::HPoint;
    use crate::metric::WarpProfile;

    fn product_vertical(l: f64, total: f64) -> Trajectory {
        let spec = MetricSpec::product(l).unwrap();
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        integrate_geodesic(&spec, q0, Vector3::new(0.0, 0.0, 1.0 / l), total, 1e-3).unwrap()
    }

    #[test]
    fn product_vertical_jacobi_is_linear() {
        let run = propagate_jacobi(&product_vertical(1.0, 5.0)).unwrap();
        for (t, a) in run.times.iter().zip(&run.a) {
            assert!((a - Matrix2::identity() * *t).amax() < 1e-9);
        }
        assert!(run.conjugate_points.is_empty());
    }

    #[test]
    fn product_horizontal_jacobi_grows_like_sinh() {
        let spec = MetricSpec::product(1.0).unwrap();
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 1.0, 0.0), 4.0, 1e-3).unwrap();
        let run = propagate_jacobi(&traj).unwrap();
        let k = run.times.len() - 1;
        // one normal direction is horizontal (K = −1), the other vertical (K = 0)
        let a = run.a[k];
        let mut diag = [a[(0, 0)], a[(1, 1)]];
        diag.sort_by(f64::total_cmp);
        assert!((diag[0] - 4.0).abs() < 1e-8);
        assert!((diag[1] - 4f64.sinh()).abs() < 1e-7 * 4f64.sinh());
        assert!(run.det_min >= 1.0 - 1e-9);
    }

    #[test]
    fn warped_center_conjugate_point() {
        let spec = MetricSpec::warped(WarpProfile::new(HPoint::I, 0.1).unwrap());
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let s = PhaseState::normalized(&spec, q0, Vector3::new(0.0, 0.0, 1.0)).unwrap();
        let traj = integrate_geodesic(&spec, q0, s.v, 10.0, 1e-3).unwrap();
        let run = propagate_jacobi(&traj).unwrap();
        let omega = (0.2f64 / 1.05).sqrt();
        let t_star = run.first_conjugate().expect("conjugate point");
        assert!((t_star - std::f64::consts::PI / omega).abs() < 1e-6, "{t_star}");
        assert!(run.det_min < 0.0 || run.det_min < 1e-6);
    }

    #[test]
    fn sine_fit_recovers_frequency() {
        let times: Vec<f64> = (0..500).map(|i| i as f64 * 0.02).collect();
        let values: Vec<f64> = times.iter().map(|t| (0.7 * t).sin() / 0.7).collect();
        let (w, c) = fit_sine_frequency(&times, &values, 0.1, 2.0).unwrap();
        assert!((w - 0.7).abs() < 1e-9);
        assert!((c - 1.0 / 0.7).abs() < 1e-7);
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let times = [0.0, 0.3, 0.5, 1.0, 1.2];
        let mats: Vec<Matrix2<f64>> = times.iter().map(|t| Matrix2::identity() * (t * t * t - t)).collect();
        for k in 0..4 {
            let t = 0.5 * (times[k] + times[k + 1]);
            let m = interpolate(&times, &mats, k, t);
            assert!((m[(0, 0)] - (t * t * t - t)).abs() < 1e-14);
        }
    }

    #[test]
    fn rauch_equality_for_product() {
        let spec = MetricSpec::product(1.0).unwrap();
        let q0 = ChartPoint::new(0.0, 1.0, 0.0).unwrap();
        let traj = integrate_geodesic(&spec, q0, Vector3::new(0.0, 1.0, 0.0), 5.0, 1e-3).unwrap();
        let run = propagate_jacobi(&traj).unwrap();
        let report = rauch_check(&run, -1.0).unwrap();
        assert!(report.max_violation() < 1e-6);
        assert!(report.max_equality_gap() < 1e-6);
    }

    #[test]
    fn rauch_rejects_vertical_geodesic() {
        let run = propagate_jacobi(&product_vertical(1.0, 1.0)).unwrap();
        assert!(matches!(rauch_check(&run, -1.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn missing_frame_is_reported() {
        let traj = product_vertical(1.0, 1.0).without_frame();
        assert!(matches!(propagate_jacobi(&traj), Err(Error::MissingFrame)));
    }
}

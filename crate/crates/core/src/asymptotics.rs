//! Large-scale geometry of the product metric: the Busemann function of the
//! fiber ray, metric balls in the universal cover and volume entropy.
//!
//! The fiber ray is `γ(s) = (i, s/L)`, unit speed for `g = g_hyp + L² dt²`.

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::hyperbolic::{hyp_distance, HPoint};
use crate::report::{fmt_f, Table};

/// Busemann values count as converged once the remaining tail is below this.
pub const BUSEMANN_TAIL: f64 = 1e-12;
/// Explicit ray parameters with a larger tail are refused by the derivative checks.
pub const HESSIAN_TAIL_LIMIT: f64 = 1e-6;
const FD_STEP: f64 = 1e-4;
const QUAD_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductPoint {
    pub z: HPoint,
    pub t: f64,
}

impl ProductPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::domain("fiber coordinate must be finite"));
        }
        Ok(Self {
            z: HPoint::new(x, y)?,
            t,
        })
    }

    fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut p = *self;
        match axis {
            0 => p.z.x += h,
            1 => p.z.y += h,
            _ => p.t += h,
        }
        p
    }
}

fn check_l(l: f64) -> Result<()> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::domain(format!("fiber length L = {l} must be > 0")));
    }
    Ok(())
}

/// Distance in the universal cover `H² × R`.
pub fn product_distance(l: f64, p: &ProductPoint, q: &ProductPoint) -> Result<f64> {
    check_l(l)?;
    let d = hyp_distance(&p.z, &q.z)?;
    Ok(d.hypot(l * (p.t - q.t)))
}

/// `d(x, γ(s)) − s` for the fiber ray through `(i, 0)`.
pub fn busemann_estimate(l: f64, x: &ProductPoint, s: f64) -> Result<f64> {
    check_l(l)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::domain(format!("ray parameter s = {s} must be > 0")));
    }
    let dh = hyp_distance(&x.z, &HPoint::I)?;
    // d − s = d_h² / (d + w) − L t with w = s − L t, free of cancellation for w > 0
    let w = s - l * x.t;
    let d = dh.hypot(w);
    if w > 0.0 {
        Ok(dh * dh / (d + w) - l * x.t)
    } else {
        Ok(d - s)
    }
}

/// Upper bound `d_h² / (2w)` on `b_s(x) − b(x)`.
pub fn busemann_tail(l: f64, x: &ProductPoint, s: f64) -> Result<f64> {
    let dh = hyp_distance(&x.z, &HPoint::I)?;
    let w = s - l * x.t;
    if w <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(dh * dh / (2.0 * w))
}

/// Smallest ray parameter, at least `30 + |t| L`, whose tail is below
/// [`BUSEMANN_TAIL`].
pub fn converged_parameter(l: f64, x: &ProductPoint) -> Result<f64> {
    check_l(l)?;
    let dh = hyp_distance(&x.z, &HPoint::I)?;
    let base = 30.0 + x.t.abs() * l;
    let needed = l * x.t + dh * dh / (2.0 * BUSEMANN_TAIL);
    Ok(base.max(needed))
}

/// Busemann function of the fiber ray evaluated at a converged parameter.
pub fn busemann(l: f64, x: &ProductPoint) -> Result<f64> {
    busemann_estimate(l, x, converged_parameter(l, x)?)
}

/// Bound `(1 + d_h)² / w` on the tail of `b_s` and on its first two
/// derivatives, with `w = s − L t`.
fn derivative_tail(l: f64, x: &ProductPoint, s: f64) -> Result<f64> {
    let dh = hyp_distance(&x.z, &HPoint::I)?;
    let w = s - l * x.t;
    if w <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 + dh).powi(2) / w)
}

fn resolve_parameter(l: f64, x: &ProductPoint, s: Option<f64>) -> Result<f64> {
    match s {
        None => {
            let dh = hyp_distance(&x.z, &HPoint::I)?;
            let s = converged_parameter(l, x)?;
            Ok(s.max(l * x.t + (1.0 + dh).powi(2) / BUSEMANN_TAIL))
        }
        Some(s) => {
            let tail = derivative_tail(l, x, s)?;
            if tail > HESSIAN_TAIL_LIMIT {
                return Err(Error::Accuracy(format!(
                    "ray parameter s = {s} leaves a Busemann tail of {tail:e}"
                )));
            }
            Ok(s)
        }
    }
}

fn scale(axis: usize, x: &ProductPoint) -> f64 {
    if axis < 2 {
        x.z.y
    } else {
        1.0
    }
}

/// Coordinate gradient `(∂_x b, ∂_y b, ∂_t b)` and metric gradient `∇b = g⁻¹ db`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusemannGradient {
    pub differential: Vector3<f64>,
    pub gradient: Vector3<f64>,
    /// `|∇b|_g`.
    pub norm: f64,
    /// `∂_t b / L`; `−1` means `∇b = −V`.
    pub fiber_alignment: f64,
}

fn product_metric(l: f64, x: &ProductPoint) -> Matrix3<f64> {
    let y2 = x.z.y * x.z.y;
    Matrix3::from_diagonal(&Vector3::new(1.0 / y2, 1.0 / y2, l * l))
}

/// Central differences with one Richardson level, steps scaled by `y` in the base.
pub fn busemann_gradient(l: f64, x: &ProductPoint, s: Option<f64>) -> Result<BusemannGradient> {
    let s = resolve_parameter(l, x, s)?;
    let b = |p: &ProductPoint| busemann_estimate(l, p, s);
    let mut db = Vector3::zeros();
    for axis in 0..3 {
        let h = FD_STEP * scale(axis, x);
        let d = |h: f64| -> Result<f64> { Ok((b(&x.shifted(axis, h))? - b(&x.shifted(axis, -h))?) / (2.0 * h)) };
        let (coarse, fine) = (d(h)?, d(0.5 * h)?);
        db[axis] = fine + (fine - coarse) / 3.0;
    }
    let g = product_metric(l, x);
    let ginv = g.try_inverse().expect("diagonal metric");
    let gradient = ginv * db;
    Ok(BusemannGradient {
        differential: db,
        gradient,
        norm: gradient.dot(&(g * gradient)).sqrt(),
        fiber_alignment: db[2] / l,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusemannHessian {
    /// `Hess b` on the orthonormal horizontal frame `(y ∂_x, y ∂_y)`.
    pub horizontal: Matrix2<f64>,
    /// `Hess b (V, V)` with `V = ∂_t / L`.
    pub vertical: f64,
    /// Largest mixed entry `|Hess b (E_i, V)|`.
    pub mixed: f64,
}

/// Covariant Hessian of the converged Busemann function,
/// `∇²b_ij = ∂_i∂_j b − Γ^k_ij ∂_k b`, by central second differences with one
/// Richardson level.
pub fn busemann_hessian(l: f64, x: &ProductPoint, s: Option<f64>) -> Result<BusemannHessian> {
    let s = resolve_parameter(l, x, s)?;
    let b = |p: &ProductPoint| busemann_estimate(l, p, s);
    let b0 = b(x)?;
    let second = |i: usize, j: usize, hi: f64, hj: f64| -> Result<f64> {
        if i == j {
            Ok((b(&x.shifted(i, hi))? - 2.0 * b0 + b(&x.shifted(i, -hi))?) / (hi * hi))
        } else {
            let pp = b(&x.shifted(i, hi).shifted(j, hj))?;
            let pm = b(&x.shifted(i, hi).shifted(j, -hj))?;
            let mp = b(&x.shifted(i, -hi).shifted(j, hj))?;
            let mm = b(&x.shifted(i, -hi).shifted(j, -hj))?;
            Ok((pp - pm - mp + mm) / (4.0 * hi * hj))
        }
    };
    let mut d2 = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let (hi, hj) = (FD_STEP * scale(i, x), FD_STEP * scale(j, x));
            let coarse = second(i, j, hi, hj)?;
            let fine = second(i, j, 0.5 * hi, 0.5 * hj)?;
            let v = fine + (fine - coarse) / 3.0;
            d2[(i, j)] = v;
            d2[(j, i)] = v;
        }
    }
    let db = busemann_gradient(l, x, Some(s))?.differential;
    // hyperbolic Christoffel symbols; every symbol with a t index vanishes
    let y = x.z.y;
    let mut gamma = [[[0.0; 3]; 3]; 3];
    gamma[0][0][1] = -1.0 / y;
    gamma[0][1][0] = -1.0 / y;
    gamma[1][0][0] = 1.0 / y;
    gamma[1][1][1] = -1.0 / y;
    let mut hess = d2;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                hess[(i, j)] -= gamma[k][i][j] * db[k];
            }
        }
    }
    let frame = [
        Vector3::new(y, 0.0, 0.0),
        Vector3::new(0.0, y, 0.0),
        Vector3::new(0.0, 0.0, 1.0 / l),
    ];
    let form = |u: &Vector3<f64>, v: &Vector3<f64>| u.dot(&(hess * v));
    let horizontal = Matrix2::new(
        form(&frame[0], &frame[0]),
        form(&frame[0], &frame[1]),
        form(&frame[1], &frame[0]),
        form(&frame[1], &frame[1]),
    );
    Ok(BusemannHessian {
        horizontal,
        vertical: form(&frame[2], &frame[2]),
        mixed: form(&frame[0], &frame[2]).abs().max(form(&frame[1], &frame[2]).abs()),
    })
}

/// Area of a disk of radius `r` in the plane of curvature `−κ`.
pub fn scaled_disk_area(r: f64, kappa: f64) -> f64 {
    let s = (0.5 * kappa.sqrt() * r).sinh();
    4.0 * std::f64::consts::PI * s * s / kappa
}

fn simpson_adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Volume of a metric ball of radius `r` in `H² × R` with the base rescaled
/// to curvature `−κ`: `∫_{−r}^{r} A_κ(√(r² − u²)) du`.
pub fn ball_volume_scaled(r: f64, kappa: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("radius {r} must be >= 0")));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("curvature scale {kappa} must be > 0")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    // u = r sin θ removes the square-root endpoint singularity
    let f = |theta: f64| {
        let c = theta.cos();
        scaled_disk_area(r * c, kappa) * r * c
    };
    let half = std::f64::consts::FRAC_PI_2;
    // the integrand is even; a rough first pass sets the absolute tolerance
    let rough = 2.0 * simpson_adaptive(&f, 0.0, half, f64::INFINITY);
    Ok(2.0 * simpson_adaptive(&f, 0.0, half, QUAD_TOL * rough.abs()))
}

/// Ball volume for the curvature `−1` base. The fiber length does not enter:
/// in the universal cover the fiber is a line.
pub fn ball_volume(l: f64, r: f64) -> Result<f64> {
    check_l(l)?;
    ball_volume_scaled(r, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    /// Growth rate `h` of the fit `ln V(R) = h R + β ln R + c` through the
    /// radii `R_max / 2, 3 R_max / 4, R_max`.
    pub estimate: f64,
    /// `ln V(R_max) / R_max`, which approaches the same limit only like `ln R / R`.
    pub raw_ratio: f64,
    /// The fitted `β`.
    pub prefactor_exponent: f64,
    pub r_max: f64,
}

pub fn volume_entropy(l: f64, r_max: f64) -> Result<EntropyEstimate> {
    check_l(l)?;
    volume_entropy_scaled(r_max, 1.0)
}

pub fn volume_entropy_scaled(r_max: f64, kappa: f64) -> Result<EntropyEstimate> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::domain(format!("R_max = {r_max} must be > 0")));
    }
    let radii = [0.5 * r_max, 0.75 * r_max, r_max];
    let mut m = Matrix3::zeros();
    let mut rhs = Vector3::zeros();
    for (i, &r) in radii.iter().enumerate() {
        m[(i, 0)] = r;
        m[(i, 1)] = r.ln();
        m[(i, 2)] = 1.0;
        rhs[i] = ball_volume_scaled(r, kappa)?.ln();
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Accuracy("singular entropy fit".into()))?;
    Ok(EntropyEstimate {
        estimate: sol[0],
        raw_ratio: rhs[2] / r_max,
        prefactor_exponent: sol[1],
        r_max,
    })
}

/// Columns `R, volume, log_volume_over_r` for `n` radii spaced evenly in `(0, R_max]`.
pub fn volume_growth_table(r_max: f64, kappa: f64, n: usize) -> Result<Table> {
    let mut table = Table::new("volume_growth", &["R", "volume", "log_volume_over_r"]);
    for i in 1..=n {
        let r = r_max * i as f64 / n as f64;
        let v = ball_volume_scaled(r, kappa)?;
        table.push(vec![fmt_f(r), fmt_f(v), fmt_f(v.ln() / r)]);
    }
    Ok(table)
}

//! Metrics on the chart `ℍ² × ℝ` with coordinates `(x, y, t)`.
//!
//! Three families are supported:
//!
//! * `Product`: `g_hyp + L² dt²`, the split metric.
//! * `Warped`: `g_hyp + f² dt²` where `f` is a radial bump around a centre
//!   point, quadratic near the centre and identically one outside a blend
//!   annulus.
//! * `Twisted`: `g_hyp + (dt + α dh)²` for a registered potential `h`.
//!
//! Christoffel symbols are analytic for the first two families and come from
//! central differences of the metric (one Richardson level) for the third.
//! The curvature tensor is always assembled from the coordinate formula with
//! differenced Christoffel symbols, then projected onto the algebraic
//! curvature symmetries; the size of that projection is kept as a quality
//! figure.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{acosh_one_plus, HPoint};

pub type Christoffel = [[[f64; 3]; 3]; 3];
pub type Riemann = [[[[f64; 3]; 3]; 3]; 3];

/// Coordinate indices.
pub const X: usize = 0;
pub const Y: usize = 1;
pub const T: usize = 2;

const CHRISTOFFEL_STEP: f64 = 1e-5;
const CURVATURE_STEP: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl ChartPoint {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite() && t.is_finite()) {
            return Err(Error::domain(format!("non-finite chart point ({x}, {y}, {t})")));
        }
        if y <= 0.0 {
            return Err(Error::domain(format!("chart point has y = {y} <= 0")));
        }
        Ok(Self { x, y, t })
    }

    pub fn base(&self) -> HPoint {
        HPoint { x: self.x, y: self.y }
    }

    pub fn coords(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.t)
    }

    pub(crate) fn from_coords(c: &Vector3<f64>) -> Self {
        Self {
            x: c[0],
            y: c[1],
            t: c[2],
        }
    }

    fn shifted(&self, axis: usize, h: f64) -> Self {
        let mut c = self.coords();
        c[axis] += h;
        Self::from_coords(&c)
    }

    fn check(&self) -> Result<()> {
        ChartPoint::new(self.x, self.y, self.t).map(|_| ())
    }
}

/// A smooth function on the hyperbolic plane used as the twist potential.
/// Implementors provide exact derivatives so that curvature oracles exist.
pub trait ScalarPotential: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn value(&self, x: f64, y: f64) -> f64;
    fn gradient(&self, x: f64, y: f64) -> [f64; 2];
    /// Coordinate second partials `∂_i ∂_j h`.
    fn second_partials(&self, x: f64, y: f64) -> [[f64; 2]; 2];

    /// Covariant Hessian with respect to the hyperbolic metric.
    fn hessian(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let d = self.gradient(x, y);
        let dd = self.second_partials(x, y);
        let gam = hyperbolic_christoffel(y);
        let mut h = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                h[i][j] = dd[i][j] - gam[0][i][j] * d[0] - gam[1][i][j] * d[1];
            }
        }
        h
    }
}

/// `h(x, y) = ln y`.
#[derive(Debug, Clone, Copy)]
pub struct LogY;

impl ScalarPotential for LogY {
    fn name(&self) -> &str {
        "log_y"
    }
    fn value(&self, _x: f64, y: f64) -> f64 {
        y.ln()
    }
    fn gradient(&self, _x: f64, y: f64) -> [f64; 2] {
        [0.0, 1.0 / y]
    }
    fn second_partials(&self, _x: f64, y: f64) -> [[f64; 2]; 2] {
        [[0.0, 0.0], [0.0, -1.0 / (y * y)]]
    }
}

/// `h(x, y) = x`.
#[derive(Debug, Clone, Copy)]
pub struct LinearX;

impl ScalarPotential for LinearX {
    fn name(&self) -> &str {
        "x"
    }
    fn value(&self, x: f64, _y: f64) -> f64 {
        x
    }
    fn gradient(&self, _x: f64, _y: f64) -> [f64; 2] {
        [1.0, 0.0]
    }
    fn second_partials(&self, _x: f64, _y: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }
}

/// Looks up one of the built-in potentials by name.
pub fn potential_by_name(name: &str) -> Result<Arc<dyn ScalarPotential>> {
    match name {
        "log_y" => Ok(Arc::new(LogY)),
        "x" => Ok(Arc::new(LinearX)),
        other => Err(Error::value(
            "potential",
            format!("unknown potential `{other}` (known: log_y, x)"),
        )),
    }
}

/// Radial warping profile `f(r)` around `center`, where `r` is hyperbolic
/// distance. Quadratic `1 + ε/2 − ε r²` for `r ≤ r0`, identically one for
/// `r ≥ r1`, joined by a quintic smoothstep on the deviation from one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpProfile {
    pub center: HPoint,
    pub eps: f64,
    pub r0: f64,
    pub r1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValue {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

impl WarpProfile {
    pub const DEFAULT_R0: f64 = 0.5;
    pub const DEFAULT_R1: f64 = 0.75;

    pub fn new(center: HPoint, eps: f64) -> Result<Self> {
        Self::with_radii(center, eps, Self::DEFAULT_R0, Self::DEFAULT_R1)
    }

    pub fn with_radii(center: HPoint, eps: f64, r0: f64, r1: f64) -> Result<Self> {
        let center = HPoint::new(center.x, center.y)?;
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::value("eps", format!("{eps} must be > 0")));
        }
        if !(r0 > 0.0 && r0 < r1) || !r1.is_finite() {
            return Err(Error::value(
                "r0",
                format!("need 0 < r0 < r1, got r0 = {r0}, r1 = {r1}"),
            ));
        }
        // f lies between 1 and the quadratic, whose minimum on [0, r1] is at r1.
        if 1.0 + eps * (0.5 - r1 * r1) <= 0.0 {
            return Err(Error::value(
                "eps",
                format!("eps = {eps} makes the warp non-positive inside r1 = {r1}"),
            ));
        }
        Ok(Self { center, eps, r0, r1 })
    }

    pub fn eval(&self, r: f64) -> WarpValue {
        let eps = self.eps;
        let dev = 0.5 * eps - eps * r * r;
        let ddev = -2.0 * eps * r;
        let d2dev = -2.0 * eps;
        if r <= self.r0 {
            return WarpValue {
                f: 1.0 + dev,
                df: ddev,
                d2f: d2dev,
            };
        }
        if r >= self.r1 {
            return WarpValue {
                f: 1.0,
                df: 0.0,
                d2f: 0.0,
            };
        }
        let width = self.r1 - self.r0;
        let s = (r - self.r0) / width;
        let s2 = s * s;
        let step = s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
        let dstep = 30.0 * s2 * (1.0 - s) * (1.0 - s) / width;
        let d2step = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (width * width);
        let keep = 1.0 - step;
        WarpValue {
            f: 1.0 + dev * keep,
            df: ddev * keep - dev * dstep,
            d2f: d2dev * keep - 2.0 * ddev * dstep - dev * d2step,
        }
    }

    /// Upper bound on `|f′|` over the whole profile.
    pub fn slope_bound(&self) -> f64 {
        let width = self.r1 - self.r0;
        let max_dev = (0.5 * self.eps).max(self.eps * (self.r1 * self.r1 - 0.5));
        2.0 * self.eps * self.r1 + max_dev * 15.0 / (8.0 * width)
    }

    /// `F(x, y) = f(r(x, y))` and its coordinate gradient.
    pub fn field(&self, x: f64, y: f64) -> (f64, [f64; 2]) {
        let c = self.center;
        let dx = x - c.x;
        let dy = y - c.y;
        let u = (dx * dx + dy * dy) / (2.0 * y * c.y);
        let du = [dx / (y * c.y), dy / (y * c.y) - u / y];
        let r = acosh_one_plus(u);
        let w = self.eval(r);
        // ∇F = f'(r) ∇r and ∇r = ∇u / sinh r; the ratio is smooth at r = 0.
        let ratio = if r < 1e-6 { w.d2f } else { w.df / r.sinh() };
        (w.f, [ratio * du[0], ratio * du[1]])
    }
}

/// `(f, f′, f″)` of the warp profile at hyperbolic radius `r`.
pub fn warp_profile_eval(w: &WarpProfile, r: f64) -> Result<(f64, f64, f64)> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("radius {r} must be >= 0")));
    }
    let v = w.eval(r);
    Ok((v.f, v.df, v.d2f))
}

#[derive(Debug, Clone)]
pub enum MetricSpec {
    Product {
        fiber_length: f64,
    },
    Warped(WarpProfile),
    Twisted {
        alpha: f64,
        potential: Arc<dyn ScalarPotential>,
    },
}

impl PartialEq for MetricSpec {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (MetricSpec::Product { fiber_length: a }, MetricSpec::Product { fiber_length: b }) => a == b,
            (MetricSpec::Warped(a), MetricSpec::Warped(b)) => a == b,
            (MetricSpec::Twisted { alpha: a, potential: p }, MetricSpec::Twisted { alpha: b, potential: q }) => {
                a == b && p.name() == q.name()
            }
            _ => false,
        }
    }
}

impl MetricSpec {
    pub fn product(fiber_length: f64) -> Result<Self> {
        if !(fiber_length > 0.0) || !fiber_length.is_finite() {
            return Err(Error::value("L", format!("{fiber_length} must be > 0")));
        }
        Ok(MetricSpec::Product { fiber_length })
    }

    pub fn warped(profile: WarpProfile) -> Self {
        MetricSpec::Warped(profile)
    }

    pub fn twisted(alpha: f64, potential: Arc<dyn ScalarPotential>) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::value("alpha", "must be finite"));
        }
        Ok(MetricSpec::Twisted { alpha, potential })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpec::Product { .. } => "Product",
            MetricSpec::Warped(_) => "Warped",
            MetricSpec::Twisted { .. } => "Twisted",
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, MetricSpec::Product { .. })
    }
}

fn hyperbolic_christoffel(y: f64) -> [[[f64; 2]; 2]; 2] {
    let mut g = [[[0.0; 2]; 2]; 2];
    g[0][0][1] = -1.0 / y;
    g[0][1][0] = -1.0 / y;
    g[1][0][0] = 1.0 / y;
    g[1][1][1] = -1.0 / y;
    g
}

fn metric_unchecked(spec: &MetricSpec, p: &ChartPoint) -> Matrix3<f64> {
    let hyp = 1.0 / (p.y * p.y);
    match spec {
        MetricSpec::Product { fiber_length } => {
            Matrix3::from_diagonal(&Vector3::new(hyp, hyp, fiber_length * fiber_length))
        }
        MetricSpec::Warped(w) => {
            let (f, _) = w.field(p.x, p.y);
            Matrix3::from_diagonal(&Vector3::new(hyp, hyp, f * f))
        }
        MetricSpec::Twisted { alpha, potential } => {
            // g_hyp + η⊗η with η = dt + α dh
            let [hx, hy] = potential.gradient(p.x, p.y);
            let eta = Vector3::new(alpha * hx, alpha * hy, 1.0);
            let mut g = eta * eta.transpose();
            g[(0, 0)] += hyp;
            g[(1, 1)] += hyp;
            g
        }
    }
}

/// Metric matrix in `(x, y, t)` coordinates.
pub fn metric_at(spec: &MetricSpec, p: &ChartPoint) -> Result<Matrix3<f64>> {
    p.check()?;
    Ok(metric_unchecked(spec, p))
}

pub(crate) fn inverse_metric(g: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    g.try_inverse()
        .ok_or_else(|| Error::Accuracy("metric matrix is singular".into()))
}

/// Per-axis difference steps, scaled with `y` in the base directions since the
/// hyperbolic metric's natural length at height `y` is `y`.
fn fd_steps(p: &ChartPoint, base: f64) -> Result<[f64; 3]> {
    let steps = [base * p.y, base * p.y, base];
    for (axis, &h) in steps.iter().enumerate() {
        let c = p.coords()[axis];
        let moved = (c + h) - c;
        if !(moved > 0.0) || ((moved - h) / h).abs() > 1e-3 || p.y - 2.0 * h <= 0.0 && axis == Y {
            return Err(Error::Accuracy(format!(
                "finite-difference step {h:e} underflows at ({}, {}, {})",
                p.x, p.y, p.t
            )));
        }
    }
    Ok(steps)
}

/// Central difference with one Richardson level:
/// `(4 D(h/2) − D(h)) / 3`.
fn richardson<const N: usize>(h: f64, mut f: impl FnMut(f64) -> [f64; N]) -> [f64; N] {
    let plus = f(h);
    let minus = f(-h);
    let plus_half = f(0.5 * h);
    let minus_half = f(-0.5 * h);
    let mut out = [0.0; N];
    for k in 0..N {
        let coarse = (plus[k] - minus[k]) / (2.0 * h);
        let fine = (plus_half[k] - minus_half[k]) / h;
        out[k] = (4.0 * fine - coarse) / 3.0;
    }
    out
}

fn flatten3(m: &Matrix3<f64>) -> [f64; 9] {
    let mut out = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = m[(i, j)];
        }
    }
    out
}

/// `∂_k g_ij` by differencing, indexed `[k](i, j)`.
pub(crate) fn metric_derivatives(spec: &MetricSpec, p: &ChartPoint, base: f64) -> Result<[Matrix3<f64>; 3]> {
    let steps = fd_steps(p, base)?;
    let mut out = [Matrix3::zeros(); 3];
    for (k, &h) in steps.iter().enumerate() {
        let d = richardson(h, |s| flatten3(&metric_unchecked(spec, &p.shifted(k, s))));
        out[k] = Matrix3::from_row_slice(&d);
    }
    Ok(out)
}

fn christoffel_from_derivatives(ginv: &Matrix3<f64>, dg: &[Matrix3<f64>; 3]) -> Christoffel {
    let mut gam = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        for i in 0..3 {
            for j in i..3 {
                let mut s = 0.0;
                for l in 0..3 {
                    s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gam[k][i][j] = 0.5 * s;
                gam[k][j][i] = 0.5 * s;
            }
        }
    }
    gam
}

fn christoffel_unchecked(spec: &MetricSpec, p: &ChartPoint) -> Result<Christoffel> {
    let mut gam = [[[0.0; 3]; 3]; 3];
    let inv_y = 1.0 / p.y;
    match spec {
        MetricSpec::Product { .. } | MetricSpec::Warped(_) => {
            gam[X][X][Y] = -inv_y;
            gam[X][Y][X] = -inv_y;
            gam[Y][X][X] = inv_y;
            gam[Y][Y][Y] = -inv_y;
            if let MetricSpec::Warped(w) = spec {
                let (f, [fx, fy]) = w.field(p.x, p.y);
                gam[T][X][T] = fx / f;
                gam[T][T][X] = fx / f;
                gam[T][Y][T] = fy / f;
                gam[T][T][Y] = fy / f;
                let y2 = p.y * p.y;
                gam[X][T][T] = -y2 * f * fx;
                gam[Y][T][T] = -y2 * f * fy;
            }
        }
        MetricSpec::Twisted { .. } => {
            let g = metric_unchecked(spec, p);
            let ginv = inverse_metric(&g)?;
            let dg = metric_derivatives(spec, p, CHRISTOFFEL_STEP)?;
            gam = christoffel_from_derivatives(&ginv, &dg);
        }
    }
    Ok(gam)
}

/// Christoffel symbols `Γ^k_ij`, indexed `[k][i][j]`.
pub fn christoffel_at(spec: &MetricSpec, p: &ChartPoint) -> Result<Christoffel> {
    p.check()?;
    christoffel_unchecked(spec, p)
}

/// Curvature tensor at a point with its derived quantities.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: ChartPoint,
    pub metric: Matrix3<f64>,
    /// Lowered components `R_abcd = g(R(∂_c, ∂_d)∂_b, ∂_a)`, symmetrized.
    pub riemann: Riemann,
    /// Coordinate-plane sectional curvatures keyed by `(i, j)`, `i < j`.
    pub sectionals: BTreeMap<(usize, usize), f64>,
    /// Largest violation of the pair symmetries before symmetrization.
    pub symmetry_residual: f64,
    /// Largest first-Bianchi cyclic sum before symmetrization.
    pub bianchi_residual: f64,
}

impl CurvatureSample {
    /// `g(R(u, v)v, u)` for arbitrary vectors (not normalized).
    pub fn riemann_form(&self, w: &Vector3<f64>, z: &Vector3<f64>, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        let r = &self.riemann;
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        s += r[a][b][c][d] * w[a] * z[b] * u[c] * v[d];
                    }
                }
            }
        }
        s
    }

    pub fn sectional(&self, u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
        let g = &self.metric;
        let uu = u.dot(&(g * u));
        let vv = v.dot(&(g * v));
        let uv = u.dot(&(g * v));
        self.riemann_form(u, v, u, v) / (uu * vv - uv * uv)
    }

    /// Ricci tensor `Ric_bd = g^{ac} R_abcd` in coordinates.
    pub fn ricci(&self) -> Result<Matrix3<f64>> {
        let ginv = inverse_metric(&self.metric)?;
        let mut ric = Matrix3::zeros();
        for b in 0..3 {
            for d in 0..3 {
                let mut s = 0.0;
                for a in 0..3 {
                    for c in 0..3 {
                        s += ginv[(a, c)] * self.riemann[a][b][c][d];
                    }
                }
                ric[(b, d)] = s;
            }
        }
        Ok(ric)
    }

    /// Matrix `M_ij = g(R(e_i, w)w, e_j)` for a list of vectors `e`.
    pub fn jacobi_operator(&self, e: &[Vector3<f64>; 2], w: &Vector3<f64>) -> Matrix2<f64> {
        let mut m = Matrix2::zeros();
        for i in 0..2 {
            for j in i..2 {
                let v = self.riemann_form(&e[i], w, &e[j], w);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

fn christoffel_derivatives(spec: &MetricSpec, p: &ChartPoint) -> Result<[Christoffel; 3]> {
    let steps = fd_steps(p, CURVATURE_STEP)?;
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for (c, &h) in steps.iter().enumerate() {
        // Evaluating at shifted points may itself fail for Twisted metrics.
        let mut err = None;
        let d = richardson(h, |s| match christoffel_unchecked(spec, &p.shifted(c, s)) {
            Ok(gam) => flatten_gamma(&gam),
            Err(e) => {
                err.get_or_insert(e);
                [0.0; 27]
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        out[c] = unflatten_gamma(&d);
    }
    Ok(out)
}

fn flatten_gamma(g: &Christoffel) -> [f64; 27] {
    let mut out = [0.0; 27];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                out[9 * a + 3 * b + c] = g[a][b][c];
            }
        }
    }
    out
}

fn unflatten_gamma(v: &[f64; 27]) -> Christoffel {
    let mut g = [[[0.0; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                g[a][b][c] = v[9 * a + 3 * b + c];
            }
        }
    }
    g
}

fn symmetrize(raw: &Riemann) -> Riemann {
    let mut out = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let anti = |a: usize, b: usize, c: usize, d: usize| {
                        0.25 * (raw[a][b][c][d] - raw[b][a][c][d] - raw[a][b][d][c] + raw[b][a][d][c])
                    };
                    out[a][b][c][d] = 0.5 * (anti(a, b, c, d) + anti(c, d, a, b));
                }
            }
        }
    }
    out
}

/// Full curvature tensor at `p`.
pub fn curvature_at(spec: &MetricSpec, p: &ChartPoint) -> Result<CurvatureSample> {
    p.check()?;
    let g = metric_unchecked(spec, p);
    let gam = christoffel_unchecked(spec, p)?;
    let dgam = christoffel_derivatives(spec, p)?;

    // R^a_bcd = ∂_c Γ^a_db − ∂_d Γ^a_cb + Γ^a_ce Γ^e_db − Γ^a_de Γ^e_cb
    let mut up = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let mut s = dgam[c][a][d][b] - dgam[d][a][c][b];
                    for e in 0..3 {
                        s += gam[a][c][e] * gam[e][d][b] - gam[a][d][e] * gam[e][c][b];
                    }
                    up[a][b][c][d] = s;
                }
            }
        }
    }
    let mut raw = [[[[0.0; 3]; 3]; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    raw[a][b][c][d] = (0..3).map(|e| g[(a, e)] * up[e][b][c][d]).sum();
                }
            }
        }
    }

    let mut symmetry_residual: f64 = 0.0;
    let mut bianchi_residual: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                for d in 0..3 {
                    let r = raw[a][b][c][d];
                    symmetry_residual = symmetry_residual
                        .max((r + raw[b][a][c][d]).abs())
                        .max((r + raw[a][b][d][c]).abs())
                        .max((r - raw[c][d][a][b]).abs());
                    bianchi_residual = bianchi_residual.max((r + raw[a][c][d][b] + raw[a][d][b][c]).abs());
                }
            }
        }
    }

    let riemann = symmetrize(&raw);
    let mut sectionals = BTreeMap::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let area = g[(i, i)] * g[(j, j)] - g[(i, j)] * g[(i, j)];
            sectionals.insert((i, j), riemann[i][j][i][j] / area);
        }
    }
    Ok(CurvatureSample {
        point: *p,
        metric: g,
        riemann,
        sectionals,
        symmetry_residual,
        bianchi_residual,
    })
}

pub(crate) fn norm_g(g: &Matrix3<f64>, v: &Vector3<f64>) -> f64 {
    v.dot(&(g * v)).sqrt()
}

/// Unit vertical field `V = ∂_t / |∂_t|` at a point.
pub fn vertical_unit(spec: &MetricSpec, p: &ChartPoint) -> Result<Vector3<f64>> {
    let g = metric_at(spec, p)?;
    Ok(Vector3::new(0.0, 0.0, 1.0 / g[(T, T)].sqrt()))
}

/// Orthonormal frame `(E1, E2, E3)` with `E3 = V` and `E1, E2` spanning the
/// horizontal distribution, built from `∂_x, ∂_y` by Gram–Schmidt.
pub fn orthonormal_frame(spec: &MetricSpec, p: &ChartPoint) -> Result<[Vector3<f64>; 3]> {
    let g = metric_at(spec, p)?;
    let v = Vector3::new(0.0, 0.0, 1.0 / g[(T, T)].sqrt());
    let mut basis: Vec<Vector3<f64>> = vec![v];
    for cand in [Vector3::x(), Vector3::y()] {
        let mut w = cand;
        for b in &basis {
            w -= b * b.dot(&(g * w));
        }
        let n = norm_g(&g, &w);
        basis.push(w / n);
    }
    Ok([basis[1], basis[2], basis[0]])
}

/// Matrix of `X ↦ R(X, V)V` on the horizontal plane in an orthonormal basis.
pub fn r_v_operator(spec: &MetricSpec, p: &ChartPoint) -> Result<Matrix2<f64>> {
    let frame = orthonormal_frame(spec, p)?;
    let curv = curvature_at(spec, p)?;
    Ok(curv.jacobi_operator(&[frame[0], frame[1]], &frame[2]))
}

/// `|∇V|²` for the unit vertical field, from `(∇_a V)^b = ∂_a V^b + Γ^b_ac V^c`.
pub fn vertical_derivative_norm2(spec: &MetricSpec, p: &ChartPoint) -> Result<f64> {
    p.check()?;
    let g = metric_unchecked(spec, p);
    let ginv = inverse_metric(&g)?;
    let gam = christoffel_unchecked(spec, p)?;
    let dg = metric_derivatives(spec, p, CHRISTOFFEL_STEP)?;
    let gtt = g[(T, T)];
    let vt = 1.0 / gtt.sqrt();
    // ∇V as a matrix: row a (derivative direction), column b (component)
    let mut nabla = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let mut s = gam[b][a][T] * vt;
            if b == T {
                s += -0.5 * gtt.powf(-1.5) * dg[a][(T, T)];
            }
            nabla[(a, b)] = s;
        }
    }
    // g^{ac} g_{bd} ∇_a V^b ∇_c V^d
    Ok((ginv * nabla * g * nabla.transpose()).trace())
}

/// Largest entry of `∇_k g_ij = ∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il`.
pub fn metric_compatibility_residual(spec: &MetricSpec, p: &ChartPoint) -> Result<f64> {
    p.check()?;
    let g = metric_unchecked(spec, p);
    let gam = christoffel_unchecked(spec, p)?;
    let dg = metric_derivatives(spec, p, CURVATURE_STEP)?;
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut s = dg[k][(i, j)];
                for l in 0..3 {
                    s -= gam[l][k][i] * g[(l, j)] + gam[l][k][j] * g[(i, l)];
                }
                worst = worst.max(s.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn warped(eps: f64) -> MetricSpec {
        MetricSpec::warped(WarpProfile::new(HPoint::I, eps).unwrap())
    }

    #[test]
    fn product_metric_example() {
        let spec = MetricSpec::product(2.0).unwrap();
        let g = metric_at(&spec, &ChartPoint::new(0.3, 1.0, 5.0).unwrap()).unwrap();
        assert_eq!(g, Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 4.0)));
    }

    #[test]
    fn warped_metric_at_center() {
        let g = metric_at(&warped(0.1), &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert!((g[(T, T)] - 1.1025).abs() < 1e-14);
    }

    #[test]
    fn twisted_zero_alpha_is_unit_product() {
        let tw = MetricSpec::twisted(0.0, Arc::new(LogY)).unwrap();
        let pr = MetricSpec::product(1.0).unwrap();
        let p = ChartPoint::new(-0.4, 1.7, 0.2).unwrap();
        assert_eq!(metric_at(&tw, &p).unwrap(), metric_at(&pr, &p).unwrap());
    }

    #[test]
    fn metric_rejects_lower_half_plane() {
        let spec = MetricSpec::product(1.0).unwrap();
        let p = ChartPoint {
            x: 0.0,
            y: -1.0,
            t: 0.0,
        };
        assert!(metric_at(&spec, &p).is_err());
    }

    #[test]
    fn product_christoffels() {
        let spec = MetricSpec::product(1.3).unwrap();
        let gam = christoffel_at(&spec, &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert_eq!(gam[Y][X][X], 1.0);
        assert_eq!(gam[X][X][Y], -1.0);
        assert_eq!(gam[Y][Y][Y], -1.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(gam[T][i][j], 0.0);
                assert_eq!(gam[i][T][j], 0.0);
            }
        }
    }

    #[test]
    fn warped_christoffels_vanish_along_fiber_at_center() {
        let gam = christoffel_at(&warped(0.1), &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(gam[X][T][T].abs() < 1e-15);
        assert!(gam[Y][T][T].abs() < 1e-15);
    }

    #[test]
    fn twisted_christoffels_match_hand_derivation() {
        // g = g_hyp + (dt + α dh)² is the product pulled back by
        // t' = t + α h, so by the transformation law
        //   Γ^t_ij = α Hess(h)_ij,  Γ^k_ij = hyperbolic for k ∈ {x, y},
        // and every symbol with a lower t index vanishes.
        // For h = ln y at i: Hess = diag(−1, 0).
        let alpha = 1e-3;
        let spec = MetricSpec::twisted(alpha, Arc::new(LogY)).unwrap();
        let gam = christoffel_at(&spec, &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        let mut expected = [[[0.0; 3]; 3]; 3];
        expected[X][X][Y] = -1.0;
        expected[X][Y][X] = -1.0;
        expected[Y][X][X] = 1.0;
        expected[Y][Y][Y] = -1.0;
        expected[T][X][X] = -alpha;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (gam[k][i][j] - expected[k][i][j]).abs() < 1e-8,
                        "Γ^{k}_{i}{j} = {}",
                        gam[k][i][j]
                    );
                }
            }
        }
    }

    #[test]
    fn product_curvature_table() {
        let spec = MetricSpec::product(1.7).unwrap();
        let p = ChartPoint::new(0.4, 0.8, -1.0).unwrap();
        let c = curvature_at(&spec, &p).unwrap();
        assert!((c.sectionals[&(X, Y)] + 1.0).abs() < 1e-8);
        assert!(c.sectionals[&(X, T)].abs() < 1e-12);
        assert!(c.sectionals[&(Y, T)].abs() < 1e-12);
        assert!(c.symmetry_residual < 1e-6 && c.bianchi_residual < 1e-6);
    }

    #[test]
    fn warped_r_v_at_center() {
        let eps = 0.1;
        let m = r_v_operator(&warped(eps), &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        let k = 2.0 * eps / (1.0 + eps / 2.0);
        assert!((m[(0, 0)] - k).abs() < 1e-7, "{m}");
        assert!((m[(1, 1)] - k).abs() < 1e-7);
        assert!(m[(0, 1)].abs() < 1e-7);
        let c = curvature_at(&warped(eps), &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        let frame = orthonormal_frame(&warped(eps), &ChartPoint::new(0.0, 1.0, 0.0).unwrap()).unwrap();
        assert!((c.sectional(&frame[0], &frame[2]) - 0.190_476_190_476).abs() < 1e-7);
    }

    #[test]
    fn warped_r_v_vanishes_outside_blend() {
        let spec = warped(0.1);
        // r = ln 3 > 0.75 on the imaginary axis at y = 3
        let m = r_v_operator(&spec, &ChartPoint::new(0.0, 3.0, 0.0).unwrap()).unwrap();
        assert!(m.norm() < 1e-12);
        let m = r_v_operator(
            &MetricSpec::product(1.0).unwrap(),
            &ChartPoint::new(2.0, 0.5, 0.0).unwrap(),
        )
        .unwrap();
        assert!(m.norm() < 1e-12);
    }

    #[test]
    fn warp_profile_examples() {
        let w = WarpProfile::new(HPoint::I, 0.1).unwrap();
        let (f, df, d2f) = warp_profile_eval(&w, 0.0).unwrap();
        assert!((f - 1.05).abs() < 1e-15 && df == 0.0 && (d2f + 0.2).abs() < 1e-15);
        assert_eq!(warp_profile_eval(&w, 0.75).unwrap(), (1.0, 0.0, 0.0));
        assert!(warp_profile_eval(&w, -1.0).is_err());
    }

    #[test]
    fn warp_profile_blend_derivatives() {
        // oracle: finite differences of f itself
        let w = WarpProfile::new(HPoint::I, 0.1).unwrap();
        let h = 1e-6;
        for &r in &[0.52, 0.6, 0.68, 0.74] {
            let v = w.eval(r);
            let fd1 = (w.eval(r + h).f - w.eval(r - h).f) / (2.0 * h);
            let fd2 = (w.eval(r + h).df - w.eval(r - h).df) / (2.0 * h);
            assert!((v.df - fd1).abs() < 1e-8, "f' at {r}");
            assert!((v.d2f - fd2).abs() < 1e-7, "f'' at {r}");
            assert!(v.df.abs() <= w.slope_bound());
        }
        // C² across both seams
        for &seam in &[0.5, 0.75] {
            let a = w.eval(seam - 1e-12);
            let b = w.eval(seam + 1e-12);
            assert!((a.f - b.f).abs() < 1e-10);
            assert!((a.df - b.df).abs() < 1e-9);
            assert!((a.d2f - b.d2f).abs() < 1e-8);
        }
    }

    #[test]
    fn warp_validation() {
        assert!(WarpProfile::new(HPoint::I, -0.1).is_err());
        assert!(WarpProfile::with_radii(HPoint::I, 0.1, 0.8, 0.7).is_err());
        assert!(WarpProfile::with_radii(HPoint::I, 100.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn unknown_potential() {
        assert!(potential_by_name("sin_x").is_err());
        assert_eq!(potential_by_name("log_y").unwrap().name(), "log_y");
    }

    #[test]
    fn log_y_hessian() {
        let h = LogY.hessian(0.0, 2.0);
        // Hess(ln y) = diag(−1/y², 0)
        assert!((h[0][0] + 0.25).abs() < 1e-15);
        assert!(h[1][1].abs() < 1e-15 && h[0][1].abs() < 1e-15);
    }

    #[test]
    fn vertical_derivative_vanishes_for_product() {
        let spec = MetricSpec::product(2.0).unwrap();
        let v = vertical_derivative_norm2(&spec, &ChartPoint::new(0.1, 1.2, 0.0).unwrap()).unwrap();
        assert_eq!(v, 0.0);
    }
}

//! Exact upper half-plane geometry.
//!
//! Points are `z = x + iy` with `y > 0`, isometries are unimodular real
//! matrices acting by `z ↦ (az + b)/(cz + d)`. Everything here is closed form;
//! the numerical modules use these routines as ground truth.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this value of `|p - q|² / (2 y_p y_q)` the distance switches from
/// `acosh(1 + u)` to its series, where `1 + u` would lose most of `u`.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Half-width of the band around `|trace| = 2` that is rejected rather than
/// classified.
pub const HYPERBOLIC_TRACE_BAND: f64 = 1e-12;

const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("non-finite point ({x}, {y})")));
        }
        if y <= 0.0 {
            return Err(Error::domain(format!(
                "point ({x}, {y}) is not in the upper half-plane"
            )));
        }
        Ok(Self { x, y })
    }

    /// The point `i`.
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    fn check(&self) -> Result<()> {
        HPoint::new(self.x, self.y).map(|_| ())
    }
}

impl fmt::Display for HPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i", self.x, self.y)
    }
}

/// `|p - q|² / (2 y_p y_q)`, the argument `u` in `d = acosh(1 + u)`.
fn distance_argument(p: &HPoint, q: &HPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    (dx * dx + dy * dy) / (2.0 * p.y * q.y)
}

/// Inverse of `1 + u ↦ acosh(1 + u)` that stays accurate as `u → 0`.
pub(crate) fn acosh_one_plus(u: f64) -> f64 {
    if u < SERIES_THRESHOLD {
        // acosh(1 + u) = sqrt(2u) (1 - u/12 + O(u²))
        (2.0 * u).sqrt() * (1.0 - u / 12.0)
    } else {
        (1.0 + u).acosh()
    }
}

/// Hyperbolic distance in the upper half-plane (curvature −1).
pub fn hyp_distance(p: &HPoint, q: &HPoint) -> Result<f64> {
    p.check()?;
    q.check()?;
    Ok(acosh_one_plus(distance_argument(p, q)))
}

/// A real 2×2 matrix with unit determinant, acting on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobiusElement {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusElement {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::domain("non-finite matrix entry"));
        }
        let det = a * d - b * c;
        if (det - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::domain(format!(
                "matrix [[{a}, {b}], [{c}, {d}]] has determinant {det}, expected 1"
            )));
        }
        Ok(Self { a, b, c, d })
    }

    pub const IDENTITY: MobiusElement = MobiusElement {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// `z ↦ λ z` as `diag(√λ, 1/√λ)`.
    pub fn dilation(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("dilation factor {lambda} must be > 0")));
        }
        let s = lambda.sqrt();
        Ok(Self {
            a: s,
            b: 0.0,
            c: 0.0,
            d: 1.0 / s,
        })
    }

    pub fn translation(b: f64) -> Self {
        Self {
            a: 1.0,
            b,
            c: 0.0,
            d: 1.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn compose(&self, other: &MobiusElement) -> MobiusElement {
        MobiusElement {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> MobiusElement {
        MobiusElement {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0 + HYPERBOLIC_TRACE_BAND
    }

    /// Pushforward of a tangent vector `(vx, vy)` at `p`: multiplication by
    /// the complex derivative `1 / (cz + d)²`.
    pub fn push_vector(&self, p: &HPoint, v: (f64, f64)) -> Result<(f64, f64)> {
        let (re, im) = self.denominator(p)?;
        // 1/(re + i im)^2
        let sq_re = re * re - im * im;
        let sq_im = 2.0 * re * im;
        let n = sq_re * sq_re + sq_im * sq_im;
        let (dr, di) = (sq_re / n, -sq_im / n);
        Ok((v.0 * dr - v.1 * di, v.0 * di + v.1 * dr))
    }

    fn denominator(&self, p: &HPoint) -> Result<(f64, f64)> {
        let re = self.c * p.x + self.d;
        let im = self.c * p.y;
        if re == 0.0 && im == 0.0 {
            return Err(Error::domain(format!("{p} is mapped to infinity")));
        }
        Ok((re, im))
    }
}

/// `z ↦ (az + b)/(cz + d)`.
pub fn mobius_apply(m: &MobiusElement, p: &HPoint) -> Result<HPoint> {
    p.check()?;
    let (den_re, den_im) = m.denominator(p)?;
    let num_re = m.a * p.x + m.b;
    let num_im = m.a * p.y;
    let n = den_re * den_re + den_im * den_im;
    let x = (num_re * den_re + num_im * den_im) / n;
    // Im((az+b)/(cz+d)) = det · y / |cz+d|²
    let y = m.determinant() * p.y / n;
    HPoint::new(x, y)
}

/// Minimal displacement `2 acosh(|trace|/2)` of a hyperbolic element.
pub fn translation_length(m: &MobiusElement) -> Result<f64> {
    let tr = m.trace();
    if !m.is_hyperbolic() {
        return Err(Error::NotHyperbolic { trace: tr.abs() });
    }
    Ok(2.0 * (tr.abs() / 2.0).acosh())
}

/// Busemann function of the unit-speed upward ray `s ↦ i e^s`, i.e. the limit
/// of `d(p, i e^s) − s`. Equals `−ln y`.
pub fn vertical_busemann(p: &HPoint) -> Result<f64> {
    p.check()?;
    Ok(-p.y.ln())
}

/// `d(p, i e^s) − s` at a finite depth `s`; tends to [`vertical_busemann`].
pub fn vertical_busemann_at(p: &HPoint, s: f64) -> Result<f64> {
    let ray = HPoint::new(0.0, s.exp())?;
    Ok(hyp_distance(p, &ray)? - s)
}

/// Area of a hyperbolic disk of radius `r`, `2π(cosh r − 1)`.
pub fn disk_area(r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("radius {r} must be >= 0")));
    }
    let h = (0.5 * r).sinh();
    Ok(4.0 * PI * h * h)
}

/// Reads a generator file: one `a b c d` matrix per line, `#` comments.
pub fn read_generators(path: &Path) -> Result<Vec<MobiusElement>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_generators(&text).map_err(|reason| Error::Parse {
        path: path.to_path_buf(),
        reason,
    })
}

pub fn parse_generators(text: &str) -> std::result::Result<Vec<MobiusElement>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if vals.len() != 4 {
            return Err(format!("line {}: expected 4 entries, found {}", lineno + 1, vals.len()));
        }
        let m =
            MobiusElement::new(vals[0], vals[1], vals[2], vals[3]).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        out.push(m);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> HPoint {
        HPoint::new(x, y).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert!((hyp_distance(&pt(0.0, 1.0), &pt(0.0, 2.0)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(hyp_distance(&pt(0.3, 0.7), &pt(0.3, 0.7)).unwrap(), 0.0);
        let d = hyp_distance(&pt(0.0, 1.0), &pt(1.0, 1.0)).unwrap();
        assert!((d - 1.5f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn distance_series_branch_is_continuous() {
        let p = pt(0.0, 1.0);
        // u just below and above the switch
        let below = hyp_distance(&p, &pt(1.41e-4, 1.0)).unwrap();
        let above = hyp_distance(&p, &pt(1.42e-4, 1.0)).unwrap();
        // horizontal offset dx at height 1: d = 2 asinh(dx/2)
        assert!((below - 2.0 * (0.705e-4f64).asinh()).abs() < 1e-16);
        assert!((above - 2.0 * (0.71e-4f64).asinh()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_points() {
        assert!(HPoint::new(0.0, 0.0).is_err());
        assert!(HPoint::new(f64::NAN, 1.0).is_err());
        let bogus = HPoint { x: 0.0, y: -1.0 };
        assert!(hyp_distance(&bogus, &HPoint::I).is_err());
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius_apply(&MobiusElement::IDENTITY, &HPoint::I).unwrap(), HPoint::I);
        let dil = MobiusElement::new(2f64.sqrt(), 0.0, 0.0, 1.0 / 2f64.sqrt()).unwrap();
        let w = mobius_apply(&dil, &HPoint::I).unwrap();
        assert!(w.x.abs() < 1e-15 && (w.y - 2.0).abs() < 1e-14);
        let four = MobiusElement::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let w = mobius_apply(&four, &mobius_apply(&four, &HPoint::I).unwrap()).unwrap();
        assert!((w.y - 16.0).abs() < 1e-13);
    }

    #[test]
    fn unimodular_guard() {
        assert!(MobiusElement::new(2.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn translation_length_examples() {
        let parabolic = MobiusElement::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            translation_length(&parabolic),
            Err(Error::NotHyperbolic { .. })
        ));
        let e = std::f64::consts::E;
        let diag = MobiusElement::new(e, 0.0, 0.0, 1.0 / e).unwrap();
        assert!((translation_length(&diag).unwrap() - 2.0).abs() < 1e-14);
        let tr3 = MobiusElement::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((translation_length(&tr3).unwrap() - 1.924_847_300_238_414).abs() < 1e-12);
    }

    #[test]
    fn busemann_examples() {
        assert_eq!(vertical_busemann(&HPoint::I).unwrap(), 0.0);
        assert!((vertical_busemann(&pt(0.0, 2.0)).unwrap() + 2f64.ln()).abs() < 1e-15);
        let p = pt(1.0, 1.0);
        let at30 = vertical_busemann_at(&p, 30.0).unwrap();
        assert!((at30 - vertical_busemann(&p).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn disk_area_examples() {
        assert_eq!(disk_area(0.0).unwrap(), 0.0);
        assert!((disk_area(1.0).unwrap() - 2.0 * PI * (1f64.cosh() - 1.0)).abs() < 1e-13);
        let big = disk_area(20.0).unwrap();
        assert!((big / (PI * 20f64.exp()) - 1.0).abs() < 1e-4);
        assert!(disk_area(-0.1).is_err());
    }

    #[test]
    fn generator_file_parsing() {
        let text = "# genus two, fake\n2 1 1 1\n\n  1 0 0 1  \n";
        let gens = parse_generators(text).unwrap();
        assert_eq!(gens.len(), 2);
        assert!(parse_generators("1 2 3\n").is_err());
        assert!(parse_generators("2 0 0 1\n").is_err());
    }
}

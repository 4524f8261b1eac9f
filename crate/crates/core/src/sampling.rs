//! Reproducible random sampling. Item `i` of a run seeded with `seed` draws
//! from its own ChaCha stream, so results do not depend on thread count.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{orthonormal_frame, ChartPoint, MetricSpec};

pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// An axis-aligned box of base points in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub t: (f64, f64),
}

impl SampleBox {
    pub fn new(x: (f64, f64), y: (f64, f64), t: (f64, f64)) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo <= hi;
        if !(ok(x) && ok(y) && ok(t)) {
            return Err(Error::domain("sample box bounds must be finite with lo <= hi"));
        }
        if y.0 <= 0.0 {
            return Err(Error::domain("sample box must lie in y > 0"));
        }
        Ok(Self { x, y, t })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> ChartPoint {
        let draw = |rng: &mut dyn rand::RngCore, (lo, hi): (f64, f64)| {
            if lo == hi {
                lo
            } else {
                lo + (hi - lo) * rng.random::<f64>()
            }
        };
        let x = draw(rng, self.x);
        let y = draw(rng, self.y);
        let t = draw(rng, self.t);
        ChartPoint { x, y, t }
    }
}

/// Uniform on the Euclidean unit sphere.
pub fn unit_sphere(rng: &mut impl Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Uniform on the unit sphere of `g` at `q`.
pub fn random_unit_direction(spec: &MetricSpec, q: &ChartPoint, rng: &mut impl Rng) -> Result<Vector3<f64>> {
    let frame = orthonormal_frame(spec, q)?;
    let c = unit_sphere(rng);
    Ok(frame[0] * c[0] + frame[1] * c[1] + frame[2] * c[2])
}

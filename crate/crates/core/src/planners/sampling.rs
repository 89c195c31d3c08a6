//! Uniform and informed 2D sampling, and the rewiring radius.

use std::f64::consts::PI;

use nalgebra::{Point2, Vector2};
use rand::Rng;

use super::PlannerError;

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    // V_d = V_{d-2} * 2 pi / d, with V_0 = 1 and V_1 = 2.
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Smallest rewiring scale keeping RRT* asymptotically optimal for a free
/// space of measure `mu_free` in `d` dimensions.
pub fn gamma_lower_bound(d: usize, mu_free: f64) -> f64 {
    let df = d as f64;
    (2.0 * (1.0 + 1.0 / df)).powf(1.0 / df) * (mu_free / unit_ball_volume(d)).powf(1.0 / df)
}

/// Rewiring radius after `n` samples.
pub fn rewire_radius(n: usize, d: usize, gamma: f64) -> f64 {
    if n <= 1 {
        return 0.0;
    }
    let nf = n as f64;
    gamma * (nf.ln() / nf).powf(1.0 / d as f64)
}

/// Axis-aligned rectangle samples are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBounds {
    pub min: Point2<f64>,
    pub max: Point2<f64>,
}

impl SampleBounds {
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Box around `a` and `b` grown by `margin`, clipped to `self`.
    pub fn around(&self, a: &Point2<f64>, b: &Point2<f64>, margin: f64) -> SampleBounds {
        SampleBounds {
            min: Point2::new((a.x.min(b.x) - margin).max(self.min.x), (a.y.min(b.y) - margin).max(self.min.y)),
            max: Point2::new((a.x.max(b.x) + margin).min(self.max.x), (a.y.max(b.y) + margin).min(self.max.y)),
        }
    }

    pub fn uniform(&self, rng: &mut impl Rng) -> Point2<f64> {
        Point2::new(
            rng.random_range(self.min.x..=self.max.x),
            rng.random_range(self.min.y..=self.max.y),
        )
    }
}

/// Draws attempts allowed before the clipped ellipse is treated as empty.
const MAX_REJECTIONS: usize = 10_000;

/// Uniform sample from the ellipse with foci `start` and `goal` and major
/// axis `c_best`, restricted to `bounds` by rejection.
pub fn informed_sample(
    start: &Point2<f64>,
    goal: &Point2<f64>,
    c_best: f64,
    bounds: &SampleBounds,
    rng: &mut impl Rng,
) -> Result<Point2<f64>, PlannerError> {
    let c_min = (goal - start).norm();
    if c_best < c_min - 1e-9 {
        return Err(PlannerError::DegenerateEllipse { c_best, c_min });
    }
    let centre = Point2::from((start.coords + goal.coords) / 2.0);
    let axis = if c_min > 0.0 { (goal - start) / c_min } else { Vector2::new(1.0, 0.0) };
    let a = c_best / 2.0;
    let b = (c_best * c_best - c_min * c_min).max(0.0).sqrt() / 2.0;
    for _ in 0..MAX_REJECTIONS {
        // Uniform point in the unit disc.
        let r = rng.random::<f64>().sqrt();
        let t = rng.random_range(0.0..2.0 * PI);
        let (u, v) = (a * r * t.cos(), b * r * t.sin());
        let p = centre + axis * u + Vector2::new(-axis.y, axis.x) * v;
        if bounds.contains(&p) {
            return Ok(p);
        }
    }
    Err(PlannerError::EmptySampleRegion)
}

//! Uniform B-splines on SE3 in cumulative form.
//!
//! Knot times are `t_i = t0 + i * dt`. Translation is blended directly with
//! the basis functions; rotation is blended through cumulative basis
//! functions applied to the logarithms of relative rotations between
//! consecutive control poses. End poses are clamped by repeating the first
//! and last control pose `k` times.

use nalgebra::{Isometry3, Translation3, UnitQuaternion, Vector3};

use super::LocalPlanError;
use crate::geometry::Pose;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplineConfig {
    pub degree: usize,
    pub dt: f64,
    pub samples_per_segment: usize,
}

impl Default for SplineConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            dt: 1.0,
            samples_per_segment: 10,
        }
    }
}

/// Cox-de Boor basis `B_{i,j}(t)` over uniform knots `t0 + i * dt`.
pub fn bspline_basis(i: usize, j: usize, t: f64, t0: f64, dt: f64) -> f64 {
    let ti = t0 + i as f64 * dt;
    if j == 0 {
        let tn = t0 + (i + 1) as f64 * dt;
        return if ti <= t && t < tn { 1.0 } else { 0.0 };
    }
    let tij = t0 + (i + j) as f64 * dt;
    let ti1 = t0 + (i + 1) as f64 * dt;
    let tij1 = t0 + (i + j + 1) as f64 * dt;
    let left = (t - ti) / (tij - ti) * bspline_basis(i, j - 1, t, t0, dt);
    let right = (tij1 - t) / (tij1 - ti1) * bspline_basis(i + 1, j - 1, t, t0, dt);
    left + right
}

/// Clamped cumulative B-spline through a sequence of SE3 control poses.
#[derive(Debug, Clone)]
pub struct SplineSe3 {
    degree: usize,
    t0: f64,
    dt: f64,
    translations: Vec<Vector3<f64>>,
    first_rotation: UnitQuaternion<f64>,
    /// `log(R_{i-1}^-1 R_i)` for i >= 1.
    increments: Vec<Vector3<f64>>,
}

impl SplineSe3 {
    pub fn new(knots: &[Pose], degree: usize, dt: f64) -> Result<Self, LocalPlanError> {
        if degree < 1 || !(dt > 0.0) {
            return Err(LocalPlanError::InvalidSpline(format!("degree {degree}, dt {dt}")));
        }
        if knots.len() < degree + 1 {
            return Err(LocalPlanError::InsufficientKnots {
                got: knots.len(),
                need: degree + 1,
            });
        }
        let mut ctrl: Vec<Pose> = Vec::with_capacity(knots.len() + 2 * (degree - 1));
        for _ in 1..degree {
            ctrl.push(knots[0]);
        }
        ctrl.extend_from_slice(knots);
        for _ in 1..degree {
            ctrl.push(knots[knots.len() - 1]);
        }
        let increments = ctrl
            .windows(2)
            .map(|w| (w[0].rotation.inverse() * w[1].rotation).scaled_axis())
            .collect();
        Ok(Self {
            degree,
            t0: 0.0,
            dt,
            translations: ctrl.iter().map(|p| p.translation.vector).collect(),
            first_rotation: ctrl[0].rotation,
            increments,
        })
    }

    /// Start of the valid span.
    pub fn t_start(&self) -> f64 {
        self.t0 + self.degree as f64 * self.dt
    }

    /// End of the valid span.
    pub fn t_end(&self) -> f64 {
        self.t0 + self.translations.len() as f64 * self.dt
    }

    pub fn eval(&self, t: f64) -> Pose {
        let k = self.degree;
        let n = self.translations.len();
        let t = t.clamp(self.t_start(), self.t_end());
        // The last knot is excluded by the half-open base case; evaluate it
        // as the clamped end pose instead.
        if t >= self.t_end() {
            return self.end_pose();
        }
        let seg = (((t - self.t0) / self.dt).floor() as usize).clamp(k, n - 1);
        let lo = seg - k;
        let mut weights = vec![0.0; k + 1];
        for (w, i) in weights.iter_mut().zip(lo..=seg) {
            *w = bspline_basis(i, k, t, self.t0, self.dt);
        }
        let mut p = Vector3::zeros();
        for (w, i) in weights.iter().zip(lo..=seg) {
            p += self.translations[i] * *w;
        }
        // Cumulative weights: sum of the basis over indices >= i.
        let mut r = self.first_rotation;
        for i in 1..n {
            let cum: f64 = if i > seg {
                0.0
            } else if i <= lo {
                1.0
            } else {
                weights[i - lo..].iter().sum()
            };
            if cum != 0.0 {
                r *= UnitQuaternion::from_scaled_axis(self.increments[i - 1] * cum);
            }
        }
        Isometry3::from_parts(Translation3::from(p), r)
    }

    fn end_pose(&self) -> Pose {
        let mut r = self.first_rotation;
        for inc in &self.increments {
            r *= UnitQuaternion::from_scaled_axis(*inc);
        }
        Isometry3::from_parts(Translation3::from(*self.translations.last().unwrap()), r)
    }

    /// Evaluates at `u` in [0, 1] across the valid span.
    pub fn eval_unit(&self, u: f64) -> Pose {
        let (a, b) = (self.t_start(), self.t_end());
        if u >= 1.0 {
            return self.end_pose();
        }
        self.eval(a + (b - a) * u.max(0.0))
    }
}

/// Samples a clamped SE3 B-spline uniformly in time.
pub fn bspline_se3(knots: &[Pose], cfg: &SplineConfig) -> Result<Vec<Pose>, LocalPlanError> {
    let spline = SplineSe3::new(knots, cfg.degree, cfg.dt)?;
    let segments = knots.len() + cfg.degree - 2;
    let n = (segments * cfg.samples_per_segment.max(1)).max(1);
    Ok((0..=n).map(|i| spline.eval_unit(i as f64 / n as f64)).collect())
}

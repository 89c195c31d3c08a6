//! Sideways body shifts keeping the center of mass over the support polygon.

use nalgebra::{Isometry3, Point2, Translation3, Vector2, Vector3};

use super::LocalPlanError;
use crate::constraints::{support_polygon, STABILITY_THRESHOLD};
use crate::geometry::{
    closest_point_on_convex, inset_convex, interpolate_pose, intersect_convex, line_convex_interval,
    signed_distance_to_convex, yaw_of, Pose,
};
use crate::robot::{FullBodyState, RobotModel};
use crate::terrain::{ElevationMap, TerrainError};

/// Samples whose margin does not exceed this are displaced, meters.
pub const STABILIZE_TRIGGER: f64 = STABILITY_THRESHOLD + 0.01;
/// Margin aimed for by the displacement, meters.
pub const STABILIZE_TARGET: f64 = STABILITY_THRESHOLD + 0.015;
/// Largest allowed body displacement, meters.
pub const MAX_DISPLACEMENT: f64 = 0.2;

/// Smallest horizontal displacement of the body moving the center of mass
/// into the support polygon shrunk by the target margin. The body's
/// lateral axis is tried first; when that line misses the shrunk polygon
/// the nearest point of the polygon is used.
pub fn stabilizing_displacement(state: &FullBodyState) -> Result<Vector2<f64>, LocalPlanError> {
    let poly = support_polygon(state).map_err(|_| LocalPlanError::Unstabilizable)?;
    let com = state.xy();
    if signed_distance_to_convex(&com, &poly) > STABILIZE_TRIGGER {
        return Ok(Vector2::zeros());
    }
    let inset = inset_convex(&poly, STABILIZE_TARGET);
    if inset.is_empty() {
        return Err(LocalPlanError::Unstabilizable);
    }
    let yaw = yaw_of(&state.body_pose);
    let lateral = Vector2::new(-yaw.sin(), yaw.cos());
    let disp = match line_convex_interval(&com, &lateral, &inset) {
        Some((lo, hi)) => {
            let t = if lo > 0.0 {
                lo
            } else if hi < 0.0 {
                hi
            } else {
                0.0
            };
            lateral * t
        }
        None => closest_point_on_convex(&com, &inset) - com,
    };
    if disp.norm() > MAX_DISPLACEMENT {
        return Err(LocalPlanError::Unstabilizable);
    }
    Ok(disp)
}

pub fn translate_pose(pose: &Pose, d: &Vector2<f64>) -> Pose {
    Isometry3::from_parts(
        Translation3::from(pose.translation.vector + Vector3::new(d.x, d.y, 0.0)),
        pose.rotation,
    )
}

/// Knot weights below this do not constrain the knot offset.
const MIN_KNOT_WEIGHT: f64 = 0.05;

/// One sample of a body path whose horizontal position moves by
/// `weight * v` when the middle spline knot is offset by `v`.
#[derive(Debug, Clone)]
pub struct KnotSample {
    pub base: Point2<f64>,
    pub weight: f64,
    /// Support polygon at the sample, CCW.
    pub support: Vec<Point2<f64>>,
}

/// Smallest horizontal offset of the middle knot placing every sample at
/// least `target` inside its support polygon. None when no offset within
/// `MAX_DISPLACEMENT` of body motion does.
pub fn stabilizing_knot_offset(samples: &[KnotSample], target: f64) -> Option<Vector2<f64>> {
    let big = MAX_DISPLACEMENT / MIN_KNOT_WEIGHT;
    let mut region = vec![
        Point2::new(-big, -big),
        Point2::new(big, -big),
        Point2::new(big, big),
        Point2::new(-big, big),
    ];
    let mut max_w: f64 = 0.0;
    for s in samples.iter().filter(|s| s.weight >= MIN_KNOT_WEIGHT) {
        let inset = inset_convex(&s.support, target);
        if inset.is_empty() {
            return None;
        }
        let mapped: Vec<Point2<f64>> = inset.iter().map(|p| Point2::from((p - s.base) / s.weight)).collect();
        region = intersect_convex(&region, &mapped);
        if region.is_empty() {
            return None;
        }
        max_w = max_w.max(s.weight);
    }
    let v = closest_point_on_convex(&Point2::origin(), &region).coords;
    (v.norm() * max_w <= MAX_DISPLACEMENT).then_some(v)
}

/// Displaces every insufficiently stable sample of a straight-line motion.
/// Returns `q_stab` (the most displaced pose, or the midpoint pose when no
/// sample needs help) and the displaced sequence with legs re-solved.
pub fn stabilize_path(
    model: &RobotModel,
    map: &ElevationMap,
    linear: &[FullBodyState],
) -> Result<(Pose, Vec<FullBodyState>), LocalPlanError> {
    let (first, last) = match (linear.first(), linear.last()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(LocalPlanError::EmptyMotion),
    };
    let disps = linear.iter().map(stabilizing_displacement).collect::<Result<Vec<_>, _>>()?;
    let mut worst: Option<(usize, f64)> = None;
    for (i, d) in disps.iter().enumerate() {
        let n = d.norm();
        if n > 0.0 && worst.is_none_or(|(_, w)| n > w) {
            worst = Some((i, n));
        }
    }
    let q_stab = match worst {
        Some((i, _)) => translate_pose(&linear[i].body_pose, &disps[i]),
        None => interpolate_pose(&first.body_pose, &last.body_pose, 0.5),
    };
    let mut out = Vec::with_capacity(linear.len());
    for (s, d) in linear.iter().zip(&disps) {
        if d.norm() == 0.0 {
            out.push(*s);
            continue;
        }
        let pose = translate_pose(&s.body_pose, d);
        let xy = nalgebra::Point2::new(pose.translation.vector.x, pose.translation.vector.y);
        if !map.contains(&xy) {
            return Err(TerrainError::OutOfBounds { x: xy.x, y: xy.y }.into());
        }
        let mut moved = FullBodyState::from_feet(model, pose, &s.foot_world, s.stance)
            .map_err(|_| LocalPlanError::Unstabilizable)?;
        moved.gait_phase = s.gait_phase;
        out.push(moved);
    }
    Ok((q_stab, out))
}

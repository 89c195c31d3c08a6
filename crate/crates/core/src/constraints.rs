//! State and segment validity: workspace, terrain and self collision,
//! foot contact and static stability.

use nalgebra::{Point2, Point3};
use thiserror::Error;

use crate::geometry::{convex_hull, interpolate_pose, signed_distance_to_convex, Capsule};
use crate::metering::{charge, Work};
use crate::robot::{FullBodyState, RobotModel, MAX_LEGS};
use crate::terrain::{ElevationMap, TerrainError};

/// Required stability margin, meters.
pub const STABILITY_THRESHOLD: f64 = 0.02;
/// Allowed gap between a stance foot and the terrain, meters.
pub const CONTACT_TOLERANCE: f64 = 0.001;
/// Vertical clearance kept between capsules and the terrain, meters.
pub const TERRAIN_CLEARANCE: f64 = 0.01;
/// Spacing of the clearance samples along capsule axes, meters.
pub const CAPSULE_SAMPLE_STEP: f64 = 0.01;
/// Default interpolation step of `check_segment`, meters.
pub const SEGMENT_STEP: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error("state has no stance legs")]
    NoStanceLegs,
    #[error("check step must be positive, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    pub in_workspace: bool,
    /// Terrain and self collision combined.
    pub collision_free: bool,
    pub terrain_clear: bool,
    pub self_collision_free: bool,
    /// Every stance foot touches the terrain within the contact tolerance.
    pub contacts_ok: bool,
    pub stable: bool,
    pub stability_margin: f64,
    pub kinematic_margin: f64,
}

impl ConstraintReport {
    pub fn is_valid(&self) -> bool {
        self.in_workspace && self.collision_free && self.contacts_ok && self.stable
    }

    /// Name of the first failing constraint.
    pub fn failure(&self) -> Option<&'static str> {
        if !self.in_workspace {
            Some("workspace")
        } else if !self.terrain_clear {
            Some("terrain collision")
        } else if !self.self_collision_free {
            Some("self collision")
        } else if !self.contacts_ok {
            Some("contact")
        } else if !self.stable {
            Some("stability")
        } else {
            None
        }
    }
}

/// Convex hull of the stance feet projected to the ground plane.
pub fn support_polygon(state: &FullBodyState) -> Result<Vec<Point2<f64>>, ConstraintError> {
    let feet: Vec<Point2<f64>> = (0..state.leg_count)
        .filter(|&l| state.stance[l])
        .map(|l| Point2::new(state.foot_world[l].x, state.foot_world[l].y))
        .collect();
    if feet.is_empty() {
        return Err(ConstraintError::NoStanceLegs);
    }
    Ok(convex_hull(&feet))
}

/// Signed distance of the center of mass (body origin) projection to the
/// support polygon boundary; positive inside.
pub fn stability_margin(state: &FullBodyState) -> Result<f64, ConstraintError> {
    let poly = support_polygon(state)?;
    Ok(signed_distance_to_convex(&state.xy(), &poly))
}

/// Capsules of the whole robot in the world frame: body capsules first,
/// then coxa, femur and tibia of every leg.
pub fn world_capsules(model: &RobotModel, state: &FullBodyState) -> Vec<Capsule> {
    let mut out: Vec<Capsule> = model
        .body_capsules
        .iter()
        .map(|c| c.transformed(&state.body_pose))
        .collect();
    for leg in 0..model.leg_count {
        for c in model.leg_capsules(leg, &state.joint_angles[leg]) {
            out.push(c.transformed(&state.body_pose));
        }
    }
    out
}

fn terrain_clear(model: &RobotModel, map: &ElevationMap, caps: &[Capsule]) -> Result<bool, TerrainError> {
    let nb = model.body_capsules.len();
    for (ci, cap) in caps.iter().enumerate() {
        let tibia_of = if ci >= nb && (ci - nb) % 3 == 2 { Some((ci - nb) / 3) } else { None };
        let len = cap.length();
        let n = ((len / CAPSULE_SAMPLE_STEP).ceil() as usize).max(1);
        for k in 0..=n {
            let s = k as f64 / n as f64;
            let p = cap.a + (cap.b - cap.a) * s;
            let h = map.height_at(&Point2::new(p.x, p.y))?;
            let in_foot_zone = tibia_of.is_some() && (1.0 - s) * len <= model.foot_zone;
            let ok = if in_foot_zone {
                p.z >= h - CONTACT_TOLERANCE
            } else {
                p.z - cap.radius >= h + TERRAIN_CLEARANCE
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn aabb(c: &Capsule) -> ([f64; 3], [f64; 3]) {
    let lo = [c.a.x.min(c.b.x) - c.radius, c.a.y.min(c.b.y) - c.radius, c.a.z.min(c.b.z) - c.radius];
    let hi = [c.a.x.max(c.b.x) + c.radius, c.a.y.max(c.b.y) + c.radius, c.a.z.max(c.b.z) + c.radius];
    (lo, hi)
}

fn boxes_overlap(a: &([f64; 3], [f64; 3]), b: &([f64; 3], [f64; 3])) -> bool {
    (0..3).all(|k| a.0[k] <= b.1[k] && b.0[k] <= a.1[k])
}

/// Capsule pairs that share a joint: body with every coxa, and
/// consecutive links of one leg.
fn adjacent(nb: usize, i: usize, j: usize) -> bool {
    let (i, j) = (i.min(j), i.max(j));
    if j < nb {
        return true;
    }
    if i < nb {
        return (j - nb) % 3 == 0;
    }
    let (li, ki) = ((i - nb) / 3, (i - nb) % 3);
    let (lj, kj) = ((j - nb) / 3, (j - nb) % 3);
    li == lj && kj == ki + 1
}

fn self_collision_free(model: &RobotModel, caps: &[Capsule]) -> bool {
    let nb = model.body_capsules.len();
    let boxes: Vec<_> = caps.iter().map(aabb).collect();
    for i in 0..caps.len() {
        for j in i + 1..caps.len() {
            if adjacent(nb, i, j) || !boxes_overlap(&boxes[i], &boxes[j]) {
                continue;
            }
            if caps[i].distance(&caps[j]) <= 0.0 {
                return false;
            }
        }
    }
    true
}

/// Full constraint evaluation of one state.
pub fn check_state(model: &RobotModel, map: &ElevationMap, state: &FullBodyState) -> Result<ConstraintReport, ConstraintError> {
    charge(Work::StateCheck, 1);
    let xy = state.xy();
    if !map.contains(&xy) {
        return Err(TerrainError::OutOfBounds { x: xy.x, y: xy.y }.into());
    }
    let in_workspace = (0..model.leg_count).all(|l| model.joints_within_limits(&state.joint_angles[l]));
    let has_stance = state.stance_count() > 0;
    let kinematic_margin = if has_stance {
        model.kinematic_margin(state).unwrap_or(0.0)
    } else {
        0.0
    };
    let mut contacts_ok = true;
    for leg in 0..model.leg_count {
        if state.stance[leg] {
            let f = state.foot_world[leg];
            let h = map.height_at(&Point2::new(f.x, f.y))?;
            if (f.z - h).abs() > CONTACT_TOLERANCE {
                contacts_ok = false;
            }
        }
    }
    let stability_margin = if has_stance {
        stability_margin(state)?
    } else {
        f64::NEG_INFINITY
    };
    let caps = world_capsules(model, state);
    let terrain_clear = terrain_clear(model, map, &caps)?;
    let self_free = self_collision_free(model, &caps);
    Ok(ConstraintReport {
        in_workspace,
        collision_free: terrain_clear && self_free,
        terrain_clear,
        self_collision_free: self_free,
        contacts_ok,
        stable: stability_margin > STABILITY_THRESHOLD,
        stability_margin,
        kinematic_margin,
    })
}

/// State at fraction `s` of the straight segment from `a` to `b`. Stance
/// legs planted at the same point in both states keep their foot fixed and
/// are re-solved by IK; every other leg interpolates its joint angles.
pub fn interpolate_state(model: &RobotModel, a: &FullBodyState, b: &FullBodyState, s: f64) -> (FullBodyState, bool) {
    if s <= 0.0 {
        return (*a, true);
    }
    if s >= 1.0 {
        return (*b, true);
    }
    let pose = interpolate_pose(&a.body_pose, &b.body_pose, s);
    let inv = pose.inverse();
    let mut joints = [[0.0; 3]; MAX_LEGS];
    let mut stance = [false; MAX_LEGS];
    let mut feet = [Point3::origin(); MAX_LEGS];
    let mut ok = true;
    for leg in 0..model.leg_count {
        let planted = a.stance[leg] && b.stance[leg];
        stance[leg] = planted;
        if planted && (a.foot_world[leg] - b.foot_world[leg]).norm() <= 1e-12 {
            match model.leg_ik(leg, &(inv * a.foot_world[leg])) {
                Ok(q) => {
                    joints[leg] = q;
                    feet[leg] = a.foot_world[leg];
                    continue;
                }
                Err(_) => ok = false,
            }
        }
        for j in 0..3 {
            joints[leg][j] = a.joint_angles[leg][j] + (b.joint_angles[leg][j] - a.joint_angles[leg][j]) * s;
        }
        feet[leg] = pose * model.leg_fk(leg, &joints[leg]);
    }
    let state = FullBodyState {
        body_pose: pose,
        joint_angles: joints,
        stance,
        foot_world: feet,
        leg_count: a.leg_count,
        gait_phase: a.gait_phase,
    };
    (state, ok)
}

/// Travel that sets the interpolation density: the larger of body and
/// foot displacement.
pub fn segment_travel(a: &FullBodyState, b: &FullBodyState) -> f64 {
    let body = (b.position() - a.position()).norm();
    (0..a.leg_count)
        .map(|l| (b.foot_world[l] - a.foot_world[l]).norm())
        .fold(body, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentCheck {
    pub valid: bool,
    /// Interpolation fraction and report of the first failing state.
    pub failure: Option<(f64, ConstraintReport)>,
}

/// Checks the states of the segment `a -> b` at `2^k` equal subdivisions,
/// with `k` the smallest exponent giving spacing `<= step`.
pub fn check_segment(
    model: &RobotModel,
    map: &ElevationMap,
    a: &FullBodyState,
    b: &FullBodyState,
    step: f64,
) -> Result<SegmentCheck, ConstraintError> {
    if !(step > 0.0) {
        return Err(ConstraintError::InvalidStep(step));
    }
    let travel = segment_travel(a, b);
    let mut n: u64 = 1;
    while travel / n as f64 > step {
        n *= 2;
    }
    for k in 0..=n {
        let s = k as f64 / n as f64;
        let (state, ik_ok) = interpolate_state(model, a, b, s);
        let mut report = check_state(model, map, &state)?;
        if !ik_ok {
            report.in_workspace = false;
        }
        if !report.is_valid() {
            return Ok(SegmentCheck {
                valid: false,
                failure: Some((s, report)),
            });
        }
        if travel == 0.0 {
            break;
        }
    }
    Ok(SegmentCheck { valid: true, failure: None })
}

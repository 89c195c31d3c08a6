//! Kinematic robot templates, 3-DoF leg kinematics and the kinematic margin.
//!
//! Every leg is a coxa-femur-tibia chain expressed in its own leg frame,
//! rooted at the hip. The coxa rotates about the leg-frame z axis and is
//! followed by a link of length `L1` along the rotated x axis. Femur and
//! tibia rotate about the resulting y axis; positive femur angles lower the
//! foot. In the vertical plane of the leg:
//!
//! ```text
//! x' = L1 + L2 cos(q1) + L3 cos(q1 + q2)
//! z  = -(L2 sin(q1) + L3 sin(q1 + q2))
//! ```
//!
//! and the foot sits at `(x' cos q0, x' sin q0, z)` in the leg frame.

use std::fmt;
use std::sync::{Arc, LazyLock, OnceLock};

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, Capsule, Pose};
use crate::spatial::KdTree;

pub const MAX_LEGS: usize = 6;

/// Slack allowed when comparing joint angles against their limits.
const LIMIT_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RobotError {
    #[error("leg {leg}: foot target is outside the reachable annulus")]
    Unreachable { leg: usize },
    #[error("leg {leg}: foot target needs joint {joint} at {angle:.4} rad, outside its limits")]
    LimitViolation { leg: usize, joint: usize, angle: f64 },
    #[error("state has no stance legs")]
    NoStanceLegs,
    #[error("unknown robot template '{0}'")]
    UnknownTemplate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobotKind {
    Hexapod,
    Quadruped,
}

impl RobotKind {
    pub fn name(&self) -> &'static str {
        match self {
            RobotKind::Hexapod => "hexapod",
            RobotKind::Quadruped => "quadruped",
        }
    }
}

impl std::str::FromStr for RobotKind {
    type Err = RobotError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hexapod" => Ok(RobotKind::Hexapod),
            "quadruped" => Ok(RobotKind::Quadruped),
            other => Err(RobotError::UnknownTemplate(other.to_string())),
        }
    }
}

impl fmt::Display for RobotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone)]
pub struct RobotModel {
    pub kind: RobotKind,
    pub leg_count: usize,
    /// Body frame to leg frame (hip at the leg-frame origin).
    pub leg_frames: Vec<Isometry3<f64>>,
    pub link_lengths: [f64; 3],
    pub joint_limits: [(f64, f64); 3],
    /// Sign of the knee angle selected by the IK (fixed elbow convention).
    pub knee_sign: f64,
    pub body_capsules: Vec<Capsule>,
    /// Radii of the coxa, femur and tibia capsules.
    pub link_radii: [f64; 3],
    /// Nominal foot positions in the body frame.
    pub nominal_stance: Vec<Point3<f64>>,
    pub standing_height: f64,
    /// Longest commanded step, meters.
    pub max_step: f64,
    /// Largest height difference between adjacent coarse cells the robot
    /// can walk over, meters.
    pub climb_limit: f64,
    /// Length of tibia, measured from the foot, that may touch the ground.
    pub foot_zone: f64,
    margin_field: Arc<OnceLock<MarginField>>,
}

impl fmt::Debug for RobotModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RobotModel")
            .field("kind", &self.kind)
            .field("leg_count", &self.leg_count)
            .field("link_lengths", &self.link_lengths)
            .field("joint_limits", &self.joint_limits)
            .field("standing_height", &self.standing_height)
            .finish_non_exhaustive()
    }
}

static HEXAPOD: LazyLock<RobotModel> = LazyLock::new(build_hexapod);
static QUADRUPED: LazyLock<RobotModel> = LazyLock::new(build_quadruped);

fn build_hexapod() -> RobotModel {
    let hip_radius = 0.15;
    let standing_height = 0.18;
    let mut leg_frames = Vec::new();
    let mut nominal = Vec::new();
    for k in 0..6 {
        let a = (30.0 + 60.0 * k as f64).to_radians();
        let frame = Isometry3::from_parts(
            Translation3::new(hip_radius * a.cos(), hip_radius * a.sin(), 0.0),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), a),
        );
        nominal.push(frame * Point3::new(0.26, 0.0, -standing_height));
        leg_frames.push(frame);
    }
    RobotModel {
        kind: RobotKind::Hexapod,
        leg_count: 6,
        leg_frames,
        link_lengths: [0.055, 0.16, 0.23],
        joint_limits: [(-0.8, 0.8), (-1.4, 1.2), (0.3, 2.6)],
        knee_sign: 1.0,
        body_capsules: vec![Capsule::new(Point3::new(-0.09, 0.0, 0.0), Point3::new(0.09, 0.0, 0.0), 0.06)],
        link_radii: [0.025, 0.02, 0.015],
        nominal_stance: nominal,
        standing_height,
        max_step: 0.25,
        climb_limit: 0.15,
        foot_zone: 0.07,
        margin_field: Arc::new(OnceLock::new()),
    }
}

fn build_quadruped() -> RobotModel {
    let standing_height = 0.45;
    // Leg x points down the body z axis, leg z along body x.
    let down = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2);
    let hips = [(0.275, 0.125), (0.275, -0.125), (-0.275, 0.125), (-0.275, -0.125)];
    let leg_frames: Vec<_> = hips
        .iter()
        .map(|&(x, y)| Isometry3::from_parts(Translation3::new(x, y, 0.0), down))
        .collect();
    let nominal = hips.iter().map(|&(x, y)| Point3::new(x, y, -standing_height)).collect();
    RobotModel {
        kind: RobotKind::Quadruped,
        leg_count: 4,
        leg_frames,
        link_lengths: [0.10, 0.28, 0.33],
        joint_limits: [(-0.6, 0.6), (-0.5, 1.6), (-2.4, -0.3)],
        knee_sign: -1.0,
        body_capsules: vec![Capsule::new(Point3::new(-0.2, 0.0, 0.0), Point3::new(0.2, 0.0, 0.0), 0.1)],
        link_radii: [0.04, 0.035, 0.025],
        nominal_stance: nominal,
        standing_height,
        max_step: 0.35,
        climb_limit: 0.25,
        foot_zone: 0.10,
        margin_field: Arc::new(OnceLock::new()),
    }
}

impl RobotModel {
    /// Six legs ordered counter-clockwise from the front left:
    /// FL, ML, RL, RR, MR, FR.
    pub fn hexapod() -> Self {
        HEXAPOD.clone()
    }

    /// Four legs: LF, RF, LH, RH.
    pub fn quadruped() -> Self {
        QUADRUPED.clone()
    }

    pub fn from_kind(kind: RobotKind) -> Self {
        match kind {
            RobotKind::Hexapod => Self::hexapod(),
            RobotKind::Quadruped => Self::quadruped(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self, RobotError> {
        Ok(Self::from_kind(name.parse()?))
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn dof(&self) -> usize {
        6 + 3 * self.leg_count
    }

    /// Largest hip-to-foot distance of the chain.
    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    /// Radius of the circle around the body origin enclosing the nominal feet.
    pub fn footprint_radius(&self) -> f64 {
        self.nominal_stance
            .iter()
            .map(|p| p.x.hypot(p.y))
            .fold(0.0, f64::max)
    }

    /// Foot position in the leg frame.
    pub fn leg_fk_local(&self, q: &[f64; 3]) -> Point3<f64> {
        let [l1, l2, l3] = self.link_lengths;
        let xp = l1 + l2 * q[1].cos() + l3 * (q[1] + q[2]).cos();
        let z = -(l2 * q[1].sin() + l3 * (q[1] + q[2]).sin());
        Point3::new(xp * q[0].cos(), xp * q[0].sin(), z)
    }

    /// Foot position in the body frame.
    pub fn leg_fk(&self, leg: usize, q: &[f64; 3]) -> Point3<f64> {
        self.leg_frames[leg] * self.leg_fk_local(q)
    }

    /// Hip, coxa end, knee and foot in the body frame.
    pub fn leg_points(&self, leg: usize, q: &[f64; 3]) -> [Point3<f64>; 4] {
        let [l1, l2, l3] = self.link_lengths;
        let (c0, s0) = (q[0].cos(), q[0].sin());
        let planar = |xp: f64, z: f64| self.leg_frames[leg] * Point3::new(xp * c0, xp * s0, z);
        let x1 = l1;
        let x2 = x1 + l2 * q[1].cos();
        let z2 = -l2 * q[1].sin();
        let x3 = x2 + l3 * (q[1] + q[2]).cos();
        let z3 = z2 - l3 * (q[1] + q[2]).sin();
        [planar(0.0, 0.0), planar(x1, 0.0), planar(x2, z2), planar(x3, z3)]
    }

    pub fn joints_within_limits(&self, q: &[f64; 3]) -> bool {
        self.within_limits(q).is_none()
    }

    fn within_limits(&self, q: &[f64; 3]) -> Option<usize> {
        (0..3).find(|&j| q[j] < self.joint_limits[j].0 - LIMIT_EPS || q[j] > self.joint_limits[j].1 + LIMIT_EPS)
    }

    /// Analytic IK in the leg frame. Both coxa branches are tried; the knee
    /// sign is fixed by the template.
    pub fn leg_ik_local(&self, leg: usize, p: &Point3<f64>) -> Result<[f64; 3], RobotError> {
        let [l1, l2, l3] = self.link_lengths;
        let hyp = p.x.hypot(p.y);
        let branches = [(p.y.atan2(p.x), hyp), ((-p.y).atan2(-p.x), -hyp)];
        let mut violation = None;
        for (q0, r) in branches {
            let u = r - l1;
            let w = p.z;
            let c = (u * u + w * w - l2 * l2 - l3 * l3) / (2.0 * l2 * l3);
            if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&c) {
                continue;
            }
            let q2 = self.knee_sign * c.clamp(-1.0, 1.0).acos();
            let q1 = wrap_angle((-w).atan2(u) - (l3 * q2.sin()).atan2(l2 + l3 * q2.cos()));
            let q = [q0, q1, q2];
            match self.within_limits(&q) {
                None => return Ok(q),
                Some(j) => {
                    if violation.is_none() {
                        violation = Some(RobotError::LimitViolation { leg, joint: j, angle: q[j] });
                    }
                }
            }
        }
        Err(violation.unwrap_or(RobotError::Unreachable { leg }))
    }

    /// Joint angles placing the foot at `foot` (body frame).
    pub fn leg_ik(&self, leg: usize, foot: &Point3<f64>) -> Result<[f64; 3], RobotError> {
        self.leg_ik_local(leg, &(self.leg_frames[leg].inverse() * foot))
    }

    pub fn workspace_contains(&self, leg: usize, foot: &Point3<f64>) -> bool {
        self.leg_ik(leg, foot).is_ok()
    }

    fn local_contains(&self, p: &Point3<f64>) -> bool {
        self.leg_ik_local(0, p).is_ok()
    }

    /// True when every valid IK solution sits on a joint limit, i.e. the
    /// point lies on the workspace boundary.
    fn local_on_boundary(&self, p: &Point3<f64>) -> bool {
        let [l1, l2, l3] = self.link_lengths;
        let hyp = p.x.hypot(p.y);
        let mut any_valid = false;
        for (q0, r) in [(p.y.atan2(p.x), hyp), ((-p.y).atan2(-p.x), -hyp)] {
            let u = r - l1;
            let c = (u * u + p.z * p.z - l2 * l2 - l3 * l3) / (2.0 * l2 * l3);
            if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&c) {
                continue;
            }
            let q2 = self.knee_sign * c.clamp(-1.0, 1.0).acos();
            let q1 = wrap_angle((-p.z).atan2(u) - (l3 * q2.sin()).atan2(l2 + l3 * q2.cos()));
            let q = [q0, q1, q2];
            if self.within_limits(&q).is_some() {
                continue;
            }
            any_valid = true;
            let interior = (0..3).all(|j| {
                q[j] > self.joint_limits[j].0 + LIMIT_EPS && q[j] < self.joint_limits[j].1 - LIMIT_EPS
            });
            if interior {
                return false;
            }
        }
        any_valid
    }

    pub fn margin_field(&self) -> &MarginField {
        self.margin_field.get_or_init(|| MarginField::build(self))
    }

    /// Distance from a body-frame foot position to the boundary of the
    /// leg's workspace; 0 on or outside the boundary.
    pub fn leg_margin(&self, leg: usize, foot: &Point3<f64>) -> f64 {
        let local = self.leg_frames[leg].inverse() * foot;
        if !self.local_contains(&local) || self.local_on_boundary(&local) {
            return 0.0;
        }
        self.margin_field().distance(&local).max(0.0)
    }

    /// Minimum workspace margin over the stance legs of `state`.
    pub fn kinematic_margin(&self, state: &FullBodyState) -> Result<f64, RobotError> {
        if !state.stance[..state.leg_count].iter().any(|s| *s) {
            return Err(RobotError::NoStanceLegs);
        }
        let inv = state.body_pose.inverse();
        let mut m = f64::INFINITY;
        for leg in 0..state.leg_count {
            if state.stance[leg] {
                m = m.min(self.leg_margin(leg, &(inv * state.foot_world[leg])));
            }
        }
        Ok(m)
    }

    /// Nominal standing state with the body at `pose` (feet at the nominal
    /// stance, all legs in stance).
    pub fn nominal_state(&self, pose: Pose) -> Result<FullBodyState, RobotError> {
        let mut joints = [[0.0; 3]; MAX_LEGS];
        for leg in 0..self.leg_count {
            joints[leg] = self.leg_ik(leg, &self.nominal_stance[leg])?;
        }
        let mut stance = [false; MAX_LEGS];
        stance[..self.leg_count].fill(true);
        Ok(FullBodyState::from_joints(self, pose, joints, stance))
    }

    /// Collision capsules of a leg in the body frame: coxa, femur, tibia.
    pub fn leg_capsules(&self, leg: usize, q: &[f64; 3]) -> [Capsule; 3] {
        let p = self.leg_points(leg, q);
        [
            Capsule::new(p[0], p[1], self.link_radii[0]),
            Capsule::new(p[1], p[2], self.link_radii[1]),
            Capsule::new(p[2], p[3], self.link_radii[2]),
        ]
    }
}

/// Body pose, joint angles and contact flags of the whole robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullBodyState {
    pub body_pose: Pose,
    pub joint_angles: [[f64; 3]; MAX_LEGS],
    pub stance: [bool; MAX_LEGS],
    /// Feet in the world frame, kept consistent with the joint angles.
    pub foot_world: [Point3<f64>; MAX_LEGS],
    pub leg_count: usize,
    /// Index of the next gait phase to execute.
    pub gait_phase: u8,
}

impl FullBodyState {
    pub fn from_joints(model: &RobotModel, pose: Pose, joints: [[f64; 3]; MAX_LEGS], stance: [bool; MAX_LEGS]) -> Self {
        let mut feet = [Point3::origin(); MAX_LEGS];
        for leg in 0..model.leg_count {
            feet[leg] = pose * model.leg_fk(leg, &joints[leg]);
        }
        Self {
            body_pose: pose,
            joint_angles: joints,
            stance,
            foot_world: feet,
            leg_count: model.leg_count,
            gait_phase: 0,
        }
    }

    /// Solves IK for world-frame feet; the stored feet are the FK images.
    pub fn from_feet(
        model: &RobotModel,
        pose: Pose,
        feet: &[Point3<f64>],
        stance: [bool; MAX_LEGS],
    ) -> Result<Self, RobotError> {
        let inv = pose.inverse();
        let mut joints = [[0.0; 3]; MAX_LEGS];
        for leg in 0..model.leg_count {
            joints[leg] = model.leg_ik(leg, &(inv * feet[leg]))?;
        }
        Ok(Self::from_joints(model, pose, joints, stance))
    }

    pub fn dof(&self) -> usize {
        6 + 3 * self.leg_count
    }

    pub fn position(&self) -> Point3<f64> {
        Point3::from(self.body_pose.translation.vector)
    }

    pub fn xy(&self) -> nalgebra::Point2<f64> {
        nalgebra::Point2::new(self.body_pose.translation.vector.x, self.body_pose.translation.vector.y)
    }

    pub fn stance_count(&self) -> usize {
        self.stance[..self.leg_count].iter().filter(|s| **s).count()
    }

    pub fn foot_body(&self, leg: usize) -> Point3<f64> {
        self.body_pose.inverse() * self.foot_world[leg]
    }
}

/// Sampled boundary of a leg workspace (leg frame) plus a signed distance
/// grid built from it for fast margin lookups.
pub struct MarginField {
    shell: KdTree<3>,
    shell_len: usize,
    lo: [f64; 3],
    cell: f64,
    dims: [usize; 3],
    values: Vec<f32>,
    max_value: f64,
}

impl fmt::Debug for MarginField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MarginField")
            .field("shell_points", &self.shell_len)
            .field("dims", &self.dims)
            .field("cell", &self.cell)
            .finish()
    }
}

/// Spacing of the sampled boundary shell, meters.
const SHELL_SPACING: f64 = 0.003;

impl MarginField {
    fn build(model: &RobotModel) -> Self {
        let points = boundary_shell(model, SHELL_SPACING);
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &points {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let cell = model.reach() / 100.0;
        for k in 0..3 {
            lo[k] -= 2.0 * cell;
            hi[k] += 2.0 * cell;
        }
        let dims = [0, 1, 2].map(|k| ((hi[k] - lo[k]) / cell).ceil() as usize + 1);
        let n = dims[0] * dims[1] * dims[2];
        let idx = |i: usize, j: usize, k: usize| (k * dims[1] + j) * dims[0] + i;
        let node = |i: usize, j: usize, k: usize| {
            [lo[0] + i as f64 * cell, lo[1] + j as f64 * cell, lo[2] + k as f64 * cell]
        };
        let d2 = |a: &[f64; 3], b: &[f64; 3]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);

        // Closest-point transform: exact seeds around every shell sample,
        // then raster sweeps passing nearest-sample ids between neighbours.
        let mut near = vec![u32::MAX; n];
        let mut best = vec![f64::INFINITY; n];
        for (id, p) in points.iter().enumerate() {
            let c = [0, 1, 2].map(|k| ((p[k] - lo[k]) / cell).round() as isize);
            for dk in -2..=2isize {
                for dj in -2..=2isize {
                    for di in -2..=2isize {
                        let (i, j, k) = (c[0] + di, c[1] + dj, c[2] + dk);
                        if i < 0 || j < 0 || k < 0 || i >= dims[0] as isize || j >= dims[1] as isize || k >= dims[2] as isize {
                            continue;
                        }
                        let (i, j, k) = (i as usize, j as usize, k as usize);
                        let e = idx(i, j, k);
                        let d = d2(&node(i, j, k), p);
                        if d < best[e] || (d == best[e] && (id as u32) < near[e]) {
                            best[e] = d;
                            near[e] = id as u32;
                        }
                    }
                }
            }
        }
        let offsets: Vec<[isize; 3]> = (-1..=1isize)
            .flat_map(|dk| (-1..=1isize).flat_map(move |dj| (-1..=1isize).map(move |di| [di, dj, dk])))
            .filter(|o| *o != [0, 0, 0])
            .collect();
        for _ in 0..2 {
            for forward in [true, false] {
                for kk in 0..dims[2] {
                    let k = if forward { kk } else { dims[2] - 1 - kk };
                    for jj in 0..dims[1] {
                        let j = if forward { jj } else { dims[1] - 1 - jj };
                        for ii in 0..dims[0] {
                            let i = if forward { ii } else { dims[0] - 1 - ii };
                            let e = idx(i, j, k);
                            let here = node(i, j, k);
                            for o in &offsets {
                                let (ni, nj, nk) = (i as isize + o[0], j as isize + o[1], k as isize + o[2]);
                                if ni < 0 || nj < 0 || nk < 0 || ni >= dims[0] as isize || nj >= dims[1] as isize || nk >= dims[2] as isize {
                                    continue;
                                }
                                let cand = near[idx(ni as usize, nj as usize, nk as usize)];
                                if cand == u32::MAX || cand == near[e] {
                                    continue;
                                }
                                let d = d2(&here, &points[cand as usize]);
                                if d < best[e] {
                                    best[e] = d;
                                    near[e] = cand;
                                }
                            }
                        }
                    }
                }
            }
        }
        let mut values = vec![0.0f32; n];
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let e = idx(i, j, k);
                    let p = node(i, j, k);
                    let d = best[e].sqrt();
                    let inside = model.local_contains(&Point3::new(p[0], p[1], p[2]));
                    values[e] = if inside { d as f32 } else { -d as f32 };
                }
            }
        }
        let max_value = values.iter().fold(0.0f32, |m, v| m.max(*v)) as f64;
        let shell_len = points.len();
        let shell = KdTree::build(points.into_iter().enumerate().map(|(i, p)| (p, i)).collect());
        Self {
            shell,
            shell_len,
            lo,
            cell,
            dims,
            values,
            max_value,
        }
    }

    /// Upper bound of every value returned by `distance`.
    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn shell_len(&self) -> usize {
        self.shell_len
    }

    /// Distance to the nearest sampled boundary point.
    pub fn shell_distance(&self, p: &Point3<f64>) -> f64 {
        self.shell.nearest(&[p.x, p.y, p.z]).map(|(_, d2)| d2.sqrt()).unwrap_or(0.0)
    }

    /// Signed boundary distance, positive inside (trilinear lookup).
    pub fn distance(&self, p: &Point3<f64>) -> f64 {
        let f = [
            (p.x - self.lo[0]) / self.cell,
            (p.y - self.lo[1]) / self.cell,
            (p.z - self.lo[2]) / self.cell,
        ];
        if (0..3).any(|k| f[k] < 0.0 || f[k] >= (self.dims[k] - 1) as f64) {
            return -self.shell_distance(p);
        }
        let i = [f[0] as usize, f[1] as usize, f[2] as usize];
        let t = [f[0] - i[0] as f64, f[1] - i[1] as f64, f[2] - i[2] as f64];
        let idx = |a: usize, b: usize, c: usize| ((i[2] + c) * self.dims[1] + i[1] + b) * self.dims[0] + i[0] + a;
        let mut acc = 0.0;
        for c in 0..2 {
            for b in 0..2 {
                for a in 0..2 {
                    let v = self.values[idx(a, b, c)];
                    let w = (if a == 1 { t[0] } else { 1.0 - t[0] })
                        * (if b == 1 { t[1] } else { 1.0 - t[1] })
                        * (if c == 1 { t[2] } else { 1.0 - t[2] });
                    acc += w * v as f64;
                }
            }
        }
        acc
    }
}

/// Leg-frame FK images of the six faces of the joint-limit box, sampled at
/// roughly `spacing` meters, plus reachable points on the coxa axis where
/// the chain is singular.
pub fn boundary_shell(model: &RobotModel, spacing: f64) -> Vec<[f64; 3]> {
    let [l1, l2, l3] = model.link_lengths;
    let lever = [l1 + l2 + l3, l2 + l3, l3];
    let counts: Vec<usize> = (0..3)
        .map(|j| {
            let (a, b) = model.joint_limits[j];
            (((b - a) * lever[j] / spacing).ceil() as usize).max(1) + 1
        })
        .collect();
    let at = |j: usize, s: usize| {
        let (a, b) = model.joint_limits[j];
        a + (b - a) * s as f64 / (counts[j] - 1) as f64
    };
    let mut out = Vec::new();
    for fixed in 0..3 {
        let (u, v) = match fixed {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for end in [0, counts[fixed] - 1] {
            for su in 0..counts[u] {
                for sv in 0..counts[v] {
                    let mut q = [0.0; 3];
                    q[fixed] = at(fixed, end);
                    q[u] = at(u, su);
                    q[v] = at(v, sv);
                    let p = model.leg_fk_local(&q);
                    out.push([p.x, p.y, p.z]);
                }
            }
        }
    }
    let n_axis = (2.0 * lever[0] / spacing).ceil() as usize;
    for s in 0..=n_axis {
        let z = -lever[0] + 2.0 * lever[0] * s as f64 / n_axis as f64;
        let p = Point3::new(0.0, 0.0, z);
        if model.local_contains(&p) {
            out.push([0.0, 0.0, z]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_angles_give_stretched_leg() {
        let m = RobotModel::hexapod();
        let p = m.leg_fk_local(&[0.0, 0.0, 0.0]);
        assert!((p - Point3::new(0.445, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn femur_sign_mirrors_about_hip_plane() {
        for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
            for leg in 0..m.leg_count {
                let a = m.leg_fk_local(&[0.0, 0.4, 0.0]);
                let b = m.leg_fk_local(&[0.0, -0.4, 0.0]);
                assert!((a.x - b.x).abs() < 1e-15 && (a.z + b.z).abs() < 1e-15, "leg {leg}");
            }
        }
    }

    #[test]
    fn nominal_stance_is_reachable() {
        for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
            for leg in 0..m.leg_count {
                let q = m.leg_ik(leg, &m.nominal_stance[leg]).unwrap();
                assert!((m.leg_fk(leg, &q) - m.nominal_stance[leg]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn body_origin_is_outside_workspace() {
        for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
            for leg in 0..m.leg_count {
                assert!(!m.workspace_contains(leg, &Point3::origin()));
            }
        }
    }

    #[test]
    fn beyond_reach_is_unreachable() {
        let m = RobotModel::hexapod();
        let far = m.leg_frames[0] * Point3::new(m.reach() + 0.01, 0.0, 0.0);
        assert_eq!(m.leg_ik(0, &far), Err(RobotError::Unreachable { leg: 0 }));
    }

    #[test]
    fn dimension_counts() {
        assert_eq!(RobotModel::hexapod().dof(), 24);
        assert_eq!(RobotModel::quadruped().dof(), 18);
    }
}

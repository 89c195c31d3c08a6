//! Body posture search: height, roll and pitch over fixed footholds.

use nalgebra::{Point2, Point3};

use super::LocalPlanError;
use crate::constraints::{check_state, STABILITY_THRESHOLD};
use crate::geometry::{convex_hull, pose_from_xyz_rpy, signed_distance_to_convex, Pose};
use crate::metering::{charge, Work};
use crate::robot::{FullBodyState, RobotModel, MAX_LEGS};
use crate::terrain::ElevationMap;

pub const HEIGHT_STEP: f64 = 0.01;
pub const TILT_LIMIT: f64 = 0.2;
pub const TILT_STEP: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PostureObjective {
    /// Kinematic margin plus body height above the terrain.
    MarginPlusHeight,
    /// Kinematic margin alone.
    MarginOnly,
}

/// Candidate grid in canonical order: heights descending, then roll and
/// pitch ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PostureGrid {
    pub heights: Vec<f64>,
    pub tilts: Vec<f64>,
}

impl PostureGrid {
    pub fn for_model(model: &RobotModel) -> Self {
        let top = 1.3 * model.standing_height;
        let bottom = 0.5 * model.standing_height;
        let levels = ((top - bottom) / HEIGHT_STEP + 1e-9).floor() as usize;
        let heights = (0..=levels).map(|k| top - k as f64 * HEIGHT_STEP).collect();
        let n = (2.0 * TILT_LIMIT / TILT_STEP).round() as usize;
        let tilts = (0..=n).map(|k| -TILT_LIMIT + k as f64 * TILT_STEP).collect();
        Self { heights, tilts }
    }

    pub fn len(&self) -> usize {
        self.heights.len() * self.tilts.len() * self.tilts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn all_stance(model: &RobotModel) -> [bool; MAX_LEGS] {
    let mut s = [false; MAX_LEGS];
    s[..model.leg_count].fill(true);
    s
}

/// Body pose maximizing the objective among grid candidates whose
/// all-stance state passes every constraint. The first strict maximum in
/// canonical order wins.
pub fn optimize_posture(
    model: &RobotModel,
    map: &ElevationMap,
    footholds: &[Point3<f64>],
    xy: &Point2<f64>,
    yaw: f64,
) -> Result<Pose, LocalPlanError> {
    optimize_posture_with(model, map, footholds, xy, yaw, PostureObjective::MarginPlusHeight)
}

pub fn optimize_posture_with(
    model: &RobotModel,
    map: &ElevationMap,
    footholds: &[Point3<f64>],
    xy: &Point2<f64>,
    yaw: f64,
    objective: PostureObjective,
) -> Result<Pose, LocalPlanError> {
    let ground = map.height_at(xy)?;
    // Stability depends only on the horizontal body position here.
    let support: Vec<Point2<f64>> = footholds[..model.leg_count].iter().map(|f| Point2::new(f.x, f.y)).collect();
    if signed_distance_to_convex(xy, &convex_hull(&support)) <= STABILITY_THRESHOLD {
        return Err(LocalPlanError::NoFeasiblePosture);
    }
    let grid = PostureGrid::for_model(model);
    let dmax = model.margin_field().max_value() + 1e-9;
    let stance = all_stance(model);
    let nt = grid.tilts.len();
    let mut best: Option<(f64, Pose)> = None;
    for (level, &h) in grid.heights.iter().enumerate() {
        if let Some((b, _)) = best {
            let bound = match objective {
                PostureObjective::MarginPlusHeight => dmax + h,
                PostureObjective::MarginOnly => dmax,
            };
            if b >= bound {
                break;
            }
        }
        let mut ranked: Vec<(f64, usize, FullBodyState)> = Vec::new();
        for (ri, &roll) in grid.tilts.iter().enumerate() {
            for (pi, &pitch) in grid.tilts.iter().enumerate() {
                charge(Work::PostureCandidate, 1);
                let pose = pose_from_xyz_rpy(xy.x, xy.y, ground + h, roll, pitch, yaw);
                let Ok(state) = FullBodyState::from_feet(model, pose, footholds, stance) else {
                    continue;
                };
                let d = model.kinematic_margin(&state)?;
                let value = match objective {
                    PostureObjective::MarginPlusHeight => d + h,
                    PostureObjective::MarginOnly => d,
                };
                if best.is_none_or(|(b, _)| value > b) {
                    ranked.push((value, (level * nt + ri) * nt + pi, state));
                }
            }
        }
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for (value, _, state) in &ranked {
            if check_state(model, map, state)?.is_valid() {
                best = Some((*value, state.body_pose));
                break;
            }
        }
    }
    best.map(|b| b.1).ok_or(LocalPlanError::NoFeasiblePosture)
}

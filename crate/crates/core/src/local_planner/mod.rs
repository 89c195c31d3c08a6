//! Single-step full-body planning.
//!
//! A step moves the body toward a 2D target while one gait phase (hexapod
//! tripod) or one full crawl cycle (quadruped) of legs is re-placed. Each
//! gait phase is built as: footholds for the swing legs, a body posture
//! over the final footholds, a straight-line body motion with triangular
//! swing trajectories, sideways stabilization, and a three-knot SE3
//! B-spline through the initial, stabilized and final body poses.

pub mod foothold;
pub mod posture;
pub mod spline;
pub mod stabilize;

use nalgebra::{Point2, Point3, Vector2};
use thiserror::Error;

pub use foothold::{select_foothold, FootholdCosts};
pub use posture::{optimize_posture, optimize_posture_with, PostureGrid, PostureObjective};
pub use spline::{bspline_basis, bspline_se3, SplineConfig, SplineSe3};
pub use stabilize::{stabilize_path, stabilizing_displacement};

use crate::constraints::{check_state, segment_travel, ConstraintError};
use crate::geometry::{convex_hull, interpolate_pose, pose_xy, wrap_angle, yaw_of, Pose};
use crate::metering::{charge, Work};
use crate::robot::{FullBodyState, RobotError, RobotKind, RobotModel, MAX_LEGS};
use crate::terrain::{ElevationMap, TerrainError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalPlanError {
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error("no foothold candidate inside the window")]
    NoFoothold,
    #[error("no posture on the search grid satisfies the constraints")]
    NoFeasiblePosture,
    #[error("no lateral displacement within the limit stabilizes the motion")]
    Unstabilizable,
    #[error("every candidate step length failed")]
    StepInfeasible,
    #[error("motion has no states")]
    EmptyMotion,
    #[error("spline needs {need} knots, got {got}")]
    InsufficientKnots { got: usize, need: usize },
    #[error("invalid spline configuration: {0}")]
    InvalidSpline(String),
}

impl From<ConstraintError> for LocalPlanError {
    fn from(e: ConstraintError) -> Self {
        match e {
            ConstraintError::Terrain(t) => LocalPlanError::Terrain(t),
            ConstraintError::NoStanceLegs => LocalPlanError::Robot(RobotError::NoStanceLegs),
            ConstraintError::InvalidStep(_) => LocalPlanError::StepInfeasible,
        }
    }
}

/// Planned motion of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlan {
    pub states: Vec<FullBodyState>,
    /// Seconds from the start of the step, one per state.
    pub times: Vec<f64>,
    /// World contact points of every leg at the end of the step.
    pub footholds: Vec<Point3<f64>>,
    pub swing_legs: Vec<usize>,
    /// Initial, stabilized and final body pose of every gait phase.
    pub body_knots: Vec<[Pose; 3]>,
}

impl StepPlan {
    pub fn end_state(&self) -> &FullBodyState {
        self.states.last().expect("step plans are never empty")
    }

    /// Horizontal distance travelled by the body.
    pub fn body_length(&self) -> f64 {
        self.states
            .windows(2)
            .map(|w| (w[1].xy() - w[0].xy()).norm())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub max_step: f64,
    /// Ratio between consecutive candidate step lengths.
    pub shrink: f64,
    pub candidates: usize,
    /// Half-width of the foothold search window, meters.
    pub foothold_window: f64,
    /// Swing apex height above the highest terrain under the foot chord.
    pub swing_clearance: f64,
    /// Largest body or foot travel between consecutive output states.
    pub max_state_spacing: f64,
    /// Largest heading change per step, radians.
    pub max_turn: f64,
}

impl StepParams {
    pub fn for_model(model: &RobotModel) -> Self {
        Self {
            max_step: model.max_step,
            shrink: 0.7,
            candidates: 5,
            foothold_window: 0.05,
            swing_clearance: 0.04,
            max_state_spacing: 0.008,
            max_turn: 0.3,
        }
    }
}

/// Legs swinging in each gait phase of one `plan_step`.
fn gait_phases(model: &RobotModel, phase: u8) -> Vec<Vec<usize>> {
    match model.kind {
        RobotKind::Hexapod => {
            if phase % 2 == 0 {
                vec![vec![0, 2, 4]]
            } else {
                vec![vec![1, 3, 5]]
            }
        }
        RobotKind::Quadruped => vec![vec![0], vec![3], vec![1], vec![2]],
    }
}

/// Phases needed to re-place every leg once.
fn docking_phases(model: &RobotModel, phase: u8) -> Vec<Vec<usize>> {
    match model.kind {
        RobotKind::Hexapod => {
            let mut v = gait_phases(model, phase);
            v.extend(gait_phases(model, phase + 1));
            v
        }
        RobotKind::Quadruped => gait_phases(model, phase),
    }
}

/// Fraction of the phase during which swing legs are in the air.
fn swing_window(model: &RobotModel) -> (f64, f64) {
    match model.kind {
        RobotKind::Hexapod => (0.0, 1.0),
        RobotKind::Quadruped => (1.0 / 3.0, 2.0 / 3.0),
    }
}

/// How far ahead of the nominal stance a swing foot lands, for step length `l`.
fn lead(model: &RobotModel, l: f64) -> f64 {
    match model.kind {
        RobotKind::Hexapod => 0.5 * l,
        RobotKind::Quadruped => 0.375 * l,
    }
}

/// Stability margins aimed for, in order, when the middle knot is solved
/// for instead of taken from the most displaced sample.
const KNOT_TARGETS: [f64; 3] = [stabilize::STABILIZE_TARGET, 0.028, 0.023];
/// Samples per phase constraining the solved middle knot.
const KNOT_SAMPLES: usize = 48;
/// Samples of the straight-line motion used for stabilization.
const LINEAR_SAMPLES: usize = 24;

/// Step planner bound to one robot and one map.
pub struct LocalPlanner<'a> {
    pub model: &'a RobotModel,
    pub map: &'a ElevationMap,
    pub params: StepParams,
    costs: FootholdCosts<'a>,
}

struct PhaseMotion {
    /// `(phase fraction, state)`, starting with the phase's start state.
    states: Vec<(f64, FullBodyState)>,
    knots: [Pose; 3],
}

impl<'a> LocalPlanner<'a> {
    pub fn new(model: &'a RobotModel, map: &'a ElevationMap) -> Self {
        Self {
            model,
            map,
            params: StepParams::for_model(model),
            costs: FootholdCosts::new(map),
        }
    }

    pub fn select_foothold(&self, nominal: &Point2<f64>) -> Result<Point3<f64>, LocalPlanError> {
        self.costs.select(nominal, self.params.foothold_window)
    }

    fn nominal_world(&self, leg: usize, xy: &Point2<f64>, yaw: f64) -> Point2<f64> {
        let n = self.model.nominal_stance[leg];
        let (s, c) = yaw.sin_cos();
        Point2::new(xy.x + c * n.x - s * n.y, xy.y + s * n.x + c * n.y)
    }

    /// Standing state at `xy` with footholds near the nominal stance.
    pub fn stand_at(&self, xy: &Point2<f64>, yaw: f64) -> Result<FullBodyState, LocalPlanError> {
        let mut feet = [Point3::origin(); MAX_LEGS];
        for (leg, f) in feet.iter_mut().enumerate().take(self.model.leg_count) {
            *f = self.select_foothold(&self.nominal_world(leg, xy, yaw))?;
        }
        let pose = optimize_posture(self.model, self.map, &feet[..self.model.leg_count], xy, yaw)?;
        let mut stance = [false; MAX_LEGS];
        stance[..self.model.leg_count].fill(true);
        let state = FullBodyState::from_feet(self.model, pose, &feet, stance)?;
        if !check_state(self.model, self.map, &state)?.is_valid() {
            return Err(LocalPlanError::NoFeasiblePosture);
        }
        Ok(state)
    }

    /// Plans one step from `start` toward `target`, trying step lengths from
    /// the longest down by a geometric factor.
    pub fn plan_step(&self, start: &FullBodyState, target: &Point2<f64>, heading: f64) -> Result<StepPlan, LocalPlanError> {
        let delta = target - start.xy();
        let dist = delta.norm();
        let yaw0 = yaw_of(&start.body_pose);
        let turn = wrap_angle(heading - yaw0).clamp(-self.params.max_turn, self.params.max_turn);
        if dist < 1e-9 && turn.abs() < 1e-12 {
            return Ok(StepPlan {
                states: vec![*start],
                times: vec![0.0],
                footholds: start.foot_world[..start.leg_count].to_vec(),
                swing_legs: Vec::new(),
                body_knots: vec![[start.body_pose; 3]],
            });
        }
        let dir = if dist < 1e-9 {
            Vector2::new(yaw0.cos(), yaw0.sin())
        } else {
            delta / dist
        };
        let first = self.params.max_step.min(dist);
        let mut length = first;
        for _ in 0..self.params.candidates {
            charge(Work::StepAttempt, 1);
            match self.try_step(start, &dir, length, yaw0 + turn) {
                Ok(plan) => return Ok(plan),
                Err(LocalPlanError::Robot(RobotError::NoStanceLegs)) => return Err(LocalPlanError::StepInfeasible),
                Err(_) => {}
            }
            length *= self.params.shrink;
        }
        Err(LocalPlanError::StepInfeasible)
    }

    fn try_step(&self, start: &FullBodyState, dir: &Vector2<f64>, length: f64, yaw_end: f64) -> Result<StepPlan, LocalPlanError> {
        let phases = gait_phases(self.model, start.gait_phase);
        let n = phases.len() as f64;
        let yaw0 = yaw_of(&start.body_pose);
        let start_xy = start.xy();
        let lead = lead(self.model, length);
        let mut cur = *start;
        let mut plan = StepPlan {
            states: vec![*start],
            times: vec![0.0],
            footholds: Vec::new(),
            swing_legs: Vec::new(),
            body_knots: Vec::new(),
        };
        for (p, swing) in phases.iter().enumerate() {
            let frac = (p + 1) as f64 / n;
            let xy = start_xy + dir * (length * frac);
            let yaw = yaw0 + (yaw_end - yaw0) * frac;
            let mut feet = cur.foot_world;
            for &leg in swing {
                let nominal = self.nominal_world(leg, &xy, yaw) + dir * lead;
                feet[leg] = self.select_foothold(&nominal)?;
            }
            let pose = optimize_posture(self.model, self.map, &feet[..self.model.leg_count], &xy, yaw)?;
            let motion = self.phase_motion(&cur, swing, &feet, &pose)?;
            for (s, st) in motion.states.iter().skip(1) {
                plan.states.push(*st);
                plan.times.push(p as f64 + s);
            }
            plan.body_knots.push(motion.knots);
            plan.swing_legs.extend_from_slice(swing);
            cur = *plan.states.last().unwrap();
        }
        let next_phase = match self.model.kind {
            RobotKind::Hexapod => (start.gait_phase + 1) % 2,
            RobotKind::Quadruped => 0,
        };
        plan.states.last_mut().unwrap().gait_phase = next_phase;
        plan.footholds = plan.end_state().foot_world[..self.model.leg_count].to_vec();
        plan.swing_legs.sort_unstable();
        Ok(plan)
    }

    /// Walks from `from` into exactly the state `to`, re-placing every
    /// leg onto its contact point in `to`.
    pub fn plan_transition(&self, from: &FullBodyState, to: &FullBodyState) -> Result<StepPlan, LocalPlanError> {
        if from == to {
            return Ok(StepPlan {
                states: vec![*from],
                times: vec![0.0],
                footholds: from.foot_world[..from.leg_count].to_vec(),
                swing_legs: Vec::new(),
                body_knots: vec![[from.body_pose; 3]],
            });
        }
        if (to.xy() - from.xy()).norm() > self.params.max_step + 1e-9 {
            return Err(LocalPlanError::StepInfeasible);
        }
        charge(Work::StepAttempt, 1);
        let phases = docking_phases(self.model, from.gait_phase);
        let n = phases.len() as f64;
        let mut cur = *from;
        let mut plan = StepPlan {
            states: vec![*from],
            times: vec![0.0],
            footholds: to.foot_world[..to.leg_count].to_vec(),
            swing_legs: (0..self.model.leg_count).collect(),
            body_knots: Vec::new(),
        };
        for (p, swing) in phases.iter().enumerate() {
            let frac = (p + 1) as f64 / n;
            let pose = if p + 1 == phases.len() {
                to.body_pose
            } else {
                interpolate_pose(&from.body_pose, &to.body_pose, frac)
            };
            let mut feet = cur.foot_world;
            for &leg in swing {
                feet[leg] = to.foot_world[leg];
            }
            let motion = self.phase_motion(&cur, swing, &feet, &pose)?;
            for (s, st) in motion.states.iter().skip(1) {
                plan.states.push(*st);
                plan.times.push(p as f64 + s);
            }
            plan.body_knots.push(motion.knots);
            cur = *plan.states.last().unwrap();
        }
        *plan.states.last_mut().unwrap() = *to;
        Ok(plan)
    }

    /// Body positions of the spline through `[start, mid, end]` together
    /// with their sensitivity to the middle knot and the support polygon.
    fn knot_samples(
        &self,
        cur: &FullBodyState,
        mid: &Pose,
        end: &Pose,
        feet_at: &dyn Fn(f64) -> ([Point3<f64>; MAX_LEGS], [bool; MAX_LEGS]),
    ) -> Result<Vec<stabilize::KnotSample>, LocalPlanError> {
        let base = SplineSe3::new(&[cur.body_pose, *mid, *end], 2, 1.0)?;
        let nudged = stabilize::translate_pose(mid, &Vector2::new(1.0, 0.0));
        let moved = SplineSe3::new(&[cur.body_pose, nudged, *end], 2, 1.0)?;
        let (w0, w1) = swing_window(self.model);
        let mut params: Vec<f64> = (1..KNOT_SAMPLES).map(|i| i as f64 / KNOT_SAMPLES as f64).collect();
        params.extend([w0 + 1e-6, w1 - 1e-6].into_iter().filter(|s| *s > 0.0 && *s < 1.0));
        let mut out = Vec::with_capacity(params.len());
        for s in params {
            let (feet, stance) = feet_at(s);
            let pts: Vec<Point2<f64>> = (0..self.model.leg_count)
                .filter(|&l| stance[l])
                .map(|l| Point2::new(feet[l].x, feet[l].y))
                .collect();
            let b = pose_xy(&base.eval_unit(s));
            out.push(stabilize::KnotSample {
                base: b,
                weight: pose_xy(&moved.eval_unit(s)).x - b.x,
                support: convex_hull(&pts),
            });
        }
        Ok(out)
    }

    /// Highest terrain under the straight chord between two feet.
    fn chord_max_height(&self, a: &Point3<f64>, b: &Point3<f64>) -> Result<f64, LocalPlanError> {
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let n = ((len / (0.5 * self.map.resolution())).ceil() as usize).max(1);
        let mut m = f64::NEG_INFINITY;
        for k in 0..=n {
            let s = k as f64 / n as f64;
            m = m.max(self.map.height_at(&Point2::new(a.x + (b.x - a.x) * s, a.y + (b.y - a.y) * s))?);
        }
        Ok(m)
    }

    fn phase_motion(
        &self,
        cur: &FullBodyState,
        swing: &[usize],
        feet_end: &[Point3<f64>; MAX_LEGS],
        pose_end: &Pose,
    ) -> Result<PhaseMotion, LocalPlanError> {
        let model = self.model;
        let (w0, w1) = swing_window(model);
        let mut apex = [Point3::origin(); MAX_LEGS];
        let mut swinging = [false; MAX_LEGS];
        for &leg in swing {
            let a = cur.foot_world[leg];
            let b = feet_end[leg];
            let top = self.chord_max_height(&a, &b)? + self.params.swing_clearance;
            apex[leg] = Point3::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y), top);
            swinging[leg] = true;
        }
        let feet_at = |s: f64| -> ([Point3<f64>; MAX_LEGS], [bool; MAX_LEGS]) {
            let mut feet = cur.foot_world;
            let mut stance = cur.stance;
            for leg in 0..model.leg_count {
                if !swinging[leg] {
                    continue;
                }
                let u = (s - w0) / (w1 - w0);
                if u <= 0.0 {
                    stance[leg] = true;
                } else if u >= 1.0 {
                    feet[leg] = feet_end[leg];
                    stance[leg] = true;
                } else if u < 0.5 {
                    feet[leg] = cur.foot_world[leg] + (apex[leg] - cur.foot_world[leg]) * (2.0 * u);
                    stance[leg] = false;
                } else {
                    feet[leg] = apex[leg] + (feet_end[leg] - apex[leg]) * (2.0 * u - 1.0);
                    stance[leg] = false;
                }
            }
            (feet, stance)
        };
        let build = |pose: Pose, s: f64| -> Result<FullBodyState, LocalPlanError> {
            charge(Work::MotionSample, 1);
            let (feet, stance) = feet_at(s);
            let mut st = FullBodyState::from_feet(model, pose, &feet, stance)?;
            st.gait_phase = cur.gait_phase;
            Ok(st)
        };

        let mut linear = Vec::with_capacity(LINEAR_SAMPLES + 1);
        for i in 0..=LINEAR_SAMPLES {
            let s = i as f64 / LINEAR_SAMPLES as f64;
            linear.push(build(interpolate_pose(&cur.body_pose, pose_end, s), s)?);
        }
        let disps = linear
            .iter()
            .map(stabilizing_displacement)
            .collect::<Result<Vec<_>, _>>()?;
        let mut worst: Option<(usize, f64)> = None;
        for (i, d) in disps.iter().enumerate() {
            let n = d.norm();
            if n > 0.0 && worst.is_none_or(|(_, w)| n > w) {
                worst = Some((i, n));
            }
        }
        let mid = interpolate_pose(&cur.body_pose, pose_end, 0.5);
        let first_knot = match worst {
            Some((i, _)) => stabilize::translate_pose(&linear[i].body_pose, &disps[i]),
            None => mid,
        };

        let mut last_err = LocalPlanError::Unstabilizable;
        let mut samples: Option<Vec<stabilize::KnotSample>> = None;
        for attempt in 0..=KNOT_TARGETS.len() {
            let q_stab = if attempt == 0 {
                first_knot
            } else {
                let samples = match &samples {
                    Some(s) => s,
                    None => samples.insert(self.knot_samples(cur, &mid, pose_end, &feet_at)?),
                };
                match stabilize::stabilizing_knot_offset(samples, KNOT_TARGETS[attempt - 1]) {
                    Some(v) => stabilize::translate_pose(&mid, &v),
                    None => continue,
                }
            };
            let knots = [cur.body_pose, q_stab, *pose_end];
            let spline = SplineSe3::new(&knots, 2, 1.0)?;
            let eval = |s: f64| -> Result<FullBodyState, LocalPlanError> {
                if s <= 0.0 {
                    return Ok(*cur);
                }
                let pose = if s >= 1.0 { *pose_end } else { spline.eval_unit(s) };
                build(pose, s)
            };
            match self.sample_and_check(&eval) {
                Ok(states) => return Ok(PhaseMotion { states, knots }),
                Err((e, unstable)) => {
                    last_err = e;
                    if !unstable {
                        break;
                    }
                }
            }
        }
        Err(last_err)
    }

    /// Samples `eval` on [0, 1] by bisection until consecutive states are
    /// at most `max_state_spacing` apart, validating each new state. The
    /// error flag tells whether the first failure was a stability failure.
    fn sample_and_check(
        &self,
        eval: &dyn Fn(f64) -> Result<FullBodyState, LocalPlanError>,
    ) -> Result<Vec<(f64, FullBodyState)>, (LocalPlanError, bool)> {
        let fail = |e: LocalPlanError| (e, false);
        let check = |st: &FullBodyState| -> Result<(), (LocalPlanError, bool)> {
            let r = check_state(self.model, self.map, st).map_err(|e| fail(e.into()))?;
            if r.is_valid() {
                Ok(())
            } else {
                let only_stability = r.in_workspace && r.collision_free && r.contacts_ok;
                Err((LocalPlanError::StepInfeasible, only_stability))
            }
        };
        let first = eval(0.0).map_err(fail)?;
        let mut out = vec![(0.0, first)];
        let end = eval(1.0).map_err(fail)?;
        check(&end)?;
        let mut pending = vec![(1.0, end)];
        while let Some(&(sr, right)) = pending.last() {
            let (sl, left) = *out.last().unwrap();
            if segment_travel(&left, &right) <= self.params.max_state_spacing || sr - sl < 1e-9 {
                out.push((sr, right));
                pending.pop();
            } else {
                let sm = 0.5 * (sl + sr);
                let mid = eval(sm).map_err(fail)?;
                check(&mid)?;
                pending.push((sm, mid));
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper building a planner for a single step.
pub fn plan_step(
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    target: &Point2<f64>,
    heading: f64,
) -> Result<StepPlan, LocalPlanError> {
    LocalPlanner::new(model, map).plan_step(start, target, heading)
}

/// Horizontal position of a pose (re-exported for planners).
pub fn body_xy(pose: &Pose) -> Point2<f64> {
    pose_xy(pose)
}

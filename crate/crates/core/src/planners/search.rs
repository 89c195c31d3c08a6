//! Search context shared by the planners: clock, RNG, sampling bounds and
//! the step-level steering primitives.

use nalgebra::Point2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::path::Segment;
use super::sampling::SampleBounds;
use super::{PlannerConfig, PlannerError};
use crate::geometry::{wrap_angle, yaw_of};
use crate::local_planner::LocalPlanner;
use crate::metering::PlanClock;
use crate::robot::{FullBodyState, RobotModel};
use crate::terrain::ElevationMap;

/// Heading the body keeps while walking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Heading {
    /// Face the walking direction.
    Forward,
    /// Face away from the walking direction (walk backwards).
    Backward,
    Fixed(f64),
}

/// Steps allowed in one docking approach beyond the straight-line count.
const DOCK_SPARE_STEPS: usize = 4;
/// Smallest progress per step before walking counts as blocked, meters.
const MIN_PROGRESS: f64 = 1e-3;

pub struct Search<'a> {
    pub model: &'a RobotModel,
    pub map: &'a ElevationMap,
    pub lp: LocalPlanner<'a>,
    pub cfg: PlannerConfig,
    pub clock: PlanClock,
    pub rng: ChaCha8Rng,
    pub bounds: SampleBounds,
}

impl<'a> Search<'a> {
    pub fn new(model: &'a RobotModel, map: &'a ElevationMap, cfg: &PlannerConfig) -> Self {
        let (lo, hi) = map.extent();
        let margin = model.footprint_radius() + LocalPlanner::new(model, map).params.foothold_window;
        let bounds = SampleBounds {
            min: Point2::new(lo.x + margin, lo.y + margin),
            max: Point2::new(hi.x - margin, hi.y - margin),
        };
        Self {
            model,
            map,
            lp: LocalPlanner::new(model, map),
            cfg: cfg.clone(),
            clock: PlanClock::start(cfg.clock),
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            bounds,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.clock.elapsed()
    }

    fn heading(&self, from: &FullBodyState, target: &Point2<f64>, mode: Heading) -> f64 {
        let d = target - from.xy();
        if d.norm() < 1e-9 {
            return match mode {
                Heading::Fixed(y) => y,
                _ => yaw_of(&from.body_pose),
            };
        }
        match mode {
            Heading::Forward => d.y.atan2(d.x),
            Heading::Backward => (-d.y).atan2(-d.x),
            Heading::Fixed(y) => y,
        }
    }

    /// Standing state at a goal position.
    pub fn stand(&self, xy: &Point2<f64>, yaw: f64) -> Result<FullBodyState, PlannerError> {
        self.lp.stand_at(xy, yaw).map_err(|_| PlannerError::InvalidGoal { x: xy.x, y: xy.y })
    }

    /// Walks from `from` toward `target` for at most `max_dist` meters of
    /// body travel. Returns the motion when at least one step was taken.
    pub fn steer(&self, from: &FullBodyState, target: &Point2<f64>, mode: Heading, max_dist: f64, deadline: f64) -> Option<Segment> {
        let mut seg = Segment::single(*from);
        let mut travelled = 0.0;
        loop {
            let cur = *seg.end();
            let d = target - cur.xy();
            let dist = d.norm();
            let remaining = dist.min(max_dist - travelled);
            if remaining <= 1e-6 || self.elapsed() >= deadline {
                break;
            }
            let goal = cur.xy() + d * (remaining / dist);
            let Ok(plan) = self.lp.plan_step(&cur, &goal, self.heading(&cur, target, mode)) else {
                break;
            };
            let moved = (plan.end_state().xy() - cur.xy()).norm();
            if moved < MIN_PROGRESS {
                break;
            }
            travelled += moved;
            seg.push_plan(&plan);
        }
        (seg.steps() > 0).then_some(seg)
    }

    /// Walks from `from` into exactly the state `to`. Returns the motion
    /// made and whether it ended in `to`.
    pub fn dock(&self, from: &FullBodyState, to: &FullBodyState, deadline: f64) -> (Segment, bool) {
        let mut seg = Segment::single(*from);
        if from == to {
            return (seg, true);
        }
        let max_step = self.lp.params.max_step;
        let yaw_to = yaw_of(&to.body_pose);
        let dist = (to.xy() - from.xy()).norm();
        let budget = (dist / (0.5 * max_step)).ceil() as usize + DOCK_SPARE_STEPS;
        for _ in 0..budget {
            if self.elapsed() >= deadline {
                break;
            }
            let cur = *seg.end();
            let left = (to.xy() - cur.xy()).norm();
            let turn = wrap_angle(yaw_to - yaw_of(&cur.body_pose)).abs();
            if left <= max_step && turn <= self.lp.params.max_turn {
                if let Ok(plan) = self.lp.plan_transition(&cur, to) {
                    seg.push_plan(&plan);
                    return (seg, true);
                }
                break;
            }
            // Close the distance while turning toward the target heading.
            let goal = if left > max_step { to.xy() + (cur.xy() - to.xy()) * (0.5 * max_step / left) } else { cur.xy() };
            let Ok(plan) = self.lp.plan_step(&cur, &goal, yaw_to) else {
                break;
            };
            let progress = left - (to.xy() - plan.end_state().xy()).norm();
            let turned = turn - wrap_angle(yaw_to - yaw_of(&plan.end_state().body_pose)).abs();
            if progress < MIN_PROGRESS && turned < 1e-3 {
                break;
            }
            seg.push_plan(&plan);
        }
        (seg, false)
    }
}

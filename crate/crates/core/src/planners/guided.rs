//! GuidedRRT: RRT-Connect between temporary goals placed along an A* guide.

use nalgebra::Point2;

use super::connect::connect_search;
use super::guide::{astar_guide, GuideCurve};
use super::path::FullBodyPath;
use super::search::Search;
use super::PlannerError;
use crate::robot::FullBodyState;

#[derive(Debug, Clone)]
pub struct GuidedResult {
    pub path: FullBodyPath,
    pub node_count: usize,
    /// Temporary goals that were reached, in order.
    pub subgoals: Vec<Point2<f64>>,
}

pub fn guided_search(search: &mut Search<'_>, start: &FullBodyState, goal: &Point2<f64>) -> Result<GuidedResult, PlannerError> {
    let cfg = search.cfg.clone();
    let guide = astar_guide(search.map, search.model, &start.xy(), goal, cfg.coarse_res)?;
    let curve = GuideCurve::new(&start.xy(), &guide, goal);
    let total = curve.length();
    let mut path = FullBodyPath::new(vec![*start]);
    let mut node_count = 0;
    let mut subgoals = Vec::new();
    while (path.end().xy() - goal).norm() > cfg.goal_tolerance {
        let cur = *path.end();
        let mut s = curve.project(&cur.xy()) + cfg.d_rrt;
        loop {
            if search.elapsed() >= cfg.time_limit {
                return Err(PlannerError::Timeout);
            }
            s = s.min(total);
            let last = s >= total - 1e-9;
            let target = if last { *goal } else { curve.point_at(s) };
            let t = curve.tangent_at(s);
            let deadline = (search.elapsed() + cfg.leg_time_limit).min(cfg.time_limit);
            let leg = search
                .stand(&target, t.y.atan2(t.x))
                .and_then(|g| {
                    let bounds = if last { search.bounds } else { search.bounds.around(&cur.xy(), &target, cfg.d_rrt) };
                    connect_search(search, &cur, &g, &bounds, deadline)
                });
            match leg {
                Ok(r) => {
                    node_count += r.node_count;
                    path.append(&r.path);
                    subgoals.push(target);
                    break;
                }
                Err(PlannerError::InvalidGoal { .. }) if last => return Err(PlannerError::InvalidGoal { x: goal.x, y: goal.y }),
                Err(_) => s += cfg.d_rrt,
            }
        }
    }
    Ok(GuidedResult { path, node_count, subgoals })
}

//! Bidirectional RRT-Connect over single steps.

use super::sampling::SampleBounds;
use super::path::{join_trees, FullBodyPath, Segment};
use super::search::{Heading, Search};
use super::tree::PlanTree;
use super::PlannerError;
use crate::robot::FullBodyState;

/// Result of one RRT-Connect search.
#[derive(Debug, Clone)]
pub struct ConnectResult {
    pub path: FullBodyPath,
    pub node_count: usize,
}

/// Grows a tree from `start` and one from `goal` until they meet exactly,
/// or until the clock reaches `deadline`. Samples come from `bounds`.
pub fn connect_search(
    search: &mut Search<'_>,
    start: &FullBodyState,
    goal: &FullBodyState,
    bounds: &SampleBounds,
    deadline: f64,
) -> Result<ConnectResult, PlannerError> {
    let mut trees = [PlanTree::new(*start), PlanTree::new(*goal)];
    let mut a = 0;
    while search.elapsed() < deadline {
        let q = bounds.uniform(&mut search.rng);
        let near = trees[a].nearest(&q);
        let from = trees[a].node(near).state;
        let mode = if a == 0 { Heading::Forward } else { Heading::Backward };
        // One step toward the sample.
        let max_step = search.lp.params.max_step;
        if let Some(seg) = search.steer(&from, &q, mode, max_step, deadline) {
            let new = trees[a].add(near, seg);
            let b = 1 - a;
            let target_id = trees[b].nearest(&trees[a].node(new).state.xy());
            let target = trees[b].node(target_id).state;
            let (seg, docked) = search.dock(&trees[a].node(new).state, &target, deadline);
            let end = if seg.steps() > 0 { trees[a].add(new, seg) } else { new };
            if docked {
                let node_count = trees[0].len() + trees[1].len();
                let joint = Segment::single(target);
                let path = if a == 0 {
                    join_trees(&trees[0], end, &joint, &trees[1], target_id)
                } else {
                    join_trees(&trees[0], target_id, &joint, &trees[1], end)
                };
                return Ok(ConnectResult { path, node_count });
            }
        }
        a = 1 - a;
    }
    Err(PlannerError::Timeout)
}

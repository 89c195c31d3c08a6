//! Full-body paths, motion segments and tree injection.

use super::tree::PlanTree;
use super::PlannerError;
use crate::local_planner::StepPlan;
use crate::robot::FullBodyState;

/// Sum of horizontal body displacements.
pub fn path_length(states: &[FullBodyState]) -> f64 {
    states.windows(2).map(|w| (w[1].xy() - w[0].xy()).norm()).sum()
}

/// Timed state sequence; `times[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub states: Vec<FullBodyState>,
    pub times: Vec<f64>,
}

impl Segment {
    pub fn single(state: FullBodyState) -> Self {
        Self {
            states: vec![state],
            times: vec![0.0],
        }
    }

    pub fn start(&self) -> &FullBodyState {
        &self.states[0]
    }

    pub fn end(&self) -> &FullBodyState {
        self.states.last().unwrap()
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn length(&self) -> f64 {
        path_length(&self.states)
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Appends a motion starting at this segment's end state.
    pub fn extend(&mut self, next: &Segment) {
        let t0 = self.duration();
        self.states.extend_from_slice(&next.states[1..]);
        self.times.extend(next.times[1..].iter().map(|t| t0 + t));
    }

    pub fn push_plan(&mut self, plan: &StepPlan) {
        self.extend(&Segment {
            states: plan.states.clone(),
            times: plan.times.clone(),
        });
    }

    /// The same motion played backwards.
    pub fn reversed(&self) -> Segment {
        let t = self.duration();
        Segment {
            states: self.states.iter().rev().copied().collect(),
            times: self.times.iter().rev().map(|x| t - x).collect(),
        }
    }
}

/// Planner output: timed full-body states from start to goal.
#[derive(Debug, Clone, PartialEq)]
pub struct FullBodyPath {
    pub states: Vec<FullBodyState>,
    pub times: Vec<f64>,
    /// Indices of the states that were tree nodes; always includes both ends.
    pub knots: Vec<usize>,
    pub length: f64,
    pub plan_time: f64,
}

impl FullBodyPath {
    /// Path through `states` with every state a knot and unit time steps.
    pub fn new(states: Vec<FullBodyState>) -> Self {
        let n = states.len();
        Self {
            length: path_length(&states),
            times: (0..n).map(|i| i as f64).collect(),
            knots: (0..n).collect(),
            states,
            plan_time: 0.0,
        }
    }

    pub fn from_segment(seg: Segment, knots: Vec<usize>) -> Self {
        Self {
            length: path_length(&seg.states),
            states: seg.states,
            times: seg.times,
            knots,
            plan_time: 0.0,
        }
    }

    pub fn start(&self) -> &FullBodyState {
        &self.states[0]
    }

    pub fn end(&self) -> &FullBodyState {
        self.states.last().unwrap()
    }

    /// Appends `next`, which must start at this path's end.
    pub fn append(&mut self, next: &FullBodyPath) {
        let offset = self.states.len() - 1;
        let t0 = *self.times.last().unwrap();
        self.states.extend_from_slice(&next.states[1..]);
        self.times.extend(next.times[1..].iter().map(|t| t0 + t));
        self.knots.extend(next.knots.iter().skip(1).map(|k| k + offset));
        self.length = path_length(&self.states);
    }
}

/// Path from the root of `a` through node `na`, then from node `nb` of `b`
/// back to its root; `bridge` runs from `na`'s state to `nb`'s state.
pub fn join_trees(a: &PlanTree, na: usize, bridge: &Segment, b: &PlanTree, nb: usize) -> FullBodyPath {
    let (mut seg, mut knots) = a.motion_to(na);
    if bridge.steps() > 0 {
        seg.extend(bridge);
        knots.push(seg.states.len() - 1);
    }
    let (back, back_knots) = b.motion_to(nb);
    let offset = seg.states.len() - 1;
    let last = back.states.len() - 1;
    seg.extend(&back.reversed());
    knots.extend(back_knots.iter().rev().skip(1).map(|k| offset + (last - k)));
    FullBodyPath::from_segment(seg, knots)
}

/// Splits a path at its middle knot into a tree rooted at the start
/// (knots up to the middle) and a tree rooted at the end (knots from the
/// end back to the middle). Returns the trees and the path length.
pub fn inject_path_as_tree(path: &FullBodyPath) -> Result<(PlanTree, PlanTree, f64), PlannerError> {
    if path.states.len() < 2 || path.knots.len() < 2 {
        return Err(PlannerError::EmptyPath);
    }
    let knots = &path.knots;
    let mid = knots.len() / 2;
    let piece = |from: usize, to: usize| Segment {
        states: path.states[from..=to].to_vec(),
        times: path.times[from..=to].iter().map(|t| t - path.times[from]).collect(),
    };
    let mut a = PlanTree::new(path.states[knots[0]]);
    let mut parent = 0;
    for w in knots[..=mid].windows(2) {
        parent = a.add(parent, piece(w[0], w[1]));
    }
    let mut b = PlanTree::new(path.states[*knots.last().unwrap()]);
    let mut parent = 0;
    for w in knots[mid..].windows(2).rev() {
        parent = b.add(parent, piece(w[0], w[1]).reversed());
    }
    Ok((a, b, path.length))
}

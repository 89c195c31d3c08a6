//! RRT*-Connect with bounded rewiring, informed sampling and path
//! injection.

use nalgebra::Point2;

use super::path::{join_trees, FullBodyPath, Segment};
use super::sampling::{informed_sample, rewire_radius};
use super::search::{Heading, Search};
use super::tree::PlanTree;
use super::PlannerError;
use crate::geometry::yaw_of;
use crate::robot::FullBodyState;

/// Strict-improvement margin for accepting a shorter path, meters.
pub const IMPROVEMENT_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Uniform,
    /// Uniform until the first connection, then from the informed ellipse.
    Informed,
}

/// Motion joining node `a` of the start tree to node `b` of the goal tree.
#[derive(Debug, Clone)]
struct Bridge {
    a: usize,
    b: usize,
    segment: Segment,
    length: f64,
}

/// A sample drawn during optimization with the bound in force at the time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub point: Point2<f64>,
    pub c_best: f64,
}

#[derive(Debug, Clone)]
pub struct StarResult {
    pub path: FullBodyPath,
    pub initial_length: f64,
    pub initial_time: f64,
    /// `(time, length)` of the first path and every accepted improvement.
    pub improvements: Vec<(f64, f64)>,
    pub node_count: usize,
    pub samples: Vec<SampleRecord>,
}

pub struct StarSearch<'s, 'a> {
    search: &'s mut Search<'a>,
    trees: [PlanTree; 2],
    bridges: Vec<Bridge>,
    goal: Point2<f64>,
    best: Option<(f64, FullBodyPath)>,
    improvements: Vec<(f64, f64)>,
    samples: Vec<SampleRecord>,
    gamma: f64,
}

impl<'s, 'a> StarSearch<'s, 'a> {
    pub fn new(search: &'s mut Search<'a>, start: &FullBodyState, goal: &FullBodyState, gamma: f64) -> Self {
        let goal_xy = goal.xy();
        Self {
            search,
            trees: [PlanTree::new(*start), PlanTree::new(*goal)],
            bridges: Vec::new(),
            goal: goal_xy,
            best: None,
            improvements: Vec::new(),
            samples: Vec::new(),
            gamma,
        }
    }

    /// Starts from trees holding an existing path; the trees meet at their
    /// last-added nodes, which share one state.
    pub fn injected(search: &'s mut Search<'a>, trees: (PlanTree, PlanTree), gamma: f64) -> Self {
        let (ta, tb) = trees;
        let goal = tb.root().state.xy();
        let (a, b) = (ta.len() - 1, tb.len() - 1);
        let mut s = Self {
            search,
            trees: [ta, tb],
            bridges: Vec::new(),
            goal,
            best: None,
            improvements: Vec::new(),
            samples: Vec::new(),
            gamma,
        };
        let seg = Segment::single(s.trees[0].node(a).state);
        s.bridges.push(Bridge { a, b, segment: seg, length: 0.0 });
        s.update_best();
        s
    }

    pub fn best_length(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn node_count(&self) -> usize {
        self.trees[0].len() + self.trees[1].len()
    }

    pub fn trees(&self) -> &[PlanTree; 2] {
        &self.trees
    }

    fn start_xy(&self) -> Point2<f64> {
        self.trees[0].root().state.xy()
    }

    fn bridge_cost(&self, br: &Bridge) -> f64 {
        self.trees[0].node(br.a).cost + br.length + self.trees[1].node(br.b).cost
    }

    /// Accepts the cheapest bridge when it beats the best path strictly.
    fn update_best(&mut self) {
        let Some(br) = self
            .bridges
            .iter()
            .min_by(|x, y| self.bridge_cost(x).total_cmp(&self.bridge_cost(y)))
        else {
            return;
        };
        let cost = self.bridge_cost(br);
        if self.best.as_ref().is_some_and(|(b, _)| cost >= b - IMPROVEMENT_EPS) {
            return;
        }
        let mut path = join_trees(&self.trees[0], br.a, &br.segment, &self.trees[1], br.b);
        path.plan_time = self.search.elapsed();
        let len = path.length;
        // The joined path measures the same motion as the tree costs; keep
        // the strict acceptance on the measured length as well.
        if self.best.as_ref().is_some_and(|(b, _)| len >= b - IMPROVEMENT_EPS) {
            return;
        }
        self.improvements.push((path.plan_time, len));
        self.best = Some((len, path));
    }

    fn draw(&mut self, informed: bool) -> Result<Point2<f64>, PlannerError> {
        let start = self.start_xy();
        let search = &mut *self.search;
        match (informed, &self.best) {
            (true, Some((c_best, _))) => {
                let p = informed_sample(&start, &self.goal, *c_best, &search.bounds, &mut search.rng)?;
                if search.cfg.audit_samples {
                    self.samples.push(SampleRecord { point: p, c_best: *c_best });
                }
                Ok(p)
            }
            _ => Ok(search.bounds.uniform(&mut search.rng)),
        }
    }

    /// Runs until the first path is found (bounded by `time_limit`) and then
    /// for `opt_time` more seconds.
    pub fn run(&mut self, sampler: Sampler) -> Result<(), PlannerError> {
        let cfg = self.search.cfg.clone();
        let mut a = 0;
        let mut opt_start = self.best.as_ref().map(|_| self.search.elapsed());
        loop {
            let now = self.search.elapsed();
            let deadline = match opt_start {
                Some(t0) => t0 + cfg.opt_time,
                None => cfg.time_limit,
            };
            if now >= deadline {
                break;
            }
            let informed = sampler == Sampler::Informed && self.best.is_some();
            let q = match self.draw(informed) {
                Ok(q) => q,
                Err(PlannerError::EmptySampleRegion) => break,
                Err(e) => return Err(e),
            };
            self.iterate(a, &q, deadline);
            if opt_start.is_none() && self.best.is_some() {
                opt_start = Some(self.search.elapsed());
            }
            a = 1 - a;
        }
        if self.best.is_none() {
            return Err(PlannerError::Timeout);
        }
        Ok(())
    }

    /// Among the rewiring neighborhood of `q` in tree `t` (plus the nearest
    /// node), the node minimizing cost plus straight-line distance.
    fn cheapest_near(&self, t: usize, q: &Point2<f64>) -> usize {
        let tree = &self.trees[t];
        let r = rewire_radius(tree.len(), self.search.cfg.dim, self.gamma);
        let lb = |x: usize| tree.node(x).cost + (tree.node(x).state.xy() - q).norm();
        let mut best = tree.nearest(q);
        for x in tree.near(q, self.search.cfg.n_rewire, r) {
            if lb(x) < lb(best) - IMPROVEMENT_EPS {
                best = x;
            }
        }
        best
    }

    fn iterate(&mut self, a: usize, q: &Point2<f64>, deadline: f64) {
        let parent = self.cheapest_near(a, q);
        let from = self.trees[a].node(parent).state;
        let mode = if a == 0 { Heading::Forward } else { Heading::Backward };
        let Some(seg) = self.search.steer(&from, q, mode, self.search.cfg.max_extend, deadline) else {
            return;
        };
        let new = self.trees[a].add(parent, seg);
        self.rewire(a, new, deadline);
        if self.search.cfg.verify_trees {
            assert!(self.trees[a].verify(1e-9), "tree cost invariant broken after rewiring");
        }
        self.connect(a, new, deadline);
        self.update_best();
    }

    fn rewire(&mut self, a: usize, new: usize, deadline: f64) {
        let cfg = &self.search.cfg;
        let (n_rewire, dim) = (cfg.n_rewire, cfg.dim);
        let tree = &self.trees[a];
        let r = rewire_radius(tree.len(), dim, self.gamma);
        let q = tree.node(new).state;
        let parent = tree.node(new).parent;
        let candidates: Vec<usize> = tree
            .near(&q.xy(), n_rewire + 2, r)
            .into_iter()
            .filter(|&x| x != new && Some(x) != parent && !tree.is_ancestor(x, new))
            .take(n_rewire)
            .collect();
        for x in candidates {
            self.try_rewire(a, new, x, deadline);
        }
    }

    /// Re-parents node `x` of tree `t` under `new` when walking from `new`
    /// into `x` is feasible and strictly cheaper. Returns whether it did.
    pub fn try_rewire(&mut self, t: usize, new: usize, x: usize, deadline: f64) -> bool {
        let tree = &self.trees[t];
        let (cost_new, cost_x) = (tree.node(new).cost, tree.node(x).cost);
        let (q, target) = (tree.node(new).state, tree.node(x).state);
        if tree.is_ancestor(x, new) || cost_new + (target.xy() - q.xy()).norm() >= cost_x - IMPROVEMENT_EPS {
            return false;
        }
        let (seg, docked) = self.search.dock(&q, &target, deadline);
        // Dock ends in an exact copy of the node's state.
        docked && cost_new + seg.length() < cost_x - IMPROVEMENT_EPS && self.trees[t].reparent(x, new, seg).is_ok()
    }

    /// Adds a node to tree `t` by walking `segment` from node `parent`.
    pub fn add_node(&mut self, t: usize, parent: usize, segment: Segment) -> usize {
        self.trees[t].add(parent, segment)
    }

    fn connect(&mut self, a: usize, new: usize, deadline: f64) {
        let b = 1 - a;
        let q = self.trees[a].node(new).state;
        let other = self.cheapest_near(b, &q.xy());
        let target = self.trees[b].node(other).state;
        let bound = self.trees[a].node(new).cost + (target.xy() - q.xy()).norm() + self.trees[b].node(other).cost;
        if self.best.as_ref().is_some_and(|(c, _)| bound >= c - IMPROVEMENT_EPS) {
            return;
        }
        let (seg, docked) = self.search.dock(&q, &target, deadline);
        if !docked {
            return;
        }
        let length = seg.length();
        let (na, nb, segment) = if a == 0 { (new, other, seg) } else { (other, new, seg.reversed()) };
        self.bridges.push(Bridge { a: na, b: nb, segment, length });
    }

    pub fn finish(self) -> StarResult {
        let node_count = self.node_count();
        let (_, path) = self.best.expect("finish is only called after a path was found");
        let (initial_time, initial_length) = self.improvements[0];
        StarResult {
            path,
            initial_length,
            initial_time,
            improvements: self.improvements,
            node_count,
            samples: self.samples,
        }
    }
}

/// Goal heading: face along the start-to-goal direction.
pub fn goal_heading(start: &FullBodyState, goal: &Point2<f64>) -> f64 {
    let d = goal - start.xy();
    if d.norm() < 1e-9 {
        yaw_of(&start.body_pose)
    } else {
        d.y.atan2(d.x)
    }
}

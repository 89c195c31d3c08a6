//! Planner trees of full-body states.

use nalgebra::Point2;

use super::path::{path_length, Segment};
use super::PlannerError;
use crate::robot::FullBodyState;
use crate::spatial::KdTree;

#[derive(Debug, Clone)]
pub struct TreeNode {
    pub state: FullBodyState,
    pub parent: Option<usize>,
    /// Motion from the parent's state to this state; a single state for the root.
    pub segment: Segment,
    /// Body path length from the root.
    pub cost: f64,
    pub children: Vec<usize>,
    segment_length: f64,
}

impl TreeNode {
    pub fn segment_length(&self) -> f64 {
        self.segment_length
    }
}

/// Rooted tree with a kd-index over body positions.
#[derive(Debug, Clone)]
pub struct PlanTree {
    nodes: Vec<TreeNode>,
    index: KdTree<2>,
}

fn key(p: &Point2<f64>) -> [f64; 2] {
    [p.x, p.y]
}

impl PlanTree {
    pub fn new(root: FullBodyState) -> Self {
        let mut index = KdTree::new();
        index.insert(key(&root.xy()), 0);
        Self {
            nodes: vec![TreeNode {
                state: root,
                parent: None,
                segment: Segment::single(root),
                cost: 0.0,
                children: Vec::new(),
                segment_length: 0.0,
            }],
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Adds the end of `segment` as a child of `parent`.
    pub fn add(&mut self, parent: usize, segment: Segment) -> usize {
        let id = self.nodes.len();
        let len = segment.length();
        let state = *segment.end();
        self.nodes.push(TreeNode {
            state,
            parent: Some(parent),
            segment,
            cost: self.nodes[parent].cost + len,
            children: Vec::new(),
            segment_length: len,
        });
        self.nodes[parent].children.push(id);
        self.index.insert(key(&state.xy()), id);
        id
    }

    /// Node closest to `p`; ties go to the smallest id.
    pub fn nearest(&self, p: &Point2<f64>) -> usize {
        self.index.nearest(&key(p)).map(|(id, _)| id).unwrap_or(0)
    }

    /// Up to `k` nodes within `radius` of `p`, nearest first.
    pub fn near(&self, p: &Point2<f64>, k: usize, radius: f64) -> Vec<usize> {
        self.index.k_nearest_within(&key(p), k, radius).into_iter().map(|(id, _)| id).collect()
    }

    pub fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        while let Some(p) = self.nodes[b].parent {
            if p == a {
                return true;
            }
            b = p;
        }
        false
    }

    /// Replaces the edge into `id` by `segment` from `new_parent` and
    /// updates the costs of the whole subtree.
    pub fn reparent(&mut self, id: usize, new_parent: usize, segment: Segment) -> Result<(), PlannerError> {
        if id == 0 || id == new_parent || self.is_ancestor(id, new_parent) {
            return Err(PlannerError::InvalidRewire);
        }
        if segment.end() != &self.nodes[id].state || segment.start() != &self.nodes[new_parent].state {
            return Err(PlannerError::InvalidRewire);
        }
        if let Some(old) = self.nodes[id].parent {
            self.nodes[old].children.retain(|&c| c != id);
        }
        self.nodes[new_parent].children.push(id);
        let len = segment.length();
        let node = &mut self.nodes[id];
        node.parent = Some(new_parent);
        node.segment = segment;
        node.segment_length = len;
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            let parent = self.nodes[n].parent.unwrap();
            self.nodes[n].cost = self.nodes[parent].cost + self.nodes[n].segment_length;
            stack.extend(self.nodes[n].children.iter().copied());
        }
        Ok(())
    }

    /// Node ids from the root to `id`.
    pub fn lineage(&self, id: usize) -> Vec<usize> {
        let mut out = vec![id];
        let mut n = id;
        while let Some(p) = self.nodes[n].parent {
            out.push(p);
            n = p;
        }
        out.reverse();
        out
    }

    /// Motion from the root to `id`, with the index of every node's state.
    pub fn motion_to(&self, id: usize) -> (Segment, Vec<usize>) {
        let mut seg = Segment::single(self.nodes[0].state);
        let mut knots = vec![0];
        for n in self.lineage(id).into_iter().skip(1) {
            seg.extend(&self.nodes[n].segment);
            knots.push(seg.states.len() - 1);
        }
        (seg, knots)
    }

    /// Recomputes every cost from scratch and checks parent links.
    pub fn verify(&self, tol: f64) -> bool {
        let roots = self.nodes.iter().filter(|n| n.parent.is_none()).count();
        if roots != 1 || self.nodes[0].parent.is_some() {
            return false;
        }
        for (id, n) in self.nodes.iter().enumerate() {
            let mut depth = 0;
            let mut cur = id;
            let mut expect = 0.0;
            while let Some(p) = self.nodes[cur].parent {
                expect += path_length(&self.nodes[cur].segment.states);
                depth += 1;
                if depth > self.nodes.len() {
                    return false;
                }
                cur = p;
            }
            if (expect - n.cost).abs() > tol {
                return false;
            }
            if let Some(p) = n.parent {
                if !self.nodes[p].children.contains(&id) {
                    return false;
                }
            }
        }
        true
    }
}

//! Point kd-tree used for nearest-neighbour queries over planner trees and
//! the sampled workspace shells.
//!
//! Ties between equidistant points are always resolved towards the smallest
//! id, which keeps planner runs reproducible.

#[derive(Debug, Clone)]
struct KdNode<const D: usize> {
    point: [f64; D],
    id: usize,
    axis: u8,
    left: u32,
    right: u32,
}

const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Default)]
pub struct KdTree<const D: usize> {
    nodes: Vec<KdNode<D>>,
    root: u32,
}

fn dist2<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

fn better(d: f64, id: usize, best_d: f64, best_id: usize) -> bool {
    d < best_d || (d == best_d && id < best_id)
}

impl<const D: usize> KdTree<D> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            root: NIL,
        }
    }

    /// Builds a balanced tree by recursive median splits.
    pub fn build(points: Vec<([f64; D], usize)>) -> Self {
        let mut tree = Self::new();
        tree.nodes.reserve(points.len());
        let mut items = points;
        tree.root = tree.build_rec(&mut items[..], 0);
        tree
    }

    fn build_rec(&mut self, items: &mut [([f64; D], usize)], depth: usize) -> u32 {
        if items.is_empty() {
            return NIL;
        }
        let axis = depth % D;
        let mid = items.len() / 2;
        items.select_nth_unstable_by(mid, |a, b| a.0[axis].total_cmp(&b.0[axis]).then(a.1.cmp(&b.1)));
        let (point, id) = items[mid];
        let idx = self.nodes.len() as u32;
        self.nodes.push(KdNode {
            point,
            id,
            axis: axis as u8,
            left: NIL,
            right: NIL,
        });
        let (lo, rest) = items.split_at_mut(mid);
        let left = self.build_rec(lo, depth + 1);
        let right = self.build_rec(&mut rest[1..], depth + 1);
        self.nodes[idx as usize].left = left;
        self.nodes[idx as usize].right = right;
        idx
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn insert(&mut self, point: [f64; D], id: usize) {
        let new_idx = self.nodes.len() as u32;
        if self.root == NIL {
            self.nodes.push(KdNode {
                point,
                id,
                axis: 0,
                left: NIL,
                right: NIL,
            });
            self.root = new_idx;
            return;
        }
        let mut cur = self.root;
        loop {
            let node = &self.nodes[cur as usize];
            let axis = node.axis as usize;
            let go_left = point[axis] < node.point[axis];
            let next = if go_left { node.left } else { node.right };
            if next == NIL {
                let child_axis = ((axis + 1) % D) as u8;
                self.nodes.push(KdNode {
                    point,
                    id,
                    axis: child_axis,
                    left: NIL,
                    right: NIL,
                });
                let node = &mut self.nodes[cur as usize];
                if go_left {
                    node.left = new_idx;
                } else {
                    node.right = new_idx;
                }
                return;
            }
            cur = next;
        }
    }

    /// Nearest point as `(id, squared distance)`.
    pub fn nearest(&self, q: &[f64; D]) -> Option<(usize, f64)> {
        if self.root == NIL {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(self.root, q, &mut best);
        Some(best)
    }

    fn nearest_rec(&self, idx: u32, q: &[f64; D], best: &mut (usize, f64)) {
        let node = &self.nodes[idx as usize];
        let d = dist2(&node.point, q);
        if better(d, node.id, best.1, best.0) {
            *best = (node.id, d);
        }
        let axis = node.axis as usize;
        let diff = q[axis] - node.point[axis];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if near != NIL {
            self.nearest_rec(near, q, best);
        }
        if far != NIL && diff * diff <= best.1 {
            self.nearest_rec(far, q, best);
        }
    }

    /// The `k` nearest points within `radius`, sorted by (distance, id).
    pub fn k_nearest_within(&self, q: &[f64; D], k: usize, radius: f64) -> Vec<(usize, f64)> {
        let mut found: Vec<(usize, f64)> = Vec::new();
        if self.root == NIL || k == 0 {
            return found;
        }
        let r2 = radius * radius;
        self.within_rec(self.root, q, r2, &mut found);
        found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        found.truncate(k);
        found
    }

    fn within_rec(&self, idx: u32, q: &[f64; D], r2: f64, out: &mut Vec<(usize, f64)>) {
        let node = &self.nodes[idx as usize];
        let d = dist2(&node.point, q);
        if d <= r2 {
            out.push((node.id, d));
        }
        let axis = node.axis as usize;
        let diff = q[axis] - node.point[axis];
        let (near, far) = if diff < 0.0 {
            (node.left, node.right)
        } else {
            (node.right, node.left)
        };
        if near != NIL {
            self.within_rec(near, q, r2, out);
        }
        if far != NIL && diff * diff <= r2 {
            self.within_rec(far, q, r2, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(points: &[[f64; 2]], q: &[f64; 2]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, p) in points.iter().enumerate() {
            let d = dist2(p, q);
            if better(d, i, best.1, best.0) {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn incremental_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let points: Vec<[f64; 2]> = (0..500).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mut tree = KdTree::<2>::new();
        for (i, p) in points.iter().enumerate() {
            tree.insert(*p, i);
        }
        for _ in 0..200 {
            let q = [rng.random::<f64>(), rng.random::<f64>()];
            assert_eq!(tree.nearest(&q).unwrap(), brute_nearest(&points, &q));
        }
    }

    #[test]
    fn balanced_build_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let points: Vec<[f64; 3]> = (0..2000)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let tree = KdTree::<3>::build(points.iter().enumerate().map(|(i, p)| (*p, i)).collect());
        for _ in 0..200 {
            let q = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let (_, d) = tree.nearest(&q).unwrap();
            let bd = points.iter().map(|p| dist2(p, &q)).fold(f64::INFINITY, f64::min);
            assert_eq!(d, bd);
        }
    }

    #[test]
    fn ties_prefer_smallest_id() {
        let mut tree = KdTree::<2>::new();
        tree.insert([1.0, 0.0], 5);
        tree.insert([-1.0, 0.0], 2);
        tree.insert([0.0, 1.0], 9);
        assert_eq!(tree.nearest(&[0.0, 0.0]).unwrap().0, 2);
        let k = tree.k_nearest_within(&[0.0, 0.0], 2, 1.5);
        assert_eq!(k.iter().map(|x| x.0).collect::<Vec<_>>(), vec![2, 5]);
    }

    #[test]
    fn radius_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let points: Vec<[f64; 2]> = (0..300).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let mut tree = KdTree::<2>::new();
        for (i, p) in points.iter().enumerate() {
            tree.insert(*p, i);
        }
        let q = [0.5, 0.5];
        let got = tree.k_nearest_within(&q, 10, 0.2);
        let mut want: Vec<(usize, f64)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, dist2(p, &q)))
            .filter(|(_, d)| *d <= 0.04)
            .collect();
        want.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        want.truncate(10);
        assert_eq!(got, want);
    }
}

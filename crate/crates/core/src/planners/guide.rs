//! Coarse-grid A* guide for GuidedRRT.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Point2, Vector2};

use super::PlannerError;
use crate::local_planner::StepParams;
use crate::robot::RobotModel;
use crate::terrain::ElevationMap;

/// Traversal penalty per radian of coarse-cell slope.
pub const GUIDE_SLOPE_WEIGHT: f64 = 5.0;
/// Traversal penalty per square meter of coarse-cell height variance.
pub const GUIDE_VARIANCE_WEIGHT: f64 = 100.0;
/// Default coarse cell size, meters.
pub const COARSE_RESOLUTION: f64 = 0.1;

/// Reduced-resolution traversability grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrid {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    /// World position of the center of cell (0, 0).
    pub origin: Point2<f64>,
    pub blocked: Vec<bool>,
    pub penalty: Vec<f64>,
}

impl CoarseGrid {
    pub fn open(width: usize, height: usize, resolution: f64, origin: Point2<f64>) -> Self {
        Self {
            width,
            height,
            resolution,
            origin,
            blocked: vec![false; width * height],
            penalty: vec![0.0; width * height],
        }
    }

    /// Coarse grid of `map` for `model`. A cell is blocked when its height
    /// differs from a neighbor's by more than the climb limit, when the
    /// body there would put feet off the map, or when it lies within the
    /// body footprint (less one cell) of a blocked step.
    pub fn from_map(map: &ElevationMap, model: &RobotModel, resolution: f64) -> Self {
        let (lo, hi) = map.extent();
        let width = ((hi.x - lo.x) / resolution + 1e-9).floor() as usize + 1;
        let height = ((hi.y - lo.y) / resolution + 1e-9).floor() as usize + 1;
        let mut g = Self::open(width, height, resolution, lo);
        let half = Vector2::new(resolution / 2.0, resolution / 2.0);
        let mut top = vec![0.0; width * height];
        for j in 0..height {
            for i in 0..width {
                let c = g.center(i, j);
                top[j * width + i] = map.max_height_in(&(c - half), &(c + half));
                g.penalty[j * width + i] = match map.roughness_at(&c, resolution) {
                    Ok(r) => GUIDE_SLOPE_WEIGHT * r.slope + GUIDE_VARIANCE_WEIGHT * r.height_variance,
                    Err(_) => 0.0,
                };
            }
        }
        let mut steps = Vec::new();
        for j in 0..height {
            for i in 0..width {
                let h = top[j * width + i];
                let cliff = g.neighbors(i, j).any(|(ni, nj, _)| (top[nj * width + ni] - h).abs() > model.climb_limit);
                if cliff {
                    steps.push((i, j));
                }
            }
        }
        let edge = model.footprint_radius() + StepParams::for_model(model).foothold_window;
        let inflate = (model.footprint_radius() - resolution).max(0.0);
        let reach = (inflate / resolution).ceil() as isize;
        for j in 0..height {
            for i in 0..width {
                let c = g.center(i, j);
                if c.x - edge < lo.x || c.x + edge > hi.x || c.y - edge < lo.y || c.y + edge > hi.y {
                    g.blocked[j * width + i] = true;
                }
            }
        }
        for &(si, sj) in &steps {
            for dj in -reach..=reach {
                for di in -reach..=reach {
                    let (ni, nj) = (si as isize + di, sj as isize + dj);
                    if ni < 0 || nj < 0 || ni >= width as isize || nj >= height as isize {
                        continue;
                    }
                    if ((di * di + dj * dj) as f64).sqrt() * resolution <= inflate + 1e-9 {
                        g.blocked[nj as usize * width + ni as usize] = true;
                    }
                }
            }
        }
        g
    }

    pub fn center(&self, i: usize, j: usize) -> Point2<f64> {
        Point2::new(self.origin.x + i as f64 * self.resolution, self.origin.y + j as f64 * self.resolution)
    }

    pub fn cell_of(&self, p: &Point2<f64>) -> Option<(usize, usize)> {
        let i = ((p.x - self.origin.x) / self.resolution).round();
        let j = ((p.y - self.origin.y) / self.resolution).round();
        (i >= 0.0 && j >= 0.0 && (i as usize) < self.width && (j as usize) < self.height).then(|| (i as usize, j as usize))
    }

    pub fn is_blocked(&self, i: usize, j: usize) -> bool {
        self.blocked[j * self.width + i]
    }

    /// Area of the unblocked cells, square meters.
    pub fn free_area(&self) -> f64 {
        self.blocked.iter().filter(|b| !**b).count() as f64 * self.resolution * self.resolution
    }

    /// In-grid 8-neighbors with the step length in cells (1 or sqrt 2).
    pub fn neighbors(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        const D: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
        D.iter().filter_map(move |&(di, dj)| {
            let (ni, nj) = (i as isize + di, j as isize + dj);
            (ni >= 0 && nj >= 0 && (ni as usize) < self.width && (nj as usize) < self.height).then(|| {
                let len = if di != 0 && dj != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                (ni as usize, nj as usize, len)
            })
        })
    }

    /// Moves allowed by the search: into unblocked cells (or `goal`), with
    /// diagonal moves refused when either side cell is blocked.
    pub fn moves(&self, i: usize, j: usize, goal: (usize, usize)) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.neighbors(i, j).filter_map(move |(ni, nj, len)| {
            let open = |a: usize, b: usize| !self.is_blocked(a, b) || (a, b) == goal;
            if !open(ni, nj) {
                return None;
            }
            if ni != i && nj != j && (!open(ni, j) || !open(i, nj)) {
                return None;
            }
            Some((ni, nj, len * self.resolution * (1.0 + self.penalty[nj * self.width + ni])))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuidePath {
    pub waypoints: Vec<Point2<f64>>,
    pub cells: Vec<(usize, usize)>,
    pub total_cost: f64,
}

#[derive(PartialEq)]
struct Open {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest 8-connected path between two cells with the Euclidean
/// distance as heuristic. The start cell may be blocked.
pub fn astar_grid(grid: &CoarseGrid, start: (usize, usize), goal: (usize, usize)) -> Result<GuidePath, PlannerError> {
    let w = grid.width;
    let n = w * grid.height;
    let idx = |c: (usize, usize)| c.1 * w + c.0;
    let h = |k: usize| (grid.center(k % w, k / w) - grid.center(goal.0, goal.1)).norm();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[idx(start)] = 0.0;
    open.push(Open { f: h(idx(start)), g: 0.0, idx: idx(start) });
    while let Some(Open { g: gk, idx: k, .. }) = open.pop() {
        if closed[k] || gk > g[k] {
            continue;
        }
        closed[k] = true;
        if k == idx(goal) {
            let mut cells = vec![goal];
            let mut c = k;
            while parent[c] != usize::MAX {
                c = parent[c];
                cells.push((c % w, c / w));
            }
            cells.reverse();
            return Ok(GuidePath {
                waypoints: cells.iter().map(|&(i, j)| grid.center(i, j)).collect(),
                cells,
                total_cost: gk,
            });
        }
        for (ni, nj, cost) in grid.moves(k % w, k / w, goal) {
            let m = nj * w + ni;
            let cand = gk + cost;
            if cand < g[m] {
                g[m] = cand;
                parent[m] = k;
                open.push(Open { f: cand + h(m), g: cand, idx: m });
            }
        }
    }
    Err(PlannerError::NoPath)
}

/// A* guide on the coarse grid of `map` between two world points.
pub fn astar_guide(
    map: &ElevationMap,
    model: &RobotModel,
    start: &Point2<f64>,
    goal: &Point2<f64>,
    coarse_res: f64,
) -> Result<GuidePath, PlannerError> {
    let grid = CoarseGrid::from_map(map, model, coarse_res);
    guide_on(&grid, start, goal)
}

pub fn guide_on(grid: &CoarseGrid, start: &Point2<f64>, goal: &Point2<f64>) -> Result<GuidePath, PlannerError> {
    let s = grid.cell_of(start).ok_or(PlannerError::NoPath)?;
    let g = grid.cell_of(goal).ok_or(PlannerError::NoPath)?;
    astar_grid(grid, s, g)
}

/// Arc-length view of a guide polyline.
#[derive(Debug, Clone)]
pub struct GuideCurve {
    points: Vec<Point2<f64>>,
    cumulative: Vec<f64>,
}

impl GuideCurve {
    /// Polyline `start`, the interior waypoints, then `goal`, so the curve
    /// begins and ends at the exact world points rather than cell centers.
    pub fn new(start: &Point2<f64>, guide: &GuidePath, goal: &Point2<f64>) -> Self {
        let mut points = vec![*start];
        let k = guide.waypoints.len();
        if k > 2 {
            points.extend_from_slice(&guide.waypoints[1..k - 1]);
        }
        points.push(*goal);
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            cumulative.push(cumulative.last().unwrap() + (w[1] - w[0]).norm());
        }
        Self { points, cumulative }
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn point_at(&self, s: f64) -> Point2<f64> {
        let s = s.clamp(0.0, self.length());
        let k = self.segment_of(s);
        let len = self.cumulative[k + 1] - self.cumulative[k];
        if len <= 0.0 {
            return self.points[k];
        }
        let t = (s - self.cumulative[k]) / len;
        self.points[k] + (self.points[k + 1] - self.points[k]) * t
    }

    /// Unit direction of travel at arc length `s`.
    pub fn tangent_at(&self, s: f64) -> Vector2<f64> {
        let s = s.clamp(0.0, self.length());
        let mut k = self.segment_of(s);
        while k + 1 < self.points.len() {
            let d = self.points[k + 1] - self.points[k];
            if d.norm() > 0.0 {
                return d.normalize();
            }
            k += 1;
        }
        Vector2::new(1.0, 0.0)
    }

    /// Arc length of the point of the curve closest to `p`.
    pub fn project(&self, p: &Point2<f64>) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..self.points.len() - 1 {
            let a = self.points[k];
            let ab = self.points[k + 1] - a;
            let len2 = ab.norm_squared();
            let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
            let d = (p - (a + ab * t)).norm();
            if d < best.0 {
                best = (d, self.cumulative[k] + t * len2.sqrt());
            }
        }
        best.1
    }

    fn segment_of(&self, s: f64) -> usize {
        let n = self.points.len();
        if n < 2 {
            return 0;
        }
        match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        }
    }
}

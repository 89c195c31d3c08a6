//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Point2, Point3, Vector2};
use walkplan::constraints::{check_segment, check_state, SEGMENT_STEP};
use walkplan::geometry::{pose_from_xyz_rpy, Pose};
use walkplan::local_planner::foothold::foothold_cost;
use walkplan::local_planner::posture::PostureGrid;
use walkplan::planners::guide::CoarseGrid;
use walkplan::planners::FullBodyPath;
use walkplan::robot::{FullBodyState, RobotModel, MAX_LEGS};
use walkplan::terrain::ElevationMap;

/// Upper 0.001 quantile of the chi-square distribution with 15 degrees of
/// freedom.
pub const CHI2_15_P001: f64 = 37.697;

/// Plain Dijkstra over the coarse grid with a linear-scan frontier. Moves
/// go to the 8 neighbors; a cell may be entered when it is free or is the
/// goal, and a diagonal needs both orthogonal cells enterable.
pub fn dijkstra(grid: &CoarseGrid, start: (usize, usize), goal: (usize, usize)) -> Option<f64> {
    let (w, h) = (grid.width as i64, grid.height as i64);
    let enterable = |i: i64, j: i64| {
        i >= 0 && j >= 0 && i < w && j < h && (!grid.blocked[(j * w + i) as usize] || (i as usize, j as usize) == goal)
    };
    let mut dist = vec![f64::INFINITY; (w * h) as usize];
    let mut done = vec![false; (w * h) as usize];
    dist[start.1 * grid.width + start.0] = 0.0;
    loop {
        let mut best = None;
        for k in 0..dist.len() {
            if !done[k] && dist[k].is_finite() && best.is_none_or(|b: usize| dist[k] < dist[b]) {
                best = Some(k);
            }
        }
        let k = best?;
        done[k] = true;
        let (i, j) = ((k as i64) % w, (k as i64) / w);
        if (i as usize, j as usize) == goal {
            return Some(dist[k]);
        }
        for di in -1..=1 {
            for dj in -1..=1 {
                if (di, dj) == (0, 0) || !enterable(i + di, j + dj) {
                    continue;
                }
                if di != 0 && dj != 0 && !(enterable(i + di, j) && enterable(i, j + dj)) {
                    continue;
                }
                let m = ((j + dj) * w + i + di) as usize;
                let step = ((di * di + dj * dj) as f64).sqrt() * grid.resolution * (1.0 + grid.penalty[m]);
                if dist[k] + step < dist[m] {
                    dist[m] = dist[k] + step;
                }
            }
        }
    }
}

/// Chi-square statistic of `samples` against the uniform distribution on
/// the ellipse with foci `s`, `g` and major axis `c`. The ellipse is mapped
/// back to the unit disc, which is cut into 4 rings of equal area times 4
/// quadrants.
pub fn ellipse_chi2(samples: &[Point2<f64>], s: &Point2<f64>, g: &Point2<f64>, c: f64) -> f64 {
    let c_min = (g - s).norm();
    let a = c / 2.0;
    let b = (c * c - c_min * c_min).sqrt() / 2.0;
    let centre = Point2::from((s.coords + g.coords) / 2.0);
    let ux = (g - s) / c_min;
    let uy = Vector2::new(-ux.y, ux.x);
    let mut counts = [0usize; 16];
    for p in samples {
        let d = p - centre;
        let (x, y) = (d.dot(&ux) / a, d.dot(&uy) / b);
        let r2 = (x * x + y * y).min(1.0 - 1e-15);
        let ring = (r2 * 4.0).floor() as usize;
        let theta = y.atan2(x).rem_euclid(2.0 * PI);
        let sector = ((theta / (PI / 2.0)).floor() as usize).min(3);
        counts[ring * 4 + sector] += 1;
    }
    let expect = samples.len() as f64 / 16.0;
    counts.iter().map(|&n| (n as f64 - expect).powi(2) / expect).sum()
}

/// Re-validates every state and every consecutive pair of a path.
pub fn validate_path(model: &RobotModel, map: &ElevationMap, path: &FullBodyPath) -> Result<(), String> {
    for (i, s) in path.states.iter().enumerate() {
        let r = check_state(model, map, s).map_err(|e| format!("state {i}: {e}"))?;
        if !r.is_valid() {
            return Err(format!("state {i} invalid: {:?}", r.failure()));
        }
    }
    for (i, w) in path.states.windows(2).enumerate() {
        let r = check_segment(model, map, &w[0], &w[1], SEGMENT_STEP).map_err(|e| format!("pair {i}: {e}"))?;
        if !r.valid {
            return Err(format!("pair {i} invalid"));
        }
    }
    Ok(())
}

pub fn world_feet(m: &RobotModel, map: &ElevationMap, xy: &Point2<f64>, yaw: f64, jitter: &[Vector2<f64>]) -> [Point3<f64>; MAX_LEGS] {
    let (s, c) = yaw.sin_cos();
    let mut feet = [Point3::origin(); MAX_LEGS];
    for leg in 0..m.leg_count {
        let n = m.nominal_stance[leg];
        let p = Point2::new(xy.x + c * n.x - s * n.y, xy.y + s * n.x + c * n.y) + jitter[leg];
        feet[leg] = Point3::new(p.x, p.y, map.height_at(&p).unwrap());
    }
    feet
}


/// Scans every grid candidate in canonical order, keeping the first strict
/// maximum of the objective among valid states.
pub fn posture_oracle(m: &RobotModel, map: &ElevationMap, feet: &[Point3<f64>], xy: &Point2<f64>, yaw: f64) -> Option<Pose> {
    let grid = PostureGrid::for_model(m);
    let ground = map.height_at(xy).unwrap();
    let mut stance = [false; MAX_LEGS];
    stance[..m.leg_count].fill(true);
    let mut best: Option<(f64, Pose)> = None;
    for &h in &grid.heights {
        for &roll in &grid.tilts {
            for &pitch in &grid.tilts {
                let pose = pose_from_xyz_rpy(xy.x, xy.y, ground + h, roll, pitch, yaw);
                let Ok(state) = FullBodyState::from_feet(m, pose, feet, stance) else {
                    continue;
                };
                let r = check_state(m, map, &state).unwrap();
                if !r.is_valid() {
                    continue;
                }
                let v = r.kinematic_margin + h;
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, pose));
                }
            }
        }
    }
    best.map(|b| b.1)
}


/// Exhaustive scan of the window cells with the documented tie order.
pub fn foothold_oracle(map: &ElevationMap, nominal: &Point2<f64>, window: f64) -> Point3<f64> {
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for j in 0..map.height() {
        for i in 0..map.width() {
            let c = map.cell_center(i, j);
            if (c.x - nominal.x).abs() > window + 1e-9 || (c.y - nominal.y).abs() > window + 1e-9 {
                continue;
            }
            let cost = foothold_cost(map, &c).unwrap();
            let d2 = (c - nominal).norm_squared();
            let key = (cost, d2, c.x, c.y);
            if best.is_none_or(|b| key.partial_cmp(&b) == Some(std::cmp::Ordering::Less)) {
                best = Some(key);
            }
        }
    }
    let b = best.unwrap();
    Point3::new(b.2, b.3, map.height_at(&Point2::new(b.2, b.3)).unwrap())
}

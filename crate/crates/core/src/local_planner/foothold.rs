//! Foothold selection by terrain roughness.

use std::cell::Cell;

use nalgebra::{Point2, Point3};

use super::LocalPlanError;
use crate::metering::{charge, Work};
use crate::terrain::{ElevationMap, TerrainError};

/// Cost per radian of local slope.
pub const SLOPE_WEIGHT: f64 = 1.0;
/// Cost per square meter of height variance.
pub const VARIANCE_WEIGHT: f64 = 50.0;
/// Radius of the roughness disc, in cells.
pub const ROUGHNESS_RADIUS_CELLS: f64 = 3.0;

/// Foothold cost of the cell nearest to `p`.
pub fn foothold_cost(map: &ElevationMap, p: &Point2<f64>) -> Result<f64, TerrainError> {
    let r = map.roughness_at(p, ROUGHNESS_RADIUS_CELLS * map.resolution())?;
    Ok(SLOPE_WEIGHT * r.slope + VARIANCE_WEIGHT * r.height_variance)
}

/// Lazily filled per-cell foothold costs for one map.
pub struct FootholdCosts<'a> {
    map: &'a ElevationMap,
    cells: Vec<Cell<f64>>,
}

impl<'a> FootholdCosts<'a> {
    pub fn new(map: &'a ElevationMap) -> Self {
        Self {
            map,
            cells: (0..map.width() * map.height()).map(|_| Cell::new(f64::NAN)).collect(),
        }
    }

    /// Cost of cell `(i, j)`; infinite where the roughness disc leaves the map.
    pub fn cell_cost(&self, i: usize, j: usize) -> f64 {
        let c = &self.cells[j * self.map.width() + i];
        let v = c.get();
        if !v.is_nan() {
            return v;
        }
        charge(Work::FootholdCandidate, 1);
        let v = foothold_cost(self.map, &self.map.cell_center(i, j)).unwrap_or(f64::INFINITY);
        c.set(v);
        v
    }

    pub fn select(&self, nominal: &Point2<f64>, window: f64) -> Result<Point3<f64>, LocalPlanError> {
        select_with(self.map, nominal, window, |i, j| self.cell_cost(i, j))
    }
}

/// Cell center (with its terrain height) minimizing the foothold cost over
/// the square window of half-width `window` around `nominal`. Ties go to
/// the cell closest to `nominal`, then to the smallest `(x, y)`.
pub fn select_foothold(map: &ElevationMap, nominal: &Point2<f64>, window: f64) -> Result<Point3<f64>, LocalPlanError> {
    select_with(map, nominal, window, |i, j| {
        charge(Work::FootholdCandidate, 1);
        foothold_cost(map, &map.cell_center(i, j)).unwrap_or(f64::INFINITY)
    })
}

fn select_with(
    map: &ElevationMap,
    nominal: &Point2<f64>,
    window: f64,
    cost: impl Fn(usize, usize) -> f64,
) -> Result<Point3<f64>, LocalPlanError> {
    let lo = Point2::new(nominal.x - window, nominal.y - window);
    let hi = Point2::new(nominal.x + window, nominal.y + window);
    if !map.contains(&lo) || !map.contains(&hi) {
        return Err(TerrainError::OutOfBounds { x: nominal.x, y: nominal.y }.into());
    }
    let r = map.resolution();
    let o = map.origin();
    let i0 = ((lo.x - o.x) / r - 1e-9).ceil().max(0.0) as usize;
    let i1 = (((hi.x - o.x) / r + 1e-9).floor() as usize).min(map.width() - 1);
    let j0 = ((lo.y - o.y) / r - 1e-9).ceil().max(0.0) as usize;
    let j1 = (((hi.y - o.y) / r + 1e-9).floor() as usize).min(map.height() - 1);
    let mut best: Option<(f64, f64, f64, f64, usize, usize)> = None;
    for i in i0..=i1 {
        for j in j0..=j1 {
            let c = map.cell_center(i, j);
            let k = cost(i, j);
            if !k.is_finite() {
                continue;
            }
            let d = (c - nominal).norm_squared();
            let cand = (k, d, c.x, c.y, i, j);
            let better = match &best {
                None => true,
                Some(b) => (cand.0, cand.1, cand.2, cand.3) < (b.0, b.1, b.2, b.3),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    let (_, _, x, y, i, j) = best.ok_or(LocalPlanError::NoFoothold)?;
    Ok(Point3::new(x, y, map.cell(i, j)))
}

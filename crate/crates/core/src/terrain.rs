//! Elevation maps: the planning world.
//!
//! A map is a regular grid of terrain heights. Cell `(i, j)` (column `i`,
//! row `j`) has its center at `origin + (i, j) * resolution`, and the
//! queryable extent is the rectangle spanned by the outermost cell centers.

use std::fmt::Write as _;

use nalgebra::{Matrix3, Point2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TerrainError {
    #[error("point ({x:.4}, {y:.4}) lies outside the map extent")]
    OutOfBounds { x: f64, y: f64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElevationMap {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Point2<f64>,
    heights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Roughness {
    /// Inclination of the least-squares plane, radians.
    pub slope: f64,
    /// Mean squared residual about that plane, m^2.
    pub height_variance: f64,
}

impl ElevationMap {
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        origin: Point2<f64>,
        heights: Vec<f64>,
    ) -> Result<Self, TerrainError> {
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(TerrainError::InvalidMap(format!("resolution must be positive, got {resolution}")));
        }
        if width < 2 || height < 2 {
            return Err(TerrainError::InvalidMap(format!("map must be at least 2x2 cells, got {width}x{height}")));
        }
        if !origin.x.is_finite() || !origin.y.is_finite() {
            return Err(TerrainError::InvalidMap("origin must be finite".into()));
        }
        if heights.len() != width * height {
            return Err(TerrainError::InvalidMap(format!(
                "expected {} heights, got {}",
                width * height,
                heights.len()
            )));
        }
        if let Some(bad) = heights.iter().position(|h| !h.is_finite()) {
            return Err(TerrainError::InvalidMap(format!("height #{bad} is not finite")));
        }
        Ok(Self {
            width,
            height,
            resolution,
            origin,
            heights,
        })
    }

    pub fn flat(width: usize, height: usize, resolution: f64, origin: Point2<f64>) -> Result<Self, TerrainError> {
        Self::new(width, height, resolution, origin, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Point2<f64> {
        self.origin
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn cell(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.width + i]
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Point2<f64> {
        Point2::new(
            self.origin.x + i as f64 * self.resolution,
            self.origin.y + j as f64 * self.resolution,
        )
    }

    /// `(min corner, max corner)` of the queryable area.
    pub fn extent(&self) -> (Point2<f64>, Point2<f64>) {
        (self.origin, self.cell_center(self.width - 1, self.height - 1))
    }

    pub fn contains(&self, p: &Point2<f64>) -> bool {
        let (lo, hi) = self.extent();
        p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y
    }

    /// Index of the cell whose center is nearest to `p`.
    pub fn nearest_cell(&self, p: &Point2<f64>) -> Result<(usize, usize), TerrainError> {
        if !self.contains(p) {
            return Err(TerrainError::OutOfBounds { x: p.x, y: p.y });
        }
        let fx = ((p.x - self.origin.x) / self.resolution).round();
        let fy = ((p.y - self.origin.y) / self.resolution).round();
        Ok((
            (fx.max(0.0) as usize).min(self.width - 1),
            (fy.max(0.0) as usize).min(self.height - 1),
        ))
    }

    /// Bilinear interpolation of the four surrounding cell heights.
    pub fn height_at(&self, p: &Point2<f64>) -> Result<f64, TerrainError> {
        if !self.contains(p) {
            return Err(TerrainError::OutOfBounds { x: p.x, y: p.y });
        }
        let fx = (p.x - self.origin.x) / self.resolution;
        let fy = (p.y - self.origin.y) / self.resolution;
        let i0 = (fx.floor() as usize).min(self.width - 2);
        let j0 = (fy.floor() as usize).min(self.height - 2);
        let tx = (fx - i0 as f64).clamp(0.0, 1.0);
        let ty = (fy - j0 as f64).clamp(0.0, 1.0);
        let h00 = self.cell(i0, j0);
        let h10 = self.cell(i0 + 1, j0);
        let h01 = self.cell(i0, j0 + 1);
        let h11 = self.cell(i0 + 1, j0 + 1);
        // Collapse to the stored value at cell centers.
        if tx == 0.0 && ty == 0.0 {
            return Ok(h00);
        }
        Ok((1.0 - ty) * ((1.0 - tx) * h00 + tx * h10) + ty * ((1.0 - tx) * h01 + tx * h11))
    }

    /// Cells whose centers lie within `radius` of `p`.
    pub fn cells_in_disc(&self, p: &Point2<f64>, radius: f64) -> Result<Vec<(usize, usize)>, TerrainError> {
        let (lo, hi) = self.extent();
        if p.x - radius < lo.x - 1e-9 || p.x + radius > hi.x + 1e-9 || p.y - radius < lo.y - 1e-9 || p.y + radius > hi.y + 1e-9
        {
            return Err(TerrainError::OutOfBounds { x: p.x, y: p.y });
        }
        let r = self.resolution;
        let i_lo = (((p.x - radius - self.origin.x) / r).ceil().max(0.0)) as usize;
        let i_hi = ((((p.x + radius - self.origin.x) / r).floor()) as usize).min(self.width - 1);
        let j_lo = (((p.y - radius - self.origin.y) / r).ceil().max(0.0)) as usize;
        let j_hi = ((((p.y + radius - self.origin.y) / r).floor()) as usize).min(self.height - 1);
        let r2 = radius * radius + 1e-12;
        let mut out = Vec::new();
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                let c = self.cell_center(i, j);
                if (c - p).norm_squared() <= r2 {
                    out.push((i, j));
                }
            }
        }
        Ok(out)
    }

    /// Slope and height variance of the least-squares plane over the disc.
    pub fn roughness_at(&self, p: &Point2<f64>, radius: f64) -> Result<Roughness, TerrainError> {
        let cells = self.cells_in_disc(p, radius)?;
        if cells.is_empty() {
            let (i, j) = self.nearest_cell(p)?;
            return Ok(fit_plane(&[(self.cell_center(i, j), self.cell(i, j))]));
        }
        let samples: Vec<(Point2<f64>, f64)> = cells
            .iter()
            .map(|&(i, j)| (self.cell_center(i, j), self.cell(i, j)))
            .collect();
        Ok(fit_plane(&samples))
    }

    /// Highest stored height among cells in the rectangle `[lo, hi]`.
    pub fn max_height_in(&self, lo: &Point2<f64>, hi: &Point2<f64>) -> f64 {
        let r = self.resolution;
        let i_lo = (((lo.x - self.origin.x) / r).floor().max(0.0)) as usize;
        let j_lo = (((lo.y - self.origin.y) / r).floor().max(0.0)) as usize;
        let i_hi = ((((hi.x - self.origin.x) / r).ceil().max(0.0)) as usize).min(self.width - 1);
        let j_hi = ((((hi.y - self.origin.y) / r).ceil().max(0.0)) as usize).min(self.height - 1);
        let mut m = f64::NEG_INFINITY;
        for j in j_lo..=j_hi {
            for i in i_lo..=i_hi {
                m = m.max(self.cell(i, j));
            }
        }
        m
    }
}

/// Least-squares plane `z = a x + b y + c` through the samples.
pub fn fit_plane(samples: &[(Point2<f64>, f64)]) -> Roughness {
    let n = samples.len() as f64;
    if samples.len() < 3 {
        let mean = samples.iter().map(|s| s.1).sum::<f64>() / n.max(1.0);
        let var = samples.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / n.max(1.0);
        return Roughness {
            slope: 0.0,
            height_variance: var,
        };
    }
    let cx = samples.iter().map(|s| s.0.x).sum::<f64>() / n;
    let cy = samples.iter().map(|s| s.0.y).sum::<f64>() / n;
    let cz = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let mut m = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (p, z) in samples {
        let v = Vector3::new(p.x - cx, p.y - cy, 1.0);
        m += v * v.transpose();
        rhs += v * (z - cz);
    }
    let (a, b, c) = match m.try_inverse() {
        Some(inv) => {
            let sol = inv * rhs;
            (sol.x, sol.y, sol.z)
        }
        None => (0.0, 0.0, 0.0),
    };
    let mut var = 0.0;
    for (p, z) in samples {
        let pred = a * (p.x - cx) + b * (p.y - cy) + c;
        var += (z - cz - pred).powi(2);
    }
    Roughness {
        slope: (a * a + b * b).sqrt().atan(),
        height_variance: var / n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Flat,
    Rough,
    Box,
    BugTrap,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 4] = [ScenarioKind::Flat, ScenarioKind::Rough, ScenarioKind::Box, ScenarioKind::BugTrap];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Flat => "flat",
            ScenarioKind::Rough => "rough",
            ScenarioKind::Box => "box",
            ScenarioKind::BugTrap => "bugtrap",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "flat" => Ok(ScenarioKind::Flat),
            "rough" => Ok(ScenarioKind::Rough),
            "box" => Ok(ScenarioKind::Box),
            "bugtrap" | "bug_trap" => Ok(ScenarioKind::BugTrap),
            other => Err(format!("unknown scenario '{other}'")),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Wall thickness and interior size of the bug-trap enclosure, meters.
pub const TRAP_WALL_THICKNESS: f64 = 0.1;
pub const TRAP_INTERIOR: f64 = 2.0;
/// Side of the square box obstacle, meters.
pub const BOX_SIDE: f64 = 1.0;
/// Peak height of the rough-terrain scenario, meters.
pub const ROUGH_PEAK: f64 = 0.35;
/// Distance of the default start and goal from the map border, meters.
const START_GOAL_MARGIN: f64 = 0.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub seed: u64,
    /// Side of the square map, meters.
    pub extent: f64,
    pub resolution: f64,
    /// Opening of the bug trap, meters.
    pub entrance_width: f64,
    pub obstacle_height: f64,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            extent: 6.0,
            resolution: 0.02,
            entrance_width: 1.2,
            obstacle_height: 0.5,
        }
    }

    pub fn with_entrance_width(mut self, w: f64) -> Self {
        self.entrance_width = w;
        self
    }

    /// Default start: on the x axis, 0.7 m from the western border.
    pub fn default_start(&self) -> Point2<f64> {
        Point2::new(-self.extent / 2.0 + START_GOAL_MARGIN, 0.0)
    }

    pub fn default_goal(&self) -> Point2<f64> {
        Point2::new(self.extent / 2.0 - START_GOAL_MARGIN, 0.0)
    }

    pub fn validate(&self) -> Result<(), TerrainError> {
        if !(self.extent > 0.0) || !(self.resolution > 0.0) || !(self.obstacle_height > 0.0) {
            return Err(TerrainError::InvalidSpec("extent, resolution and obstacle height must be positive".into()));
        }
        if self.extent < 2.0 * START_GOAL_MARGIN + 1.0 {
            return Err(TerrainError::InvalidSpec(format!("extent {} m is too small", self.extent)));
        }
        if self.kind == ScenarioKind::BugTrap {
            if !(self.entrance_width > 0.0) {
                return Err(TerrainError::InvalidSpec("entrance_width must be positive".into()));
            }
            if self.entrance_width > TRAP_INTERIOR {
                return Err(TerrainError::InvalidSpec("entrance wider than the trap".into()));
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    fn contains(&self, p: &Point2<f64>) -> bool {
        const TOL: f64 = 1e-9;
        p.x >= self.x0 - TOL && p.x <= self.x1 + TOL && p.y >= self.y0 - TOL && p.y <= self.y1 + TOL
    }
}

/// Wall rectangles of the bug trap for a spec. The opening faces north
/// (+y), so the straight line from start to goal runs into the east wall.
pub fn bug_trap_walls(spec: &ScenarioSpec) -> Vec<Rect> {
    let start = spec.default_start();
    let t = TRAP_WALL_THICKNESS;
    let ix0 = start.x - 0.6;
    let ix1 = ix0 + TRAP_INTERIOR;
    let iy0 = -TRAP_INTERIOR / 2.0;
    let iy1 = TRAP_INTERIOR / 2.0;
    let origin = -spec.extent / 2.0;
    // Snap the opening faces to cell centers so the opening is exact.
    let center = 0.5 * (ix0 + ix1);
    let lo = origin + ((center - spec.entrance_width / 2.0 - origin) / spec.resolution).round() * spec.resolution;
    let hi = lo + spec.entrance_width;
    vec![
        Rect { x0: ix0 - t, y0: iy0 - t, x1: ix0, y1: iy1 + t },
        Rect { x0: ix1, y0: iy0 - t, x1: ix1 + t, y1: iy1 + t },
        Rect { x0: ix0 - t, y0: iy0 - t, x1: ix1 + t, y1: iy0 },
        Rect { x0: ix0 - t, y0: iy1, x1: lo, y1: iy1 + t },
        Rect { x0: hi, y0: iy1, x1: ix1 + t, y1: iy1 + t },
    ]
}

pub fn box_obstacle() -> Rect {
    let h = BOX_SIDE / 2.0;
    Rect { x0: -h, y0: -h, x1: h, y1: h }
}

/// Builds the elevation map of a benchmark scenario. Pure in `spec`.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<ElevationMap, TerrainError> {
    spec.validate()?;
    let n = (spec.extent / spec.resolution).round() as usize + 1;
    let origin = Point2::new(-spec.extent / 2.0, -spec.extent / 2.0);
    let mut map = ElevationMap::flat(n, n, spec.resolution, origin)?;
    match spec.kind {
        ScenarioKind::Flat => {}
        ScenarioKind::Box => raise_rects(&mut map, &[box_obstacle()], spec.obstacle_height),
        ScenarioKind::BugTrap => raise_rects(&mut map, &bug_trap_walls(spec), spec.obstacle_height),
        ScenarioKind::Rough => {
            let noise = value_noise(spec.seed, n, spec.resolution);
            let lo = noise.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = noise.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let scale = if hi > lo { ROUGH_PEAK / (hi - lo) } else { 0.0 };
            map.heights = noise.iter().map(|v| (v - lo) * scale).collect();
        }
    }
    Ok(map)
}

fn raise_rects(map: &mut ElevationMap, rects: &[Rect], h: f64) {
    for j in 0..map.height {
        for i in 0..map.width {
            let c = map.cell_center(i, j);
            if rects.iter().any(|r| r.contains(&c)) {
                map.heights[j * map.width + i] = h;
            }
        }
    }
}

/// Lattice spacing of the first noise octave, meters.
const NOISE_BASE_WAVELENGTH: f64 = 2.0;
const NOISE_OCTAVES: usize = 3;
const NOISE_LACUNARITY: f64 = 2.0;
const NOISE_PERSISTENCE: f64 = 0.5;

/// Multi-octave value noise on an `n x n` grid, row-major.
fn value_noise(seed: u64, n: usize, resolution: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = (n - 1) as f64 * resolution;
    let mut out = vec![0.0; n * n];
    let mut wavelength = NOISE_BASE_WAVELENGTH;
    let mut amplitude = 1.0;
    for _ in 0..NOISE_OCTAVES {
        let cells = (side / wavelength).ceil() as usize + 2;
        let lattice: Vec<f64> = (0..cells * cells).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        for j in 0..n {
            for i in 0..n {
                let x = i as f64 * resolution / wavelength;
                let y = j as f64 * resolution / wavelength;
                let (xi, yi) = (x.floor() as usize, y.floor() as usize);
                let (tx, ty) = (smoothstep(x - xi as f64), smoothstep(y - yi as f64));
                let v00 = lattice[yi * cells + xi];
                let v10 = lattice[yi * cells + xi + 1];
                let v01 = lattice[(yi + 1) * cells + xi];
                let v11 = lattice[(yi + 1) * cells + xi + 1];
                let v = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
                out[j * n + i] += amplitude * v;
            }
        }
        wavelength /= NOISE_LACUNARITY;
        amplitude *= NOISE_PERSISTENCE;
    }
    out
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

const MAP_MAGIC: &str = "ELEVMAP 1";

/// Text serialization; heights are written in shortest round-trip form.
pub fn save_map(map: &ElevationMap) -> String {
    let mut s = String::with_capacity(map.heights.len() * 8 + 64);
    s.push_str(MAP_MAGIC);
    s.push('\n');
    let _ = writeln!(
        s,
        "width {} height {} resolution {} origin {} {}",
        map.width, map.height, map.resolution, map.origin.x, map.origin.y
    );
    for j in 0..map.height {
        let row = &map.heights[j * map.width..(j + 1) * map.width];
        for (k, h) in row.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{h}");
        }
        s.push('\n');
    }
    s
}

pub fn load_map_bytes(bytes: &[u8]) -> Result<ElevationMap, TerrainError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TerrainError::Parse {
        line: 1,
        reason: format!("not UTF-8: {e}"),
    })?;
    load_map(text)
}

pub fn load_map(text: &str) -> Result<ElevationMap, TerrainError> {
    let perr = |line: usize, reason: String| TerrainError::Parse { line, reason };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l.trim() == MAP_MAGIC => {}
        Some((n, l)) => return Err(perr(n, format!("expected '{MAP_MAGIC}', found '{}'", l.trim()))),
        None => return Err(perr(1, "empty input".into())),
    }
    let (hn, header) = lines.next().ok_or_else(|| perr(2, "missing header line".into()))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    if tok.len() != 9 || tok[0] != "width" || tok[2] != "height" || tok[4] != "resolution" || tok[6] != "origin" {
        return Err(perr(
            hn,
            "expected 'width <u32> height <u32> resolution <f64> origin <f64> <f64>'".into(),
        ));
    }
    let width: u32 = tok[1].parse().map_err(|e| perr(hn, format!("bad width '{}': {e}", tok[1])))?;
    let height: u32 = tok[3].parse().map_err(|e| perr(hn, format!("bad height '{}': {e}", tok[3])))?;
    let resolution: f64 = tok[5].parse().map_err(|e| perr(hn, format!("bad resolution '{}': {e}", tok[5])))?;
    let ox: f64 = tok[7].parse().map_err(|e| perr(hn, format!("bad origin x '{}': {e}", tok[7])))?;
    let oy: f64 = tok[8].parse().map_err(|e| perr(hn, format!("bad origin y '{}': {e}", tok[8])))?;
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(perr(hn, format!("resolution must be positive, got {resolution}")));
    }
    if width < 2 || height < 2 {
        return Err(perr(hn, format!("map must be at least 2x2, got {width}x{height}")));
    }
    let (width, height) = (width as usize, height as usize);
    let mut heights = Vec::with_capacity(width * height);
    let mut rows = 0usize;
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows == height {
            return Err(perr(n, format!("more than {height} rows")));
        }
        let before = heights.len();
        for t in line.split_whitespace() {
            let v: f64 = t.parse().map_err(|e| perr(n, format!("bad height '{t}': {e}")))?;
            if !v.is_finite() {
                return Err(perr(n, format!("height '{t}' is not finite")));
            }
            heights.push(v);
        }
        let got = heights.len() - before;
        if got != width {
            return Err(perr(n, format!("expected {width} values, found {got}")));
        }
        rows += 1;
    }
    if rows != height {
        return Err(perr(hn, format!("expected {height} rows, found {rows}")));
    }
    ElevationMap::new(width, height, resolution, Point2::new(ox, oy), heights)
        .map_err(|e| perr(hn, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(heights: Vec<f64>) -> ElevationMap {
        ElevationMap::new(2, 2, 1.0, Point2::new(0.0, 0.0), heights).unwrap()
    }

    #[test]
    fn bilinear_center_of_corner_cell() {
        let m = tiny(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(m.height_at(&Point2::new(0.5, 0.5)).unwrap(), 0.25);
    }

    #[test]
    fn exact_cell_center_returns_stored_value() {
        let m = tiny(vec![0.1, 0.2, 0.3, 0.4]);
        assert_eq!(m.height_at(&Point2::new(1.0, 0.0)).unwrap(), 0.2);
        assert_eq!(m.height_at(&Point2::new(0.0, 1.0)).unwrap(), 0.3);
        assert_eq!(m.height_at(&Point2::new(1.0, 1.0)).unwrap(), 0.4);
    }

    #[test]
    fn out_of_extent_is_an_error() {
        let m = tiny(vec![0.0; 4]);
        assert!(matches!(m.height_at(&Point2::new(1.5, 0.5)), Err(TerrainError::OutOfBounds { .. })));
        assert!(matches!(m.height_at(&Point2::new(-0.01, 0.5)), Err(TerrainError::OutOfBounds { .. })));
    }

    #[test]
    fn flat_map_has_no_roughness() {
        let m = ElevationMap::flat(50, 50, 0.02, Point2::new(0.0, 0.0)).unwrap();
        let r = m.roughness_at(&Point2::new(0.5, 0.5), 0.06).unwrap();
        assert_eq!(r.slope, 0.0);
        assert_eq!(r.height_variance, 0.0);
        assert_eq!(m.height_at(&Point2::new(0.313, 0.777)).unwrap(), 0.0);
    }

    #[test]
    fn ramp_slope_is_atan_gradient() {
        let n = 50;
        let res = 0.02;
        let heights = (0..n * n).map(|k| 0.1 * ((k % n) as f64 * res)).collect();
        let m = ElevationMap::new(n, n, res, Point2::new(0.0, 0.0), heights).unwrap();
        let r = m.roughness_at(&Point2::new(0.5, 0.5), 0.1).unwrap();
        assert!((r.slope - 0.1f64.atan()).abs() < 1e-12);
        assert!(r.height_variance < 1e-24);
    }

    #[test]
    fn spike_raises_variance() {
        let n = 30;
        let mut heights = vec![0.0; n * n];
        heights[15 * n + 15] = 0.1;
        let m = ElevationMap::new(n, n, 0.02, Point2::new(0.0, 0.0), heights).unwrap();
        let r = m.roughness_at(&Point2::new(0.3, 0.3), 0.06).unwrap();
        assert!(r.height_variance > 0.0);
    }

    #[test]
    fn roughness_disc_must_fit() {
        let m = ElevationMap::flat(10, 10, 0.1, Point2::new(0.0, 0.0)).unwrap();
        assert!(m.roughness_at(&Point2::new(0.05, 0.5), 0.1).is_err());
    }

    #[test]
    fn invalid_maps_rejected() {
        assert!(ElevationMap::new(1, 2, 1.0, Point2::origin(), vec![0.0; 2]).is_err());
        assert!(ElevationMap::new(2, 2, 0.0, Point2::origin(), vec![0.0; 4]).is_err());
        assert!(ElevationMap::new(2, 2, 1.0, Point2::origin(), vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn save_load_roundtrip_small() {
        let m = ElevationMap::new(2, 2, 0.05, Point2::new(-1.25, 3.0), vec![0.1, 1.0 / 3.0, -2e-17, 7.0]).unwrap();
        let back = load_map(&save_map(&m)).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn short_row_is_parse_error() {
        let text = "ELEVMAP 1\nwidth 3 height 2 resolution 0.1 origin 0 0\n0 0 0\n0 0\n";
        match load_map(text) {
            Err(TerrainError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_resolution_is_parse_error() {
        let text = "ELEVMAP 1\nwidth 2 height 2 resolution -0.1 origin 0 0\n0 0\n0 0\n";
        assert!(matches!(load_map(text), Err(TerrainError::Parse { line: 2, .. })));
    }

    #[test]
    fn missing_magic_is_parse_error() {
        assert!(matches!(load_map("ELEVMAP 2\n"), Err(TerrainError::Parse { line: 1, .. })));
    }

    #[test]
    fn flat_scenario_is_zero() {
        let m = generate_scenario(&ScenarioSpec::new(ScenarioKind::Flat, 0)).unwrap();
        assert!(m.heights().iter().all(|h| *h == 0.0));
        assert_eq!(m.width(), 301);
        let (lo, hi) = m.extent();
        assert!((lo.x + 3.0).abs() < 1e-12 && (hi.x - 3.0).abs() < 1e-9);
    }

    #[test]
    fn default_start_goal_distance() {
        let spec = ScenarioSpec::new(ScenarioKind::Flat, 0);
        assert!(((spec.default_goal() - spec.default_start()).norm() - 4.6).abs() < 1e-12);
    }

    #[test]
    fn rough_is_deterministic_and_tall() {
        let a = generate_scenario(&ScenarioSpec::new(ScenarioKind::Rough, 9)).unwrap();
        let b = generate_scenario(&ScenarioSpec::new(ScenarioKind::Rough, 9)).unwrap();
        let c = generate_scenario(&ScenarioSpec::new(ScenarioKind::Rough, 10)).unwrap();
        assert_eq!(a.heights(), b.heights());
        assert_ne!(a.heights(), c.heights());
        let peak = a.heights().iter().cloned().fold(f64::MIN, f64::max);
        assert!((peak - ROUGH_PEAK).abs() < 1e-12);
    }

    #[test]
    fn box_sits_between_start_and_goal() {
        let spec = ScenarioSpec::new(ScenarioKind::Box, 0);
        let m = generate_scenario(&spec).unwrap();
        assert_eq!(m.height_at(&Point2::new(0.0, 0.0)).unwrap(), 0.5);
        assert_eq!(m.height_at(&Point2::new(0.0, 0.7)).unwrap(), 0.0);
        assert_eq!(m.height_at(&spec.default_start()).unwrap(), 0.0);
    }

    #[test]
    fn bug_trap_opening_width() {
        for w in [1.2, 1.7] {
            let spec = ScenarioSpec::new(ScenarioKind::BugTrap, 0).with_entrance_width(w);
            let m = generate_scenario(&spec).unwrap();
            // Row through the middle of the north wall.
            let walls = bug_trap_walls(&spec);
            let wy = 0.5 * (walls[3].y0 + walls[3].y1);
            let (_, j) = m.nearest_cell(&Point2::new(0.0, wy)).unwrap();
            let (i0, _) = m.nearest_cell(&Point2::new(walls[3].x0 + 0.05, wy)).unwrap();
            let (i1, _) = m.nearest_cell(&Point2::new(walls[4].x1 - 0.05, wy)).unwrap();
            let wall: Vec<usize> = (i0..=i1).filter(|&i| m.cell(i, j) > 0.0).collect();
            let gap = wall.windows(2).find(|w| w[1] > w[0] + 1).expect("opening");
            let width = (gap[1] - gap[0]) as f64 * m.resolution();
            assert!((width - w).abs() < 1e-9, "opening {width} != {w}");
        }
    }

    #[test]
    fn zero_entrance_is_invalid() {
        let spec = ScenarioSpec::new(ScenarioKind::BugTrap, 0).with_entrance_width(0.0);
        assert!(matches!(generate_scenario(&spec), Err(TerrainError::InvalidSpec(_))));
    }
}

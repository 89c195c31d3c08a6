//! Path documents (JSON) and top-down SVG scenes.

use std::fmt::Write;

use nalgebra::{Isometry3, Point2, Quaternion, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::planners::tree::PlanTree;
use crate::planners::FullBodyPath;
use crate::robot::{FullBodyState, RobotModel, MAX_LEGS};
use crate::terrain::ElevationMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub time: f64,
    /// Body position `[x, y, z]`, meters.
    pub position: [f64; 3],
    /// Body orientation `[w, x, y, z]`.
    pub orientation: [f64; 4],
    /// Hip, thigh and knee angle per leg, radians.
    pub joints: Vec<[f64; 3]>,
    pub stance: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub robot: String,
    pub scenario: String,
    pub seed: u64,
    pub waypoints: Vec<Waypoint>,
}

pub fn export_path(model: &RobotModel, path: &FullBodyPath, scenario: &str, seed: u64) -> PathDocument {
    let waypoints = path
        .states
        .iter()
        .zip(&path.times)
        .map(|(s, &time)| {
            let t = s.body_pose.translation.vector;
            let q = s.body_pose.rotation.quaternion();
            Waypoint {
                time,
                position: [t.x, t.y, t.z],
                orientation: [q.w, q.i, q.j, q.k],
                joints: s.joint_angles[..model.leg_count].to_vec(),
                stance: s.stance[..model.leg_count].to_vec(),
            }
        })
        .collect();
    PathDocument { robot: model.name().into(), scenario: scenario.into(), seed, waypoints }
}

/// Rebuilds the path of a document. Feet are recomputed from the joints.
pub fn import_path(doc: &PathDocument) -> Result<(RobotModel, FullBodyPath), BenchError> {
    let model = RobotModel::by_name(&doc.robot)?;
    if doc.waypoints.is_empty() {
        return Err(BenchError::InvalidConfig("path document has no waypoints".into()));
    }
    let mut states = Vec::with_capacity(doc.waypoints.len());
    for (i, w) in doc.waypoints.iter().enumerate() {
        if w.joints.len() != model.leg_count || w.stance.len() != model.leg_count {
            return Err(BenchError::InvalidConfig(format!(
                "waypoint {i}: expected {} legs, found {} joint sets and {} stance flags",
                model.leg_count,
                w.joints.len(),
                w.stance.len()
            )));
        }
        let [qw, qx, qy, qz] = w.orientation;
        let rot = UnitQuaternion::new_normalize(Quaternion::new(qw, qx, qy, qz));
        let pose = Isometry3::from_parts(Translation3::new(w.position[0], w.position[1], w.position[2]), rot);
        let mut joints = [[0.0; 3]; MAX_LEGS];
        let mut stance = [false; MAX_LEGS];
        joints[..model.leg_count].copy_from_slice(&w.joints);
        stance[..model.leg_count].copy_from_slice(&w.stance);
        states.push(FullBodyState::from_joints(&model, pose, joints, stance));
    }
    let mut path = FullBodyPath::new(states);
    path.times = doc.waypoints.iter().map(|w| w.time).collect();
    Ok((model, path))
}

/// Optional layers drawn over the terrain.
#[derive(Debug, Clone, Default)]
pub struct SceneOverlay<'a> {
    pub trees: Vec<&'a PlanTree>,
    pub path: Option<&'a FullBodyPath>,
    /// Foci and major axis of an informed-sampling ellipse.
    pub ellipse: Option<(Point2<f64>, Point2<f64>, f64)>,
    /// Stance feet at every node of the path.
    pub footprints: bool,
}

/// Pixels per meter.
pub const SVG_SCALE: f64 = 100.0;
/// Gray levels used for terrain shading.
const SHADES: usize = 32;

/// Top-down SVG of `map` with the given overlays. World `y` points up.
pub fn export_scene(map: &ElevationMap, overlay: &SceneOverlay<'_>) -> String {
    let (lo, hi) = map.extent();
    let res = map.resolution();
    let (w, h) = ((hi.x - lo.x + res) * SVG_SCALE, (hi.y - lo.y + res) * SVG_SCALE);
    let px = |p: &Point2<f64>| ((p.x - lo.x + res / 2.0) * SVG_SCALE, (hi.y - p.y + res / 2.0) * SVG_SCALE);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.3} {h:.3}">"#);

    let heights = map.heights();
    let (zmin, zmax) = heights.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &z| (a.min(z), b.max(z)));
    let shade = |z: f64| if zmax > zmin { (((z - zmin) / (zmax - zmin)) * (SHADES - 1) as f64).round() as usize } else { 0 };
    let cell = res * SVG_SCALE;
    s.push_str("<g id=\"terrain\" shape-rendering=\"crispEdges\">\n");
    for j in 0..map.height() {
        // One rectangle per run of equal shade along the row.
        let mut i = 0;
        while i < map.width() {
            let k = shade(map.cell(i, j));
            let mut e = i + 1;
            while e < map.width() && shade(map.cell(e, j)) == k {
                e += 1;
            }
            let (x, y) = px(&map.cell_center(i, j));
            let g = 60 + k * 190 / (SHADES - 1);
            let _ = writeln!(
                s,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{cell:.3}" fill="rgb({g},{g},{g})"/>"#,
                x - cell / 2.0,
                y - cell / 2.0,
                (e - i) as f64 * cell
            );
            i = e;
        }
    }
    s.push_str("</g>\n");

    if !overlay.trees.is_empty() {
        s.push_str("<g id=\"trees\" stroke=\"#1f77b4\" stroke-width=\"1\" fill=\"none\">\n");
        for tree in &overlay.trees {
            for n in tree.nodes() {
                let Some(p) = n.parent else { continue };
                let (a, b) = (px(&tree.node(p).state.xy()), px(&n.state.xy()));
                let _ = writeln!(s, r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#, a.0, a.1, b.0, b.1);
            }
        }
        s.push_str("</g>\n");
    }

    if let Some((f1, f2, c)) = overlay.ellipse {
        let c_min = (f2 - f1).norm();
        let centre = px(&Point2::from((f1.coords + f2.coords) / 2.0));
        let a = c / 2.0 * SVG_SCALE;
        let b = (c * c - c_min * c_min).max(0.0).sqrt() / 2.0 * SVG_SCALE;
        // SVG y points down, so the rotation flips sign.
        let angle = -(f2.y - f1.y).atan2(f2.x - f1.x).to_degrees();
        if b > 0.0 {
            let _ = writeln!(
                s,
                r#"<ellipse id="ellipse" cx="{:.3}" cy="{:.3}" rx="{a:.3}" ry="{b:.3}" transform="rotate({angle:.6} {:.3} {:.3})" stroke="white" stroke-width="2" fill="none"/>"#,
                centre.0, centre.1, centre.0, centre.1
            );
        } else {
            let (p, q) = (px(&f1), px(&f2));
            let _ = writeln!(
                s,
                r#"<line id="ellipse" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="white" stroke-width="2"/>"#,
                p.0, p.1, q.0, q.1
            );
        }
    }

    if let Some(path) = overlay.path {
        let pts: Vec<String> = path
            .states
            .iter()
            .map(|st| {
                let (x, y) = px(&st.xy());
                format!("{x:.9},{y:.9}")
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline id="path" points="{}" stroke="#d62728" stroke-width="3" fill="none"/>"##,
            pts.join(" ")
        );
        if overlay.footprints {
            s.push_str("<g id=\"footprints\" fill=\"#ff7f0e\">\n");
            for &k in &path.knots {
                let st = &path.states[k];
                for leg in 0..st.leg_count {
                    if st.stance[leg] {
                        let (x, y) = px(&Point2::new(st.foot_world[leg].x, st.foot_world[leg].y));
                        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="3"/>"#);
                    }
                }
            }
            s.push_str("</g>\n");
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Map-frame vertices of the `path` polyline in an exported scene.
pub fn scene_polyline(svg: &str, map: &ElevationMap) -> Option<Vec<Point2<f64>>> {
    let line = svg.lines().find(|l| l.contains(r#"id="path""#))?;
    let start = line.find("points=\"")? + 8;
    let end = start + line[start..].find('"')?;
    let (lo, hi) = map.extent();
    let res = map.resolution();
    line[start..end]
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            let (x, y): (f64, f64) = (x.parse().ok()?, y.parse().ok()?);
            Some(Point2::new(x / SVG_SCALE + lo.x - res / 2.0, hi.y + res / 2.0 - y / SVG_SCALE))
        })
        .collect()
}

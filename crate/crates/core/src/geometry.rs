//! Small geometric toolkit shared by the kinematics, constraint and planning code.

use nalgebra::{Isometry3, Point2, Point3, Translation3, UnitQuaternion, Vector2, Vector3};

/// Rigid body pose in SE3 (position in meters + unit quaternion).
pub type Pose = Isometry3<f64>;

/// Builds a pose from a position and roll/pitch/yaw (radians, extrinsic XYZ).
pub fn pose_from_xyz_rpy(x: f64, y: f64, z: f64, roll: f64, pitch: f64, yaw: f64) -> Pose {
    Isometry3::from_parts(
        Translation3::new(x, y, z),
        UnitQuaternion::from_euler_angles(roll, pitch, yaw),
    )
}

pub fn horizontal(p: &Point3<f64>) -> Point2<f64> {
    Point2::new(p.x, p.y)
}

pub fn pose_xy(pose: &Pose) -> Point2<f64> {
    Point2::new(pose.translation.vector.x, pose.translation.vector.y)
}

pub fn yaw_of(pose: &Pose) -> f64 {
    pose.rotation.euler_angles().2
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = a % two_pi;
    if r <= -std::f64::consts::PI {
        r += two_pi;
    } else if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}

/// Linear position and spherical orientation interpolation.
pub fn interpolate_pose(a: &Pose, b: &Pose, s: f64) -> Pose {
    let t = a.translation.vector.lerp(&b.translation.vector, s);
    let r = a.rotation.slerp(&b.rotation, s);
    Isometry3::from_parts(Translation3::from(t), r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Point3<f64>,
    pub b: Point3<f64>,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Point3<f64>, b: Point3<f64>, radius: f64) -> Self {
        Self { a, b, radius }
    }

    pub fn transformed(&self, pose: &Pose) -> Capsule {
        Capsule {
            a: pose * self.a,
            b: pose * self.b,
            radius: self.radius,
        }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    /// Surface-to-surface distance; negative when the capsules overlap.
    pub fn distance(&self, other: &Capsule) -> f64 {
        segment_segment_distance(&self.a, &self.b, &other.a, &other.b) - self.radius - other.radius
    }
}

/// Closest distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    const EPS: f64 = 1e-14;

    let (s, t) = if a <= EPS && e <= EPS {
        (0.0, 0.0)
    } else if a <= EPS {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            ((-c / a).clamp(0.0, 1.0), 0.0)
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s = if denom > EPS {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t = (b * s + f) / e;
            if t < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            }
            (s, t)
        }
    };
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    (c1 - c2).norm()
}

fn cross2(o: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, no repeated
/// closing vertex. Collinear points are dropped, so a degenerate input
/// yields one or two vertices.
pub fn convex_hull(points: &[Point2<f64>]) -> Vec<Point2<f64>> {
    let mut pts: Vec<Point2<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point2<f64>> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 1e-15 {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Point2<f64>> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 1e-15 {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Shoelace area of a simple polygon (positive for counter-clockwise order).
pub fn polygon_area(poly: &[Point2<f64>]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

pub fn point_segment_distance_2d(p: &Point2<f64>, a: &Point2<f64>, b: &Point2<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 < 1e-24 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Signed distance from `p` to the boundary of a counter-clockwise convex
/// polygon: positive inside, negative outside. Polygons with fewer than three
/// vertices have no interior and always give a value `<= 0`.
pub fn signed_distance_to_convex(p: &Point2<f64>, poly: &[Point2<f64>]) -> f64 {
    match poly.len() {
        0 => f64::NEG_INFINITY,
        1 => -(p - poly[0]).norm(),
        2 => -point_segment_distance_2d(p, &poly[0], &poly[1]),
        n => {
            let mut inside = true;
            let mut min_edge = f64::INFINITY;
            for i in 0..n {
                let a = poly[i];
                let b = poly[(i + 1) % n];
                let edge = b - a;
                let len = edge.norm();
                // Inward normal for a CCW polygon is the left normal.
                let signed = (edge.x * (p.y - a.y) - edge.y * (p.x - a.x)) / len;
                if signed < 0.0 {
                    inside = false;
                }
                min_edge = min_edge.min(point_segment_distance_2d(p, &a, &b));
            }
            if inside {
                min_edge
            } else {
                -min_edge
            }
        }
    }
}

/// Shrinks a CCW convex polygon by moving every edge inward by `offset`.
/// Returns an empty vector when nothing is left.
pub fn inset_convex(poly: &[Point2<f64>], offset: f64) -> Vec<Point2<f64>> {
    if poly.len() < 3 {
        return Vec::new();
    }
    let mut region: Vec<Point2<f64>> = poly.to_vec();
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let edge = b - a;
        let normal = Vector2::new(-edge.y, edge.x) / edge.norm();
        let origin = a + normal * offset;
        region = clip_half_plane(&region, &origin, &normal);
        if region.is_empty() {
            break;
        }
    }
    region
}

/// Intersection of two CCW convex polygons; empty when they do not overlap.
pub fn intersect_convex(a: &[Point2<f64>], b: &[Point2<f64>]) -> Vec<Point2<f64>> {
    if a.len() < 3 || b.len() < 3 {
        return Vec::new();
    }
    let mut region = a.to_vec();
    for i in 0..b.len() {
        let p = b[i];
        let edge = b[(i + 1) % b.len()] - p;
        region = clip_half_plane(&region, &p, &Vector2::new(-edge.y, edge.x));
        if region.is_empty() {
            break;
        }
    }
    region
}

/// Keeps the part of `poly` where `(x - origin) . normal >= 0`.
fn clip_half_plane(poly: &[Point2<f64>], origin: &Point2<f64>, normal: &Vector2<f64>) -> Vec<Point2<f64>> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    for i in 0..n {
        let cur = poly[i];
        let next = poly[(i + 1) % n];
        let dc = (cur - origin).dot(normal);
        let dn = (next - origin).dot(normal);
        if dc >= 0.0 {
            out.push(cur);
        }
        if (dc >= 0.0) != (dn >= 0.0) {
            let t = dc / (dc - dn);
            out.push(cur + (next - cur) * t);
        }
    }
    if out.len() < 3 || polygon_area(&out) < 1e-14 {
        return Vec::new();
    }
    out
}

/// Closest point of a convex polygon (CCW, >= 3 vertices) to `p`.
pub fn closest_point_on_convex(p: &Point2<f64>, poly: &[Point2<f64>]) -> Point2<f64> {
    if signed_distance_to_convex(p, poly) >= 0.0 {
        return *p;
    }
    let n = poly.len();
    let mut best = poly[0];
    let mut best_d = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let ab = b - a;
        let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        let c = a + ab * t;
        let d = (p - c).norm();
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Intersection of the line `p + s * dir` with a convex polygon, as the
/// parameter interval `[s_min, s_max]` (None when the line misses).
pub fn line_convex_interval(p: &Point2<f64>, dir: &Vector2<f64>, poly: &[Point2<f64>]) -> Option<(f64, f64)> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let edge = b - a;
        let normal = Vector2::new(-edge.y, edge.x);
        let num = (p - a).dot(&normal);
        let den = dir.dot(&normal);
        if den.abs() < 1e-15 {
            if num < 0.0 {
                return None;
            }
            continue;
        }
        let s = -num / den;
        if den > 0.0 {
            lo = lo.max(s);
        } else {
            hi = hi.min(s);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Horizontal distance travelled along a polyline of 3D points.
pub fn horizontal_length(points: impl IntoIterator<Item = Point3<f64>>) -> f64 {
    let mut it = points.into_iter();
    let Some(mut prev) = it.next() else { return 0.0 };
    let mut total = 0.0;
    for p in it {
        total += Vector2::new(p.x - prev.x, p.y - prev.y).norm();
        prev = p;
    }
    total
}

pub fn vec3(x: f64, y: f64, z: f64) -> Vector3<f64> {
    Vector3::new(x, y, z)
}

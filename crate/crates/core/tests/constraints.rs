use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use proptest::prelude::*;
use walkplan::constraints::{
    check_segment, check_state, stability_margin, support_polygon, ConstraintError, SEGMENT_STEP,
};
use walkplan::geometry::pose_from_xyz_rpy;
use walkplan::robot::{FullBodyState, RobotModel};
use walkplan::terrain::{generate_scenario, ElevationMap, ScenarioKind, ScenarioSpec};

fn flat() -> ElevationMap {
    generate_scenario(&ScenarioSpec::new(ScenarioKind::Flat, 0)).unwrap()
}

fn standing(m: &RobotModel, x: f64, y: f64, yaw: f64) -> FullBodyState {
    m.nominal_state(pose_from_xyz_rpy(x, y, -m.nominal_stance[0].z, 0.0, 0.0, yaw)).unwrap()
}

fn with_feet(m: &RobotModel, feet: &[(f64, f64)], com: (f64, f64)) -> FullBodyState {
    let mut s = standing(m, com.0, com.1, 0.0);
    s.stance = [false; 6];
    for (l, &(x, y)) in feet.iter().enumerate() {
        s.foot_world[l] = Point3::new(x, y, 0.0);
        s.stance[l] = true;
    }
    s
}

#[test]
fn equilateral_triangle_margin_is_inradius() {
    let m = RobotModel::hexapod();
    let side: f64 = 0.4;
    let h = side * 3f64.sqrt() / 2.0;
    let feet = [(0.0, 0.0), (side, 0.0), (side / 2.0, h)];
    let centroid = (side / 2.0, h / 3.0);
    let s = with_feet(&m, &feet, centroid);
    let want = side / (2.0 * 3f64.sqrt());
    assert!((stability_margin(&s).unwrap() - want).abs() < 1e-12);
    assert_eq!(support_polygon(&s).unwrap().len(), 3);
}

#[test]
fn com_on_edge_has_zero_margin() {
    let m = RobotModel::hexapod();
    let s = with_feet(&m, &[(0.0, 0.0), (0.4, 0.0), (0.2, 0.3)], (0.1, 0.0));
    assert!(stability_margin(&s).unwrap().abs() < 1e-12);
}

#[test]
fn two_stance_feet_are_degenerate() {
    let m = RobotModel::hexapod();
    let s = with_feet(&m, &[(-0.1, 0.0), (0.1, 0.0)], (0.0, 0.0));
    assert_eq!(support_polygon(&s).unwrap().len(), 2);
    assert!(stability_margin(&s).unwrap() <= 0.0);
}

#[test]
fn no_stance_legs_is_an_error() {
    let m = RobotModel::quadruped();
    let mut s = standing(&m, 0.0, 0.0, 0.0);
    s.stance = [false; 6];
    assert_eq!(stability_margin(&s), Err(ConstraintError::NoStanceLegs));
}

/// Shoelace formula written out on the raw hexagon vertices.
fn shoelace(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % n];
            x0 * y1 - x1 * y0
        })
        .sum::<f64>()
        .abs()
        / 2.0
}

#[test]
fn hexapod_support_is_hexagon_with_shoelace_area() {
    let m = RobotModel::hexapod();
    let s = standing(&m, 0.0, 0.0, 0.0);
    let poly = support_polygon(&s).unwrap();
    assert_eq!(poly.len(), 6);
    // Legs are mounted in angular order around the body.
    let pts: Vec<(f64, f64)> = (0..6).map(|l| (s.foot_world[l].x, s.foot_world[l].y)).collect();
    let area = walkplan::geometry::polygon_area(&poly);
    assert!((area - shoelace(&pts)).abs() < 1e-12, "{area}");
}

#[test]
fn nominal_states_are_valid() {
    let map = flat();
    for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
        let r = check_state(&m, &map, &standing(&m, 0.5, -0.5, 0.7)).unwrap();
        assert!(r.is_valid(), "{}: {:?}", m.name(), r.failure());
    }
}

#[test]
fn lowered_body_collides_with_ground() {
    let map = flat();
    let m = RobotModel::hexapod();
    let s = standing(&m, 0.0, 0.0, 0.0);
    let low = Isometry3::from_parts(Translation3::new(0.0, 0.0, 0.03), s.body_pose.rotation);
    let lowered = FullBodyState::from_joints(&m, low, s.joint_angles, s.stance);
    let r = check_state(&m, &map, &lowered).unwrap();
    assert!(!r.collision_free);
    assert!(!r.terrain_clear);
}

#[test]
fn lifting_four_legs_is_unstable() {
    let map = flat();
    let m = RobotModel::hexapod();
    let mut s = standing(&m, 0.0, 0.0, 0.0);
    for leg in [1, 2, 4, 5] {
        s.stance[leg] = false;
    }
    let r = check_state(&m, &map, &s).unwrap();
    assert!(!r.stable);
    assert!(!r.is_valid());
}

#[test]
fn off_map_body_is_out_of_bounds() {
    let map = flat();
    let m = RobotModel::hexapod();
    let s = standing(&m, 3.5, 0.0, 0.0);
    assert!(matches!(check_state(&m, &map, &s), Err(ConstraintError::Terrain(_))));
}

#[test]
fn segment_through_box_fails_with_collision() {
    let map = generate_scenario(&ScenarioSpec::new(ScenarioKind::Box, 0)).unwrap();
    let m = RobotModel::hexapod();
    let a = standing(&m, -1.0, 0.0, 0.0);
    let b = standing(&m, 1.0, 0.0, 0.0);
    let r = check_segment(&m, &map, &a, &b, SEGMENT_STEP).unwrap();
    assert!(!r.valid);
    let (_, report) = r.failure.unwrap();
    assert!(!report.collision_free);
}

#[test]
fn segment_to_itself_matches_state_check() {
    let map = flat();
    let m = RobotModel::quadruped();
    let a = standing(&m, 0.2, 0.1, 0.3);
    let seg = check_segment(&m, &map, &a, &a, SEGMENT_STEP).unwrap();
    assert_eq!(seg.valid, check_state(&m, &map, &a).unwrap().is_valid());
    assert!(check_segment(&m, &map, &a, &a, 0.0).is_err());
}

fn random_state(m: &RobotModel, x: f64, y: f64, yaw: f64, dz: f64) -> FullBodyState {
    let s = standing(m, x, y, yaw);
    let pose = Isometry3::from_parts(
        Translation3::from(s.body_pose.translation.vector + Vector3::new(0.0, 0.0, dz)),
        s.body_pose.rotation,
    );
    FullBodyState::from_joints(m, pose, s.joint_angles, s.stance)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_keeps_failures(
        x0 in -1.5f64..0.5, y0 in -1.0f64..1.0, yaw0 in -3.0f64..3.0, dz0 in -0.12f64..0.05,
        dx in -0.6f64..0.6, dy in -0.6f64..0.6, yaw1 in -3.0f64..3.0, dz1 in -0.12f64..0.05,
        step in 0.005f64..0.2,
    ) {
        let map = generate_scenario(&ScenarioSpec::new(ScenarioKind::Box, 0)).unwrap();
        let m = RobotModel::hexapod();
        let a = random_state(&m, x0, y0, yaw0, dz0);
        let b = random_state(&m, x0 + dx, y0 + dy, yaw1, dz1);
        let coarse = check_segment(&m, &map, &a, &b, step).unwrap();
        let fine = check_segment(&m, &map, &a, &b, step / 2.0).unwrap();
        prop_assert!(coarse.valid || !fine.valid);
    }

    #[test]
    fn margin_invariant_under_rigid_motion(
        tx in -2.0f64..2.0, ty in -2.0f64..2.0, yaw in -3.1f64..3.1,
        cx in -0.1f64..0.1, cy in -0.1f64..0.1,
    ) {
        let m = RobotModel::hexapod();
        let mut s = standing(&m, cx, cy, 0.0);
        s.stance[2] = false;
        let before = stability_margin(&s).unwrap();
        let motion = Isometry3::from_parts(Translation3::new(tx, ty, 0.0), UnitQuaternion::from_euler_angles(0.0, 0.0, yaw));
        let mut moved = s;
        moved.body_pose = motion * s.body_pose;
        for l in 0..6 {
            moved.foot_world[l] = motion * s.foot_world[l];
        }
        let after = stability_margin(&moved).unwrap();
        prop_assert!((before - after).abs() < 1e-9, "{} vs {}", before, after);
    }
}

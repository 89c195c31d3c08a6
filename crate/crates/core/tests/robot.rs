use nalgebra::{Point3, Vector3};
use proptest::prelude::*;
use walkplan::geometry::pose_from_xyz_rpy;
use walkplan::robot::{RobotError, RobotModel};

/// Distance from `p` to the workspace boundary found by bisection along
/// many directions, using only IK membership.
fn ray_oracle(m: &RobotModel, leg: usize, p: &Point3<f64>, dirs: usize) -> f64 {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = f64::INFINITY;
    for k in 0..dirs {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / dirs as f64;
        let r = (1.0 - z * z).sqrt();
        let d = Vector3::new(r * (golden * k as f64).cos(), r * (golden * k as f64).sin(), z);
        let mut lo = 0.0;
        let mut hi = 0.0005;
        while m.workspace_contains(leg, &(p + d * hi)) {
            lo = hi;
            hi += 0.0005;
            if hi > best {
                break;
            }
        }
        if hi > best {
            continue;
        }
        for _ in 0..30 {
            let mid = 0.5 * (lo + hi);
            if m.workspace_contains(leg, &(p + d * mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.min(lo);
    }
    best
}

#[test]
fn margin_matches_ray_oracle_at_nominal() {
    for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
        let leg = 0;
        let foot = m.nominal_stance[leg];
        let got = m.leg_margin(leg, &foot);
        let want = ray_oracle(&m, leg, &foot, 20_000);
        assert!((got - want).abs() < 0.005, "{}: margin {got} oracle {want}", m.name());
        assert!(got > 0.0);
    }
}

#[test]
fn margin_matches_ray_oracle_off_nominal() {
    let m = RobotModel::hexapod();
    for (leg, off) in [(1, Vector3::new(0.08, 0.0, 0.02)), (3, Vector3::new(-0.05, 0.04, -0.03))] {
        let foot = m.nominal_stance[leg] + off;
        let got = m.leg_margin(leg, &foot);
        let want = ray_oracle(&m, leg, &foot, 20_000);
        assert!((got - want).abs() < 0.005, "leg {leg}: margin {got} oracle {want}");
    }
}

#[test]
fn margin_is_zero_on_the_limit_boundary() {
    let m = RobotModel::hexapod();
    let (lo2, _) = m.joint_limits[2];
    let foot = m.leg_fk(2, &[0.1, 0.2, lo2]);
    assert_eq!(m.leg_margin(2, &foot), 0.0);
    let outside = m.leg_frames[2] * Point3::new(m.reach() + 0.05, 0.0, 0.0);
    assert_eq!(m.leg_margin(2, &outside), 0.0);
}

#[test]
fn moving_toward_boundary_does_not_increase_margin() {
    let m = RobotModel::hexapod();
    let pose = pose_from_xyz_rpy(0.0, 0.0, m.standing_height, 0.0, 0.0, 0.0);
    let base = m.nominal_state(pose).unwrap();
    let m0 = m.kinematic_margin(&base).unwrap();
    // Push leg 0 outwards along its radial direction, 1 cm at a time.
    let dir = (m.nominal_stance[0] - m.leg_frames[0].translation.vector).xy().coords.normalize();
    let mut prev = m0;
    let mut state = base;
    for _ in 0..20 {
        state.foot_world[0] += Vector3::new(dir.x, dir.y, 0.0) * 0.01;
        let now = m.kinematic_margin(&state).unwrap();
        assert!(now <= prev + 1e-12, "margin rose from {prev} to {now}");
        prev = now;
    }
    assert_eq!(prev, 0.0);
}

#[test]
fn margin_requires_stance() {
    let m = RobotModel::quadruped();
    let mut s = m
        .nominal_state(pose_from_xyz_rpy(0.0, 0.0, m.standing_height, 0.0, 0.0, 0.0))
        .unwrap();
    s.stance = [false; 6];
    assert_eq!(m.kinematic_margin(&s), Err(RobotError::NoStanceLegs));
}

fn interior_angles(m: &RobotModel) -> impl Strategy<Value = [f64; 3]> {
    let l = m.joint_limits;
    let shrink = |(a, b): (f64, f64)| (a + 0.01)..(b - 0.01);
    (shrink(l[0]), shrink(l[1]), shrink(l[2])).prop_map(|(a, b, c)| [a, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ik_inverts_fk_hexapod(q in interior_angles(&RobotModel::hexapod()), leg in 0usize..6) {
        let m = RobotModel::hexapod();
        let foot = m.leg_fk(leg, &q);
        let back = m.leg_ik(leg, &foot).unwrap();
        prop_assert!((m.leg_fk(leg, &back) - foot).norm() < 1e-6);
        // Away from the coxa singularity the joint solution is unique.
        let planar = m.link_lengths[0] + m.link_lengths[1] * q[1].cos() + m.link_lengths[2] * (q[1] + q[2]).cos();
        if planar > 1e-3 {
            for j in 0..3 {
                prop_assert!((back[j] - q[j]).abs() < 1e-9, "joint {} {} vs {}", j, back[j], q[j]);
            }
        }
    }

    #[test]
    fn ik_inverts_fk_quadruped(q in interior_angles(&RobotModel::quadruped()), leg in 0usize..4) {
        let m = RobotModel::quadruped();
        let foot = m.leg_fk(leg, &q);
        let back = m.leg_ik(leg, &foot).unwrap();
        prop_assert!((m.leg_fk(leg, &back) - foot).norm() < 1e-6);
        let planar = m.link_lengths[0] + m.link_lengths[1] * q[1].cos() + m.link_lengths[2] * (q[1] + q[2]).cos();
        if planar > 1e-3 {
            for j in 0..3 {
                prop_assert!((back[j] - q[j]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn fk_of_ik_on_random_reachable_points(x in -0.5f64..0.5, y in -0.5f64..0.5, z in -0.5f64..0.2) {
        let m = RobotModel::hexapod();
        let p = Point3::new(x, y, z);
        if let Ok(q) = m.leg_ik(4, &p) {
            prop_assert!((m.leg_fk(4, &q) - p).norm() < 1e-6);
            for j in 0..3 {
                prop_assert!(q[j] >= m.joint_limits[j].0 - 1e-9 && q[j] <= m.joint_limits[j].1 + 1e-9);
            }
        }
    }
}

#[test]
fn margin_matches_dense_shell_oracle() {
    let m = RobotModel::hexapod();
    let shell = walkplan::robot::boundary_shell(&m, 0.001);
    for leg in [0, 4] {
        let foot = m.nominal_stance[leg];
        let local = m.leg_frames[leg].inverse() * foot;
        let want = shell
            .iter()
            .map(|p| ((p[0] - local.x).powi(2) + (p[1] - local.y).powi(2) + (p[2] - local.z).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        let got = m.leg_margin(leg, &foot);
        assert!((got - want).abs() < 0.005, "leg {leg}: margin {got} oracle {want}");
    }
}

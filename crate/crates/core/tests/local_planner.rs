mod common;

use nalgebra::{Isometry3, Point2, Translation3, UnitQuaternion, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use walkplan::constraints::{check_segment, check_state, stability_margin, SEGMENT_STEP, STABILITY_THRESHOLD};
use walkplan::geometry::{pose_from_xyz_rpy, pose_xy, yaw_of, Pose};
use walkplan::local_planner::{
    bspline_basis, bspline_se3, optimize_posture, optimize_posture_with, plan_step, select_foothold, stabilize_path,
    stabilizing_displacement, LocalPlanError, LocalPlanner, PostureObjective, SplineConfig,
};
use walkplan::robot::{FullBodyState, RobotModel};
use walkplan::terrain::{generate_scenario, ElevationMap, ScenarioKind, ScenarioSpec};

fn rough() -> ElevationMap {
    generate_scenario(&ScenarioSpec::new(ScenarioKind::Rough, 7)).unwrap()
}

fn flat() -> ElevationMap {
    generate_scenario(&ScenarioSpec::new(ScenarioKind::Flat, 0)).unwrap()
}

#[test]
fn posture_matches_exhaustive_grid() {
    let map = rough();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut feasible = 0;
    for trial in 0..10 {
        let m = if trial % 2 == 0 { RobotModel::hexapod() } else { RobotModel::quadruped() };
        let xy = Point2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let yaw = rng.random_range(-3.0..3.0);
        let jitter: Vec<Vector2<f64>> = (0..m.leg_count)
            .map(|_| Vector2::new(rng.random_range(-0.03..0.03), rng.random_range(-0.03..0.03)))
            .collect();
        let feet = common::world_feet(&m, &map, &xy, yaw, &jitter);
        let got = optimize_posture(&m, &map, &feet[..m.leg_count], &xy, yaw).ok();
        let want = common::posture_oracle(&m, &map, &feet[..m.leg_count], &xy, yaw);
        assert_eq!(got, want, "trial {trial}");
        feasible += got.is_some() as usize;
    }
    assert!(feasible >= 5, "only {feasible} feasible foothold sets");
}

#[test]
fn quadruped_posture_higher_than_margin_only() {
    let m = RobotModel::quadruped();
    let map = flat();
    let xy = Point2::new(0.0, 0.0);
    let feet = common::world_feet(&m, &map, &xy, 0.0, &[Vector2::zeros(); 4]);
    let with_height = optimize_posture(&m, &map, &feet[..4], &xy, 0.0).unwrap();
    let margin_only = optimize_posture_with(&m, &map, &feet[..4], &xy, 0.0, PostureObjective::MarginOnly).unwrap();
    assert!(
        with_height.translation.z > margin_only.translation.z,
        "{} vs {}",
        with_height.translation.z,
        margin_only.translation.z
    );
}

#[test]
fn symmetric_hexapod_posture_is_level() {
    let m = RobotModel::hexapod();
    let map = flat();
    let xy = Point2::new(0.3, -0.4);
    let feet = common::world_feet(&m, &map, &xy, 0.0, &[Vector2::zeros(); 6]);
    let pose = optimize_posture(&m, &map, &feet[..6], &xy, 0.0).unwrap();
    let (roll, pitch, _) = pose.rotation.euler_angles();
    assert!(roll.abs() < 0.01 && pitch.abs() < 0.01, "roll {roll} pitch {pitch}");
}

#[test]
fn unreachable_footholds_have_no_posture() {
    let m = RobotModel::hexapod();
    let map = flat();
    let xy = Point2::new(0.0, 0.0);
    let far: Vec<Vector2<f64>> = (0..6).map(|l| m.nominal_stance[l].xy().coords * 2.0).collect();
    let feet = common::world_feet(&m, &map, &xy, 0.0, &far);
    assert_eq!(
        optimize_posture(&m, &map, &feet[..6], &xy, 0.0),
        Err(LocalPlanError::NoFeasiblePosture)
    );
}

#[test]
fn foothold_matches_brute_force() {
    let map = rough();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let nominal = Point2::new(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
        let window = rng.random_range(0.02..0.12);
        let got = select_foothold(&map, &nominal, window).unwrap();
        let want = common::foothold_oracle(&map, &nominal, window);
        assert!((got - want).norm() < 1e-12, "{got} vs {want}");
    }
}

#[test]
fn foothold_on_flat_is_nominal_cell() {
    let map = flat();
    let nominal = Point2::new(0.4, -0.2);
    let got = select_foothold(&map, &nominal, 0.05).unwrap();
    assert!((got.x - 0.4).abs() < 1e-9 && (got.y + 0.2).abs() < 1e-9 && got.z == 0.0);
}

#[test]
fn foothold_prefers_single_flat_cell() {
    let mut map = ElevationMap::flat(41, 41, 0.02, Point2::new(-0.4, -0.4)).unwrap();
    let mut heights = map.heights().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for h in heights.iter_mut() {
        *h = rng.random_range(0.0..0.05);
    }
    // A flat patch around one cell; the roughness disc covers 3 cells.
    let (ci, cj) = (24usize, 17usize);
    for j in cj - 3..=cj + 3 {
        for i in ci - 3..=ci + 3 {
            heights[j * 41 + i] = 0.02;
        }
    }
    map = ElevationMap::new(41, 41, 0.02, map.origin(), heights).unwrap();
    let c = map.cell_center(ci, cj);
    let got = select_foothold(&map, &Point2::new(c.x - 0.03, c.y + 0.02), 0.05).unwrap();
    assert!((got.x - c.x).abs() < 1e-12 && (got.y - c.y).abs() < 1e-12);
}

#[test]
fn basis_partition_of_unity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (t0, dt) = (0.3, 0.7);
    let n = 12;
    for j in 0..=3usize {
        for _ in 0..1000 {
            // Valid span of n basis functions of degree j.
            let t = rng.random_range(t0 + j as f64 * dt..t0 + n as f64 * dt);
            let mut sum = 0.0;
            for i in 0..n {
                let b = bspline_basis(i, j, t, t0, dt);
                assert!(b >= 0.0);
                sum += b;
            }
            assert!((sum - 1.0).abs() < 1e-12, "degree {j}, t {t}: {sum}");
        }
    }
}

#[test]
fn basis_base_case_and_linear_hat() {
    let (t0, dt) = (1.0, 0.5);
    assert_eq!(bspline_basis(2, 0, 2.0, t0, dt), 1.0);
    assert_eq!(bspline_basis(2, 0, 2.49, t0, dt), 1.0);
    assert_eq!(bspline_basis(2, 0, 2.5, t0, dt), 0.0);
    assert_eq!(bspline_basis(2, 0, 1.99, t0, dt), 0.0);
    let ti = t0 + 2.0 * dt;
    assert!((bspline_basis(2, 1, ti + dt / 2.0, t0, dt) - 0.5).abs() < 1e-15);
}

fn pose(x: f64, y: f64, z: f64, r: f64, p: f64, yw: f64) -> Pose {
    pose_from_xyz_rpy(x, y, z, r, p, yw)
}

#[test]
fn spline_interpolates_ends_and_is_smooth() {
    let knots = [pose(0.0, 0.0, 0.2, 0.0, 0.0, 0.0), pose(0.15, 0.06, 0.24, 0.05, -0.04, 0.2), pose(0.3, 0.0, 0.21, 0.0, 0.1, 0.3)];
    let cfg = SplineConfig { degree: 2, dt: 1.0, samples_per_segment: 100 };
    let out = bspline_se3(&knots, &cfg).unwrap();
    let first = &out[0];
    let last = out.last().unwrap();
    assert!((first.translation.vector - knots[0].translation.vector).norm() < 1e-9);
    assert!(first.rotation.angle_to(&knots[0].rotation) < 1e-9);
    assert!((last.translation.vector - knots[2].translation.vector).norm() < 1e-9);
    assert!(last.rotation.angle_to(&knots[2].rotation) < 1e-9);
    let d: Vec<f64> = out.windows(2).map(|w| (w[1].translation.vector - w[0].translation.vector).norm()).collect();
    for k in 1..d.len() - 1 {
        let neighbors = d[k - 1].max(d[k + 1]);
        assert!(d[k] <= 10.0 * neighbors + 1e-15, "jump at {k}");
    }
    let r: Vec<f64> = out.windows(2).map(|w| w[0].rotation.angle_to(&w[1].rotation)).collect();
    for k in 1..r.len() - 1 {
        assert!(r[k] <= 10.0 * r[k - 1].max(r[k + 1]) + 1e-12, "rotation jump at {k}");
    }
}

#[test]
fn spline_of_identical_knots_is_constant() {
    let p = pose(0.4, -0.2, 0.3, 0.1, 0.05, 1.0);
    for degree in 1..=3 {
        let cfg = SplineConfig { degree, dt: 0.5, samples_per_segment: 20 };
        for q in bspline_se3(&[p; 4], &cfg).unwrap() {
            assert!((q.translation.vector - p.translation.vector).norm() < 1e-12);
            assert!(q.rotation.angle_to(&p.rotation) < 1e-9);
        }
    }
}

#[test]
fn collinear_spline_stays_on_segment() {
    let a = Vector3::new(-0.2, 0.1, 0.2);
    let b = Vector3::new(0.5, -0.3, 0.4);
    let knots: Vec<Pose> = [0.0, 0.7, 0.2, 1.0]
        .iter()
        .map(|s| Isometry3::from_parts(Translation3::from(a + (b - a) * *s), UnitQuaternion::identity()))
        .collect();
    let cfg = SplineConfig { degree: 2, dt: 1.0, samples_per_segment: 50 };
    let dir = (b - a).normalize();
    for q in bspline_se3(&knots, &cfg).unwrap() {
        let v = q.translation.vector - a;
        let along = v.dot(&dir);
        assert!((v - dir * along).norm() < 1e-9);
        assert!(along >= -1e-9 && along <= (b - a).norm() + 1e-9);
    }
}

#[test]
fn spline_needs_enough_knots() {
    let p = pose(0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let cfg = SplineConfig { degree: 3, dt: 1.0, samples_per_segment: 4 };
    assert_eq!(
        bspline_se3(&[p; 3], &cfg),
        Err(LocalPlanError::InsufficientKnots { got: 3, need: 4 })
    );
}

fn assert_plan_valid(m: &RobotModel, map: &ElevationMap, states: &[FullBodyState]) {
    for (k, s) in states.iter().enumerate() {
        let r = check_state(m, map, s).unwrap();
        assert!(r.is_valid(), "state {k}: {:?}", r.failure());
    }
    for (k, w) in states.windows(2).enumerate() {
        assert!(check_segment(m, map, &w[0], &w[1], SEGMENT_STEP).unwrap().valid, "segment {k}");
    }
}

#[test]
fn flat_step_takes_longest_candidate() {
    let map = flat();
    for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
        let lp = LocalPlanner::new(&m, &map);
        // Starting from a stand leaves the first support legs a full step
        // behind, so the gait is warmed up before the measured step.
        let mut start = lp.stand_at(&Point2::new(-1.0, 0.2), 0.0).unwrap();
        for _ in 0..2 {
            let warm = lp.plan_step(&start, &Point2::new(1.0, 0.2), 0.0).unwrap();
            start = *warm.end_state();
        }
        let target = Point2::new(start.xy().x + m.max_step, start.xy().y);
        let plan = lp.plan_step(&start, &target, 0.0).unwrap();
        assert_eq!(plan.states[0], start);
        let end = plan.end_state();
        assert!((end.xy() - target).norm() < 1e-9, "{}: ended at {}", m.name(), end.xy());
        assert_plan_valid(&m, &map, &plan.states);
        assert_eq!(plan.body_knots[0][0], start.body_pose);
        assert_eq!(plan.states.len(), plan.times.len());
    }
}

#[test]
fn rough_steps_stay_valid() {
    let map = rough();
    let m = RobotModel::hexapod();
    let lp = LocalPlanner::new(&m, &map);
    let mut s = lp.stand_at(&Point2::new(-2.0, 0.5), 0.0).unwrap();
    for _ in 0..6 {
        let plan = lp.plan_step(&s, &Point2::new(2.0, 0.5), 0.0).unwrap();
        assert_plan_valid(&m, &map, &plan.states);
        s = *plan.end_state();
    }
    assert!(s.xy().x > -1.9);
}

#[test]
fn zero_length_step_is_identity() {
    let map = flat();
    let m = RobotModel::hexapod();
    let lp = LocalPlanner::new(&m, &map);
    let start = lp.stand_at(&Point2::new(0.5, 0.5), 0.3).unwrap();
    let plan = plan_step(&m, &map, &start, &start.xy(), yaw_of(&start.body_pose)).unwrap();
    assert!(plan.states.iter().all(|s| *s == start));
}

#[test]
fn step_into_box_face_is_infeasible() {
    let map = generate_scenario(&ScenarioSpec::new(ScenarioKind::Box, 0)).unwrap();
    let m = RobotModel::hexapod();
    let lp = LocalPlanner::new(&m, &map);
    let start = lp.stand_at(&Point2::new(-0.9, 0.0), 0.0).unwrap();
    assert_eq!(
        lp.plan_step(&start, &Point2::new(-0.45, 0.0), 0.0),
        Err(LocalPlanError::StepInfeasible)
    );
}

#[test]
fn transition_ends_exactly_at_target() {
    let map = rough();
    for m in [RobotModel::hexapod(), RobotModel::quadruped()] {
        let lp = LocalPlanner::new(&m, &map);
        let a = lp.stand_at(&Point2::new(1.0, -1.0), 0.0).unwrap();
        let b = lp.stand_at(&Point2::new(1.08, -0.95), 0.4).unwrap();
        let plan = lp.plan_transition(&a, &b).unwrap();
        assert_eq!(plan.states[0], a);
        assert_eq!(*plan.end_state(), b);
        assert_plan_valid(&m, &map, &plan.states);
    }
}

#[test]
fn stable_sequence_keeps_midpoint() {
    let map = flat();
    let m = RobotModel::hexapod();
    let lp = LocalPlanner::new(&m, &map);
    let a = lp.stand_at(&Point2::new(0.0, 0.0), 0.0).unwrap();
    let b = lp.stand_at(&Point2::new(0.02, 0.0), 0.0).unwrap();
    let (q, seq) = stabilize_path(&m, &map, &[a, b]).unwrap();
    assert_eq!(seq, vec![a, b]);
    assert!((pose_xy(&q) - Point2::new(0.01, 0.0)).norm() < 1e-12);
}

#[test]
fn quadruped_swing_is_displaced_into_triangle() {
    let map = flat();
    let m = RobotModel::quadruped();
    let lp = LocalPlanner::new(&m, &map);
    let mut s = lp.stand_at(&Point2::new(0.0, 0.0), 0.0).unwrap();
    // Lift the right front leg: the centered body sits on the LF-RH diagonal.
    s.stance[1] = false;
    s.foot_world[1].z += 0.05;
    let s = FullBodyState::from_feet(&m, s.body_pose, &s.foot_world, s.stance).unwrap();
    let before = stability_margin(&s).unwrap();
    assert!(before <= STABILITY_THRESHOLD);
    let d = stabilizing_displacement(&s).unwrap();
    // Toward the interior: the centroid of the stance triangle.
    let centroid = [0usize, 2, 3].iter().map(|&l| s.foot_world[l].xy().coords).sum::<Vector2<f64>>() / 3.0;
    assert!(d.dot(&(centroid - s.xy().coords)) > 0.0);
    let (_, seq) = stabilize_path(&m, &map, &[s]).unwrap();
    let after = stability_margin(&seq[0]).unwrap();
    assert!(after >= STABILITY_THRESHOLD, "margin {after}");
    assert!((seq[0].xy() - s.xy() - d).norm() < 1e-12);
}

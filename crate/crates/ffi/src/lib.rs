//! C ABI for walkplan.
//!
//! Maps, robots and paths are opaque handles created and freed through
//! this interface. Every fallible call returns a `WpStatus`; on failure a
//! message for the calling thread is available from `wp_last_error`.
//! Panics never cross the boundary; they surface as `WP_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};


use nalgebra::Point2;
use walkplan::bench::export_path;
use walkplan::local_planner::LocalPlanner;
use walkplan::metering::ClockKind;
use walkplan::planners::{plan, FullBodyPath, PlannerConfig, PlannerError, PlannerKind};
use walkplan::robot::RobotModel;
use walkplan::terrain::{generate_scenario, load_map, ElevationMap, ScenarioKind, ScenarioSpec};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfBounds = 3,
    Parse = 4,
    InvalidStart = 5,
    InvalidGoal = 6,
    Timeout = 7,
    NoPath = 8,
    Planner = 9,
    Panic = 10,
}

/// Elevation map handle.
pub struct WpMap(ElevationMap);

/// Robot model handle.
pub struct WpRobot(RobotModel);

/// Planned path handle.
pub struct WpPath {
    path: FullBodyPath,
    robot: RobotModel,
    initial_length: f64,
}

/// Planner settings; obtain defaults from `wp_planner_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WpPlannerConfig {
    pub opt_time: f64,
    pub time_limit: f64,
    pub seed: u64,
    pub d_rrt: f64,
    pub n_rewire: u32,
    pub goal_tolerance: f64,
    /// Measure budgets in wall-clock seconds instead of deterministic work.
    pub wall_clock: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn fail(status: WpStatus, msg: impl Into<String>) -> WpStatus {
    set_error(msg);
    status
}

/// Runs `f`, converting panics into `WP_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> WpStatus) -> WpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(WpStatus::Panic, msg)
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, WpStatus> {
    if p.is_null() {
        return Err(fail(WpStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| fail(WpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn planner_status(e: &PlannerError) -> WpStatus {
    let s = match e {
        PlannerError::Timeout => WpStatus::Timeout,
        PlannerError::NoPath => WpStatus::NoPath,
        PlannerError::InvalidStart => WpStatus::InvalidStart,
        PlannerError::InvalidGoal { .. } => WpStatus::InvalidGoal,
        PlannerError::InvalidConfig(_) => WpStatus::InvalidArgument,
        _ => WpStatus::Planner,
    };
    fail(s, e.to_string())
}

/// Message describing the last failure on this thread. Valid until the
/// next failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn wp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn wp_status_name(status: WpStatus) -> *const c_char {
    let s: &'static CStr = match status {
        WpStatus::Ok => c"ok",
        WpStatus::NullPointer => c"null pointer",
        WpStatus::InvalidArgument => c"invalid argument",
        WpStatus::OutOfBounds => c"out of bounds",
        WpStatus::Parse => c"parse error",
        WpStatus::InvalidStart => c"invalid start",
        WpStatus::InvalidGoal => c"invalid goal",
        WpStatus::Timeout => c"timeout",
        WpStatus::NoPath => c"no path",
        WpStatus::Planner => c"planner error",
        WpStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Builds a benchmark scenario map (`flat`, `rough`, `box`, `bugtrap`).
///
/// # Safety
/// `kind` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wp_map_scenario(kind: *const c_char, seed: u64, out: *mut *mut WpMap) -> WpStatus {
    guard(|| {
        if out.is_null() {
            return fail(WpStatus::NullPointer, "out is null");
        }
        let kind = match str_arg(kind, "kind") {
            Ok(k) => k,
            Err(s) => return s,
        };
        let kind: ScenarioKind = match kind.parse() {
            Ok(k) => k,
            Err(e) => return fail(WpStatus::InvalidArgument, e),
        };
        match generate_scenario(&ScenarioSpec::new(kind, seed)) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(WpMap(m)));
                WpStatus::Ok
            }
            Err(e) => fail(WpStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parses a map in the text format written by `bench run`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wp_map_load(text: *const c_char, out: *mut *mut WpMap) -> WpStatus {
    guard(|| {
        if out.is_null() {
            return fail(WpStatus::NullPointer, "out is null");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match load_map(text) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(WpMap(m)));
                WpStatus::Ok
            }
            Err(e) => fail(WpStatus::Parse, e.to_string()),
        }
    })
}

/// # Safety
/// `map` must come from `wp_map_*` and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn wp_map_free(map: *mut WpMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Interpolated terrain height at `(x, y)`.
///
/// # Safety
/// `map` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wp_map_height_at(map: *const WpMap, x: f64, y: f64, out: *mut f64) -> WpStatus {
    guard(|| {
        if map.is_null() || out.is_null() {
            return fail(WpStatus::NullPointer, "map or out is null");
        }
        match (*map).0.height_at(&Point2::new(x, y)) {
            Ok(h) => {
                *out = h;
                WpStatus::Ok
            }
            Err(e) => fail(WpStatus::OutOfBounds, e.to_string()),
        }
    })
}

/// Robot model by name (`hexapod` or `quadruped`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn wp_robot_new(name: *const c_char, out: *mut *mut WpRobot) -> WpStatus {
    guard(|| {
        if out.is_null() {
            return fail(WpStatus::NullPointer, "out is null");
        }
        let name = match str_arg(name, "name") {
            Ok(n) => n,
            Err(s) => return s,
        };
        match RobotModel::by_name(name) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(WpRobot(m)));
                WpStatus::Ok
            }
            Err(e) => fail(WpStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// # Safety
/// `robot` must come from `wp_robot_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wp_robot_free(robot: *mut WpRobot) {
    if !robot.is_null() {
        drop(Box::from_raw(robot));
    }
}

#[no_mangle]
pub extern "C" fn wp_planner_config_default() -> WpPlannerConfig {
    let d = PlannerConfig::default();
    WpPlannerConfig {
        opt_time: d.opt_time,
        time_limit: d.time_limit,
        seed: d.rng_seed,
        d_rrt: d.d_rrt,
        n_rewire: d.n_rewire as u32,
        goal_tolerance: d.goal_tolerance,
        wall_clock: d.clock == ClockKind::Wall,
    }
}

/// Plans from a standing pose at `(start_x, start_y, start_yaw)` to the
/// point `(goal_x, goal_y)`. `planner` is one of `rrtconnect`,
/// `guidedrrt`, `rrtstarconnect`, `irrtstarconnect`, `igrsc`.
///
/// # Safety
/// `map` and `robot` must be live handles, `planner` a NUL-terminated
/// string, `cfg` null (defaults) or readable, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wp_plan(
    map: *const WpMap,
    robot: *const WpRobot,
    planner: *const c_char,
    start_x: f64,
    start_y: f64,
    start_yaw: f64,
    goal_x: f64,
    goal_y: f64,
    cfg: *const WpPlannerConfig,
    out: *mut *mut WpPath,
) -> WpStatus {
    guard(|| {
        if map.is_null() || robot.is_null() || out.is_null() {
            return fail(WpStatus::NullPointer, "map, robot or out is null");
        }
        let kind: PlannerKind = match str_arg(planner, "planner").map(str::parse) {
            Ok(Ok(k)) => k,
            Ok(Err(e)) => return fail(WpStatus::InvalidArgument, e),
            Err(s) => return s,
        };
        let c = if cfg.is_null() { wp_planner_config_default() } else { *cfg };
        let pc = PlannerConfig {
            opt_time: c.opt_time,
            time_limit: c.time_limit,
            rng_seed: c.seed,
            d_rrt: c.d_rrt,
            n_rewire: c.n_rewire as usize,
            goal_tolerance: c.goal_tolerance,
            clock: if c.wall_clock { ClockKind::Wall } else { ClockKind::Work },
            verify_trees: false,
            ..PlannerConfig::default()
        };
        let (map, model) = (&(*map).0, &(*robot).0);
        let start = match LocalPlanner::new(model, map).stand_at(&Point2::new(start_x, start_y), start_yaw) {
            Ok(s) => s,
            Err(e) => return fail(WpStatus::InvalidStart, e.to_string()),
        };
        match plan(kind, model, map, &start, &Point2::new(goal_x, goal_y), &pc) {
            Ok(o) => {
                *out = Box::into_raw(Box::new(WpPath { path: o.path, robot: model.clone(), initial_length: o.initial_length }));
                WpStatus::Ok
            }
            Err(e) => planner_status(&e),
        }
    })
}

/// # Safety
/// `path` must come from `wp_plan` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wp_path_free(path: *mut WpPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of states in the path; 0 for null.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wp_path_state_count(path: *const WpPath) -> usize {
    if path.is_null() {
        0
    } else {
        (*path).path.states.len()
    }
}

/// Horizontal body path length in meters; NaN for null.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wp_path_length(path: *const WpPath) -> f64 {
    if path.is_null() {
        f64::NAN
    } else {
        (*path).path.length
    }
}

/// Length of the first path found, before any optimization; NaN for null.
///
/// # Safety
/// `path` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wp_path_initial_length(path: *const WpPath) -> f64 {
    if path.is_null() {
        f64::NAN
    } else {
        (*path).initial_length
    }
}

/// Body position of state `index` written to `xyz[0..3]`.
///
/// # Safety
/// `path` must be a live handle and `xyz` must hold 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn wp_path_body_position(path: *const WpPath, index: usize, xyz: *mut f64) -> WpStatus {
    guard(|| {
        if path.is_null() || xyz.is_null() {
            return fail(WpStatus::NullPointer, "path or xyz is null");
        }
        let p = &*path;
        let states = &p.path.states;
        let Some(s) = states.get(index) else {
            return fail(WpStatus::OutOfBounds, format!("state {index} of {}", states.len()));
        };
        let t = s.body_pose.translation.vector;
        let out = std::slice::from_raw_parts_mut(xyz, 3);
        out.copy_from_slice(&[t.x, t.y, t.z]);
        WpStatus::Ok
    })
}

/// Path as a JSON document. Free the string with `wp_string_free`.
///
/// # Safety
/// `path` must be a live handle, `scenario` null or a NUL-terminated
/// string, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn wp_path_to_json(path: *const WpPath, scenario: *const c_char, seed: u64, out: *mut *mut c_char) -> WpStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(WpStatus::NullPointer, "path or out is null");
        }
        let scenario = if scenario.is_null() {
            ""
        } else {
            match str_arg(scenario, "scenario") {
                Ok(s) => s,
                Err(s) => return s,
            }
        };
        let p = &*path;
        let doc = export_path(&p.robot, &p.path, scenario, seed);
        match serde_json::to_string(&doc).map(CString::new) {
            Ok(Ok(s)) => {
                *out = s.into_raw();
                WpStatus::Ok
            }
            _ => fail(WpStatus::Planner, "could not serialize path"),
        }
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}


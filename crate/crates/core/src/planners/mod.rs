//! Sampling-based full-body planners: RRT-Connect, GuidedRRT, RRT*-Connect,
//! Informed RRT*-Connect and IGRSC (GuidedRRT followed by informed
//! optimization of the injected path).

pub mod connect;
pub mod guide;
pub mod guided;
pub mod path;
pub mod sampling;
pub mod search;
pub mod star;
pub mod tree;

use nalgebra::Point2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{check_state, ConstraintError};
use crate::local_planner::LocalPlanError;
use crate::metering::ClockKind;
use crate::robot::{FullBodyState, RobotModel};
use crate::terrain::{ElevationMap, TerrainError};

pub use path::{inject_path_as_tree, path_length, FullBodyPath, Segment};
pub use sampling::{gamma_lower_bound, informed_sample, rewire_radius};
pub use star::{SampleRecord, Sampler};

/// Margin over the lower bound on the rewiring scale.
pub const GAMMA_FACTOR: f64 = 1.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("time limit exceeded before a path was found")]
    Timeout,
    #[error("no path on the coarse grid")]
    NoPath,
    #[error("c_best {c_best} is shorter than the focal distance {c_min}")]
    DegenerateEllipse { c_best: f64, c_min: f64 },
    #[error("the informed ellipse does not overlap the sampling bounds")]
    EmptySampleRegion,
    #[error("path needs at least two states")]
    EmptyPath,
    #[error("re-parenting would create a cycle")]
    InvalidRewire,
    #[error("no valid standing state at ({x:.3}, {y:.3})")]
    InvalidGoal { x: f64, y: f64 },
    #[error("start state is not valid")]
    InvalidStart,
    #[error("invalid planner configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Local(#[from] LocalPlanError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Temporary-goal spacing along the guide, meters.
    pub d_rrt: f64,
    /// Rewiring candidates per new node.
    pub n_rewire: usize,
    /// Rewiring scale; derived from the free area when `None`.
    pub gamma: Option<f64>,
    pub dim: usize,
    /// Optimization budget after the first path, seconds.
    pub opt_time: f64,
    /// Budget for finding the first path, seconds.
    pub time_limit: f64,
    pub rng_seed: u64,
    pub goal_tolerance: f64,
    /// Budget of one GuidedRRT leg, seconds.
    pub leg_time_limit: f64,
    /// Longest walk per RRT* extension, meters.
    pub max_extend: f64,
    /// Resolution of the guide grid, meters.
    pub coarse_res: f64,
    pub clock: ClockKind,
    /// Record every informed sample with the bound used to draw it.
    pub audit_samples: bool,
    /// Recompute all tree costs after each rewire and panic on mismatch.
    pub verify_trees: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            d_rrt: 1.0,
            n_rewire: 3,
            gamma: None,
            dim: 2,
            opt_time: 10.0,
            time_limit: 60.0,
            rng_seed: 42,
            goal_tolerance: 0.05,
            leg_time_limit: 5.0,
            max_extend: 1.0,
            coarse_res: guide::COARSE_RESOLUTION,
            clock: ClockKind::Work,
            audit_samples: false,
            verify_trees: cfg!(debug_assertions),
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let positive = [
            ("d_rrt", self.d_rrt),
            ("opt_time", self.opt_time),
            ("time_limit", self.time_limit),
            ("goal_tolerance", self.goal_tolerance),
            ("leg_time_limit", self.leg_time_limit),
            ("max_extend", self.max_extend),
            ("coarse_res", self.coarse_res),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlannerError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_rewire < 1 || self.dim < 1 {
            return Err(PlannerError::InvalidConfig("n_rewire and dim must be at least 1".into()));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(PlannerError::InvalidConfig(format!("gamma must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    RrtConnect,
    GuidedRrt,
    RrtStarConnect,
    InformedRrtStarConnect,
    Igrsc,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 5] = [
        PlannerKind::RrtConnect,
        PlannerKind::GuidedRrt,
        PlannerKind::RrtStarConnect,
        PlannerKind::InformedRrtStarConnect,
        PlannerKind::Igrsc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlannerKind::RrtConnect => "rrtconnect",
            PlannerKind::GuidedRrt => "guidedrrt",
            PlannerKind::RrtStarConnect => "rrtstarconnect",
            PlannerKind::InformedRrtStarConnect => "irrtstarconnect",
            PlannerKind::Igrsc => "igrsc",
        }
    }

    /// Whether the planner keeps optimizing after its first path.
    pub fn is_anytime(&self) -> bool {
        matches!(self, PlannerKind::RrtStarConnect | PlannerKind::InformedRrtStarConnect | PlannerKind::Igrsc)
    }
}

impl std::str::FromStr for PlannerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown planner '{s}'"))
    }
}

impl std::fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Result of one planner run.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    /// Final path; its `plan_time` is when it was found.
    pub path: FullBodyPath,
    pub initial_length: f64,
    /// Time at which the first path was available, seconds.
    pub initial_time: f64,
    pub node_count: usize,
    /// `(time, length)` for the first path and each accepted improvement.
    pub improvements: Vec<(f64, f64)>,
    pub samples: Vec<SampleRecord>,
}

impl PlanOutcome {
    fn single(path: FullBodyPath, node_count: usize) -> Self {
        Self {
            initial_length: path.length,
            initial_time: path.plan_time,
            improvements: vec![(path.plan_time, path.length)],
            path,
            node_count,
            samples: Vec::new(),
        }
    }
}

impl From<star::StarResult> for PlanOutcome {
    fn from(r: star::StarResult) -> Self {
        Self {
            path: r.path,
            initial_length: r.initial_length,
            initial_time: r.initial_time,
            node_count: r.node_count,
            improvements: r.improvements,
            samples: r.samples,
        }
    }
}

fn prepare<'a>(
    model: &'a RobotModel,
    map: &'a ElevationMap,
    start: &FullBodyState,
    cfg: &PlannerConfig,
) -> Result<search::Search<'a>, PlannerError> {
    cfg.validate()?;
    if !check_state(model, map, start)?.is_valid() {
        return Err(PlannerError::InvalidStart);
    }
    Ok(search::Search::new(model, map, cfg))
}

/// Trivial outcome when the start already satisfies the goal.
fn at_goal(start: &FullBodyState, goal: &Point2<f64>, cfg: &PlannerConfig) -> Option<PlanOutcome> {
    ((start.xy() - goal).norm() <= cfg.goal_tolerance).then(|| PlanOutcome::single(FullBodyPath::new(vec![*start]), 1))
}

fn goal_state(s: &search::Search<'_>, start: &FullBodyState, goal: &Point2<f64>) -> Result<FullBodyState, PlannerError> {
    s.stand(goal, star::goal_heading(start, goal))
}

fn default_gamma(model: &RobotModel, map: &ElevationMap, cfg: &PlannerConfig) -> f64 {
    cfg.gamma.unwrap_or_else(|| {
        let grid = guide::CoarseGrid::from_map(map, model, cfg.coarse_res);
        GAMMA_FACTOR * gamma_lower_bound(cfg.dim, grid.free_area().max(cfg.coarse_res * cfg.coarse_res))
    })
}

pub fn rrt_connect(
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    goal: &Point2<f64>,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome, PlannerError> {
    let mut s = prepare(model, map, start, cfg)?;
    if let Some(o) = at_goal(start, goal, cfg) {
        return Ok(o);
    }
    let g = goal_state(&s, start, goal)?;
    let bounds = s.bounds;
    let r = connect::connect_search(&mut s, start, &g, &bounds, cfg.time_limit)?;
    let mut path = r.path;
    path.plan_time = s.elapsed();
    Ok(PlanOutcome::single(path, r.node_count))
}

pub fn guided_rrt(
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    goal: &Point2<f64>,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome, PlannerError> {
    let mut s = prepare(model, map, start, cfg)?;
    if let Some(o) = at_goal(start, goal, cfg) {
        return Ok(o);
    }
    let r = guided::guided_search(&mut s, start, goal)?;
    let mut path = r.path;
    path.plan_time = s.elapsed();
    Ok(PlanOutcome::single(path, r.node_count))
}

pub fn rrt_star_connect(
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    goal: &Point2<f64>,
    cfg: &PlannerConfig,
    sampler: Sampler,
) -> Result<PlanOutcome, PlannerError> {
    let mut s = prepare(model, map, start, cfg)?;
    if let Some(o) = at_goal(start, goal, cfg) {
        return Ok(o);
    }
    let g = goal_state(&s, start, goal)?;
    let gamma = default_gamma(model, map, cfg);
    let mut star = star::StarSearch::new(&mut s, start, &g, gamma);
    star.run(sampler)?;
    Ok(star.finish().into())
}

pub fn informed_rrt_star_connect(
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    goal: &Point2<f64>,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome, PlannerError> {
    rrt_star_connect(model, map, start, goal, cfg, Sampler::Informed)
}

pub fn igrsc(
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    goal: &Point2<f64>,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome, PlannerError> {
    let mut s = prepare(model, map, start, cfg)?;
    if let Some(o) = at_goal(start, goal, cfg) {
        return Ok(o);
    }
    let guided = guided::guided_search(&mut s, start, goal)?;
    let gamma = default_gamma(model, map, cfg);
    let (ta, tb, _) = inject_path_as_tree(&guided.path)?;
    let mut star = star::StarSearch::injected(&mut s, (ta, tb), gamma);
    star.run(Sampler::Informed)?;
    let mut out: PlanOutcome = star.finish().into();
    out.node_count += guided.node_count;
    Ok(out)
}

pub fn plan(
    kind: PlannerKind,
    model: &RobotModel,
    map: &ElevationMap,
    start: &FullBodyState,
    goal: &Point2<f64>,
    cfg: &PlannerConfig,
) -> Result<PlanOutcome, PlannerError> {
    match kind {
        PlannerKind::RrtConnect => rrt_connect(model, map, start, goal, cfg),
        PlannerKind::GuidedRrt => guided_rrt(model, map, start, goal, cfg),
        PlannerKind::RrtStarConnect => rrt_star_connect(model, map, start, goal, cfg, Sampler::Uniform),
        PlannerKind::InformedRrtStarConnect => informed_rrt_star_connect(model, map, start, goal, cfg),
        PlannerKind::Igrsc => igrsc(model, map, start, goal, cfg),
    }
}

//! Benchmark harness: runs planners over scenario × robot × planner ×
//! trial grids, writes per-trial and summary CSVs and exports paths.

pub mod export;

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::local_planner::LocalPlanner;
use crate::metering::PlanClock;
use crate::planners::{plan, FullBodyPath, PlannerConfig, PlannerError, PlannerKind};
use crate::robot::{RobotError, RobotKind, RobotModel};
use crate::terrain::{generate_scenario, save_map, ScenarioKind, ScenarioSpec, TerrainError};

pub use export::{export_path, export_scene, import_path, PathDocument, SceneOverlay};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error("invalid benchmark configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub scenarios: Vec<ScenarioKind>,
    pub robots: Vec<RobotKind>,
    pub planners: Vec<PlannerKind>,
    pub trials: usize,
    /// Trial `k` runs with seed `seed + k`.
    pub seed: u64,
    /// Budgets, clock and tuning shared by every trial; the seed is replaced.
    pub planner: PlannerConfig,
    /// Worker threads; 1 runs the trials in order on the calling thread.
    pub jobs: usize,
    /// Seed for the rough scenario's terrain.
    pub terrain_seed: u64,
    /// Bug-trap entrance width, meters.
    pub entrance_width: f64,
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.scenarios.is_empty() || self.robots.is_empty() || self.planners.is_empty() {
            return Err(BenchError::InvalidConfig("scenario, robot and planner sets must be non-empty".into()));
        }
        if self.trials == 0 || self.jobs == 0 {
            return Err(BenchError::InvalidConfig("trials and jobs must be at least 1".into()));
        }
        self.planner.validate()?;
        for &k in &self.scenarios {
            self.scenario_spec(k).validate()?;
        }
        Ok(())
    }

    pub fn scenario_spec(&self, kind: ScenarioKind) -> ScenarioSpec {
        ScenarioSpec::new(kind, self.terrain_seed).with_entrance_width(self.entrance_width)
    }

    /// Every cell of the sweep in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &scenario in &self.scenarios {
            for &robot in &self.robots {
                for &planner in &self.planners {
                    for trial in 0..self.trials {
                        out.push(Cell { scenario, robot, planner, trial, seed: self.seed + trial as u64 });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub scenario: ScenarioKind,
    pub robot: RobotKind,
    pub planner: PlannerKind,
    pub trial: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub scenario: ScenarioKind,
    pub robot: RobotKind,
    pub planner: PlannerKind,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    /// Time to the first path on success, time spent otherwise.
    pub plan_time: f64,
    /// Final path length; 0 on failure.
    pub path_length: f64,
    pub initial_length: f64,
    pub node_count: usize,
    pub improvement_log: Vec<(f64, f64)>,
    pub path: Option<FullBodyPath>,
    pub error: Option<String>,
}

/// Runs one cell. Failures of any kind are recorded, never propagated.
pub fn run_trial(cell: &Cell, cfg: &BenchConfig) -> TrialResult {
    let base = &cfg.planner;
    let mut r = TrialResult {
        scenario: cell.scenario,
        robot: cell.robot,
        planner: cell.planner,
        trial: cell.trial,
        seed: cell.seed,
        success: false,
        plan_time: 0.0,
        path_length: 0.0,
        initial_length: 0.0,
        node_count: 0,
        improvement_log: Vec::new(),
        path: None,
        error: None,
    };
    let spec = cfg.scenario_spec(cell.scenario);
    let map = match generate_scenario(&spec) {
        Ok(m) => m,
        Err(e) => {
            r.error = Some(e.to_string());
            return r;
        }
    };
    let model = RobotModel::from_kind(cell.robot);
    let start = match LocalPlanner::new(&model, &map).stand_at(&spec.default_start(), 0.0) {
        Ok(s) => s,
        Err(e) => {
            r.error = Some(format!("start: {e}"));
            return r;
        }
    };
    let cfg = PlannerConfig { rng_seed: cell.seed, ..base.clone() };
    let clock = PlanClock::start(cfg.clock);
    match plan(cell.planner, &model, &map, &start, &spec.default_goal(), &cfg) {
        Ok(o) => {
            r.success = true;
            r.plan_time = o.initial_time;
            r.path_length = o.path.length;
            r.initial_length = o.initial_length;
            r.node_count = o.node_count;
            r.improvement_log = o.improvements;
            r.path = Some(o.path);
        }
        Err(e) => {
            r.plan_time = clock.elapsed();
            r.error = Some(e.to_string());
        }
    }
    r
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<TrialResult>, BenchError> {
    cfg.validate()?;
    let cells = cfg.cells();
    if cfg.jobs == 1 {
        return Ok(cells.iter().map(|c| run_trial(c, cfg)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| BenchError::InvalidConfig(e.to_string()))?;
    Ok(pool.install(|| cells.par_iter().map(|c| run_trial(c, cfg)).collect()))
}

pub const TRIAL_HEADER: [&str; 9] =
    ["scenario", "robot", "planner", "trial", "seed", "success", "plan_time_s", "path_length_m", "node_count"];

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6}")
    } else {
        String::new()
    }
}

pub fn write_trials_csv<W: Write>(w: W, trials: &[TrialResult]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRIAL_HEADER)?;
    for t in trials {
        out.write_record([
            t.scenario.name().to_string(),
            t.robot.name().to_string(),
            t.planner.name().to_string(),
            t.trial.to_string(),
            t.seed.to_string(),
            t.success.to_string(),
            num(t.plan_time),
            if t.success { num(t.path_length) } else { String::new() },
            t.node_count.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_improvements_csv<W: Write>(w: W, trials: &[TrialResult]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["scenario", "robot", "planner", "trial", "time_s", "length_m"])?;
    for t in trials {
        for &(time, len) in &t.improvement_log {
            out.write_record([
                t.scenario.name().to_string(),
                t.robot.name().to_string(),
                t.planner.name().to_string(),
                t.trial.to_string(),
                num(time),
                num(len),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub robot: String,
    pub planner: String,
    pub trials: usize,
    pub success_rate: f64,
    /// Time and length statistics over successful trials; NaN when there
    /// are none (std needs two).
    pub mean_time: f64,
    pub std_time: f64,
    pub mean_length: f64,
    pub std_length: f64,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One summary per (scenario, robot, planner) group, in first-seen order.
pub fn summarize(trials: &[TrialResult]) -> Vec<Summary> {
    let mut keys: Vec<(ScenarioKind, RobotKind, PlannerKind)> = Vec::new();
    for t in trials {
        let k = (t.scenario, t.robot, t.planner);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(s, r, p)| {
            let group: Vec<&TrialResult> = trials.iter().filter(|t| (t.scenario, t.robot, t.planner) == (s, r, p)).collect();
            let ok: Vec<&&TrialResult> = group.iter().filter(|t| t.success).collect();
            let (mean_time, std_time) = mean_std(&ok.iter().map(|t| t.plan_time).collect::<Vec<_>>());
            let (mean_length, std_length) = mean_std(&ok.iter().map(|t| t.path_length).collect::<Vec<_>>());
            Summary {
                scenario: s.name().into(),
                robot: r.name().into(),
                planner: p.name().into(),
                trials: group.len(),
                success_rate: ok.len() as f64 / group.len() as f64,
                mean_time,
                std_time,
                mean_length,
                std_length,
            }
        })
        .collect()
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[Summary]) -> Result<(), BenchError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "scenario", "robot", "planner", "trials", "success_rate", "mean_time_s", "std_time_s", "mean_length_m", "std_length_m",
    ])?;
    for s in rows {
        out.write_record([
            s.scenario.clone(),
            s.robot.clone(),
            s.planner.clone(),
            s.trials.to_string(),
            num(s.success_rate),
            num(s.mean_time),
            num(s.std_time),
            num(s.mean_length),
            num(s.std_length),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// File name of an exported trial path.
pub fn path_file_name(t: &TrialResult) -> String {
    format!("{}_{}_{}_{:02}.json", t.scenario.name(), t.robot.name(), t.planner.name(), t.trial)
}

/// Writes `trials.csv`, `summary.csv`, `improvements.csv`, one JSON
/// document per successful path under `paths/` and the scenario maps
/// under `maps/`.
pub fn write_outputs(dir: &Path, cfg: &BenchConfig, trials: &[TrialResult]) -> Result<Vec<Summary>, BenchError> {
    fs::create_dir_all(dir.join("paths"))?;
    fs::create_dir_all(dir.join("maps"))?;
    write_trials_csv(fs::File::create(dir.join("trials.csv"))?, trials)?;
    write_improvements_csv(fs::File::create(dir.join("improvements.csv"))?, trials)?;
    let summary = summarize(trials);
    write_summary_csv(fs::File::create(dir.join("summary.csv"))?, &summary)?;
    let mut scenarios: Vec<ScenarioKind> = Vec::new();
    for t in trials {
        if !scenarios.contains(&t.scenario) {
            scenarios.push(t.scenario);
        }
        if let Some(p) = &t.path {
            let model = RobotModel::from_kind(t.robot);
            let doc = export_path(&model, p, t.scenario.name(), t.seed);
            fs::write(dir.join("paths").join(path_file_name(t)), serde_json::to_string_pretty(&doc)?)?;
        }
    }
    for s in scenarios {
        let map = generate_scenario(&cfg.scenario_spec(s))?;
        fs::write(dir.join("maps").join(format!("{}.map", s.name())), save_map(&map))?;
    }
    Ok(summary)
}

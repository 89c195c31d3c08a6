use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use walkplan::bench::{export_scene, import_path, run_benchmark, write_outputs, BenchConfig, PathDocument, SceneOverlay};
use walkplan::metering::ClockKind;
use walkplan::planners::{PlannerConfig, PlannerKind};
use walkplan::robot::RobotKind;
use walkplan::terrain::{load_map, ScenarioKind};

#[derive(Parser)]
#[command(name = "bench", about = "Benchmark full-body planners for legged robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark sweep and write CSVs, paths and maps to --out.
    Run {
        /// flat|rough|box|bugtrap|all
        #[arg(long, default_value = "all")]
        scenario: String,
        /// hexapod|quadruped|all
        #[arg(long, default_value = "hexapod")]
        robot: String,
        /// rrtconnect|guidedrrt|rrtstarconnect|irrtstarconnect|igrsc|all
        #[arg(long, default_value = "all")]
        planner: String,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Optimization budget after the first path, seconds.
        #[arg(long, default_value_t = 10.0)]
        opt_time: f64,
        /// Budget for the first path, seconds.
        #[arg(long, default_value_t = 60.0)]
        time_limit: f64,
        /// work (deterministic) or wall
        #[arg(long, default_value = "work")]
        clock: ClockKind,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Seed for generated terrain (rough scenario).
        #[arg(long, default_value_t = 0)]
        map_seed: u64,
        /// Bug-trap entrance width, meters.
        #[arg(long, default_value_t = 1.2)]
        entrance_width: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a map and an exported path as SVG.
    ExportScene {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Skip the stance-foot markers.
        #[arg(long)]
        no_footprints: bool,
    },
}

fn parse_set<T>(arg: &str, all: &[T]) -> Result<Vec<T>>
where
    T: std::str::FromStr + Clone,
    T::Err: std::fmt::Display,
{
    if arg == "all" {
        return Ok(all.to_vec());
    }
    arg.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow::anyhow!("{e}")))
        .collect()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { scenario, robot, planner, trials, seed, opt_time, time_limit, clock, jobs, map_seed, entrance_width, out } => {
            let cfg = BenchConfig {
                scenarios: parse_set(&scenario, &ScenarioKind::ALL)?,
                robots: parse_set(&robot, &[RobotKind::Hexapod, RobotKind::Quadruped])?,
                planners: parse_set(&planner, &PlannerKind::ALL)?,
                trials,
                seed,
                planner: PlannerConfig { opt_time, time_limit, clock, verify_trees: false, ..Default::default() },
                jobs,
                terrain_seed: map_seed,
                entrance_width,
            };
            let results = run_benchmark(&cfg)?;
            let summary = write_outputs(&out, &cfg, &results)?;
            println!("{:<9} {:<10} {:<16} {:>5} {:>9} {:>9} {:>9} {:>9}", "scenario", "robot", "planner", "succ", "t_mean", "t_std", "len_mean", "len_std");
            for s in summary {
                println!(
                    "{:<9} {:<10} {:<16} {:>5.2} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
                    s.scenario, s.robot, s.planner, s.success_rate, s.mean_time, s.std_time, s.mean_length, s.std_length
                );
            }
            println!("wrote {}", out.display());
        }
        Command::ExportScene { map, path, out, no_footprints } => {
            let text = fs::read_to_string(&map).with_context(|| format!("reading {}", map.display()))?;
            let map = load_map(&text)?;
            let loaded = match path {
                Some(p) => {
                    let doc: PathDocument = serde_json::from_str(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?;
                    Some(import_path(&doc)?.1)
                }
                None => None,
            };
            if let Some(p) = &loaded {
                if p.states.iter().any(|s| !map.contains(&s.xy())) {
                    bail!("path leaves the map");
                }
            }
            let overlay = SceneOverlay { path: loaded.as_ref(), footprints: !no_footprints, ..Default::default() };
            fs::write(&out, export_scene(&map, &overlay))?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

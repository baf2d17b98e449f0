//! `auvplan`: route and path planning for survey missions from scenario files.
//!
//! Verbosity is controlled by `AUVPLAN_LOG` (`error`, `warn`, `info`, `debug`).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use auvplan_core::executor::{mission_metrics, run_mission, MissionSummary, RouteRecord};
use auvplan_core::export::{
    export_results, route_trace_rows, trajectory_rows, write_json, write_route_csv, write_rows, SUMMARY_FILE,
};
use auvplan_core::obstacles::ObstacleField;
use auvplan_core::path_planner::{plan_segment, SegmentRequest};
use auvplan_core::route_planner::plan_route;
use auvplan_core::scenario::{generate_scenario, load_scenario, save_scenario, BudgetSpec, GeneratorParams, Scenario};
use auvplan_core::seeds;
use auvplan_core::swarm::Execution;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

const LOG_ENV: &str = "AUVPLAN_LOG";

#[derive(Parser)]
#[command(name = "auvplan", version, about = "Task routing and collision-free path planning for AUV missions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a single segment through a random obstacle field.
    PlanPath(RunArgs),
    /// Plan a global route over the scenario graph.
    PlanRoute(RunArgs),
    /// Fly a full mission with re-planning.
    RunMission {
        #[command(flatten)]
        run: RunArgs,
        /// Number of independent missions; results go to `OUT/run_K`.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        repeats: u64,
    },
    /// Write a random scenario file.
    GenScenario {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        tasks: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        edge_density: f64,
        #[arg(long, default_value_t = 9000.0)]
        t_available: f64,
        #[arg(long, default_value_t = 3.0)]
        v_auv: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Master seed; defaults to the scenario's own.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Evaluate particles on one thread.
    #[arg(long)]
    sequential: bool,
}

impl RunArgs {
    fn load(&self) -> Result<(Scenario, u64, Execution)> {
        let s = load_scenario(&self.scenario)?;
        let seed = self.seed.unwrap_or(s.seed);
        let exec = if self.sequential { Execution::Sequential } else { Execution::Parallel };
        Ok((s, seed, exec))
    }
}

/// Normal completion or a planning outcome that counts as a failure.
enum Status {
    Ok,
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();

    match run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Failed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::PlanPath(args) => plan_path(&args),
        Command::PlanRoute(args) => route(&args),
        Command::RunMission { run, repeats } => mission(&run, repeats),
        Command::GenScenario { nodes, tasks, seed, out, edge_density, t_available, v_auv } => {
            let params = GeneratorParams { nodes, tasks, edge_density, ..GeneratorParams::default() };
            let s = generate_scenario(&params, BudgetSpec { t_available, v_auv }, seed)?;
            save_scenario(&s, &out).with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} ({} waypoints, {} edges)", out.display(), s.graph.waypoints.len(), s.graph.edges.len());
            Ok(Status::Ok)
        }
    }
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn plan_path(args: &RunArgs) -> Result<Status> {
    let (s, seed, execution) = args.load()?;
    let (start, target) = match s.segment {
        Some(seg) => (seg.start, seg.target),
        None => {
            let g = s.resolve_graph(seed)?;
            (g.position(g.start()), g.position(g.destination()))
        }
    };
    if start == target {
        bail!("segment start and target coincide");
    }
    let field = ObstacleField::spawn_between(&s.obstacles, start, target, seeds::derive(seed, &[seeds::STREAM_OBSTACLES, 0]))?;
    let req = SegmentRequest {
        start,
        target,
        field,
        v_auv: s.budget.v_auv,
        config: s.path_planner.clone(),
        seed: seeds::derive(seed, &[seeds::STREAM_PATH, 0]),
        execution,
    };
    let clock = Instant::now();
    let plan = plan_segment(&req)?;
    let cpu_time = clock.elapsed().as_secs_f64();

    prepare_dir(&args.out)?;
    write_rows(&args.out.join("path_trace.csv"), &plan.trace)?;
    write_rows(&args.out.join("trajectory.csv"), &trajectory_rows(&plan.curve))?;
    write_rows(&args.out.join("obstacles.csv"), &plan.obstacle_rows())?;
    let summary = json!({
        "seed": seed,
        "start": start,
        "target": target,
        "straight_time": start.distance(target) / s.budget.v_auv,
        "flight_time": plan.cost.flight_time,
        "violation": plan.cost.violation,
        "path_cost": plan.cost.total,
        "arc_length": plan.curve.arc_length,
        "cpu_time": cpu_time,
    });
    write_json(&args.out.join(SUMMARY_FILE), &summary)?;
    println!(
        "flight time {:.1} s, violation {}, cost {:.1}",
        plan.cost.flight_time, plan.cost.violation, plan.cost.total
    );
    Ok(if plan.cost.violation > 0.0 { Status::Failed } else { Status::Ok })
}

fn route(args: &RunArgs) -> Result<Status> {
    let (s, seed, execution) = args.load()?;
    let g = s.resolve_graph(seed)?;
    let t_available = s.budget.t_available;
    let clock = Instant::now();
    let plan = plan_route(&g, t_available, &s.route_planner, seeds::derive(seed, &[seeds::STREAM_ROUTE, 0]), execution)?;
    let cpu_time = clock.elapsed().as_secs_f64();
    let r = &plan.route;
    let record = RouteRecord {
        call: 1,
        wp_start: g.start(),
        wp_destination: g.destination(),
        task_count: r.task_count,
        weight: r.total_weight,
        cost: r.cost,
        cpu_time,
        t_available,
        t_route: r.total_time,
        valid: r.valid,
        sequence: r.sequence.clone(),
    };

    prepare_dir(&args.out)?;
    write_route_csv(&args.out.join("route.csv"), std::slice::from_ref(&record))?;
    write_rows(&args.out.join("route_trace.csv"), &route_trace_rows(&plan.trace))?;
    write_json(&args.out.join(SUMMARY_FILE), &record)?;
    println!(
        "route {} ({} tasks, weight {}, {:.1} of {:.1} s, {})",
        r.sequence_string(),
        r.task_count,
        r.total_weight,
        r.total_time,
        t_available,
        if r.valid { "valid" } else { "invalid" }
    );
    Ok(if r.valid { Status::Ok } else { Status::Failed })
}

fn mission(args: &RunArgs, repeats: u64) -> Result<Status> {
    let (s, seed, _) = args.load()?;
    let g = s.resolve_graph(seed)?;
    let budget = s.budget()?;
    prepare_dir(&args.out)?;

    let mut runs: Vec<(u64, u64, MissionSummary)> = Vec::new();
    for k in 1..=repeats {
        let (run_seed, dir) = if repeats == 1 {
            (seed, args.out.clone())
        } else {
            (seeds::derive(seed, &[seeds::STREAM_REPEAT, k]), args.out.join(format!("run_{k}")))
        };
        let log = run_mission(&g, &s.obstacles, budget, &s.route_planner, &s.path_planner, &s.executor, run_seed)?;
        let files = export_results(&log, &dir)?;
        log::info!("run {k}: wrote {} files to {}", files.len(), dir.display());
        let m = mission_metrics(&log);
        println!(
            "run {k}: {}{} after {} route and {} path calls, mission time {:.1} s, remaining {:.1} s, weight {}",
            label(&m.outcome),
            m.failure.map(|f| format!(" ({})", label(&f))).unwrap_or_default(),
            m.route_calls,
            m.path_calls,
            m.mission_time,
            m.t_remained,
            m.total_weight
        );
        runs.push((k, run_seed, m));
    }

    if repeats > 1 {
        write_runs(&args.out.join("runs.csv"), &runs)?;
    }
    let failed = runs.iter().filter(|(_, _, m)| m.failure.is_some()).count();
    Ok(if failed > 0 { Status::Failed } else { Status::Ok })
}

/// Serialized name of a unit enum variant.
fn label<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

#[derive(serde::Serialize)]
struct RunRow {
    run: u64,
    seed: u64,
    outcome: String,
    failure: String,
    route_calls: usize,
    path_calls: usize,
    mission_time: f64,
    t_remained: f64,
    total_weight: f64,
    total_violation: f64,
}

fn write_runs(path: &Path, runs: &[(u64, u64, MissionSummary)]) -> Result<()> {
    let rows: Vec<RunRow> = runs
        .iter()
        .map(|(k, seed, m)| RunRow {
            run: *k,
            seed: *seed,
            outcome: label(&m.outcome),
            failure: m.failure.map(|f| label(&f)).unwrap_or_default(),
            route_calls: m.route_calls,
            path_calls: m.path_calls,
            mission_time: m.mission_time,
            t_remained: m.t_remained,
            total_weight: m.total_weight,
            total_violation: m.total_violation,
        })
        .collect();
    write_rows(path, &rows)?;
    Ok(())
}

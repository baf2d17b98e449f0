//! Mission loop: plan a route, fly it segment by segment, and re-plan from
//! the current waypoint whenever a segment takes longer than expected.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::mission::{Edge, MissionBudget, MissionGraph};
use crate::obstacles::{FieldSpec, ObstacleField};
use crate::path_planner::{plan_segment, PathPlannerConfig, SegmentPlan, SegmentRequest};
use crate::route_planner::{plan_route, Route, RoutePlan, RoutePlannerConfig};
use crate::seeds;
use crate::swarm::Execution;

pub fn expected_edge_time(edge: &Edge, v_auv: f64) -> f64 {
    edge.distance / v_auv
}

/// Re-plan when the realised path time strictly exceeds the estimate.
pub fn replan_check(t_path: f64, t_expected: f64) -> bool {
    t_path > t_expected
}

/// Result of one local planner call.
#[derive(Debug, Clone)]
pub struct SegmentOutcome {
    pub t_path: f64,
    pub violation: f64,
    pub path_cost: f64,
    pub plan: Option<SegmentPlan>,
}

pub trait RoutePlanning {
    /// Plans from `graph.start()` to `graph.destination()`. `call` is the
    /// zero-based route-planner invocation index.
    fn plan(&mut self, graph: &MissionGraph, t_available: f64, call: usize) -> Result<RoutePlan>;
}

pub trait PathPlanning {
    /// Plans the segment `from -> to`. `call` is the zero-based path-planner
    /// invocation index over the whole mission.
    fn plan(&mut self, graph: &MissionGraph, from: usize, to: usize, call: usize) -> Result<SegmentOutcome>;
}

/// Route planner backed by the swarm search.
#[derive(Debug, Clone)]
pub struct SwarmRoutePlanner {
    pub config: RoutePlannerConfig,
    pub seed: u64,
    pub execution: Execution,
}

impl RoutePlanning for SwarmRoutePlanner {
    fn plan(&mut self, graph: &MissionGraph, t_available: f64, call: usize) -> Result<RoutePlan> {
        let seed = seeds::derive(self.seed, &[seeds::STREAM_ROUTE, call as u64]);
        plan_route(graph, t_available, &self.config, seed, self.execution)
    }
}

/// Path planner that spawns a fresh obstacle field around every segment.
#[derive(Debug, Clone)]
pub struct SwarmPathPlanner {
    pub config: PathPlannerConfig,
    pub field: FieldSpec,
    pub seed: u64,
    pub execution: Execution,
}

impl SwarmPathPlanner {
    pub fn field_for(&self, graph: &MissionGraph, from: usize, to: usize, call: usize) -> Result<ObstacleField> {
        let seed = seeds::derive(self.seed, &[seeds::STREAM_OBSTACLES, call as u64]);
        ObstacleField::spawn_between(&self.field, graph.position(from), graph.position(to), seed)
    }
}

impl PathPlanning for SwarmPathPlanner {
    fn plan(&mut self, graph: &MissionGraph, from: usize, to: usize, call: usize) -> Result<SegmentOutcome> {
        let req = SegmentRequest {
            start: graph.position(from),
            target: graph.position(to),
            field: self.field_for(graph, from, to, call)?,
            v_auv: graph.v_auv(),
            config: self.config.clone(),
            seed: seeds::derive(self.seed, &[seeds::STREAM_PATH, call as u64]),
            execution: self.execution,
        };
        let plan = plan_segment(&req)?;
        Ok(SegmentOutcome {
            t_path: plan.cost.flight_time,
            violation: plan.cost.violation,
            path_cost: plan.cost.total,
            plan: Some(plan),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExecutorConfig {
    /// Fraction of the remaining time withheld from the route planner to
    /// absorb the detours of realised paths.
    pub planning_reserve: f64,
}

impl Default for ExecutorConfig {
    fn default() -> Self {
        Self { planning_reserve: 0.05 }
    }
}

/// One global route-planner call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub call: usize,
    pub wp_start: usize,
    pub wp_destination: usize,
    pub task_count: usize,
    pub weight: f64,
    pub cost: f64,
    pub cpu_time: f64,
    /// Remaining mission time when the planner was called.
    pub t_available: f64,
    pub t_route: f64,
    pub valid: bool,
    pub sequence: Vec<usize>,
}

/// One local path-planner call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub route_id: usize,
    pub pp_call: usize,
    pub from: usize,
    pub to: usize,
    pub violation: f64,
    pub path_cost: f64,
    pub cpu_time: f64,
    pub t_path: f64,
    pub t_expected: f64,
    /// Remaining mission time after this segment.
    pub t_available: f64,
    pub replan: bool,
    /// Vehicle continues along the current route.
    pub pp_flag: bool,
    pub task_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    /// Remaining time went negative.
    BatteryExhausted,
    /// No path left from the current waypoint to the destination.
    Disconnected,
    /// The route planner returned a route that does not reach the destination.
    NoRoute,
}

/// Planner by-products kept for export; not part of the serialized log.
#[derive(Debug, Clone, Default)]
pub struct MissionArtifacts {
    pub route_traces: Vec<Vec<f64>>,
    pub segment_plans: Vec<Option<SegmentPlan>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MissionLog {
    pub routes: Vec<RouteRecord>,
    pub segments: Vec<SegmentRecord>,
    pub final_sequence: Vec<usize>,
    pub outcome: Outcome,
    pub failure: Option<FailureReason>,
    pub t_initial: f64,
    pub t_remained: f64,
    /// Edges deleted from the graph at re-plan time, in order.
    pub removed_edges: Vec<(usize, usize)>,
    #[serde(skip)]
    pub artifacts: MissionArtifacts,
}

impl MissionLog {
    pub fn is_success(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

/// Aggregates of a finished mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub outcome: Outcome,
    pub failure: Option<FailureReason>,
    pub route_calls: usize,
    pub path_calls: usize,
    pub total_violation: f64,
    pub total_path_cost: f64,
    pub route_cpu_time: f64,
    pub path_cpu_time: f64,
    pub mission_time: f64,
    pub t_initial: f64,
    pub t_remained: f64,
    pub total_weight: f64,
    pub final_sequence: Vec<usize>,
}

pub fn mission_metrics(log: &MissionLog) -> MissionSummary {
    let seg = &log.segments;
    MissionSummary {
        outcome: log.outcome,
        failure: log.failure,
        route_calls: log.routes.len(),
        path_calls: seg.len(),
        total_violation: seg.iter().map(|s| s.violation).sum(),
        total_path_cost: seg.iter().map(|s| s.path_cost).sum(),
        route_cpu_time: log.routes.iter().map(|r| r.cpu_time).sum(),
        path_cpu_time: seg.iter().map(|s| s.cpu_time).sum(),
        mission_time: seg.iter().map(|s| s.t_path).sum(),
        t_initial: log.t_initial,
        t_remained: log.t_remained,
        total_weight: seg.iter().map(|s| s.task_weight).sum(),
        final_sequence: log.final_sequence.clone(),
    }
}

/// Runs the mission with the given planners.
pub fn run_mission_with(
    graph: &MissionGraph,
    budget: MissionBudget,
    route_planner: &mut dyn RoutePlanning,
    path_planner: &mut dyn PathPlanning,
    cfg: &ExecutorConfig,
) -> Result<MissionLog> {
    let mut working = graph.clone();
    let destination = graph.destination();
    let mut current = graph.start();
    let mut t_available = budget.t_available;
    let mut log = MissionLog {
        routes: Vec::new(),
        segments: Vec::new(),
        final_sequence: vec![current],
        outcome: Outcome::Success,
        failure: None,
        t_initial: budget.t_available,
        t_remained: budget.t_available,
        removed_edges: Vec::new(),
        artifacts: MissionArtifacts::default(),
    };
    let mut pending_removal: Vec<(usize, usize)> = Vec::new();

    let finish = |log: &mut MissionLog, t: f64, failure: Option<FailureReason>| {
        log.t_remained = t;
        log.failure = failure;
        log.outcome = if failure.is_none() { Outcome::Success } else { Outcome::Failure };
    };

    while current != destination {
        working.set_start(current)?;
        if !working.is_reachable(current, destination) {
            log::info!("no path left from waypoint {current} to {destination}");
            finish(&mut log, t_available, Some(FailureReason::Disconnected));
            return Ok(log);
        }

        let call = log.routes.len();
        let clock = Instant::now();
        let plan = route_planner.plan(&working, t_available * (1.0 - cfg.planning_reserve), call)?;
        let cpu_time = clock.elapsed().as_secs_f64();
        let route: Route = plan.route;
        log::debug!("route call {}: {} (valid {})", call + 1, route.sequence_string(), route.valid);
        log.routes.push(RouteRecord {
            call: call + 1,
            wp_start: current,
            wp_destination: destination,
            task_count: route.task_count,
            weight: route.total_weight,
            cost: route.cost,
            cpu_time,
            t_available,
            t_route: route.total_time,
            valid: route.valid,
            sequence: route.sequence.clone(),
        });
        log.artifacts.route_traces.push(plan.trace);

        if route.end() != destination || route.sequence.len() < 2 {
            finish(&mut log, t_available, Some(FailureReason::NoRoute));
            return Ok(log);
        }

        let hops: Vec<(usize, usize)> = route.edges().collect();
        for (k, &(from, to)) in hops.iter().enumerate() {
            let edge = *working.edge(from, to).ok_or(crate::error::PlanError::MissingEdge { from, to })?;
            let t_expected = expected_edge_time(&edge, graph.v_auv());
            let clock = Instant::now();
            let outcome = path_planner.plan(&working, from, to, log.segments.len())?;
            let cpu_time = clock.elapsed().as_secs_f64();

            t_available -= outcome.t_path;
            let replan = replan_check(outcome.t_path, t_expected);
            let more = k + 1 < hops.len();
            log.segments.push(SegmentRecord {
                route_id: call + 1,
                pp_call: k + 1,
                from,
                to,
                violation: outcome.violation,
                path_cost: outcome.path_cost,
                cpu_time,
                t_path: outcome.t_path,
                t_expected,
                t_available,
                replan,
                pp_flag: !replan && more,
                task_weight: edge.task_weight,
            });
            log.artifacts.segment_plans.push(outcome.plan);
            log.final_sequence.push(to);
            pending_removal.push((from, to));
            current = to;

            if t_available < 0.0 {
                finish(&mut log, t_available, Some(FailureReason::BatteryExhausted));
                return Ok(log);
            }
            if current == destination {
                break;
            }
            if replan {
                working.remove_edges(&pending_removal);
                log.removed_edges.append(&mut pending_removal);
                break;
            }
        }
    }

    finish(&mut log, t_available, None);
    Ok(log)
}

/// Runs a mission with swarm planners for both layers. Obstacle fields and
/// planner streams are derived from `seed`.
pub fn run_mission(
    graph: &MissionGraph,
    field: &FieldSpec,
    budget: MissionBudget,
    route_cfg: &RoutePlannerConfig,
    path_cfg: &PathPlannerConfig,
    exec_cfg: &ExecutorConfig,
    seed: u64,
) -> Result<MissionLog> {
    let mut routes = SwarmRoutePlanner { config: route_cfg.clone(), seed, execution: Execution::Parallel };
    let mut paths = SwarmPathPlanner { config: path_cfg.clone(), field: field.clone(), seed, execution: Execution::Parallel };
    run_mission_with(graph, budget, &mut routes, &mut paths, exec_cfg)
}

//! Global planner: swarm search over waypoint priorities, decoded into routes
//! by a greedy priority-adjacency walk.

use serde::{Deserialize, Serialize};

use crate::error::{domain, PlanError, Result};
use crate::mission::MissionGraph;
use crate::swarm::{optimize_observed, Execution, Problem, SwarmConfig, SwarmSettings};

pub const PRIORITY_RANGE: [f64; 2] = [-100.0, 100.0];
pub const DEFAULT_INFEASIBLE_PENALTY: f64 = 1e6;

/// One real priority per waypoint; entry `i` belongs to waypoint `i + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityGenome(pub Vec<f64>);

impl PriorityGenome {
    pub fn priority(&self, id: usize) -> f64 {
        self.0[id - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteObjective {
    pub t_available: f64,
    /// Weight of the normalised time residual.
    pub alpha: f64,
    /// Weight of the normalised collected task weight.
    pub beta: f64,
    pub infeasible_penalty: f64,
}

impl RouteObjective {
    pub fn new(t_available: f64) -> Self {
        Self { t_available, alpha: 1.0, beta: 1.0, infeasible_penalty: DEFAULT_INFEASIBLE_PENALTY }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub sequence: Vec<usize>,
    pub task_count: usize,
    pub total_weight: f64,
    pub total_time: f64,
    pub cost: f64,
    pub valid: bool,
}

impl Route {
    pub fn start(&self) -> usize {
        self.sequence[0]
    }

    pub fn end(&self) -> usize {
        *self.sequence.last().expect("routes are never empty")
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sequence.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn sequence_string(&self) -> String {
        join_sequence(&self.sequence)
    }
}

pub fn join_sequence(seq: &[usize]) -> String {
    seq.iter().map(|id| id.to_string()).collect::<Vec<_>>().join("-")
}

/// Normalised time residual minus normalised collected weight, plus the
/// infeasibility penalty for invalid or over-budget routes.
pub fn route_cost(route: &Route, objective: &RouteObjective, graph: &MissionGraph) -> f64 {
    let t_av = objective.t_available;
    let scale = if t_av > 0.0 { t_av } else { 1.0 };
    let w_total = graph.total_task_weight();
    let weight_term = if w_total > 0.0 { route.total_weight / w_total } else { 0.0 };
    let penalty = if !route.valid || route.total_time > t_av { objective.infeasible_penalty } else { 0.0 };
    objective.alpha * (t_av - route.total_time).abs() / scale - objective.beta * weight_term + penalty
}

/// Greedy walk from the graph's start: repeatedly step to the admissible
/// neighbour of highest priority (lowest id on ties) until the destination
/// is reached or no neighbour remains. Visited waypoints and used edges are
/// never admissible.
pub fn decode_route(genome: &PriorityGenome, graph: &MissionGraph, objective: &RouteObjective) -> Route {
    assert_eq!(genome.0.len(), graph.len(), "genome length must match waypoint count");
    let n = graph.len();
    let mut priority: Vec<f64> = genome.0.clone();
    let mut used = vec![false; n * n];
    let mut current = graph.start();
    let mut sequence = vec![current];
    priority[current - 1] = f64::NEG_INFINITY;

    let mut time = 0.0;
    let mut weight = 0.0;
    let mut tasks = 0;
    while current != graph.destination() {
        let mut best: Option<usize> = None;
        for j in graph.neighbors(current) {
            if priority[j - 1] == f64::NEG_INFINITY || used[(current - 1) * n + (j - 1)] {
                continue;
            }
            if best.is_none_or(|b| priority[j - 1] > priority[b - 1]) {
                best = Some(j);
            }
        }
        let Some(next) = best else { break };
        let e = graph.edge(current, next).expect("neighbour implies edge");
        time += e.traversal_time;
        weight += e.task_weight;
        tasks += usize::from(e.has_task());
        used[(current - 1) * n + (next - 1)] = true;
        used[(next - 1) * n + (current - 1)] = true;
        priority[next - 1] = f64::NEG_INFINITY;
        sequence.push(next);
        current = next;
    }

    let reached = current == graph.destination();
    let mut route = Route {
        sequence,
        task_count: tasks,
        total_weight: weight,
        total_time: time,
        cost: 0.0,
        valid: reached && time <= objective.t_available,
    };
    route.cost = route_cost(&route, objective, graph);
    route
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoutePlannerConfig {
    pub swarm: SwarmSettings,
    pub alpha: f64,
    pub beta: f64,
    pub infeasible_penalty: f64,
}

impl Default for RoutePlannerConfig {
    fn default() -> Self {
        Self { swarm: SwarmSettings::default(), alpha: 1.0, beta: 1.0, infeasible_penalty: DEFAULT_INFEASIBLE_PENALTY }
    }
}

impl RoutePlannerConfig {
    pub fn objective(&self, t_available: f64) -> RouteObjective {
        RouteObjective { t_available, alpha: self.alpha, beta: self.beta, infeasible_penalty: self.infeasible_penalty }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutePlan {
    pub route: Route,
    pub trace: Vec<f64>,
}

struct RouteProblem<'a> {
    graph: &'a MissionGraph,
    objective: RouteObjective,
}

impl Problem for RouteProblem<'_> {
    type Candidate = Route;

    fn dimension(&self) -> usize {
        self.graph.len()
    }

    fn decode(&self, x: &[f64]) -> Route {
        decode_route(&PriorityGenome(x.to_vec()), self.graph, &self.objective)
    }

    fn cost(&self, r: &Route) -> f64 {
        r.cost
    }
}

/// Searches for the best route from the graph's start to its destination.
pub fn plan_route(
    graph: &MissionGraph,
    t_available: f64,
    cfg: &RoutePlannerConfig,
    seed: u64,
    execution: Execution,
) -> Result<RoutePlan> {
    if !t_available.is_finite() {
        return domain("available time must be finite");
    }
    if !graph.is_reachable(graph.start(), graph.destination()) {
        return Err(PlanError::Disconnected { start: graph.start(), destination: graph.destination() });
    }
    let problem = RouteProblem { graph, objective: cfg.objective(t_available) };
    let swarm = SwarmConfig::new(cfg.swarm, vec![PRIORITY_RANGE; graph.len()], seed).with_execution(execution);
    let result = optimize_observed(&problem, &swarm, |_, _, _, _| {})?;
    Ok(RoutePlan { route: result.best, trace: result.trace })
}

//! Scenario files, seeded scenario generation and graph resolution.
//!
//! A scenario is a single TOML document. See `docs/scenario-format.md` for
//! the key reference.

use std::path::Path;

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::executor::ExecutorConfig;
use crate::geom::Vec3;
use crate::mission::{EdgeSpec, MissionBudget, MissionGraph, Waypoint};
use crate::obstacles::FieldSpec;
use crate::path_planner::PathPlannerConfig;
use crate::route_planner::RoutePlannerConfig;
use crate::seeds;

const CONNECT_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub t_available: f64,
    pub v_auv: f64,
}

/// Random graph parameters. Waypoints are uniform in `[0, bounds]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeneratorParams {
    pub nodes: usize,
    /// Probability that any given waypoint pair is joined by an edge.
    pub edge_density: f64,
    pub tasks: usize,
    /// Inclusive integer range of task weights.
    pub weight_range: [u32; 2],
    pub bounds: [f64; 3],
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self { nodes: 30, edge_density: 1.0, tasks: 10, weight_range: [1, 10], bounds: [10_000.0, 10_000.0, 100.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    /// Defaults to waypoint 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<usize>,
    /// Defaults to the highest waypoint id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destination: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorParams>,
    #[serde(default)]
    pub waypoints: Vec<Waypoint>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
}

/// Endpoints for single-segment planning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub start: Vec3,
    pub target: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    pub budget: BudgetSpec,
    pub graph: GraphSpec,
    #[serde(default)]
    pub obstacles: FieldSpec,
    #[serde(default)]
    pub route_planner: RoutePlannerConfig,
    #[serde(default)]
    pub path_planner: PathPlannerConfig,
    #[serde(default)]
    pub executor: ExecutorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment: Option<SegmentSpec>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| PlanError::Scenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| PlanError::Scenario(e.to_string()))
    }

    pub fn budget(&self) -> Result<MissionBudget> {
        MissionBudget::new(self.budget.t_available, self.budget.v_auv)
    }

    pub fn validate(&self) -> Result<()> {
        self.budget()?;
        self.route_planner.swarm.validate()?;
        self.path_planner.swarm.validate()?;
        let pp = &self.path_planner;
        if pp.control_points < 2 || pp.order < 1 || pp.order > pp.control_points || pp.samples < 2 {
            return Err(PlanError::Scenario(format!(
                "path_planner: need control_points >= 2, 1 <= order <= control_points, samples >= 2 (got {}, {}, {})",
                pp.control_points, pp.order, pp.samples
            )));
        }
        if !(0.0..1.0).contains(&self.executor.planning_reserve) {
            return Err(PlanError::Scenario("executor.planning_reserve must lie in [0, 1)".into()));
        }
        match (&self.graph.generator, self.graph.waypoints.is_empty()) {
            (Some(_), false) => {
                return Err(PlanError::Scenario("graph: give either a generator or explicit waypoints, not both".into()))
            }
            (None, true) => return Err(PlanError::Scenario("graph: no waypoints and no generator".into())),
            (Some(g), true) => validate_generator(g)?,
            (None, false) => {
                self.explicit_graph()?;
            }
        }
        Ok(())
    }

    fn explicit_graph(&self) -> Result<MissionGraph> {
        let n = self.graph.waypoints.len();
        let start = self.graph.start.unwrap_or(1);
        let destination = self.graph.destination.unwrap_or(n);
        MissionGraph::new(self.graph.waypoints.clone(), &self.graph.edges, start, destination, self.budget.v_auv)
            .map_err(|e| PlanError::Scenario(format!("graph: {e}")))
    }

    /// Builds the mission graph, generating it from `seed` when the scenario
    /// only carries generator parameters.
    pub fn resolve_graph(&self, seed: u64) -> Result<MissionGraph> {
        match &self.graph.generator {
            None => self.explicit_graph(),
            Some(params) => {
                let (waypoints, edges) = generate_graph(params, seed)?;
                let n = waypoints.len();
                MissionGraph::new(
                    waypoints,
                    &edges,
                    self.graph.start.unwrap_or(1),
                    self.graph.destination.unwrap_or(n),
                    self.budget.v_auv,
                )
            }
        }
    }
}

fn validate_generator(g: &GeneratorParams) -> Result<()> {
    if g.nodes < 2 {
        return Err(PlanError::Scenario(format!("generator.nodes must be at least 2, got {}", g.nodes)));
    }
    if !(0.0..=1.0).contains(&g.edge_density) {
        return Err(PlanError::Scenario("generator.edge_density must lie in [0, 1]".into()));
    }
    if g.weight_range[0] > g.weight_range[1] {
        return Err(PlanError::Scenario("generator.weight_range is not ordered".into()));
    }
    if g.bounds.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
        return Err(PlanError::Scenario("generator.bounds must be finite and non-negative".into()));
    }
    Ok(())
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PlanError::Scenario(format!("{}: {e}", path.display())))?;
    Scenario::parse(&text).map_err(|e| match e {
        PlanError::Scenario(msg) => PlanError::Scenario(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    std::fs::write(path, scenario.to_toml()?)?;
    Ok(())
}

/// Random waypoints and edges, connected between waypoint 1 and the last
/// waypoint. Edge sets are redrawn until connected, up to a retry bound.
pub fn generate_graph(params: &GeneratorParams, seed: u64) -> Result<(Vec<Waypoint>, Vec<EdgeSpec>)> {
    validate_generator(params)?;
    let mut rng = seeds::rng(seed, &[seeds::STREAM_GRAPH]);
    let n = params.nodes;
    let [bx, by, bz] = params.bounds;
    let waypoints: Vec<Waypoint> = (1..=n)
        .map(|id| {
            let x = rng.random::<f64>() * bx;
            let y = rng.random::<f64>() * by;
            let z = rng.random::<f64>() * bz;
            Waypoint { id, position: Vec3::new(x, y, z) }
        })
        .collect();

    for _ in 0..CONNECT_RETRIES {
        let mut edges = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                if rng.random::<f64>() < params.edge_density {
                    edges.push(EdgeSpec { from: a, to: b, weight: 0.0 });
                }
            }
        }
        let g = MissionGraph::new(waypoints.clone(), &edges, 1, n, 1.0)?;
        if !g.is_reachable(1, n) {
            continue;
        }
        if params.tasks > edges.len() {
            return Err(PlanError::Scenario(format!(
                "cannot place {} tasks on {} edges",
                params.tasks,
                edges.len()
            )));
        }
        let [lo, hi] = params.weight_range;
        for k in sample(&mut rng, edges.len(), params.tasks) {
            edges[k].weight = rng.random_range(lo..=hi) as f64;
        }
        return Ok((waypoints, edges));
    }
    Err(PlanError::Scenario(format!(
        "edge density {} did not connect waypoint 1 to {} within {} attempts",
        params.edge_density, n, CONNECT_RETRIES
    )))
}

/// A complete scenario with an explicit generated graph and default
/// planner settings.
pub fn generate_scenario(params: &GeneratorParams, budget: BudgetSpec, seed: u64) -> Result<Scenario> {
    let (waypoints, edges) = generate_graph(params, seed)?;
    let scenario = Scenario {
        seed,
        budget,
        graph: GraphSpec { start: None, destination: None, generator: None, waypoints, edges },
        obstacles: FieldSpec::with_counts(3, 3, 3),
        route_planner: RoutePlannerConfig::default(),
        path_planner: PathPlannerConfig::default(),
        executor: ExecutorConfig::default(),
        segment: None,
    };
    scenario.validate()?;
    Ok(scenario)
}

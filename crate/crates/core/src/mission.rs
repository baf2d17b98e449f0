//! Waypoint graph, task weights and the elementary time/distance formulas.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{domain, PlanError, Result};
use crate::geom::Vec3;

/// A graph node. Ids are 1-based and contiguous within a graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub id: usize,
    pub position: Vec3,
}

/// An undirected edge carrying an optional task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub distance: f64,
    pub traversal_time: f64,
    pub task_weight: f64,
}

impl Edge {
    pub fn connects(&self, a: usize, b: usize) -> bool {
        (self.from == a && self.to == b) || (self.from == b && self.to == a)
    }

    pub fn has_task(&self) -> bool {
        self.task_weight > 0.0
    }
}

/// Edge as supplied by a caller: endpoints and task weight only. Distance and
/// time are always derived from the waypoint positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub weight: f64,
}

/// Remaining mission time and cruise speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissionBudget {
    pub t_available: f64,
    pub v_auv: f64,
}

impl MissionBudget {
    pub fn new(t_available: f64, v_auv: f64) -> Result<Self> {
        if !(v_auv > 0.0 && v_auv.is_finite()) {
            return domain(format!("cruise speed must be positive, got {v_auv}"));
        }
        if !t_available.is_finite() {
            return domain("available time must be finite");
        }
        Ok(Self { t_available, v_auv })
    }
}

pub fn euclidean_distance(a: Vec3, b: Vec3) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return domain("non-finite position");
    }
    Ok(a.distance(b))
}

pub fn edge_traversal_time(distance: f64, v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return domain(format!("speed must be positive, got {v}"));
    }
    if !(distance >= 0.0) {
        return domain(format!("distance must be non-negative, got {distance}"));
    }
    Ok(distance / v)
}

/// The mission terrain: waypoints, undirected task-bearing edges and the
/// adjacency matrix derived from them.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionGraph {
    waypoints: Vec<Waypoint>,
    edges: Vec<Edge>,
    /// `n*n` row-major; index of the edge in `edges`, if any.
    edge_index: Vec<Option<usize>>,
    start: usize,
    destination: usize,
    v_auv: f64,
}

impl MissionGraph {
    pub fn new(
        waypoints: Vec<Waypoint>,
        edges: &[EdgeSpec],
        start: usize,
        destination: usize,
        v_auv: f64,
    ) -> Result<Self> {
        if !(v_auv > 0.0) {
            return domain(format!("cruise speed must be positive, got {v_auv}"));
        }
        let n = waypoints.len();
        let mut sorted = waypoints;
        sorted.sort_by_key(|w| w.id);
        for (i, w) in sorted.iter().enumerate() {
            if w.id != i + 1 {
                return Err(PlanError::Scenario(format!(
                    "waypoint ids must be unique and contiguous from 1; found id {} at rank {}",
                    w.id,
                    i + 1
                )));
            }
            if !w.position.is_finite() {
                return domain(format!("waypoint {} has a non-finite position", w.id));
            }
        }
        for id in [start, destination] {
            if id == 0 || id > n {
                return Err(PlanError::UnknownWaypoint(id));
            }
        }

        let mut graph = Self {
            waypoints: sorted,
            edges: Vec::with_capacity(edges.len()),
            edge_index: vec![None; n * n],
            start,
            destination,
            v_auv,
        };
        for spec in edges {
            graph.insert_edge(*spec)?;
        }
        Ok(graph)
    }

    fn insert_edge(&mut self, spec: EdgeSpec) -> Result<()> {
        let n = self.waypoints.len();
        for id in [spec.from, spec.to] {
            if id == 0 || id > n {
                return Err(PlanError::UnknownWaypoint(id));
            }
        }
        if spec.from == spec.to {
            return domain(format!("self-loop on waypoint {}", spec.from));
        }
        if !(spec.weight >= 0.0 && spec.weight.is_finite()) {
            return domain(format!(
                "task weight on edge {}-{} must be finite and non-negative",
                spec.from, spec.to
            ));
        }
        if self.has_edge(spec.from, spec.to) {
            return domain(format!("duplicate edge {}-{}", spec.from, spec.to));
        }
        let distance = euclidean_distance(self.position(spec.from), self.position(spec.to))?;
        let edge = Edge {
            from: spec.from,
            to: spec.to,
            distance,
            traversal_time: edge_traversal_time(distance, self.v_auv)?,
            task_weight: spec.weight,
        };
        let k = self.edges.len();
        self.edges.push(edge);
        let (a, b) = (spec.from - 1, spec.to - 1);
        self.edge_index[a * n + b] = Some(k);
        self.edge_index[b * n + a] = Some(k);
        Ok(())
    }

    fn rebuild_index(&mut self) {
        let n = self.waypoints.len();
        self.edge_index.iter_mut().for_each(|e| *e = None);
        for (k, e) in self.edges.iter().enumerate() {
            let (a, b) = (e.from - 1, e.to - 1);
            self.edge_index[a * n + b] = Some(k);
            self.edge_index[b * n + a] = Some(k);
        }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn destination(&self) -> usize {
        self.destination
    }

    pub fn v_auv(&self) -> f64 {
        self.v_auv
    }

    /// Moves the start waypoint, used when re-planning from the vehicle's
    /// current node.
    pub fn set_start(&mut self, id: usize) -> Result<()> {
        if id == 0 || id > self.len() {
            return Err(PlanError::UnknownWaypoint(id));
        }
        self.start = id;
        Ok(())
    }

    pub fn position(&self, id: usize) -> Vec3 {
        self.waypoints[id - 1].position
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge(a, b).is_some()
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        let n = self.len();
        if a == 0 || b == 0 || a > n || b > n {
            return None;
        }
        self.edge_index[(a - 1) * n + (b - 1)].map(|k| &self.edges[k])
    }

    /// Adjacency matrix `Ad`, indexed by `id - 1`.
    pub fn adjacency(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        (0..n)
            .map(|i| (0..n).map(|j| self.edge_index[i * n + j].is_some()).collect())
            .collect()
    }

    /// Neighbour ids of `id`, ascending.
    pub fn neighbors(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.len();
        let row = (id - 1) * n;
        (0..n).filter(move |j| self.edge_index[row + j].is_some()).map(|j| j + 1)
    }

    pub fn total_task_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.task_weight).sum()
    }

    /// Removes the listed edges; pairs not present are ignored. Returns the
    /// number actually removed.
    pub fn remove_edges(&mut self, pairs: &[(usize, usize)]) -> usize {
        let before = self.edges.len();
        self.edges
            .retain(|e| !pairs.iter().any(|&(a, b)| e.connects(a, b)));
        self.rebuild_index();
        before - self.edges.len()
    }

    /// Breadth-first reachability.
    pub fn is_reachable(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.len() + 1];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if v == to {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        false
    }

    /// Total estimated time and collected weight along a waypoint sequence.
    pub fn route_totals(&self, sequence: &[usize]) -> Result<(f64, f64)> {
        let mut time = 0.0;
        let mut weight = 0.0;
        for pair in sequence.windows(2) {
            let e = self.edge(pair[0], pair[1]).ok_or(PlanError::MissingEdge {
                from: pair[0],
                to: pair[1],
            })?;
            time += e.traversal_time;
            weight += e.task_weight;
        }
        Ok((time, weight))
    }

    /// Caller-facing edge list that rebuilds this graph.
    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec { from: e.from, to: e.to, weight: e.task_weight })
            .collect()
    }
}

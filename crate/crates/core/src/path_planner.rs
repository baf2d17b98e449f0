//! Local planner: swarm search over B-spline control points for the fastest
//! collision-free path between two waypoints.

use serde::{Deserialize, Serialize};

use crate::bspline::{corridor, BasisTable, ControlPolygon, PathCurve, DEFAULT_ORDER, DEFAULT_SAMPLES};
use crate::error::{domain, Result};
use crate::geom::{Aabb, Vec3};
use crate::obstacles::{ObstacleField, ObstacleRow};
use crate::swarm::{optimize_observed, Execution, Problem, SwarmConfig, SwarmSettings};

/// Default collision penalty weight.
pub const DEFAULT_PENALTY: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathPlannerConfig {
    pub swarm: SwarmSettings,
    pub control_points: usize,
    pub order: usize,
    pub samples: usize,
    pub penalty: f64,
    /// Corridor half-width as a fraction of the chord length.
    pub lateral_factor: f64,
    /// Operating depth band `[min z, max z]`.
    pub depth: [f64; 2],
}

impl Default for PathPlannerConfig {
    fn default() -> Self {
        Self {
            swarm: SwarmSettings::default(),
            control_points: 6,
            order: DEFAULT_ORDER,
            samples: DEFAULT_SAMPLES,
            penalty: DEFAULT_PENALTY,
            lateral_factor: 0.5,
            depth: [0.0, 100.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathCost {
    pub flight_time: f64,
    pub violation: f64,
    pub total: f64,
}

/// Obstacle field snapshots at a fixed time step; snapshot `k` is the field
/// stepped `k` times.
#[derive(Debug, Clone)]
pub struct ObstacleTimeline {
    dt: f64,
    snapshots: Vec<ObstacleField>,
}

impl ObstacleTimeline {
    pub fn new(field: &ObstacleField, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return domain(format!("timeline step must be positive, got {dt}"));
        }
        let mut snapshots = Vec::with_capacity(steps + 1);
        snapshots.push(field.clone());
        for k in 0..steps {
            let next = snapshots[k].step(dt)?;
            snapshots.push(next);
        }
        Ok(Self { dt, snapshots })
    }

    /// A field that never changes over the path.
    pub fn frozen(field: &ObstacleField) -> Self {
        Self { dt: f64::INFINITY, snapshots: vec![field.clone()] }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn index_at(&self, t: f64) -> usize {
        if !self.dt.is_finite() {
            return 0;
        }
        ((t / self.dt).floor().max(0.0) as usize).min(self.snapshots.len() - 1)
    }

    pub fn at(&self, t: f64) -> &ObstacleField {
        &self.snapshots[self.index_at(t)]
    }

    pub fn snapshots(&self) -> &[ObstacleField] {
        &self.snapshots
    }
}

/// Flight time, collision violation and penalised cost of a sampled curve.
///
/// Sample `j` is checked against the field at its arrival time
/// `cumulative_length_j / v_auv`. A sample strictly inside an obstacle adds
/// `(radius - distance) / radius`; the sum is divided by the sample count.
/// Total cost is `flight_time * (1 + penalty * violation)`.
pub fn evaluate_path(curve: &PathCurve, timeline: &ObstacleTimeline, v_auv: f64, penalty: f64) -> PathCost {
    let flight_time = curve.arc_length / v_auv;
    let mut acc = 0.0;
    let mut travelled = 0.0;
    let mut prev: Option<Vec3> = None;
    for s in &curve.samples {
        let p = s.position;
        if let Some(q) = prev {
            travelled += p.distance(q);
        }
        prev = Some(p);
        let field = timeline.at(travelled / v_auv);
        for ob in &field.obstacles {
            let d = p.distance(ob.center);
            if d < ob.radius {
                acc += (ob.radius - d) / ob.radius;
            }
        }
    }
    let violation = if curve.samples.is_empty() { 0.0 } else { acc / curve.samples.len() as f64 };
    PathCost { flight_time, violation, total: flight_time * (1.0 + penalty * violation) }
}

#[derive(Debug, Clone)]
pub struct SegmentRequest {
    pub start: Vec3,
    pub target: Vec3,
    pub field: ObstacleField,
    pub v_auv: f64,
    pub config: PathPlannerConfig,
    pub seed: u64,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathTraceRow {
    pub iteration: usize,
    pub violation: f64,
    pub flight_time: f64,
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct SegmentPlan {
    pub curve: PathCurve,
    pub cost: PathCost,
    pub trace: Vec<PathTraceRow>,
    pub timeline: ObstacleTimeline,
}

impl SegmentPlan {
    /// Obstacle states at each field step up to the arrival time.
    pub fn obstacle_rows(&self) -> Vec<ObstacleRow> {
        let last = self.timeline.index_at(self.cost.flight_time);
        let dt = if self.timeline.dt().is_finite() { self.timeline.dt() } else { 0.0 };
        self.timeline.snapshots()[..=last]
            .iter()
            .enumerate()
            .flat_map(|(k, f)| f.rows(k as f64 * dt))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub curve: PathCurve,
    pub cost: PathCost,
}

struct PathProblem<'a> {
    start: Vec3,
    target: Vec3,
    interior: Vec<Aabb>,
    table: BasisTable,
    timeline: &'a ObstacleTimeline,
    v_auv: f64,
    penalty: f64,
}

impl Problem for PathProblem<'_> {
    type Candidate = PlannedPath;

    fn dimension(&self) -> usize {
        3 * self.interior.len()
    }

    fn decode(&self, x: &[f64]) -> PlannedPath {
        let mut points = Vec::with_capacity(self.interior.len() + 2);
        points.push(self.start);
        points.extend(x.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])));
        points.push(self.target);
        let control = ControlPolygon::new(points, &self.interior).expect("interior bounds match dimension");
        let curve = PathCurve::from_table(control, &self.table);
        let cost = evaluate_path(&curve, self.timeline, self.v_auv, self.penalty);
        PlannedPath { curve, cost }
    }

    fn cost(&self, c: &PlannedPath) -> f64 {
        c.cost.total
    }
}

/// Plans one segment.
pub fn plan_segment(req: &SegmentRequest) -> Result<SegmentPlan> {
    let cfg = &req.config;
    if req.start == req.target {
        return domain("segment start and target coincide");
    }
    if !(req.v_auv > 0.0) {
        return domain(format!("cruise speed must be positive, got {}", req.v_auv));
    }
    if cfg.control_points < 2 {
        return domain("need at least two control points");
    }
    let table = BasisTable::new(cfg.control_points, cfg.order, cfg.samples)?;
    let box_ = corridor(req.start, req.target, cfg.lateral_factor, cfg.depth);
    let interior = vec![box_; cfg.control_points - 2];

    let straight_time = req.start.distance(req.target) / req.v_auv;
    let dt = straight_time / (cfg.samples - 1) as f64;
    // Sampled polyline <= control polygon length <= (n-1) * box diagonal.
    let horizon = (cfg.control_points - 1) as f64 * box_.diagonal() / req.v_auv;
    let steps = (horizon / dt).ceil() as usize + 1;
    let timeline = if req.field.is_empty() {
        ObstacleTimeline::frozen(&req.field)
    } else {
        ObstacleTimeline::new(&req.field, dt, steps)?
    };

    let problem = PathProblem {
        start: req.start,
        target: req.target,
        interior,
        table,
        timeline: &timeline,
        v_auv: req.v_auv,
        penalty: cfg.penalty,
    };
    let bounds = problem
        .interior
        .iter()
        .flat_map(|b| [[b.lo.x, b.hi.x], [b.lo.y, b.hi.y], [b.lo.z, b.hi.z]])
        .collect();
    let swarm = SwarmConfig::new(cfg.swarm, bounds, req.seed).with_execution(req.execution);
    let mut trace = Vec::with_capacity(cfg.swarm.iterations);
    let result = optimize_observed(&problem, &swarm, |iteration, _, _, best: &PlannedPath| {
        trace.push(PathTraceRow {
            iteration,
            violation: best.cost.violation,
            flight_time: best.cost.flight_time,
            cost: best.cost.total,
        });
    })?;
    drop(problem);
    Ok(SegmentPlan { curve: result.best.curve, cost: result.best.cost, trace, timeline })
}

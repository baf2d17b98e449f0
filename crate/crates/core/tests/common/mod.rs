#![allow(dead_code)]

use auvplan_core::executor::{PathPlanning, RoutePlanning, SegmentOutcome};
use auvplan_core::mission::{EdgeSpec, MissionGraph, Waypoint};
use auvplan_core::route_planner::{Route, RouteObjective, RoutePlan};
use auvplan_core::{Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every simple start -> destination path, by depth-first enumeration.
pub fn enumerate_simple_paths(g: &MissionGraph) -> Vec<Vec<usize>> {
    fn dfs(g: &MissionGraph, path: &mut Vec<usize>, seen: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        let u = *path.last().unwrap();
        if u == g.destination() {
            out.push(path.clone());
            return;
        }
        for v in 1..=g.len() {
            if !seen[v] && g.has_edge(u, v) {
                seen[v] = true;
                path.push(v);
                dfs(g, path, seen, out);
                path.pop();
                seen[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = vec![false; g.len() + 1];
    seen[g.start()] = true;
    dfs(g, &mut vec![g.start()], &mut seen, &mut out);
    out
}

/// Route cost recomputed from first principles for an explicit sequence.
pub fn oracle_cost(seq: &[usize], g: &MissionGraph, obj: &RouteObjective) -> f64 {
    let mut t = 0.0;
    let mut w = 0.0;
    for p in seq.windows(2) {
        let a = g.position(p[0]);
        let b = g.position(p[1]);
        let d = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt();
        t += d / g.v_auv();
        w += g.edge(p[0], p[1]).unwrap().task_weight;
    }
    let w_total: f64 = g.edges().iter().map(|e| e.task_weight).sum();
    let reaches = seq.first() == Some(&g.start()) && seq.last() == Some(&g.destination());
    let penalty = if !reaches || t > obj.t_available { obj.infeasible_penalty } else { 0.0 };
    let wt = if w_total > 0.0 { w / w_total } else { 0.0 };
    obj.alpha * (obj.t_available - t).abs() / obj.t_available - obj.beta * wt + penalty
}

/// Minimum oracle cost over all simple paths.
pub fn enumerated_optimum(g: &MissionGraph, obj: &RouteObjective) -> f64 {
    enumerate_simple_paths(g)
        .iter()
        .map(|p| oracle_cost(p, g, obj))
        .fold(f64::INFINITY, f64::min)
}

/// The five route feasibility criteria, checked independently of the
/// decoder. Returns the indices (1..=5) of failed criteria.
pub fn failed_criteria(route: &Route, g: &MissionGraph, t_available: f64) -> Vec<usize> {
    let seq = &route.sequence;
    let mut failed = Vec::new();
    if seq.first() != Some(&g.start()) || seq.last() != Some(&g.destination()) {
        failed.push(1);
    }
    if !seq.windows(2).all(|p| g.adjacency()[p[0] - 1][p[1] - 1]) {
        failed.push(2);
    }
    let mut nodes = seq.clone();
    nodes.sort_unstable();
    nodes.dedup();
    if nodes.len() != seq.len() {
        failed.push(3);
    }
    let mut edges: Vec<(usize, usize)> = seq.windows(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
    let m = edges.len();
    edges.sort_unstable();
    edges.dedup();
    if edges.len() != m {
        failed.push(4);
    }
    let t: f64 = seq
        .windows(2)
        .map(|p| g.position(p[0]).distance(g.position(p[1])) / g.v_auv())
        .sum();
    if t > t_available {
        failed.push(5);
    }
    failed
}

/// Random graph on `n` nodes with edge probability `p`, spread over a
/// 10 km box, with integer task weights on roughly half the edges.
pub fn random_graph(n: usize, p: f64, seed: u64) -> MissionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wps = (1..=n)
        .map(|id| Waypoint {
            id,
            position: Vec3::new(rng.random::<f64>() * 10_000.0, rng.random::<f64>() * 10_000.0, rng.random::<f64>() * 100.0),
        })
        .collect();
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            if rng.random::<f64>() < p {
                let weight = if rng.random::<bool>() { rng.random_range(1..=10) as f64 } else { 0.0 };
                edges.push(EdgeSpec { from: a, to: b, weight });
            }
        }
    }
    MissionGraph::new(wps, &edges, 1, n, 3.0).unwrap()
}

pub fn random_connected_graph(n: usize, p: f64, seed: u64) -> MissionGraph {
    (0..)
        .map(|k| random_graph(n, p, seed.wrapping_mul(1_000_003).wrapping_add(k)))
        .find(|g| g.is_reachable(1, n))
        .unwrap()
}

/// Kolmogorov-Smirnov statistic of `xs` against U(lo, hi).
pub fn ks_uniform(xs: &mut [f64], lo: f64, hi: f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at alpha = 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

// ----- Reference mission replay ------------------------------------------

/// Reference segment log: (from, to, violation, path cost, T_path, T_Expected).
pub const TABLE_B: [(usize, usize, f64, f64, f64, f64); 10] = [
    (1, 23, 0.0, 0.328, 1476.0, 1514.3),
    (23, 16, 0.00028, 0.287, 565.0, 683.0),
    (16, 28, 0.0, 0.743, 486.7, 333.8),
    (28, 18, 0.0, 0.109, 519.6, 376.3),
    (18, 5, 0.0, 0.120, 1406.0, 1492.3),
    (5, 25, 0.0, 0.101, 394.6, 486.3),
    (25, 21, 0.0, 0.360, 1192.6, 1345.3),
    (21, 8, 0.0, 0.416, 1087.3, 900.3),
    (8, 20, 0.0, 0.319, 986.8, 847.8),
    (20, 30, 0.0, 0.233, 796.4, 818.6),
];

/// Reference route log: sequence, task count, weight, cost, T_Route.
pub const TABLE_A: [(&[usize], usize, f64, f64, f64); 5] = [
    (&[1, 23, 16, 28, 3, 15, 17, 30], 7, 18.0, 2.2097, 8597.0),
    (&[28, 18, 9, 3, 24, 7, 29, 30], 7, 21.0, 1.9647, 6118.0),
    (&[18, 5, 25, 21, 8, 30], 5, 23.0, 2.3386, 5612.0),
    (&[8, 20, 7, 30], 3, 20.0, 1.8659, 1693.0),
    (&[20, 30], 1, 7.0, 1.4903, 819.0),
];

/// Task weights on the flown edges; they sum to the reported total of 22.
pub const FLOWN_WEIGHTS: [f64; 10] = [2.0, 2.0, 3.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 3.0];

/// A 30-waypoint graph whose flown edges have exactly the lengths implied
/// by the T_Expected column at 3 m/s, plus every edge of every planned route.
pub fn table_graph() -> MissionGraph {
    let v = 3.0;
    let mut pos = vec![None; 31];
    let mut x = 0.0;
    pos[1] = Some(Vec3::new(0.0, 0.0, 0.0));
    for &(_, to, _, _, _, t_exp) in &TABLE_B {
        x += t_exp * v;
        pos[to] = Some(Vec3::new(x, 0.0, 0.0));
    }
    let mut off = 0.0;
    let wps: Vec<Waypoint> = (1..=30)
        .map(|id| {
            let p = pos[id].unwrap_or_else(|| {
                off += 700.0;
                Vec3::new(off, 5000.0, 50.0)
            });
            Waypoint { id, position: p }
        })
        .collect();
    let mut edges: Vec<EdgeSpec> = TABLE_B
        .iter()
        .zip(FLOWN_WEIGHTS)
        .map(|(&(a, b, ..), w)| EdgeSpec { from: a, to: b, weight: w })
        .collect();
    for (seq, ..) in TABLE_A {
        for p in seq.windows(2) {
            if !edges.iter().any(|e| (e.from, e.to) == (p[0], p[1]) || (e.from, e.to) == (p[1], p[0])) {
                edges.push(EdgeSpec { from: p[0], to: p[1], weight: 0.0 });
            }
        }
    }
    MissionGraph::new(wps, &edges, 1, 30, v).unwrap()
}

/// Returns the reference routes in order.
pub struct ReplayRoutes {
    pub calls: usize,
    pub starts: Vec<usize>,
}

impl RoutePlanning for ReplayRoutes {
    fn plan(&mut self, graph: &MissionGraph, _t_available: f64, call: usize) -> Result<RoutePlan> {
        let (seq, tasks, weight, cost, t_route) = TABLE_A[call];
        self.calls += 1;
        self.starts.push(graph.start());
        Ok(RoutePlan {
            route: Route {
                sequence: seq.to_vec(),
                task_count: tasks,
                total_weight: weight,
                total_time: t_route,
                cost,
                valid: true,
            },
            trace: vec![cost],
        })
    }
}

/// Returns the reference segment outcomes in order, checking the requested
/// edge matches the table row.
pub struct ReplayPaths {
    pub calls: usize,
}

impl PathPlanning for ReplayPaths {
    fn plan(&mut self, _graph: &MissionGraph, from: usize, to: usize, call: usize) -> Result<SegmentOutcome> {
        let (a, b, violation, path_cost, t_path, _) = TABLE_B[call];
        assert_eq!((from, to), (a, b), "replayed edge order diverged at call {call}");
        self.calls += 1;
        Ok(SegmentOutcome { t_path, violation, path_cost, plan: None })
    }
}

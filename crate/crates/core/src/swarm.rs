//! Synchronous global-best particle swarm optimizer.
//!
//! Each iteration moves every particle with
//! `v <- w v + c1 r1 (p_best - x) + c2 r2 (g_best - x)`, `x <- x + v`,
//! clamps to the box, evaluates, then (after a barrier) refreshes personal
//! and global bests. Random numbers come from a stream keyed by
//! `(seed, iteration, particle)`, so parallel and sequential evaluation give
//! bitwise-identical results.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::seeds;

const STREAM_INIT: u64 = 1;
const STREAM_MOVE: u64 = 2;

/// A search problem: positions decode into candidates, candidates get a
/// cost. Implementations must tolerate concurrent calls.
pub trait Problem: Sync {
    type Candidate: Clone + Send;

    fn dimension(&self) -> usize;

    fn decode(&self, position: &[f64]) -> Self::Candidate;

    fn cost(&self, candidate: &Self::Candidate) -> f64;
}

/// How the population is evaluated within an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise falls
    /// back to sequential evaluation.
    #[default]
    Parallel,
}

/// Problem-independent swarm parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwarmSettings {
    pub particles: usize,
    pub iterations: usize,
    /// Inertia at the first and last iteration, interpolated linearly.
    pub inertia: [f64; 2],
    pub c1: f64,
    pub c2: f64,
}

impl Default for SwarmSettings {
    fn default() -> Self {
        Self { particles: 80, iterations: 100, inertia: [0.9, 0.4], c1: 1.5, c2: 2.0 }
    }
}

impl SwarmSettings {
    pub fn validate(&self) -> Result<()> {
        if self.particles < 1 || self.iterations < 1 {
            return Err(PlanError::Domain("swarm needs at least one particle and one iteration".into()));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) {
            return Err(PlanError::Domain("acceleration coefficients must be non-negative".into()));
        }
        if !self.inertia.iter().all(|w| w.is_finite()) {
            return Err(PlanError::Domain("inertia must be finite".into()));
        }
        Ok(())
    }

    pub fn inertia_at(&self, iteration: usize) -> f64 {
        let [w0, w1] = self.inertia;
        if self.iterations <= 1 {
            return w0;
        }
        w0 + (w1 - w0) * iteration as f64 / (self.iterations - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmConfig {
    pub settings: SwarmSettings,
    /// `[lower, upper]` per dimension.
    pub bounds: Vec<[f64; 2]>,
    pub seed: u64,
    pub execution: Execution,
}

impl SwarmConfig {
    pub fn new(settings: SwarmSettings, bounds: Vec<[f64; 2]>, seed: u64) -> Self {
        Self { settings, bounds, seed, execution: Execution::default() }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn validate(&self, dim: usize) -> Result<()> {
        self.settings.validate()?;
        if self.bounds.len() != dim {
            return Err(PlanError::DimensionMismatch { expected: dim, actual: self.bounds.len() });
        }
        if let Some((i, b)) = self
            .bounds
            .iter()
            .enumerate()
            .find(|(_, [lo, hi])| !(lo <= hi && lo.is_finite() && hi.is_finite()))
        {
            return Err(PlanError::Domain(format!("bounds for dimension {i} are not ordered: {b:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmResult<C> {
    pub best_position: Vec<f64>,
    pub best_cost: f64,
    pub best: C,
    /// Global best cost after initialisation (entry 0) and after each
    /// subsequent iteration.
    pub trace: Vec<f64>,
}

/// `w v + c1 r1 (p_best - x) + c2 r2 (g_best - x)` with `draw` supplying
/// `r1` then `r2` for each dimension in turn.
pub fn velocity_update_with(
    particle: &Particle,
    g_best: &[f64],
    w: f64,
    c1: f64,
    c2: f64,
    mut draw: impl FnMut() -> f64,
) -> Result<Vec<f64>> {
    let dim = particle.position.len();
    for len in [particle.velocity.len(), particle.best_position.len(), g_best.len()] {
        if len != dim {
            return Err(PlanError::DimensionMismatch { expected: dim, actual: len });
        }
    }
    Ok((0..dim)
        .map(|d| {
            let r1 = draw();
            let r2 = draw();
            let x = particle.position[d];
            w * particle.velocity[d]
                + c1 * r1 * (particle.best_position[d] - x)
                + c2 * r2 * (g_best[d] - x)
        })
        .collect())
}

pub fn velocity_update(
    particle: &Particle,
    g_best: &[f64],
    w: f64,
    c1: f64,
    c2: f64,
    rng: &mut seeds::Rng,
) -> Result<Vec<f64>> {
    velocity_update_with(particle, g_best, w, c1, c2, || rng.random::<f64>())
}

/// Runs the swarm and returns the best candidate found.
pub fn optimize<P: Problem>(problem: &P, cfg: &SwarmConfig) -> Result<SwarmResult<P::Candidate>> {
    optimize_observed(problem, cfg, |_, _, _, _| {})
}

/// As [`optimize`], calling `observer(iteration, g_best, g_cost, candidate)`
/// after initialisation and after every iteration.
pub fn optimize_observed<P, F>(
    problem: &P,
    cfg: &SwarmConfig,
    mut observer: F,
) -> Result<SwarmResult<P::Candidate>>
where
    P: Problem,
    F: FnMut(usize, &[f64], f64, &P::Candidate),
{
    let dim = problem.dimension();
    cfg.validate(dim)?;
    let s = &cfg.settings;

    let mut particles: Vec<Particle> = (0..s.particles)
        .map(|i| {
            let mut rng = seeds::rng(cfg.seed, &[STREAM_INIT, i as u64]);
            let mut position = Vec::with_capacity(dim);
            let mut velocity = Vec::with_capacity(dim);
            // Velocities start uniform over a band as wide as the bounds.
            for &[lo, hi] in &cfg.bounds {
                position.push(lo + rng.random::<f64>() * (hi - lo));
                velocity.push(0.5 * (hi - lo) * (2.0 * rng.random::<f64>() - 1.0));
            }
            Particle { best_position: position.clone(), position, velocity, best_cost: f64::INFINITY }
        })
        .collect();

    let evaluated = evaluate(problem, &particles, cfg.execution);
    check_finite(&particles, &evaluated, 0)?;
    for (p, (_, cost)) in particles.iter_mut().zip(&evaluated) {
        p.best_cost = *cost;
    }
    let (mut g_idx, _) = argmin(&particles);
    let mut g_position = particles[g_idx].best_position.clone();
    let mut g_cost = particles[g_idx].best_cost;
    let mut g_candidate = evaluated[g_idx].0.clone();
    let mut trace = Vec::with_capacity(s.iterations);
    trace.push(g_cost);
    observer(0, &g_position, g_cost, &g_candidate);

    for t in 1..s.iterations {
        let w = s.inertia_at(t);
        let g_ref = &g_position;
        let mover = |i: usize, p: &mut Particle| -> Result<()> {
            let mut rng = seeds::rng(cfg.seed, &[STREAM_MOVE, t as u64, i as u64]);
            let v = velocity_update(p, g_ref, w, s.c1, s.c2, &mut rng)?;
            for (d, &[lo, hi]) in cfg.bounds.iter().enumerate() {
                let x = p.position[d] + v[d];
                if x < lo || x > hi {
                    p.position[d] = x.clamp(lo, hi);
                    p.velocity[d] = 0.0;
                } else {
                    p.position[d] = x;
                    p.velocity[d] = v[d];
                }
            }
            Ok(())
        };
        for_each_indexed_mut(&mut particles, cfg.execution, mover)?;

        let evaluated = evaluate(problem, &particles, cfg.execution);
        check_finite(&particles, &evaluated, t)?;
        for (p, (_, cost)) in particles.iter_mut().zip(&evaluated) {
            if *cost < p.best_cost {
                p.best_cost = *cost;
                p.best_position.clone_from(&p.position);
            }
        }
        // A particle's best only changes when it was just evaluated, so the
        // candidate for a new global best is in `evaluated`.
        let (idx, cost) = argmin(&particles);
        if cost < g_cost {
            g_idx = idx;
            g_cost = cost;
            g_position.clone_from(&particles[idx].best_position);
            g_candidate = evaluated[g_idx].0.clone();
        }
        trace.push(g_cost);
        observer(t, &g_position, g_cost, &g_candidate);
    }

    Ok(SwarmResult { best_position: g_position, best_cost: g_cost, best: g_candidate, trace })
}

fn argmin(particles: &[Particle]) -> (usize, f64) {
    particles
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bc), (i, p)| if p.best_cost < bc { (i, p.best_cost) } else { (bi, bc) })
}

fn check_finite<C>(particles: &[Particle], evaluated: &[(C, f64)], iteration: usize) -> Result<()> {
    match evaluated.iter().position(|(_, c)| !c.is_finite()) {
        Some(i) => Err(PlanError::NonFiniteCost {
            iteration,
            particle: i,
            cost: evaluated[i].1,
            position: particles[i].position.clone(),
        }),
        None => Ok(()),
    }
}

fn evaluate<P: Problem>(problem: &P, particles: &[Particle], exec: Execution) -> Vec<(P::Candidate, f64)> {
    let eval = |p: &Particle| {
        let c = problem.decode(&p.position);
        let cost = problem.cost(&c);
        (c, cost)
    };
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return particles.par_iter().map(eval).collect();
    }
    let _ = exec;
    particles.iter().map(eval).collect()
}

fn for_each_indexed_mut<T, F>(items: &mut [T], exec: Execution, f: F) -> Result<()>
where
    T: Send,
    F: Fn(usize, &mut T) -> Result<()> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter_mut().enumerate().try_for_each(|(i, x)| f(i, x));
    }
    let _ = exec;
    items.iter_mut().enumerate().try_for_each(|(i, x)| f(i, x))
}

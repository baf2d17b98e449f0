//! Spherical obstacles of three kinds and their stochastic evolution.
//!
//! * `Static` obstacles never change.
//! * `StaticUncertain` obstacles keep their centre; each step the radius is
//!   redrawn from `N(base_radius, sigma^2)`, independent of the last value.
//! * `MovingUncertain` obstacles random-walk around their anchor and grow or
//!   shrink through the three-component recurrence
//!   `r(t) = B1 r(t-1) + B2 N(0, sigma) + B3` with
//!   `B1 = [[1, u, 0], [0, 1, 0], [0, 0, 1]]`, `B2 = [0, 1, 1]^T`,
//!   `B3 = [0, 0, u]^T`, where `u = |V_c|`, `V_c ~ N(0, current_sigma)` is
//!   redrawn per obstacle per step. The public radius is component 0.
//!
//! Every step draws from a stream keyed by `(seed, step_count)`, so a field
//! stepped `k` times is a pure function of its seed and `k`.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::{Aabb, Vec3};
use crate::seeds::{self, Rng};

const STREAM_SPAWN: u64 = 1;
const STREAM_STEP: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    Static,
    StaticUncertain,
    MovingUncertain,
}

impl ObstacleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ObstacleKind::Static => "static",
            ObstacleKind::StaticUncertain => "static_uncertain",
            ObstacleKind::MovingUncertain => "moving_uncertain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: usize,
    pub kind: ObstacleKind,
    pub center: Vec3,
    /// Initial centre, the anchor of the drift law.
    pub origin: Vec3,
    pub radius: f64,
    pub base_radius: f64,
    pub sigma: f64,
    /// Auxiliary components 1 and 2 of the moving-obstacle radius state.
    pub aux: [f64; 2],
}

impl Obstacle {
    pub fn new(id: usize, kind: ObstacleKind, center: Vec3, radius: f64, sigma: f64) -> Self {
        Self {
            id,
            kind,
            center,
            origin: center,
            radius,
            base_radius: radius,
            sigma,
            aux: [0.0, 0.0],
        }
    }

    pub fn clearance(&self, p: Vec3) -> f64 {
        p.distance(self.center) - self.radius
    }
}

/// Per-kind counts and noise scales for spawning a field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldSpec {
    pub static_count: usize,
    pub static_uncertain_count: usize,
    pub moving_uncertain_count: usize,
    /// Radius spread of static-uncertain obstacles, metres.
    pub static_uncertain_sigma: f64,
    /// Drift and radius-noise scale of moving obstacles.
    pub moving_sigma: f64,
    /// Standard deviation of the current speed `V_c`, m/s.
    pub current_sigma: f64,
    pub radius_range: [f64; 2],
    /// Spawned obstacles keep at least this much clearance from the
    /// protected points (segment endpoints).
    pub endpoint_clearance: f64,
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self {
            static_count: 0,
            static_uncertain_count: 0,
            moving_uncertain_count: 0,
            static_uncertain_sigma: 10.0,
            moving_sigma: 0.2,
            current_sigma: 0.3,
            radius_range: [0.0, 100.0],
            endpoint_clearance: 20.0,
        }
    }
}

impl FieldSpec {
    pub fn with_counts(static_count: usize, static_uncertain: usize, moving: usize) -> Self {
        Self {
            static_count,
            static_uncertain_count: static_uncertain,
            moving_uncertain_count: moving,
            ..Self::default()
        }
    }

    pub fn total(&self) -> usize {
        self.static_count + self.static_uncertain_count + self.moving_uncertain_count
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleField {
    pub obstacles: Vec<Obstacle>,
    pub seed: u64,
    pub step_count: u64,
    pub current_sigma: f64,
}

/// One row of an obstacle track export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleRow {
    pub t: f64,
    pub id: usize,
    pub kind: ObstacleKind,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub r: f64,
}

const SPAWN_RETRIES: usize = 1000;

impl ObstacleField {
    pub fn empty(seed: u64) -> Self {
        Self { obstacles: Vec::new(), seed, step_count: 0, current_sigma: 0.3 }
    }

    /// Places obstacles with centres uniform in `bounds` and radii uniform in
    /// `spec.radius_range`. Centres are resampled (bounded retries) while
    /// any protected point would fall within `radius + endpoint_clearance`.
    pub fn spawn(spec: &FieldSpec, bounds: Aabb, protected: &[Vec3], seed: u64) -> Result<Self> {
        if bounds.is_empty() {
            return domain("obstacle bounds define an empty box");
        }
        let [r_lo, r_hi] = spec.radius_range;
        if !(0.0 <= r_lo && r_lo <= r_hi && r_hi.is_finite()) {
            return domain(format!("invalid radius range [{r_lo}, {r_hi}]"));
        }
        let mut rng = seeds::rng(seed, &[STREAM_SPAWN]);
        let kinds = std::iter::repeat_n((ObstacleKind::Static, 0.0), spec.static_count)
            .chain(std::iter::repeat_n(
                (ObstacleKind::StaticUncertain, spec.static_uncertain_sigma),
                spec.static_uncertain_count,
            ))
            .chain(std::iter::repeat_n(
                (ObstacleKind::MovingUncertain, spec.moving_sigma),
                spec.moving_uncertain_count,
            ));

        let mut obstacles = Vec::with_capacity(spec.total());
        for (id, (kind, sigma)) in kinds.enumerate() {
            let radius = r_lo + rng.random::<f64>() * (r_hi - r_lo);
            let mut center = uniform_in(&mut rng, &bounds);
            for _ in 0..SPAWN_RETRIES {
                if protected
                    .iter()
                    .all(|p| p.distance(center) >= radius + spec.endpoint_clearance)
                {
                    break;
                }
                center = uniform_in(&mut rng, &bounds);
            }
            obstacles.push(Obstacle::new(id + 1, kind, center, radius, sigma));
        }
        Ok(Self { obstacles, seed, step_count: 0, current_sigma: spec.current_sigma })
    }

    /// Spawns a field referenced to a segment: the sampling box is the
    /// segment's bounding box inflated by the largest radius.
    pub fn spawn_between(spec: &FieldSpec, start: Vec3, target: Vec3, seed: u64) -> Result<Self> {
        let bounds = Aabb::around_segment(start, target, spec.radius_range[1]);
        Self::spawn(spec, bounds, &[start, target], seed)
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    /// Advances every obstacle by one step of length `dt` seconds.
    pub fn step(&self, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return domain(format!("time step must be positive, got {dt}"));
        }
        let mut rng = seeds::rng(self.seed, &[STREAM_STEP, self.step_count]);
        let mut next = self.clone();
        next.step_count += 1;
        for ob in &mut next.obstacles {
            match ob.kind {
                ObstacleKind::Static => {}
                ObstacleKind::StaticUncertain => {
                    let n: f64 = rng.sample(StandardNormal);
                    ob.radius = (ob.base_radius + ob.sigma * n).max(0.0);
                }
                ObstacleKind::MovingUncertain => {
                    let v_c: f64 = rng.sample(StandardNormal);
                    let u = (self.current_sigma * v_c).abs();
                    ob.center += drift_displacement(&mut rng, ob.sigma, dt);
                    let n: f64 = rng.sample(StandardNormal);
                    let noise = ob.sigma * n;
                    let [a1, a2] = ob.aux;
                    ob.radius = (ob.radius + u * a1).max(0.0);
                    ob.aux = [a1 + noise, a2 + noise + u];
                }
            }
        }
        Ok(next)
    }

    /// Steps `k` times.
    pub fn advanced(&self, k: u64, dt: f64) -> Result<Self> {
        let mut f = self.clone();
        for _ in 0..k {
            f = f.step(dt)?;
        }
        Ok(f)
    }

    /// Minimum signed clearance from `p` to any obstacle surface and the ids
    /// of obstacles strictly containing `p`. Empty fields give `+inf`.
    pub fn point_clearance(&self, p: Vec3) -> (f64, Vec<usize>) {
        let mut min = f64::INFINITY;
        let mut violating = Vec::new();
        for ob in &self.obstacles {
            let c = ob.clearance(p);
            if c < min {
                min = c;
            }
            if c < 0.0 {
                violating.push(ob.id);
            }
        }
        (min, violating)
    }

    pub fn rows(&self, t: f64) -> Vec<ObstacleRow> {
        self.obstacles
            .iter()
            .map(|o| ObstacleRow {
                t,
                id: o.id,
                kind: o.kind,
                x: o.center.x,
                y: o.center.y,
                z: o.center.z,
                r: o.radius,
            })
            .collect()
    }
}

fn uniform_in(rng: &mut Rng, b: &Aabb) -> Vec3 {
    let mut u = || rng.random::<f64>();
    Vec3::new(
        b.lo.x + u() * (b.hi.x - b.lo.x),
        b.lo.y + u() * (b.hi.y - b.lo.y),
        b.lo.z + u() * (b.hi.z - b.lo.z),
    )
}

/// Per-step centre displacement of a moving obstacle. Each axis draws a
/// value uniform on `[origin - sigma, origin + sigma]`; its offset from the
/// origin, with an independent fair sign, scaled by `dt`, is the move.
pub fn drift_displacement(rng: &mut Rng, sigma: f64, dt: f64) -> Vec3 {
    let mut axis = || {
        let offset = sigma * (2.0 * rng.random::<f64>() - 1.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        sign * offset * dt
    };
    let x = axis();
    let y = axis();
    let z = axis();
    Vec3::new(x, y, z)
}

//! Two-layer mission planning for an autonomous underwater vehicle.
//!
//! A global route planner chooses which task-bearing edges of a waypoint
//! graph to fly within a time budget; a local path planner turns each edge
//! into a collision-free B-spline trajectory through a field of static and
//! drifting obstacles. The [`executor`] interleaves the two and re-plans the
//! route whenever a segment overruns its expected time.
//!
//! Both planners share one particle swarm optimizer ([`swarm`]). With the
//! default `parallel` feature the population is evaluated on the rayon
//! thread pool; results are identical to sequential evaluation.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bspline;
pub mod error;
pub mod executor;
pub mod export;
pub mod geom;
pub mod mission;
pub mod obstacles;
pub mod path_planner;
pub mod route_planner;
pub mod scenario;
pub mod seeds;
pub mod swarm;

pub use error::{PlanError, Result};
pub use geom::{Aabb, Vec3};

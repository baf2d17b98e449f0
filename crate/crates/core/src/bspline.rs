//! Clamped uniform B-spline curves over a control polygon.

use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::geom::{Aabb, Vec3};
use crate::seeds::Rng;

/// Cubic by default.
pub const DEFAULT_ORDER: usize = 4;
pub const DEFAULT_SAMPLES: usize = 100;

/// Earth-fixed vehicle pose. Planning only uses the position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl VehicleState {
    pub fn new(position: Vec3, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            z: position.z,
            roll: wrap_angle(roll),
            pitch: wrap_angle(pitch),
            yaw: wrap_angle(yaw),
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlPolygon {
    pub points: Vec<Vec3>,
    pub lower: Vec<Vec3>,
    pub upper: Vec<Vec3>,
}

impl ControlPolygon {
    /// Polygon with endpoints pinned (zero-width bounds) and interior points
    /// bounded by `interior`.
    pub fn new(points: Vec<Vec3>, interior: &[Aabb]) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return domain("a control polygon needs at least two points");
        }
        if interior.len() != n - 2 {
            return domain(format!(
                "expected {} interior bounds, got {}",
                n - 2,
                interior.len()
            ));
        }
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        lower.push(points[0]);
        upper.push(points[0]);
        for b in interior {
            lower.push(b.lo);
            upper.push(b.hi);
        }
        lower.push(points[n - 1]);
        upper.push(points[n - 1]);
        Ok(Self { points, lower, upper })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn within_bounds(&self) -> bool {
        self.points.iter().zip(&self.lower).zip(&self.upper).all(|((p, l), u)| {
            (0..3).all(|a| l.component(a) <= p.component(a) && p.component(a) <= u.component(a))
        })
    }
}

/// Interior points drawn componentwise as `L + rand * (U - L)`; endpoints
/// pinned to `start` and `target`.
pub fn random_control_polygon(
    start: Vec3,
    target: Vec3,
    interior: &[Aabb],
    rng: &mut Rng,
) -> Result<ControlPolygon> {
    let mut points = Vec::with_capacity(interior.len() + 2);
    points.push(start);
    for b in interior {
        if b.is_empty() {
            return domain("empty control-point bounds");
        }
        let mut draw = |lo: f64, hi: f64| lo + rng.random::<f64>() * (hi - lo);
        let x = draw(b.lo.x, b.hi.x);
        let y = draw(b.lo.y, b.hi.y);
        let z = draw(b.lo.z, b.hi.z);
        points.push(Vec3::new(x, y, z));
    }
    points.push(target);
    ControlPolygon::new(points, interior)
}

/// Search box for interior control points: the chord's bounding box widened
/// horizontally by `lateral_factor * chord` on each side, spanning the
/// operating depth vertically.
pub fn corridor(start: Vec3, target: Vec3, lateral_factor: f64, depth: [f64; 2]) -> Aabb {
    let w = lateral_factor * start.distance(target);
    let lo = start.min(target);
    let hi = start.max(target);
    Aabb::new(
        Vec3::new(lo.x - w, lo.y - w, lo.z.min(depth[0])),
        Vec3::new(hi.x + w, hi.y + w, hi.z.max(depth[1])),
    )
}

/// Clamped uniform knot vector for `n` control points of order `k`.
pub fn clamped_knots(n: usize, k: usize) -> Vec<f64> {
    let interior = n - k;
    let mut knots = vec![0.0; k];
    knots.extend((1..=interior).map(|i| i as f64 / (interior + 1) as f64));
    knots.extend(std::iter::repeat_n(1.0, k));
    knots
}

/// Basis weights `B_{i,k}(t_j)` for a fixed `(n, k, m)`, so many control
/// polygons can be sampled with one matrix product each.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisTable {
    n: usize,
    order: usize,
    params: Vec<f64>,
    /// For sample j: first non-zero index and its `order` weights.
    rows: Vec<(usize, Vec<f64>)>,
}

impl BasisTable {
    pub fn new(n: usize, order: usize, m_samples: usize) -> Result<Self> {
        if n < 2 {
            return domain("a spline needs at least two control points");
        }
        if order < 1 || order > n {
            return domain(format!("order {order} must lie in 1..={n}"));
        }
        if m_samples < 2 {
            return domain("need at least two samples");
        }
        let knots = clamped_knots(n, order);
        let params: Vec<f64> = (0..m_samples)
            .map(|j| j as f64 / (m_samples - 1) as f64)
            .collect();
        let rows = params.iter().map(|&t| basis_row(&knots, n, order, t)).collect();
        Ok(Self { n, order, params, rows })
    }

    pub fn control_points(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Dense weight of control point `i` at sample `j`.
    pub fn weight(&self, j: usize, i: usize) -> f64 {
        let (first, w) = &self.rows[j];
        if i >= *first && i < first + w.len() {
            w[i - first]
        } else {
            0.0
        }
    }

    pub fn evaluate(&self, points: &[Vec3]) -> Vec<Vec3> {
        debug_assert_eq!(points.len(), self.n);
        self.rows
            .iter()
            .map(|(first, w)| {
                w.iter()
                    .zip(&points[*first..])
                    .fold(Vec3::ZERO, |acc, (&b, &p)| acc + p * b)
            })
            .collect()
    }
}

/// Non-zero basis functions at `t` via the Cox-de Boor triangle.
fn basis_row(knots: &[f64], n: usize, k: usize, t: f64) -> (usize, Vec<f64>) {
    let p = k - 1;
    // Span s with knots[s] <= t < knots[s+1]; t = 1 falls in the last span.
    let span = if t >= knots[n] {
        n - 1
    } else {
        (p..n).rfind(|&s| knots[s] <= t).unwrap_or(p)
    };
    let mut basis = vec![0.0; k];
    let mut left = vec![0.0; k];
    let mut right = vec![0.0; k];
    basis[0] = 1.0;
    for j in 1..=p {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { basis[r] / denom };
            basis[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        basis[j] = saved;
    }
    (span - p, basis)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub t: f64,
    pub position: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathCurve {
    pub control: ControlPolygon,
    pub order: usize,
    pub samples: Vec<CurveSample>,
    pub arc_length: f64,
}

impl PathCurve {
    pub fn from_table(control: ControlPolygon, table: &BasisTable) -> Self {
        let positions = table.evaluate(&control.points);
        let arc_length = polyline_length(&positions);
        let samples = table
            .params()
            .iter()
            .zip(positions)
            .map(|(&t, position)| CurveSample { t, position })
            .collect();
        Self { control, order: table.order(), samples, arc_length }
    }

    pub fn positions(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.samples.iter().map(|s| s.position)
    }

    /// Cumulative polyline length up to each sample.
    pub fn cumulative_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.samples.len());
        let mut prev = None;
        for p in self.positions() {
            if let Some(q) = prev {
                acc += p.distance(q);
            }
            out.push(acc);
            prev = Some(p);
        }
        out
    }

    /// Poses along the curve with pitch and yaw taken from the local
    /// tangent; roll is zero.
    pub fn states(&self) -> Vec<VehicleState> {
        let pts: Vec<Vec3> = self.positions().collect();
        (0..pts.len())
            .map(|j| {
                let (a, b) = if j + 1 < pts.len() { (pts[j], pts[j + 1]) } else { (pts[j.saturating_sub(1)], pts[j]) };
                let d = b - a;
                let yaw = d.y.atan2(d.x);
                let pitch = (-d.z).atan2((d.x * d.x + d.y * d.y).sqrt());
                VehicleState::new(pts[j], 0.0, pitch, yaw)
            })
            .collect()
    }
}

/// Samples the curve `sum_i P_i B_{i,K}(t)` at `m_samples` evenly spaced
/// parameters on `[0, 1]`.
pub fn sample_spline(control: ControlPolygon, order: usize, m_samples: usize) -> Result<PathCurve> {
    let table = BasisTable::new(control.len(), order, m_samples)?;
    Ok(PathCurve::from_table(control, &table))
}

/// Sum of consecutive Euclidean gaps.
pub fn polyline_length(samples: &[Vec3]) -> f64 {
    samples.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds;
    use proptest::prelude::*;

    fn free_polygon(points: Vec<Vec3>) -> ControlPolygon {
        let n = points.len();
        let b = Aabb::new(Vec3::new(-1e9, -1e9, -1e9), Vec3::new(1e9, 1e9, 1e9));
        ControlPolygon::new(points, &vec![b; n - 2]).unwrap()
    }

    #[test]
    fn polyline_examples() {
        assert_eq!(polyline_length(&[Vec3::ZERO, Vec3::new(3.0, 4.0, 0.0)]), 5.0);
        assert_eq!(polyline_length(&[Vec3::new(1.0, 1.0, 1.0); 5]), 0.0);
        let square = [
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::ZERO,
        ];
        assert_eq!(polyline_length(&square), 4.0);
    }

    #[test]
    fn degenerate_polygon_collapses() {
        let p = Vec3::new(4.0, -2.0, 7.0);
        let c = sample_spline(free_polygon(vec![p; 6]), 4, 50).unwrap();
        assert!(c.positions().all(|q| q.distance(p) < 1e-12));
        assert!(c.arc_length < 1e-9);
    }

    #[test]
    fn collinear_polygon_has_chord_length() {
        let a = Vec3::new(-100.0, 20.0, 5.0);
        let b = Vec3::new(900.0, -480.0, 60.0);
        let pts = (0..6).map(|i| a + (b - a) * (i as f64 / 5.0)).collect();
        let c = sample_spline(free_polygon(pts), 4, 100).unwrap();
        let d = a.distance(b);
        assert!((c.arc_length - d).abs() <= 1e-6 * d);
    }

    #[test]
    fn rejects_bad_parameters() {
        let pts = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        assert!(sample_spline(free_polygon(pts.clone()), 4, 10).is_err());
        assert!(sample_spline(free_polygon(pts.clone()), 3, 1).is_err());
        assert!(sample_spline(free_polygon(pts), 3, 2).is_ok());
    }

    #[test]
    fn partition_of_unity() {
        for (n, k) in [(2, 2), (6, 4), (6, 6), (9, 3), (6, 1)] {
            let t = BasisTable::new(n, k, 37).unwrap();
            for j in 0..37 {
                let s: f64 = (0..n).map(|i| t.weight(j, i)).sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} k={k} j={j} sum={s}");
                assert!((0..n).all(|i| t.weight(j, i) >= -1e-15));
            }
        }
    }

    #[test]
    fn knot_vector_shape() {
        assert_eq!(clamped_knots(6, 4), vec![0.0, 0.0, 0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(clamped_knots(4, 4), vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn random_polygon_respects_bounds() {
        let b = Aabb::new(Vec3::new(0.0, -5.0, 10.0), Vec3::new(2.0, 5.0, 10.0));
        let mut rng = seeds::rng(4, &[]);
        let poly = random_control_polygon(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0), &[b; 4], &mut rng).unwrap();
        assert!(poly.within_bounds());
        assert_eq!(poly.points[0], Vec3::ZERO);
        assert_eq!(poly.points[5], Vec3::new(1.0, 1.0, 1.0));
        assert!(poly.points[1..5].iter().all(|p| p.z == 10.0));

        let fixed = Aabb::new(Vec3::new(1.0, 2.0, 3.0), Vec3::new(1.0, 2.0, 3.0));
        let p1 = random_control_polygon(Vec3::ZERO, Vec3::ZERO, &[fixed; 2], &mut rng).unwrap();
        let p2 = random_control_polygon(Vec3::ZERO, Vec3::ZERO, &[fixed; 2], &mut seeds::rng(99, &[])).unwrap();
        assert_eq!(p1, p2);

        let s1 = random_control_polygon(Vec3::ZERO, Vec3::ZERO, &[b; 4], &mut seeds::rng(8, &[])).unwrap();
        let s2 = random_control_polygon(Vec3::ZERO, Vec3::ZERO, &[b; 4], &mut seeds::rng(8, &[])).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn corridor_contains_endpoints_and_depth() {
        let a = Vec3::new(0.0, 0.0, 50.0);
        let b = Vec3::new(1000.0, 0.0, 50.0);
        let c = corridor(a, b, 0.5, [0.0, 100.0]);
        assert!(c.contains(a) && c.contains(b));
        assert_eq!(c.lo, Vec3::new(-500.0, -500.0, 0.0));
        assert_eq!(c.hi, Vec3::new(1500.0, 500.0, 100.0));
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        let s = VehicleState::new(Vec3::ZERO, 7.0, -7.0, 0.5);
        for a in [s.roll, s.pitch, s.yaw] {
            assert!(a > -PI && a <= PI);
        }
    }

    fn arb_points(n: usize) -> impl Strategy<Value = Vec<Vec3>> {
        prop::collection::vec(prop::array::uniform3(-1000.0..1000.0f64), n)
            .prop_map(|v| v.into_iter().map(Vec3::from).collect())
    }

    proptest! {
        #[test]
        fn endpoints_interpolated(pts in arb_points(6), k in 1usize..=6) {
            let c = sample_spline(free_polygon(pts.clone()), k, 20).unwrap();
            prop_assert_eq!(c.samples[0].position, pts[0]);
            prop_assert_eq!(c.samples[19].position, pts[5]);
            prop_assert!(c.arc_length + 1e-9 >= pts[0].distance(pts[5]));
            prop_assert!(c.samples.windows(2).all(|w| w[0].t < w[1].t));
        }

        #[test]
        fn translation_equivariant(pts in arb_points(6), v in prop::array::uniform3(-500.0..500.0f64)) {
            let v = Vec3::from(v);
            let a = sample_spline(free_polygon(pts.clone()), 4, 30).unwrap();
            let b = sample_spline(free_polygon(pts.iter().map(|&p| p + v).collect()), 4, 30).unwrap();
            for (sa, sb) in a.samples.iter().zip(&b.samples) {
                prop_assert!((sa.position + v).distance(sb.position) < 1e-9);
            }
        }

        // Nested grids (m and 2m - 1 samples share every parameter of the
        // coarse grid), so the triangle inequality makes refinement monotone.
        #[test]
        fn refinement_is_monotone(pts in arb_points(6), m in 2usize..200) {
            let coarse = sample_spline(free_polygon(pts.clone()), 4, m).unwrap();
            let fine = sample_spline(free_polygon(pts), 4, 2 * m - 1).unwrap();
            prop_assert!(fine.arc_length >= coarse.arc_length - 1e-9);
        }

        #[test]
        fn length_converges(pts in arb_points(6)) {
            let a = sample_spline(free_polygon(pts.clone()), 4, 512).unwrap().arc_length;
            let b = sample_spline(free_polygon(pts), 4, 1024).unwrap().arc_length;
            prop_assert!((b - a).abs() <= 1e-4 * b.max(1e-9));
        }
    }
}

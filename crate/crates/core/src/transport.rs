//! Moving a small ball along a path while fixing an obstacle set.
//!
//! The path is covered by a chain of overlapping balls that avoid the
//! obstacles; inside each ball one local translation carries the current hop
//! point to the next. Every translation is supported inside its ball, so the
//! obstacles are fixed pointwise.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::flow::{make_translation_with, DiffeoPipeline, FlowOptions};
use crate::geometry::{Ball, Point, PointCloud};

/// Spacing between consecutive chain centers, as a fraction of the radius.
const OVERLAP: f64 = 0.9;
/// Radius of the delivered neighbourhood, as a fraction of the chain radius.
const DELTA1_FRACTION: f64 = 0.05;
/// Directions tried per detour radius by [`plan_path`].
const DETOUR_DIRECTIONS: usize = 16;

/// Polyline through the listed waypoints. A single waypoint is the constant
/// path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Path {
    waypoints: Vec<Point>,
}

impl TryFrom<Vec<Point>> for Path {
    type Error = Error;

    fn try_from(waypoints: Vec<Point>) -> Result<Self> {
        Path::new(waypoints)
    }
}

impl From<Path> for Vec<Point> {
    fn from(p: Path) -> Self {
        p.waypoints
    }
}

impl Path {
    pub fn new(waypoints: Vec<Point>) -> Result<Self> {
        let first = waypoints
            .first()
            .ok_or_else(|| Error::InvalidParameter("path needs a waypoint".into()))?;
        let n = first.dim();
        for w in &waypoints {
            check_dim(n, w.dim())?;
        }
        if waypoints.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(
                "consecutive waypoints must be distinct".into(),
            ));
        }
        Ok(Path { waypoints })
    }

    pub fn segment(p: Point, q: Point) -> Result<Self> {
        if p == q {
            Path::new(vec![p])
        } else {
            Path::new(vec![p, q])
        }
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn dim(&self) -> usize {
        self.waypoints[0].dim()
    }

    pub fn start(&self) -> &Point {
        &self.waypoints[0]
    }

    pub fn end(&self) -> &Point {
        self.waypoints.last().expect("non-empty")
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    /// Point at arc length `s`, clamped to the ends.
    pub fn at_arc_length(&self, s: f64) -> Point {
        let mut left = s.max(0.0);
        for w in self.waypoints.windows(2) {
            let len = w[0].dist(&w[1]);
            if left <= len {
                return w[0].add_scaled(&w[1].sub(&w[0]), left / len);
            }
            left -= len;
        }
        self.end().clone()
    }

    /// Exact distance from the polyline to a point.
    pub fn dist_to_point(&self, x: &Point) -> f64 {
        if self.waypoints.len() == 1 {
            return self.waypoints[0].dist(x);
        }
        self.waypoints
            .windows(2)
            .map(|w| segment_dist(&w[0], &w[1], x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from the polyline to a cloud, net of the cloud's guard.
    pub fn dist_to_cloud(&self, k: &PointCloud) -> Result<f64> {
        if k.is_empty() {
            return Ok(f64::INFINITY);
        }
        check_dim(self.dim(), k.dim())?;
        let d = k
            .points()
            .iter()
            .map(|x| self.dist_to_point(x))
            .fold(f64::INFINITY, f64::min);
        Ok(d - k.guard())
    }
}

fn segment_dist(a: &Point, b: &Point, x: &Point) -> f64 {
    let ab = b.sub(a);
    let t = (x.sub(a).dot(&ab) / ab.norm_sq()).clamp(0.0, 1.0);
    a.add_scaled(&ab, t).dist(x)
}

/// Chain of overlapping balls along a path, with one hop per ball.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub balls: Vec<Ball>,
    pub hops: Vec<(Point, Point)>,
    pub rho: f64,
    pub delta1: f64,
}

/// Half the distance from the path to `k`.
///
/// Distances are exact point-to-segment distances, which is the limit of
/// any densification of the polyline. With no obstacles the radius is the
/// path length (1 for a constant path).
pub fn safety_radius(path: &Path, k: &PointCloud) -> Result<f64> {
    safety_radius_among(path, std::slice::from_ref(k))
}

/// [`safety_radius`] for an obstacle set given as several clouds, each with
/// its own guard radius.
pub fn safety_radius_among(path: &Path, obstacles: &[PointCloud]) -> Result<f64> {
    let d = dist_to_all(path, obstacles)?;
    if d == f64::INFINITY {
        let len = path.length();
        return Ok(if len > 0.0 { len } else { 1.0 });
    }
    if !(d > 0.0) {
        return Err(Error::PathBlocked(d / 2.0));
    }
    Ok(d / 2.0)
}

fn dist_to_all(path: &Path, obstacles: &[PointCloud]) -> Result<f64> {
    let mut d = f64::INFINITY;
    for k in obstacles {
        d = d.min(path.dist_to_cloud(k)?);
    }
    Ok(d)
}

/// Greedy arc-length cover of `path` by balls of radius `rho`.
///
/// Centers are spaced `0.9·rho` apart in arc length, starting at the path's
/// start; the walk stops at the first center within `0.9·rho` of the end.
/// Hop points sit at arc-length midpoints between consecutive centers.
pub fn cover_path(path: &Path, rho: f64) -> Result<TransportPlan> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho}")));
    }
    let p = path.start().clone();
    let q = path.end().clone();
    let step = OVERLAP * rho;
    let total = path.length();
    let mut centers_s = vec![0.0];
    let mut last = p.clone();
    while !(last.dist(&q) < step) {
        let s = centers_s.len() as f64 * step;
        centers_s.push(s);
        last = path.at_arc_length(s);
        if s >= total {
            break;
        }
    }
    let mut points = vec![p];
    for pair in centers_s.windows(2) {
        points.push(path.at_arc_length(0.5 * (pair[0] + pair[1])));
    }
    points.push(q);
    let balls = centers_s
        .iter()
        .map(|&s| Ball::new(path.at_arc_length(s), rho))
        .collect::<Result<Vec<_>>>()?;
    let hops = if total == 0.0 {
        Vec::new()
    } else {
        points.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    };
    Ok(TransportPlan {
        balls,
        hops,
        rho,
        delta1: DELTA1_FRACTION * rho,
    })
}

/// Pipeline delivering `B(p, δ₁)` into `B(q, δ₂)` along `path` and fixing
/// every point of `k`.
#[derive(Clone, Debug)]
pub struct Transport {
    pub delta1: f64,
    pub pipeline: DiffeoPipeline,
    pub plan: TransportPlan,
}

pub fn make_transport(
    p: &Point,
    q: &Point,
    path: &Path,
    k: &PointCloud,
    delta2: f64,
) -> Result<Transport> {
    make_transport_among(
        p,
        q,
        path,
        std::slice::from_ref(k),
        delta2,
        f64::INFINITY,
        &FlowOptions::default(),
    )
}

/// [`make_transport`] avoiding several obstacle clouds, with the chain
/// radius capped at `max_rho`.
pub fn make_transport_among(
    p: &Point,
    q: &Point,
    path: &Path,
    obstacles: &[PointCloud],
    delta2: f64,
    max_rho: f64,
    opts: &FlowOptions,
) -> Result<Transport> {
    check_dim(path.dim(), p.dim())?;
    check_dim(path.dim(), q.dim())?;
    if path.dim() < 2 {
        return Err(Error::InvalidParameter(
            "transport needs dimension at least 2".into(),
        ));
    }
    if path.start() != p || path.end() != q {
        return Err(Error::InvalidParameter(
            "path must start at p and end at q".into(),
        ));
    }
    if !(delta2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "target radius must be positive, got {delta2}"
        )));
    }
    if !(max_rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius cap must be positive, got {max_rho}"
        )));
    }
    let rho = safety_radius_among(path, obstacles)?.min(max_rho);
    let mut plan = cover_path(path, rho)?;
    plan.delta1 = plan.delta1.min(delta2);
    let mut pipeline = DiffeoPipeline::new();
    for (ball, (from, to)) in plan.balls.iter().zip(&plan.hops) {
        pipeline.push(make_translation_with(
            ball.center.clone(),
            ball.radius,
            from.clone(),
            to.clone(),
            opts,
        )?)?;
    }
    Ok(Transport {
        delta1: plan.delta1,
        pipeline,
        plan,
    })
}

/// A polyline from `p` to `q` keeping distance greater than `clearance`
/// from the obstacles: the straight segment if it is clear, otherwise the
/// first clear one-bend detour `p → m + ρ_d·u → q`, with `m` the midpoint,
/// `ρ_d` doubling from `2·clearance` and `u` one of 16 directions in a plane
/// orthogonal to `q − p`.
pub fn plan_path(p: &Point, q: &Point, obstacles: &PointCloud, clearance: f64) -> Result<Path> {
    plan_path_among(p, q, std::slice::from_ref(obstacles), clearance)
}

/// [`plan_path`] avoiding several obstacle clouds.
pub fn plan_path_among(
    p: &Point,
    q: &Point,
    obstacles: &[PointCloud],
    clearance: f64,
) -> Result<Path> {
    check_dim(p.dim(), q.dim())?;
    let n = p.dim();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "path planning needs dimension at least 2".into(),
        ));
    }
    if !(clearance > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "clearance must be positive, got {clearance}"
        )));
    }
    let clear = |path: &Path| -> Result<bool> { Ok(dist_to_all(path, obstacles)? > clearance) };
    for end in [p, q] {
        if !clear(&Path::new(vec![end.clone()])?)? {
            return Err(Error::PlanningFailed(format!(
                "endpoint {:?} is within {clearance} of an obstacle",
                end.coords()
            )));
        }
    }
    let straight = Path::segment(p.clone(), q.clone())?;
    if clear(&straight)? {
        return Ok(straight);
    }

    let mid = p.add(q).scale(0.5);
    let dirs = detour_directions(&q.sub(p));
    let reach = obstacles
        .iter()
        .filter(|k| !k.is_empty())
        .map(|k| k.max_dist_from(&mid) + k.guard())
        .fold(0.0, f64::max)
        + p.dist(q)
        + clearance;
    let mut radius = 2.0 * clearance;
    loop {
        for u in &dirs {
            let bend = mid.add_scaled(u, radius);
            let path = Path::new(vec![p.clone(), bend, q.clone()])?;
            if clear(&path)? {
                return Ok(path);
            }
        }
        if radius > 4.0 * reach {
            break;
        }
        radius *= 2.0;
    }
    Err(Error::PlanningFailed(
        "no straight or one-bend path clears the obstacles".into(),
    ))
}

/// Unit directions `cos θ e₁ + sin θ e₂` for 16 evenly spaced angles, where
/// `e₁, e₂` are the first two axes' components orthogonal to `v`. In the
/// plane only `±e₁` remain.
fn detour_directions(v: &Point) -> Vec<Point> {
    let n = v.dim();
    let mut basis: Vec<Point> = Vec::new();
    let mut spanned = Vec::new();
    if v.norm() > 0.0 {
        spanned.push(v.scale(1.0 / v.norm()));
    }
    for i in 0..n {
        if basis.len() == 2 {
            break;
        }
        let mut e = Point::axis(n, i);
        for b in &spanned {
            e = e.add_scaled(b, -e.dot(b));
        }
        let len = e.norm();
        if len > 1e-9 {
            let e = e.scale(1.0 / len);
            spanned.push(e.clone());
            basis.push(e);
        }
    }
    let mut dirs: Vec<Point> = Vec::new();
    for k in 0..DETOUR_DIRECTIONS {
        let th = 2.0 * std::f64::consts::PI * k as f64 / DETOUR_DIRECTIONS as f64;
        let mut u = basis[0].scale(th.cos());
        if let Some(e2) = basis.get(1) {
            u = u.add_scaled(e2, th.sin());
        } else if th.cos().abs() < 1e-12 {
            continue;
        }
        let len = u.norm();
        let u = u.scale(1.0 / len);
        if !dirs.iter().any(|d| d.dist(&u) < 1e-9) {
            dirs.push(u);
        }
    }
    dirs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::sample_ball;
    use std::f64::consts::PI;

    fn p2(x: f64, y: f64) -> Point {
        Point::from([x, y])
    }

    fn semicircle(radius: f64, n: usize) -> Path {
        // Upper half circle from (r, 0) to (−r, 0).
        let pts = (0..n)
            .map(|i| {
                let a = PI * i as f64 / (n - 1) as f64;
                match i {
                    0 => p2(radius, 0.0),
                    _ if i == n - 1 => p2(-radius, 0.0),
                    _ => p2(radius * a.cos(), radius * a.sin()),
                }
            })
            .collect();
        Path::new(pts).unwrap()
    }

    fn single(x: Point) -> PointCloud {
        PointCloud::new(vec![x], 0.0).unwrap()
    }

    #[test]
    fn path_validation() {
        assert!(Path::new(vec![]).is_err());
        assert!(Path::new(vec![p2(0.0, 0.0), p2(0.0, 0.0)]).is_err());
        assert!(Path::new(vec![p2(0.0, 0.0), Point::origin(3)]).is_err());
        let p = Path::new(vec![p2(0.0, 0.0), p2(3.0, 0.0), p2(3.0, 4.0)]).unwrap();
        assert_eq!(p.length(), 7.0);
        assert_eq!(p.at_arc_length(5.0), p2(3.0, 2.0));
        assert_eq!(p.at_arc_length(99.0), p2(3.0, 4.0));
    }

    #[test]
    fn path_json_is_waypoint_array() {
        let p = Path::new(vec![p2(0.0, 0.0), p2(1.0, 2.0)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0.0,0.0],[1.0,2.0]]");
        assert_eq!(serde_json::from_str::<Path>(&s).unwrap(), p);
        assert!(serde_json::from_str::<Path>("[[0.0,0.0],[0.0,0.0]]").is_err());
    }

    #[test]
    fn segment_distance_cases() {
        let (a, b) = (p2(0.0, 0.0), p2(2.0, 0.0));
        assert_eq!(segment_dist(&a, &b, &p2(1.0, 3.0)), 3.0);
        assert_eq!(segment_dist(&a, &b, &p2(5.0, 4.0)), 5.0);
        assert_eq!(segment_dist(&a, &b, &p2(-3.0, -4.0)), 5.0);
    }

    #[test]
    fn safety_radius_examples() {
        let path = Path::segment(p2(2.0, 0.0), p2(2.0, 2.0)).unwrap();
        let k = single(p2(0.0, 0.0));
        assert!((safety_radius(&path, &k).unwrap() - 1.0).abs() < 1e-12);

        let far = Path::segment(p2(10.0, 0.0), p2(10.0, 5.0)).unwrap();
        assert!((safety_radius(&far, &k).unwrap() - 5.0).abs() < 1e-12);

        let through = Path::segment(p2(-1.0, 0.0), p2(1.0, 0.0)).unwrap();
        assert!(matches!(
            safety_radius(&through, &k),
            Err(Error::PathBlocked(_))
        ));
    }

    #[test]
    fn safety_radius_respects_guard() {
        let path = Path::segment(p2(3.0, -1.0), p2(3.0, 1.0)).unwrap();
        let k = PointCloud::new(vec![p2(0.0, 0.0)], 1.0).unwrap();
        assert!((safety_radius(&path, &k).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cover_unit_segment() {
        let path = Path::segment(p2(0.0, 0.0), p2(1.0, 0.0)).unwrap();
        let plan = cover_path(&path, 1.0).unwrap();
        assert_eq!(plan.balls.len(), 2);
        assert_eq!(plan.hops.len(), 2);
        assert!((plan.hops[0].1.dist(&p2(0.45, 0.0))) < 1e-12);
        assert!((plan.delta1 - 0.05).abs() < 1e-15);
    }

    #[test]
    fn cover_constant_path() {
        let path = Path::segment(p2(1.0, 1.0), p2(1.0, 1.0)).unwrap();
        let plan = cover_path(&path, 0.5).unwrap();
        assert_eq!(plan.balls.len(), 1);
        assert!(plan.hops.is_empty());
    }

    #[test]
    fn cover_semicircle_count() {
        // Arc length 2π, spacing 0.45: centers at 0, 0.45, …, 5.85; the
        // remaining 0.43 is under one spacing.
        let plan = cover_path(&semicircle(2.0, 2001), 0.5).unwrap();
        assert_eq!(plan.balls.len(), 14);
    }

    #[test]
    fn plan_invariants() {
        let path = semicircle(2.0, 16);
        let plan = cover_path(&path, 0.37).unwrap();
        assert_eq!(plan.hops.first().unwrap().0, *path.start());
        assert_eq!(plan.hops.last().unwrap().1, *path.end());
        for (b, (from, to)) in plan.balls.iter().zip(&plan.hops) {
            assert!(b.contains(from) && b.contains(to));
        }
        for w in plan.balls.windows(2) {
            assert!(w[0].center.dist(&w[1].center) < w[0].radius + w[1].radius);
        }
        for w in plan.hops.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn transport_around_disk() {
        let disk = Ball::new(p2(0.0, 0.0), 1.0).unwrap();
        let k = sample_ball(&disk, 300, 11, false).unwrap();
        let (p, q) = (p2(2.0, 0.0), p2(-2.0, 0.0));
        let path = semicircle(2.0, 16);
        let t = make_transport(&p, &q, &path, &k, 0.2).unwrap();
        assert!(t.delta1 <= 0.2 && t.delta1 > 0.0);

        let image = t.pipeline.apply(&k).unwrap();
        assert_eq!(image, k);

        let src = sample_ball(&Ball::new(p.clone(), t.delta1).unwrap(), 200, 12, false).unwrap();
        let out = t.pipeline.apply(&src).unwrap();
        let target = Ball::new(q.clone(), 0.2).unwrap();
        assert!(crate::geometry::ball_contains_cloud(&target, &out, 0.0).unwrap());

        // Rigid on the small ball.
        let d = q.sub(&p);
        for (x, y) in src.points().iter().zip(out.points()).take(20) {
            assert!(y.dist(&x.add(&d)) <= 1e-5);
        }
        assert!(t.pipeline.apply_point(&p).unwrap().dist(&q) <= 1e-6);
    }

    #[test]
    fn transport_supports_avoid_obstacles() {
        let k = sample_ball(&Ball::new(p2(0.0, 0.0), 1.0).unwrap(), 100, 13, false).unwrap();
        let path = semicircle(2.0, 16);
        let t = make_transport(path.start(), path.end(), &path, &k, 0.2).unwrap();
        for s in t.pipeline.stages() {
            let b = s.field().support_bound();
            for x in k.points() {
                assert!(x.dist(&b.center) > b.radius);
            }
        }
    }

    #[test]
    fn transport_without_obstacles() {
        let (p, q) = (p2(0.0, 0.0), p2(3.0, 4.0));
        let path = Path::segment(p.clone(), q.clone()).unwrap();
        let t = make_transport(&p, &q, &path, &PointCloud::empty(2), 0.1).unwrap();
        assert!(t.pipeline.apply_point(&p).unwrap().dist(&q) < 1e-6);

        let huge = make_transport(&p, &q, &path, &PointCloud::empty(2), 100.0).unwrap();
        assert!((huge.delta1 - 0.05 * huge.plan.rho).abs() < 1e-15);
    }

    #[test]
    fn transport_rejects_bad_inputs() {
        let (p1, q1) = (Point::new(vec![0.0]).unwrap(), Point::new(vec![1.0]).unwrap());
        let path1 = Path::segment(p1.clone(), q1.clone()).unwrap();
        assert!(make_transport(&p1, &q1, &path1, &PointCloud::empty(1), 0.1).is_err());

        let path = Path::segment(p2(0.0, 0.0), p2(1.0, 0.0)).unwrap();
        assert!(make_transport(&p2(0.0, 0.0), &p2(2.0, 0.0), &path, &PointCloud::empty(2), 0.1)
            .is_err());
        let k = single(p2(0.5, 0.0));
        assert!(make_transport(&p2(0.0, 0.0), &p2(1.0, 0.0), &path, &k, 0.1).is_err());
    }

    #[test]
    fn plan_path_straight_when_clear() {
        let path = plan_path(&p2(0.0, 0.0), &p2(1.0, 0.0), &PointCloud::empty(2), 0.3).unwrap();
        assert_eq!(path.waypoints().len(), 2);
    }

    #[test]
    fn plan_path_detours_around_disk() {
        let disk = PointCloud::new(vec![p2(0.0, 0.0)], 1.0).unwrap();
        let path = plan_path(&p2(-2.0, 0.0), &p2(2.0, 0.0), &disk, 0.3).unwrap();
        let bend = &path.waypoints()[1];
        assert_eq!(bend.coords()[0], 0.0);
        // Doubling from 0.6: 1.2 leaves 0.03 of clearance, 2.4 leaves 0.54.
        assert!((bend.coords()[1].abs() - 2.4).abs() < 1e-12);
        assert!(path.dist_to_cloud(&disk).unwrap() > 0.3);
    }

    #[test]
    fn plan_path_in_three_dimensions() {
        let obst = PointCloud::new(vec![Point::origin(3)], 1.0).unwrap();
        let p = Point::from([-2.0, 0.0, 0.0]);
        let q = Point::from([2.0, 0.0, 0.0]);
        let path = plan_path(&p, &q, &obst, 0.3).unwrap();
        assert!(path.dist_to_cloud(&obst).unwrap() > 0.3);
        let dirs = detour_directions(&q.sub(&p));
        assert_eq!(dirs.len(), 16);
        for u in &dirs {
            assert!(u.dot(&q.sub(&p)).abs() < 1e-12);
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plan_path_rejects_blocked_endpoint() {
        let disk = PointCloud::new(vec![p2(0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(
            plan_path(&p2(1.1, 0.0), &p2(3.0, 0.0), &disk, 0.3),
            Err(Error::PlanningFailed(_))
        ));
        let one = Point::new(vec![0.0]).unwrap();
        assert!(plan_path(&one, &one, &PointCloud::empty(1), 0.3).is_err());
    }
}
